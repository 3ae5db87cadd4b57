// SPDX-License-Identifier: Apache-2.0

#include "handbooster/pose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "handbooster/errors.hpp"

namespace handbooster {

namespace {
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}

void check_rotation(const Eigen::Matrix3d& R, double tol) {
    if (!R.allFinite()) throw InvalidInput("rotation matrix has non-finite entries");
    const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    const double det = R.determinant();
    if (ortho > tol || std::abs(det - 1.0) > tol) {
        throw InvalidInput("matrix is not a proper rotation (orthonormality error " + std::to_string(ortho) +
                           ", det " + std::to_string(det) + ")");
    }
}

double rotation_angle(const Eigen::Matrix3d& R) {
    check_rotation(R, 1e-4);
    // atan2 of the skew part against the trace stays accurate near 0 and
    // 180 degrees, where acos of the trace alone loses half the digits.
    const Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    return std::atan2(0.5 * w.norm(), 0.5 * (R.trace() - 1.0)) * kRadToDeg;
}

ObjectPose::ObjectPose(const Eigen::Matrix3d& R, const Eigen::Vector3d& t_mm) : rotation_(R), translation_(t_mm) {
    check_rotation(R, 1e-6);
    if (!t_mm.allFinite()) throw InvalidInput("object translation has non-finite entries");
    quat_ = Quaternion::from_eigen(Eigen::Quaterniond(R));
}

ObjectPose::ObjectPose(const Quaternion& q, const Eigen::Vector3d& t_mm)
    : rotation_(q.to_matrix()), translation_(t_mm), quat_(q) {
    if (!t_mm.allFinite()) throw InvalidInput("object translation has non-finite entries");
}

HandPose HandPose::neutral(std::size_t joints) {
    HandPose p;
    p.joint_rots.assign(joints, Quaternion::identity());
    return p;
}

const char* to_string(Source s) { return s == Source::real ? "real" : "synthetic"; }

Source source_from_string(const std::string& s) {
    if (s == "real") return Source::real;
    if (s == "synthetic") return Source::synthetic;
    throw InvalidInput("unknown record source '" + s + "'");
}

std::string GraspRecord::id() const { return sequence_id + ":" + std::to_string(frame_index); }

GraspRecord canonicalize(const GraspRecord& g) {
    GraspRecord out = g;
    const Quaternion inv = g.hand.global_orient.inverse();
    out.object = ObjectPose(inv * g.object.rotation_quat(), inv.rotate(g.object.translation() - g.hand.root_translation));
    out.hand.global_orient = Quaternion::identity();
    out.hand.root_translation = Eigen::Vector3d::Zero();
    return out;
}

bool is_canonical(const GraspRecord& g) {
    const auto& q = g.hand.global_orient;
    return q.w() == 1.0 && q.x() == 0.0 && q.y() == 0.0 && q.z() == 0.0 && g.hand.root_translation.isZero(0.0);
}

PoseVector build_pose_vector(const GraspRecord& g) {
    if (!is_canonical(g)) {
        throw ContractViolation("build_pose_vector requires a canonicalized grasp (record " + g.id() + ")");
    }
    const std::size_t J = g.hand.joint_rots.size();
    PoseVector v;
    v.values.resize(static_cast<Eigen::Index>(pose_vector_size(J)));
    Eigen::Index k = 0;
    auto put = [&](const Quaternion& q) {
        for (double c : q.sign_normalized().coeffs()) v.values[k++] = c;
    };
    for (const auto& q : g.hand.joint_rots) put(q);
    put(g.object.rotation_quat());
    for (int i = 0; i < 3; ++i) v.values[k++] = g.object.translation()[i];
    if (!v.values.allFinite()) throw InvalidInput("pose vector has non-finite entries (record " + g.id() + ")");
    return v;
}

double cosine_similarity(const PoseVector& a, const PoseVector& b) {
    if (a.size() != b.size()) throw InvalidInput("pose vectors differ in dimension");
    const double na = a.values.norm();
    const double nb = b.values.norm();
    if (na == 0.0 || nb == 0.0) throw InvalidInput("cosine similarity of a zero-norm vector");
    return std::clamp(a.values.dot(b.values) / (na * nb), -1.0, 1.0);
}

double pose_distance(const PoseVector& a, const PoseVector& b) { return 1.0 - cosine_similarity(a, b); }

Quaternion perturb_orientation(const Quaternion& q, double max_angle_deg, Rng& rng) {
    if (!(max_angle_deg > 0.0 && max_angle_deg <= 180.0)) {
        throw ConfigError("perturbation angle must be in (0, 180] degrees, got " + std::to_string(max_angle_deg));
    }
    const double z = uniform(rng, -1.0, 1.0);
    const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Eigen::Vector3d axis(r * std::cos(phi), r * std::sin(phi), z);
    const double angle = uniform(rng, 0.0, max_angle_deg) / kRadToDeg;
    return q * Quaternion::from_axis_angle(axis, angle);
}

GraspRecord align_orientation(const GraspRecord& g, const Quaternion& reference) {
    GraspRecord out = g;
    // Object rides along with the hand: O' = H_new * H_old^-1 * O, where
    // both hand transforms share the same root translation.
    const Quaternion delta = reference * g.hand.global_orient.inverse();
    const Eigen::Vector3d& t = g.hand.root_translation;
    out.object = ObjectPose(delta * g.object.rotation_quat(), delta.rotate(g.object.translation() - t) + t);
    out.hand.global_orient = reference;
    return out;
}

}  // namespace handbooster
