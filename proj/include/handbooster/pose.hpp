// SPDX-License-Identifier: Apache-2.0
//
// Hand/object pose types, the pose-vector embedding used for similarity,
// and the orientation operations that manufacture novel views.
// All lengths are millimeters.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "handbooster/quaternion.hpp"
#include "handbooster/rng.hpp"

namespace handbooster {

/// Throws InvalidInput if R deviates from a proper rotation by more than tol
/// (max-abs entry of R^T R - I, and |det R - 1|).
void check_rotation(const Eigen::Matrix3d& R, double tol);

/// Geodesic angle of a rotation matrix in degrees, [0, 180].
/// Throws InvalidInput when R is not a rotation within 1e-4.
double rotation_angle(const Eigen::Matrix3d& R);

/// Rigid object pose. The quaternion is derived from the matrix and kept in
/// sync by construction.
class ObjectPose {
public:
    ObjectPose() = default;
    /// Throws InvalidInput if R is not a rotation within 1e-6.
    ObjectPose(const Eigen::Matrix3d& R, const Eigen::Vector3d& t_mm);
    ObjectPose(const Quaternion& q, const Eigen::Vector3d& t_mm);

    const Eigen::Matrix3d& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }
    const Quaternion& rotation_quat() const { return quat_; }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }

private:
    Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
    Quaternion quat_;
};

struct HandPose {
    Quaternion global_orient;
    /// World position of the rig origin (the root joint for rigs rooted at 0).
    Eigen::Vector3d root_translation = Eigen::Vector3d::Zero();
    std::vector<Quaternion> joint_rots;

    /// Rest pose with `joints` identity joint rotations.
    static HandPose neutral(std::size_t joints);
};

enum class Source { real, synthetic };

const char* to_string(Source s);
Source source_from_string(const std::string& s);

struct GraspRecord {
    HandPose hand;
    std::string object_id;
    ObjectPose object;
    Source source = Source::real;
    std::optional<bool> grasping;
    std::string sequence_id;
    std::int64_t frame_index = 0;

    /// "<sequence_id>:<frame_index>"
    std::string id() const;
};

/// Flattened embedding [joint quats..., object quat, object translation].
struct PoseVector {
    Eigen::VectorXd values;

    Eigen::Index size() const { return values.size(); }
};

/// 4*J + 4 + 3
constexpr std::size_t pose_vector_size(std::size_t joints) { return 4 * joints + 7; }

/// Removes the global hand transform: the hand ends at identity orientation
/// and zero translation, the object is re-expressed in the hand frame.
GraspRecord canonicalize(const GraspRecord& g);

bool is_canonical(const GraspRecord& g);

/// Throws ContractViolation on an uncanonicalized grasp.
PoseVector build_pose_vector(const GraspRecord& g);

/// Throws InvalidInput on zero-norm input or dimension mismatch.
double cosine_similarity(const PoseVector& a, const PoseVector& b);

/// 1 - cosine_similarity, in [0, 2].
double pose_distance(const PoseVector& a, const PoseVector& b);

/// q composed (on the right) with a rotation about a uniformly distributed
/// axis by a uniform angle in [0, max_angle_deg].
/// Throws ConfigError unless max_angle_deg is in (0, 180].
Quaternion perturb_orientation(const Quaternion& q, double max_angle_deg, Rng& rng);

/// Replaces the hand's global orientation by `reference`, rotating the
/// object about the hand origin so the hand-relative configuration holds.
GraspRecord align_orientation(const GraspRecord& g, const Quaternion& reference);

}  // namespace handbooster
