// SPDX-License-Identifier: Apache-2.0

#include "handbooster/quaternion.hpp"

#include <cmath>

#include "handbooster/errors.hpp"
#include "handbooster/pose.hpp"

namespace handbooster {

Quaternion::Quaternion(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!std::isfinite(n) || n == 0.0) {
        throw InvalidInput("quaternion has zero or non-finite norm");
    }
    w_ = w / n;
    x_ = x / n;
    y_ = y / n;
    z_ = z / n;
}

Quaternion Quaternion::from_axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
    const double n = axis.norm();
    if (!(n > 0.0)) {
        if (angle_rad == 0.0) return identity();
        throw InvalidInput("rotation axis has zero length");
    }
    const Eigen::Vector3d u = axis / n;
    const double s = std::sin(0.5 * angle_rad);
    return {std::cos(0.5 * angle_rad), s * u.x(), s * u.y(), s * u.z()};
}

Quaternion Quaternion::from_matrix(const Eigen::Matrix3d& R) {
    check_rotation(R, 1e-4);
    return from_eigen(Eigen::Quaterniond(R));
}

Eigen::Matrix3d Quaternion::to_matrix() const { return eigen().toRotationMatrix(); }

Eigen::Vector3d Quaternion::rotate(const Eigen::Vector3d& v) const { return eigen() * v; }

Quaternion Quaternion::inverse() const {
    Quaternion q;
    q.w_ = w_;
    q.x_ = -x_;
    q.y_ = -y_;
    q.z_ = -z_;
    return q;
}

Quaternion Quaternion::operator*(const Quaternion& r) const {
    return {w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
            w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
            w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
            w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_};
}

Quaternion Quaternion::sign_normalized() const {
    bool flip = false;
    if (w_ != 0.0) {
        flip = w_ < 0.0;
    } else if (x_ != 0.0) {
        flip = x_ < 0.0;
    } else if (y_ != 0.0) {
        flip = y_ < 0.0;
    } else {
        flip = z_ < 0.0;
    }
    if (!flip) return *this;
    Quaternion q;
    q.w_ = -w_;
    q.x_ = -x_;
    q.y_ = -y_;
    q.z_ = -z_;
    return q;
}

double Quaternion::angle_to(const Quaternion& other) const {
    const double d = std::abs(w_ * other.w_ + x_ * other.x_ + y_ * other.y_ + z_ * other.z_);
    return 2.0 * std::acos(std::min(1.0, d));
}

bool Quaternion::same_rotation(const Quaternion& o, double tol) const {
    const Quaternion a = sign_normalized();
    const Quaternion b = o.sign_normalized();
    return std::abs(a.w_ - b.w_) <= tol && std::abs(a.x_ - b.x_) <= tol && std::abs(a.y_ - b.y_) <= tol &&
           std::abs(a.z_ - b.z_) <= tol;
}

}  // namespace handbooster
