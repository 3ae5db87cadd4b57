// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace handbooster {

/// Unit quaternion (w, x, y, z). Every constructor normalizes, so a
/// Quaternion value is always a rotation. q and -q are the same rotation;
/// use same_rotation() rather than == when that matters.
class Quaternion {
public:
    Quaternion() = default;  // identity

    /// Normalizes; throws InvalidInput on a zero or non-finite quaternion.
    Quaternion(double w, double x, double y, double z);

    static Quaternion identity() { return {}; }
    static Quaternion from_axis_angle(const Eigen::Vector3d& axis, double angle_rad);
    /// Throws InvalidInput when R is not a proper rotation within 1e-4.
    static Quaternion from_matrix(const Eigen::Matrix3d& R);
    static Quaternion from_eigen(const Eigen::Quaterniond& q) { return {q.w(), q.x(), q.y(), q.z()}; }

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    std::array<double, 4> coeffs() const { return {w_, x_, y_, z_}; }

    Eigen::Quaterniond eigen() const { return {w_, x_, y_, z_}; }
    Eigen::Matrix3d to_matrix() const;
    Eigen::Vector3d rotate(const Eigen::Vector3d& v) const;

    Quaternion inverse() const;
    Quaternion operator*(const Quaternion& rhs) const;

    /// Representative with w >= 0; when w == 0 the first nonzero of
    /// (x, y, z) is made positive.
    Quaternion sign_normalized() const;

    /// Geodesic angle to another rotation, radians in [0, pi].
    double angle_to(const Quaternion& other) const;

    bool same_rotation(const Quaternion& other, double tol = 1e-6) const;

    /// Component-wise equality (no double-cover folding).
    bool operator==(const Quaternion& rhs) const = default;

private:
    double w_ = 1.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

}  // namespace handbooster
