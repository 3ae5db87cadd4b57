// SPDX-License-Identifier: Apache-2.0
//
// Pinhole camera and a z-buffered software rasterizer producing camera-space
// normal maps, color maps, label maps and depth.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "handbooster/image.hpp"
#include "handbooster/mesh.hpp"

namespace handbooster {

/// OpenCV convention: camera looks down +z, image x right, image y down.
/// p_cam = rotation * p_world + translation.
struct Camera {
    double fx = 1, fy = 1, cx = 0, cy = 0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    /// Throws ConfigError on non-positive focal lengths or a non-rotation.
    void validate() const;

    Eigen::Vector3d to_camera(const Eigen::Vector3d& p) const { return rotation * p + translation; }
    /// Pixel coordinates (pixel centers at +0.5) of a camera-space point.
    Eigen::Vector2d project_camera(const Eigen::Vector3d& pc) const {
        return {fx * pc.x() / pc.z() + cx, fy * pc.y() / pc.z() + cy};
    }
    Eigen::Vector2d project(const Eigen::Vector3d& p) const { return project_camera(to_camera(p)); }

    /// Camera at `eye` looking at `target`; `up` fixes the roll (image y
    /// points away from it). Throws ConfigError if up is parallel to the view.
    static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                          double f, int width, int height);
};

struct Material {
    std::uint8_t label = 1;
    /// Used when the mesh has no per-vertex colors and no texture applies.
    Eigen::Vector3d base_color{0.7, 0.7, 0.7};
    /// Sampled bilinearly through the mesh's uvs when both are present.
    const Image* texture = nullptr;
};

struct RenderItem {
    const MeshGeometry* mesh = nullptr;
    Material material;
};

struct RasterOutput {
    Image normal_map;     // RGB
    Image texture_map;    // RGB
    Image segmentation;   // gray, material labels, 0 = background
    std::vector<double> depth;  // camera z in mm, +inf where empty
    int width = 0, height = 0;

    double depth_at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
};

/// Triangles with any vertex closer than this (mm) are dropped.
inline constexpr double kNearPlane = 1.0;

/// Rasterizes in item order; a pixel goes to the nearest surface, ties to
/// the earlier triangle. Both windings are drawn. Normals are encoded in a
/// camera frame with x right, y up and z toward the viewer:
/// rgb = round((n * 0.5 + 0.5) * 255). Throws ConfigError on a bad camera
/// or a resolution below 8x8.
RasterOutput rasterize(const std::vector<RenderItem>& items, const Camera& cam, int width, int height);

/// Decodes a normal-map pixel back to a (not renormalized) vector.
Eigen::Vector3d decode_normal(const Image& normal_map, int x, int y);

}  // namespace handbooster
