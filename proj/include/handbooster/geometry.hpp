// SPDX-License-Identifier: Apache-2.0
//
// Triangle primitives and a bounding-volume hierarchy for mesh proximity
// queries.

#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "handbooster/mesh.hpp"

namespace handbooster {

using Triangle = std::array<Eigen::Vector3d, 3>;

double point_triangle_distance(const Eigen::Vector3d& p, const Triangle& t);

double segment_segment_distance(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& q0,
                                const Eigen::Vector3d& q1);

/// Closed segment vs closed triangle. Segments lying in the triangle's
/// plane report false; callers cover that case through edge distances.
bool segment_intersects_triangle(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Triangle& t);

/// Exact Euclidean distance between two triangles (0 when they intersect).
double triangle_distance(const Triangle& a, const Triangle& b);

/// Median-split AABB tree over a mesh's faces.
class Bvh {
public:
    struct Node {
        Eigen::AlignedBox3d box;
        int left = -1;   // child indices, -1 for leaves
        int right = -1;
        int begin = 0;   // leaf range into order()
        int end = 0;
        bool leaf() const { return left < 0; }
    };

    explicit Bvh(const MeshGeometry& mesh, int leaf_size = 4);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<int>& order() const { return order_; }
    const Triangle& triangle(int face) const { return tris_[face]; }
    const MeshGeometry& mesh() const { return mesh_; }

private:
    int build(int begin, int end, int leaf_size);

    const MeshGeometry& mesh_;
    std::vector<Triangle> tris_;
    std::vector<Eigen::Vector3d> centroids_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

/// Minimum distance between two triangle sets, mm. Throws InvalidInput on
/// an empty mesh.
double min_surface_distance(const MeshGeometry& a, const MeshGeometry& b);

/// Number of intersecting face pairs that share no vertex position.
std::size_t self_penetration(const MeshGeometry& mesh);

/// Volume (cm^3) of the region inside both closed meshes, estimated by
/// voxel centers over the overlap of their bounding boxes. The cells tile
/// that box exactly, so the effective pitch per axis is at most voxel_mm.
/// Inside tests use +x ray parity with a symbolic perturbation for rays
/// that graze edges or vertices. Throws InvalidInput naming the mesh that
/// is not watertight.
double intersection_volume(const MeshGeometry& a, const MeshGeometry& b, double voxel_mm = 2.0,
                           const std::string& name_a = "first mesh", const std::string& name_b = "second mesh");

/// Ray-parity inside test for a single point (same rules as above).
bool point_in_mesh(const MeshGeometry& mesh, const Eigen::Vector3d& p);

}  // namespace handbooster
