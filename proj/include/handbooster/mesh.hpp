// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace handbooster {

using Face = std::array<int, 3>;

/// Indexed triangle mesh in millimeters. Optional per-vertex attribute
/// arrays are either empty or sized to the vertex count.
struct MeshGeometry {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<Face> faces;
    std::vector<Eigen::Vector3d> normals;
    std::vector<Eigen::Vector3d> colors;  // linear RGB in [0, 1]
    std::vector<Eigen::Vector2d> uvs;

    bool empty() const { return faces.empty(); }
    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }

    std::array<Eigen::Vector3d, 3> triangle(std::size_t f) const {
        const Face& t = faces[f];
        return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
    }

    /// Throws InvalidInput on out-of-range indices, mis-sized attributes,
    /// non-finite coordinates or non-unit normals (tol 1e-4).
    void validate() const;

    Eigen::AlignedBox3d bounds() const;
};

/// Applies p -> R p + t to positions and R to normals.
MeshGeometry transformed(const MeshGeometry& m, const Eigen::Matrix3d& R, const Eigen::Vector3d& t);

/// Area-weighted vertex normals; zero-area neighborhoods get +z.
std::vector<Eigen::Vector3d> compute_vertex_normals(const MeshGeometry& m);

/// Every undirected edge (after welding coincident positions) is used by
/// exactly two faces.
bool is_watertight(const MeshGeometry& m);

/// Concatenates meshes, offsetting face indices. Attributes are kept only if
/// every part carries them.
MeshGeometry merge(const std::vector<MeshGeometry>& parts);

// Wavefront OBJ subset: `v x y z [r g b]`, `vt`, `vn`, `f` with any of the
// v, v/vt, v//vn, v/vt/vn index forms (negative indices allowed). Polygons
// are fan-triangulated. Distinct (v, vt, vn) tuples become distinct vertices.
MeshGeometry load_obj(const std::filesystem::path& path);
MeshGeometry parse_obj(const std::string& text, const std::string& origin = "<memory>");
std::string format_obj(const MeshGeometry& m);
void save_obj(const std::filesystem::path& path, const MeshGeometry& m);

// Closed primitives with outward winding.
MeshGeometry make_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi);
MeshGeometry make_icosphere(const Eigen::Vector3d& center, double radius, int subdivisions);
/// Capped cylinder from a to b.
MeshGeometry make_cylinder(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius, int sides);

}  // namespace handbooster
