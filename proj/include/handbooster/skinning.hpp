// SPDX-License-Identifier: Apache-2.0
//
// Forward kinematics and linear blend skinning over a self-describing rig
// asset. Joint 0 is the root and carries the hand's global transform;
// joints 1..J are driven by HandPose::joint_rots[0..J-1].

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "handbooster/mesh.hpp"
#include "handbooster/pose.hpp"

namespace handbooster {

struct Rig {
    MeshGeometry template_mesh;                  // rest pose, mm
    std::vector<Eigen::Vector3d> joint_rest;     // J+1 rest joint positions, mm
    std::vector<int> parent;                     // J+1, root = -1
    Eigen::MatrixXd weights;                     // V x (J+1), rows sum to 1
    std::vector<std::string> joint_names;        // optional, J+1 when present

    std::size_t joint_count() const { return joint_rest.size(); }
    /// Number of articulated joints J (joint_count() - 1).
    std::size_t articulated_count() const { return joint_rest.empty() ? 0 : joint_rest.size() - 1; }

    /// Throws InvalidInput on any structural violation: weights not
    /// row-stochastic within 1e-5, negative weights, joint tree not a single
    /// acyclic tree rooted at index 0, or mis-sized arrays.
    void validate() const;
};

/// Posed mesh: rig-space FK and LBS, then global_orient and translation.
/// Faces are reused unchanged. Throws InvalidInput on joint-count mismatch.
MeshGeometry pose_mesh(const Rig& rig, const HandPose& pose);

/// World positions of all J+1 joints under the pose.
std::vector<Eigen::Vector3d> joint_positions(const Rig& rig, const HandPose& pose);

/// Rig asset I/O. Arrays are base64 of little-endian float32 (vertex data,
/// rest joints, weights, colors) or uint32 (faces); see schemas/rig.schema.json.
Rig load_rig(const std::filesystem::path& path);
Rig parse_rig(const std::string& json_text);
std::string format_rig(const Rig& rig);
void save_rig(const std::filesystem::path& path, const Rig& rig);

/// Procedural 15-joint hand: a palm slab and five capped finger tubes, each
/// a separate closed component so the posed mesh stays watertight.
struct ToyRig {
    Rig rig;
    /// Local flexion axis for each articulated joint; rotating about it by a
    /// positive angle curls the finger toward the palm side (+y).
    std::vector<Eigen::Vector3d> flex_axes;
};

ToyRig make_toy_rig();

/// Pose whose articulated joint j is flexed by curls_deg[j] degrees.
HandPose flexion_pose(const ToyRig& toy, const std::vector<double>& curls_deg);

}  // namespace handbooster
