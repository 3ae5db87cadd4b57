// SPDX-License-Identifier: Apache-2.0
//
// Geometric acceptance checks for candidate grasps: the hand touches the
// object, overlaps it by at most a bounded volume, and does not intersect
// itself.

#pragma once

#include <string>
#include <vector>

#include "handbooster/assets.hpp"
#include "handbooster/geometry.hpp"
#include "handbooster/pose.hpp"
#include "handbooster/skinning.hpp"

namespace handbooster {

struct ValidationThresholds {
    double contact_mm = 2.0;
    double volume_cm3 = 4.0;
    double voxel_mm = 2.0;

    /// Throws ConfigError on non-positive or non-finite values.
    void validate() const;
};

inline constexpr const char* kReasonNoContact = "no-contact";
inline constexpr const char* kReasonIntersection = "intersection";
inline constexpr const char* kReasonSelfPenetration = "self-penetration";

struct GraspVerdict {
    bool valid = false;
    double contact_distance = 0.0;     // mm
    double intersection_volume = 0.0;  // cm^3
    std::size_t self_penetration_pairs = 0;
    std::vector<std::string> reasons;  // empty iff valid
};

/// Checks already-posed meshes.
GraspVerdict validate_meshes(const MeshGeometry& hand, const MeshGeometry& object, const ValidationThresholds& th,
                             const std::string& object_name = "object");

/// Poses the hand through the rig and the object asset under g.object.
/// Throws LookupError if the object id is not registered.
GraspVerdict validate_grasp(const GraspRecord& g, const Rig& rig, const AssetRegistry& assets,
                            const ValidationThresholds& th = {});

}  // namespace handbooster
