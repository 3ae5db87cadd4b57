// SPDX-License-Identifier: Apache-2.0

#include "handbooster/validator.hpp"

#include <cmath>

#include "handbooster/errors.hpp"

namespace handbooster {

void ValidationThresholds::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(contact_mm)) throw ConfigError("contact threshold must be positive");
    if (!positive(volume_cm3)) throw ConfigError("intersection volume threshold must be positive");
    if (!positive(voxel_mm)) throw ConfigError("voxel pitch must be positive");
}

GraspVerdict validate_meshes(const MeshGeometry& hand, const MeshGeometry& object, const ValidationThresholds& th,
                             const std::string& object_name) {
    th.validate();
    GraspVerdict v;
    v.contact_distance = min_surface_distance(hand, object);
    v.intersection_volume = intersection_volume(hand, object, th.voxel_mm, "hand mesh", object_name);
    v.self_penetration_pairs = self_penetration(hand);
    if (v.contact_distance > th.contact_mm) v.reasons.emplace_back(kReasonNoContact);
    if (v.intersection_volume > th.volume_cm3) v.reasons.emplace_back(kReasonIntersection);
    if (v.self_penetration_pairs > 0) v.reasons.emplace_back(kReasonSelfPenetration);
    v.valid = v.reasons.empty();
    return v;
}

GraspVerdict validate_grasp(const GraspRecord& g, const Rig& rig, const AssetRegistry& assets,
                            const ValidationThresholds& th) {
    const MeshGeometry& obj = assets.mesh(g.object_id);
    const MeshGeometry hand = pose_mesh(rig, g.hand);
    return validate_meshes(hand, transformed(obj, g.object.rotation(), g.object.translation()), th, "object '" + g.object_id + "'");
}

}  // namespace handbooster
