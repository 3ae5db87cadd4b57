// SPDX-License-Identifier: Apache-2.0
//
// Condition images for one hand-object configuration: camera-space normal
// map, flat-shaded color map and segmentation, packaged with the hand
// orientation and the exact 3D annotation they were rendered from.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "handbooster/assets.hpp"
#include "handbooster/image.hpp"
#include "handbooster/pose.hpp"
#include "handbooster/raster.hpp"
#include "handbooster/skinning.hpp"

namespace handbooster {

inline constexpr std::uint8_t kLabelBackground = 0;
inline constexpr std::uint8_t kLabelHand = 1;
inline constexpr std::uint8_t kLabelObject = 2;

enum class ConditionVariant { normal_texture, normal_segmentation, depth_segmentation, skeleton };

const char* to_string(ConditionVariant v);
/// Throws ConfigError on unknown names.
ConditionVariant variant_from_string(const std::string& s);

/// Where the camera sits relative to the hand: it looks at the centroid of
/// the posed joints from `distance_mm` along `direction`.
struct CameraSpec {
    double distance_mm = 450.0;
    Eigen::Vector3d direction{0.4, -1.0, 0.3};
    Eigen::Vector3d up{0.0, 0.0, 1.0};
    /// Focal length in pixels as a multiple of the image width.
    double focal_scale = 1.2;

    void validate() const;
};

Camera camera_for(const CameraSpec& spec, const std::vector<Eigen::Vector3d>& joints, int width, int height);

struct ConditionSet {
    GraspRecord record;  // as rendered, after any perturbation
    int view = 0;
    Camera camera;
    Image normal_map;
    Image texture_map;
    Image segmentation;
    std::vector<double> depth;
    Quaternion hand_orient;
    std::vector<Eigen::Vector3d> joints;  // J+1 world positions, mm
    MeshGeometry hand_mesh;

    int width() const { return normal_map.width; }
    int height() const { return normal_map.height; }
    /// "{sequence}_{frame}_{view:03}"
    std::string stem() const;
};

ConditionSet render_conditions(const GraspRecord& g, const Rig& rig, const AssetRegistry& assets, const Camera& cam,
                               int width = 256, int height = 256);

/// Renders with the camera placed by `spec` around the posed hand.
ConditionSet render_conditions(const GraspRecord& g, const Rig& rig, const AssetRegistry& assets,
                               const CameraSpec& spec, int width = 256, int height = 256);

struct NovelViewOptions {
    int views_per_pose = 2;
    double max_angle_deg = 30.0;
    CameraSpec camera;
    int width = 256;
    int height = 256;
};

/// The records (with view indices) that make_novel_view_batch would render:
/// each grasping record yields views_per_pose independently perturbed and
/// aligned copies, every other record one unperturbed copy. Throws
/// ContractViolation on unlabeled records.
std::vector<std::pair<GraspRecord, int>> plan_novel_views(const std::vector<GraspRecord>& records, int views_per_pose,
                                                          double max_angle_deg, std::uint64_t seed);

std::vector<ConditionSet> make_novel_view_batch(const std::vector<GraspRecord>& records, const Rig& rig,
                                                const AssetRegistry& assets, const NovelViewOptions& opts,
                                                std::uint64_t seed);

/// Bones as one-pixel lines between projected joints, joints as 3x3 dots.
Image render_skeleton(const std::vector<Eigen::Vector3d>& joints, const std::vector<int>& parent, const Camera& cam,
                      int width, int height);

/// Writes the images for the variant, the hand mesh as OBJ and a JSON
/// sidecar into `dir`. Returns the sidecar content.
nlohmann::json write_condition_set(const ConditionSet& cs, const Rig& rig, const std::filesystem::path& dir,
                                   ConditionVariant variant);

}  // namespace handbooster
