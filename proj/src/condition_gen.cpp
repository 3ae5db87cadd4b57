// SPDX-License-Identifier: Apache-2.0

#include "handbooster/condition_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "handbooster/errors.hpp"
#include "handbooster/rng.hpp"

namespace handbooster {

using Eigen::Vector3d;

const char* to_string(ConditionVariant v) {
    switch (v) {
        case ConditionVariant::normal_texture: return "normal_texture";
        case ConditionVariant::normal_segmentation: return "normal_segmentation";
        case ConditionVariant::depth_segmentation: return "depth_segmentation";
        case ConditionVariant::skeleton: return "skeleton";
    }
    return "?";
}

ConditionVariant variant_from_string(const std::string& s) {
    for (auto v : {ConditionVariant::normal_texture, ConditionVariant::normal_segmentation,
                   ConditionVariant::depth_segmentation, ConditionVariant::skeleton}) {
        if (s == to_string(v)) return v;
    }
    throw ConfigError("unknown condition variant '" + s + "'");
}

void CameraSpec::validate() const {
    if (!(distance_mm > kNearPlane) || !std::isfinite(distance_mm)) throw ConfigError("camera distance must exceed the near plane");
    if (!(focal_scale > 0) || !std::isfinite(focal_scale)) throw ConfigError("camera focal scale must be positive");
    if (!(direction.norm() > 0) || !direction.allFinite()) throw ConfigError("camera direction must be non-zero");
    if (!(up.norm() > 0) || !up.allFinite()) throw ConfigError("camera up vector must be non-zero");
}

Camera camera_for(const CameraSpec& spec, const std::vector<Vector3d>& joints, int width, int height) {
    spec.validate();
    if (joints.empty()) throw InvalidInput("camera placement needs at least one joint");
    Vector3d target = Vector3d::Zero();
    for (const auto& j : joints) target += j;
    target /= static_cast<double>(joints.size());
    const Vector3d eye = target + spec.distance_mm * spec.direction.normalized();
    return Camera::look_at(eye, target, spec.up, spec.focal_scale * width, width, height);
}

std::string ConditionSet::stem() const {
    char view_buf[16];
    std::snprintf(view_buf, sizeof view_buf, "%03d", view);
    return record.sequence_id + "_" + std::to_string(record.frame_index) + "_" + view_buf;
}

ConditionSet render_conditions(const GraspRecord& g, const Rig& rig, const AssetRegistry& assets, const Camera& cam,
                               int width, int height) {
    const MeshGeometry& obj_rest = assets.mesh(g.object_id);
    ConditionSet cs;
    cs.record = g;
    cs.camera = cam;
    cs.hand_orient = g.hand.global_orient;
    cs.hand_mesh = pose_mesh(rig, g.hand);
    cs.joints = joint_positions(rig, g.hand);
    const MeshGeometry obj = transformed(obj_rest, g.object.rotation(), g.object.translation());

    Image texture;
    const Image* tex_ptr = nullptr;
    if (const auto& tex_path = assets.texture(g.object_id); tex_path && !obj.uvs.empty()) {
        texture = read_png(*tex_path);
        tex_ptr = &texture;
    }
    std::vector<RenderItem> items{
        {&cs.hand_mesh, Material{kLabelHand, {0.85, 0.64, 0.52}, nullptr}},
        {&obj, Material{kLabelObject, {0.6, 0.6, 0.65}, tex_ptr}},
    };
    RasterOutput r = rasterize(items, cam, width, height);
    cs.normal_map = std::move(r.normal_map);
    cs.texture_map = std::move(r.texture_map);
    cs.segmentation = std::move(r.segmentation);
    cs.depth = std::move(r.depth);
    return cs;
}

ConditionSet render_conditions(const GraspRecord& g, const Rig& rig, const AssetRegistry& assets,
                               const CameraSpec& spec, int width, int height) {
    return render_conditions(g, rig, assets, camera_for(spec, joint_positions(rig, g.hand), width, height), width,
                             height);
}

std::vector<std::pair<GraspRecord, int>> plan_novel_views(const std::vector<GraspRecord>& records, int views_per_pose,
                                                          double max_angle_deg, std::uint64_t seed) {
    if (views_per_pose < 1) throw ConfigError("views per pose must be at least 1");
    std::vector<std::pair<GraspRecord, int>> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const GraspRecord& g = records[i];
        if (!g.grasping) throw ContractViolation("novel views need labeled records; " + g.id() + " has no grasp label");
        if (!*g.grasping) {
            out.emplace_back(g, 0);
            continue;
        }
        const std::uint64_t record_seed = split_seed(seed, "novel-view", i);
        for (int v = 0; v < views_per_pose; ++v) {
            Rng rng = make_rng(record_seed, "view", static_cast<std::uint64_t>(v));
            const Quaternion q = perturb_orientation(g.hand.global_orient, max_angle_deg, rng);
            out.emplace_back(align_orientation(g, q), v);
        }
    }
    return out;
}

std::vector<ConditionSet> make_novel_view_batch(const std::vector<GraspRecord>& records, const Rig& rig,
                                                const AssetRegistry& assets, const NovelViewOptions& opts,
                                                std::uint64_t seed) {
    std::vector<ConditionSet> out;
    for (auto& [g, view] : plan_novel_views(records, opts.views_per_pose, opts.max_angle_deg, seed)) {
        out.push_back(render_conditions(g, rig, assets, opts.camera, opts.width, opts.height));
        out.back().view = view;
    }
    return out;
}

namespace {

void put_pixel(Image& img, int x, int y, const std::array<std::uint8_t, 3>& c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    for (int k = 0; k < 3; ++k) img.at(x, y, k) = c[k];
}

void draw_line(Image& img, int x0, int y0, int x1, int y1, const std::array<std::uint8_t, 3>& c) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (int guard = 0; guard < 1 << 16; ++guard) {
        put_pixel(img, x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) err += dy, x0 += sx;
        if (e2 <= dx) err += dx, y0 += sy;
    }
}

std::array<std::uint8_t, 3> chain_color(int chain) {
    static const std::array<std::array<std::uint8_t, 3>, 6> colors{{
        {255, 255, 255}, {255, 64, 64}, {255, 200, 0}, {64, 220, 64}, {64, 160, 255}, {200, 90, 255}}};
    return colors[std::clamp(chain, 0, 5)];
}

}  // namespace

Image render_skeleton(const std::vector<Vector3d>& joints, const std::vector<int>& parent, const Camera& cam,
                      int width, int height) {
    cam.validate();
    if (joints.size() != parent.size()) throw InvalidInput("skeleton: joints and parents differ in length");
    Image img(width, height, 3);
    std::vector<Eigen::Vector2i> px(joints.size());
    std::vector<bool> visible(joints.size());
    for (std::size_t j = 0; j < joints.size(); ++j) {
        const Vector3d pc = cam.to_camera(joints[j]);
        visible[j] = pc.z() >= kNearPlane;
        if (!visible[j]) continue;
        const auto p = cam.project_camera(pc);
        px[j] = {static_cast<int>(std::floor(std::clamp(p.x(), -1e6, 1e6))),
                 static_cast<int>(std::floor(std::clamp(p.y(), -1e6, 1e6)))};
    }
    // Color each bone by the root child that starts its chain.
    auto chain_of = [&](std::size_t j) {
        int k = static_cast<int>(j), chain = 0;
        while (k > 0 && parent[k] > 0) k = parent[k];
        if (k > 0) chain = 1 + (k - 1) / 3 % 5;
        return chain;
    };
    for (std::size_t j = 0; j < joints.size(); ++j) {
        const int p = parent[j];
        if (p < 0 || !visible[j] || !visible[p]) continue;
        draw_line(img, px[p].x(), px[p].y(), px[j].x(), px[j].y(), chain_color(chain_of(j)));
    }
    for (std::size_t j = 0; j < joints.size(); ++j) {
        if (!visible[j]) continue;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) put_pixel(img, px[j].x() + dx, px[j].y() + dy, chain_color(chain_of(j)));
        }
    }
    return img;
}

nlohmann::json write_condition_set(const ConditionSet& cs, const Rig& rig, const std::filesystem::path& dir,
                                   ConditionVariant variant) {
    std::filesystem::create_directories(dir);
    const std::string stem = cs.stem();
    nlohmann::json images = nlohmann::json::object();
    auto emit = [&](const std::string& kind, auto&& writer) {
        const std::string name = stem + "." + kind + ".png";
        writer(dir / name);
        images[kind] = name;
    };
    const bool normals = variant == ConditionVariant::normal_texture || variant == ConditionVariant::normal_segmentation;
    if (normals) emit("normal", [&](const auto& p) { write_png(p, cs.normal_map); });
    if (variant == ConditionVariant::normal_texture) emit("texture", [&](const auto& p) { write_png(p, cs.texture_map); });
    if (variant == ConditionVariant::depth_segmentation) {
        std::vector<std::uint16_t> d(cs.depth.size(), 0);
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (std::isfinite(cs.depth[i])) d[i] = static_cast<std::uint16_t>(std::clamp(std::lround(cs.depth[i]), 1L, 65535L));
        }
        emit("depth", [&](const auto& p) { write_png16(p, cs.width(), cs.height(), d); });
    }
    if (variant == ConditionVariant::skeleton) {
        emit("skeleton", [&](const auto& p) {
            write_png(p, render_skeleton(cs.joints, rig.parent, cs.camera, cs.width(), cs.height()));
        });
    }
    // The mask doubles as the loss weighting mask, so every variant keeps it.
    emit("seg", [&](const auto& p) { write_png(p, cs.segmentation); });

    const std::string mesh_name = stem + ".mesh.obj";
    save_obj(dir / mesh_name, cs.hand_mesh);

    nlohmann::json j;
    j["sequence_id"] = cs.record.sequence_id;
    j["frame_index"] = cs.record.frame_index;
    j["view"] = cs.view;
    j["object_id"] = cs.record.object_id;
    j["source"] = to_string(cs.record.source);
    j["variant"] = to_string(variant);
    j["hand_orient"] = {cs.hand_orient.w(), cs.hand_orient.x(), cs.hand_orient.y(), cs.hand_orient.z()};
    const Quaternion& oq = cs.record.object.rotation_quat();
    const Vector3d& ot = cs.record.object.translation();
    j["object_pose"] = {{"quat", {oq.w(), oq.x(), oq.y(), oq.z()}}, {"translation", {ot.x(), ot.y(), ot.z()}}};
    nlohmann::json cam;
    cam["fx"] = cs.camera.fx;
    cam["fy"] = cs.camera.fy;
    cam["cx"] = cs.camera.cx;
    cam["cy"] = cs.camera.cy;
    cam["rotation"] = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cam["rotation"].push_back(cs.camera.rotation(r, c));
    }
    cam["translation"] = {cs.camera.translation.x(), cs.camera.translation.y(), cs.camera.translation.z()};
    cam["width"] = cs.width();
    cam["height"] = cs.height();
    j["camera"] = cam;
    j["joints"] = nlohmann::json::array();
    for (const auto& p : cs.joints) j["joints"].push_back({p.x(), p.y(), p.z()});
    j["mesh"] = mesh_name;
    j["images"] = images;

    const auto sidecar = dir / (stem + ".json");
    std::ofstream f(sidecar);
    f << j.dump(1) << '\n';
    if (!f) throw DataError("failed writing " + sidecar.string());
    return j;
}

}  // namespace handbooster
