// SPDX-License-Identifier: Apache-2.0

#include "handbooster/fixture.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "handbooster/manifest.hpp"
#include "handbooster/mesh.hpp"
#include "handbooster/rng.hpp"
#include "handbooster/skinning.hpp"

namespace handbooster {

namespace fs = std::filesystem;
using Eigen::Vector3d;

namespace {

struct ObjectSpec {
    const char* id;
    MeshGeometry mesh;
    double half_depth;  // extent along +y from the object origin
};

void paint(MeshGeometry& m, const Vector3d& base, const Vector3d& accent) {
    // A vertical gradient keeps the texture map from being flat.
    const auto box = m.bounds();
    const double span = std::max(box.sizes().z(), 1e-9);
    m.colors.clear();
    for (const auto& v : m.vertices) {
        const double t = (v.z() - box.min().z()) / span;
        m.colors.push_back((1 - t) * base + t * accent);
    }
}

std::vector<ObjectSpec> objects() {
    std::vector<ObjectSpec> out;
    MeshGeometry mug = make_cylinder({0, 0, -40}, {0, 0, 40}, 30, 24);
    paint(mug, {0.80, 0.20, 0.15}, {0.95, 0.85, 0.80});
    out.push_back({"mug", mug, 30});
    MeshGeometry box = make_box({-25, -20, -30}, {25, 20, 30});
    paint(box, {0.15, 0.35, 0.80}, {0.60, 0.75, 0.95});
    out.push_back({"box", box, 20});
    MeshGeometry ball = make_icosphere({0, 0, 0}, 28, 2);
    paint(ball, {0.20, 0.70, 0.25}, {0.90, 0.90, 0.30});
    out.push_back({"ball", ball, 28});
    return out;
}

std::vector<double> random_curls(Rng& rng) {
    std::vector<double> c(15);
    for (auto& x : c) x = uniform(rng, 0.0, 30.0);
    return c;
}

Quaternion random_rotation(Rng& rng) {
    const double u1 = uniform(rng, 0, 1), u2 = uniform(rng, 0, 2 * std::numbers::pi),
                 u3 = uniform(rng, 0, 2 * std::numbers::pi);
    return Quaternion(std::sqrt(u1) * std::cos(u3), std::sqrt(1 - u1) * std::sin(u2),
                      std::sqrt(1 - u1) * std::cos(u2), std::sqrt(u1) * std::sin(u3));
}

Quaternion about_axis(const Vector3d& axis, double deg) {
    const double h = deg * std::numbers::pi / 360.0;
    const Vector3d a = axis.normalized() * std::sin(h);
    return Quaternion(std::cos(h), a.x(), a.y(), a.z());
}

// Object pose in the hand frame: in front of the palm (palm face at y = 10)
// with the given gap, turned about the palm normal.
ObjectPose in_front_of_palm(const ObjectSpec& o, double gap, Rng& rng) {
    const Vector3d t(uniform(rng, -8, 8), 10 + gap + o.half_depth, uniform(rng, 38, 52));
    return ObjectPose(about_axis(Vector3d::UnitY(), uniform(rng, -180, 180)), t);
}

}  // namespace

void write_toy_fixture(const fs::path& dir, const FixtureOptions& opts) {
    fs::create_directories(dir / "objects");
    const ToyRig toy = make_toy_rig();
    save_rig(dir / "toy_rig.json", toy.rig);
    const auto objs = objects();
    for (const auto& o : objs) save_obj(dir / "objects" / (std::string(o.id) + ".obj"), o.mesh);

    Manifest real;
    real.header.joint_count = toy.rig.articulated_count();
    real.header.assets = "objects";
    for (int s = 0; s < opts.sequences; ++s) {
        Rng rng = make_rng(opts.seed, "real-sequence", static_cast<std::uint64_t>(s));
        const ObjectSpec& o = objs[static_cast<std::size_t>(s) % objs.size()];
        const HandPose grasp = flexion_pose(toy, random_curls(rng));
        const ObjectPose rel = in_front_of_palm(o, uniform(rng, 0.3, 1.5), rng);
        const Quaternion orient = random_rotation(rng);
        const Vector3d base(uniform(rng, -100, 100), uniform(rng, -100, 100), uniform(rng, 300, 500));
        const Eigen::Matrix3d Rh = orient.to_matrix();
        const Vector3d approach = Rh * Vector3d(0, -1, 0);  // away from the palm side
        const Vector3d lift_axis(0, 0, 1);
        const Vector3d spin = Vector3d(uniform(rng, -1, 1), uniform(rng, -1, 1), 1).normalized();
        const Quaternion obj_world = orient * rel.rotation_quat();
        const Vector3d obj_t = Rh * rel.translation() + base;

        for (int f = 0; f < opts.frames_per_sequence; ++f) {
            GraspRecord g;
            char name[16];
            std::snprintf(name, sizeof name, "seq%02d", s);
            g.sequence_id = name;
            g.frame_index = f;
            g.object_id = o.id;
            g.source = Source::real;
            g.hand = grasp;
            g.hand.global_orient = orient;
            const int approach_frames = 8;
            if (f < approach_frames || opts.static_objects) {
                const double away = f < approach_frames ? 6.0 * (approach_frames - f) : 0.0;
                g.hand.root_translation = base + away * approach;
                g.object = ObjectPose(obj_world, obj_t);
            } else {
                // Hand and object move together: lift and a slow turn about
                // an axis through the hand root.
                const int k = f - approach_frames + 1;
                const Quaternion turn = about_axis(spin, 0.8 * k);
                const Vector3d lift = 4.0 * k * lift_axis;
                g.hand.global_orient = turn * orient;
                g.hand.root_translation = base + lift;
                g.object = ObjectPose(turn * obj_world, turn.to_matrix() * (obj_t - base) + base + lift);
            }
            real.entries.push_back({g, nlohmann::json::object()});
        }
    }
    write_manifest(dir / "real.jsonl", real);

    if (opts.synthetic_grasps > 0) {
        Manifest syn;
        syn.header.joint_count = toy.rig.articulated_count();
        syn.header.assets = "objects";
        for (int i = 0; i < opts.synthetic_grasps; ++i) {
            Rng rng = make_rng(opts.seed, "synthetic-grasp", static_cast<std::uint64_t>(i));
            const ObjectSpec& o = objs[static_cast<std::size_t>(i) % objs.size()];
            const double u = uniform(rng, 0, 1);
            double gap;
            if (u < opts.far_fraction) {
                gap = uniform(rng, 6, 15);
            } else if (u < opts.far_fraction + opts.deep_fraction) {
                gap = -uniform(rng, 9, 14);
            } else {
                gap = uniform(rng, 0.2, 1.8);
            }
            GraspRecord g;
            g.sequence_id = std::string("syn_") + o.id;
            g.frame_index = i / static_cast<int>(objs.size());
            g.object_id = o.id;
            g.source = Source::synthetic;
            g.hand = flexion_pose(toy, random_curls(rng));
            g.object = in_front_of_palm(o, gap, rng);
            syn.entries.push_back({g, nlohmann::json::object()});
        }
        write_manifest(dir / "synthetic.jsonl", syn);
    }

    std::string cfg =
        "# Toy dataset configuration; paths are relative to this file.\n"
        "real_manifest = real.jsonl\n";
    if (opts.synthetic_grasps > 0) cfg += "synthetic_manifest = synthetic.jsonl\n";
    cfg +=
        "assets = objects\n"
        "rig = toy\n"
        "out_dir = out\n"
        "seed = 7\n"
        "edge_j_mm = 20\n"
        "edge_v_mm = 20\n";
    write_file_atomic(dir / "pipeline.cfg", cfg);
}

}  // namespace handbooster
