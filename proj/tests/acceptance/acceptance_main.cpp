// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and workloads are fixed here, not tunable.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <unistd.h>

#include "../geometry_oracle.hpp"
#include "../sampler_oracle.hpp"
#include "../test_util.hpp"
#include "handbooster/assets.hpp"
#include "handbooster/condition_gen.hpp"
#include "handbooster/config.hpp"
#include "handbooster/errors.hpp"
#include "handbooster/geometry.hpp"
#include "handbooster/grasp_labeler.hpp"
#include "handbooster/manifest.hpp"
#include "handbooster/metrics.hpp"
#include "handbooster/pipeline.hpp"
#include "handbooster/raster.hpp"
#include "handbooster/sampler.hpp"
#include "handbooster/skinning.hpp"

using namespace handbooster;
using namespace handbooster::testing_util;
using Eigen::Vector3d;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    // Records the first failure only; later ones are usually consequences.
    void expect(bool ok, const std::string& what) {
        if (!ok && pass_) {
            pass_ = false;
            first_ = what;
        }
    }
    Outcome done(const std::string& summary) const { return {pass_, pass_ ? summary : first_}; }

private:
    bool pass_ = true;
    std::string first_;
};

template <class... T>
std::string str(const T&... parts) {
    std::ostringstream os;
    os.precision(10);
    (os << ... << parts);
    return os.str();
}

// ---------------------------------------------------------------- 1

Outcome fps_oracle() {
    Check c;
    Rng rng(20240101);
    std::size_t comparisons = 0;
    for (int set = 0; set < 200; ++set) {
        const std::size_t n = 1 + uniform_index(rng, 50);
        const Eigen::Index dim = 2 + static_cast<Eigen::Index>(uniform_index(rng, 66));
        const PoseSet P = random_pose_set(rng, n, dim);
        for (std::size_t M = 1; M <= n; ++M) {
            const std::uint64_t seed = split_seed(set, "fps-acceptance", M);
            const FpsResult r = farthest_pose_sampling(P, M, seed);
            const auto expect = greedy_minmax_oracle(P, M, r.indices.front());
            c.expect(r.indices == expect, str("set ", set, " M=", M, ": selection differs from oracle"));
            ++comparisons;
        }
    }
    return c.done(str(comparisons, " (set, M) pairs match the oracle"));
}

// ---------------------------------------------------------------- 2

// The baseline is the mean min-distance over 1000 random subsets. Exact
// greedy max-min is a 2-approximation, so an individual lucky subset can
// beat it; how often that happens is reported alongside.
Outcome fps_dispersion() {
    Check c;
    Rng rng(777);
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_share = 1.0;
    int beats_best = 0;
    for (int set = 0; set < 50; ++set) {
        const std::size_t n = 20 + uniform_index(rng, 31);
        const PoseSet P = random_pose_set(rng, n, 8 + static_cast<Eigen::Index>(uniform_index(rng, 60)));
        const std::size_t M = 2 + uniform_index(rng, n / 2);
        const FpsResult r = farthest_pose_sampling(P, M, split_seed(set, "dispersion"));
        const double fps = min_pairwise_distance(r.selected.vectors);
        std::vector<double> random_min;
        std::vector<std::size_t> idx(n);
        for (int k = 0; k < 1000; ++k) {
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), rng);
            std::vector<PoseVector> sel;
            for (std::size_t i = 0; i < M; ++i) sel.push_back(P.vectors[idx[i]]);
            random_min.push_back(min_pairwise_distance(sel));
        }
        const double mean = pairwise_mean(random_min);
        const double best = *std::max_element(random_min.begin(), random_min.end());
        const auto beaten = std::count_if(random_min.begin(), random_min.end(), [&](double d) { return d <= fps; });
        worst_share = std::min(worst_share, static_cast<double>(beaten) / 1000.0);
        beats_best += fps >= best;
        worst_margin = std::min(worst_margin, fps - mean);
        c.expect(fps >= mean, str("set ", set, ": FPS min distance ", fps, " < random mean ", mean));
    }
    return c.done(str("FPS >= mean of 1000 random subsets on 50/50 sets (worst margin ", worst_margin,
                      "); >= every random subset on ", beats_best, "/50; worst share of subsets beaten ",
                      worst_share));
}

// ---------------------------------------------------------------- 3

Outcome rre_rte_closed_forms() {
    Check c;
    Rng rng(31337);
    double worst_r = 0, worst_t = 0;
    for (int i = 0; i < 10000; ++i) {
        const ObjectPose first(random_rotation(rng), Vector3d(uniform(rng, -500, 500), uniform(rng, -500, 500),
                                                              uniform(rng, -500, 500)));
        const double angle = i == 0 ? 0.0 : i == 1 ? 180.0 : uniform(rng, 0.0, 180.0);
        const Vector3d axis = random_unit(rng);
        const Vector3d delta = random_unit(rng) * uniform(rng, 0.0, 200.0);
        const Eigen::Matrix3d Rd = Eigen::AngleAxisd(angle * std::numbers::pi / 180.0, axis).toRotationMatrix();
        const ObjectPose current(Eigen::Matrix3d(first.rotation() * Rd), first.translation() + delta);
        worst_r = std::max(worst_r, std::abs(rre(first, current) - angle));
        worst_t = std::max(worst_t, std::abs(rte(first, current) - delta.norm()));
    }
    c.expect(worst_r <= 1e-6, str("RRE error ", worst_r, " deg"));
    c.expect(worst_t <= 1e-6, str("RTE error ", worst_t, " mm"));
    const LabelThresholds d;
    c.expect(d.rre_deg == 5.0 && d.rte_mm == 10.0, "default thresholds are not 5 deg / 10 mm");
    const PipelineConfig cfg = parse_config("real_manifest = r.jsonl\n", ".");
    c.expect(cfg.label.rre_deg == 5.0 && cfg.label.rte_mm == 10.0, "config defaults are not 5 deg / 10 mm");
    return c.done(str("max |RRE err| ", worst_r, " deg, max |RTE err| ", worst_t, " mm; defaults 5 deg / 10 mm"));
}

// ---------------------------------------------------------------- 4

Outcome cross_distribution_ordering() {
    Check c;
    Rng rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        const PoseSet S = random_pose_set(rng, 10 + uniform_index(rng, 40), 12);
        const PoseSet R = random_pose_set(rng, 1 + uniform_index(rng, 10), 12);
        const auto d = cross_distribution_weights(S, R);
        std::vector<double> sim(S.size(), 0.0);
        for (std::size_t i = 0; i < S.size(); ++i) {
            for (const auto& r : R.vectors) sim[i] += cosine_similarity(S.vectors[i], r);
        }
        double total = 0;
        for (std::size_t i = 0; i < S.size(); ++i) {
            total += d.probabilities[i];
            for (std::size_t j = 0; j < S.size(); ++j) {
                if (sim[i] < sim[j] - 1e-12) {
                    c.expect(d.probabilities[i] >= d.probabilities[j],
                             str("trial ", trial, ": less similar pose ", i, " got lower probability than ", j));
                }
            }
        }
        c.expect(std::abs(total - 1.0) <= 1e-9, str("trial ", trial, ": probabilities sum to ", total));
    }
    // Raw dissimilarity {0, 1, 2} -> min-max {0, 0.5, 1} -> floor {0.001, 0.5, 1} -> / 1.501.
    auto vec = [](double x, double y) {
        PoseVector v;
        v.values = Eigen::Vector2d(x, y);
        return v;
    };
    const auto d = cross_distribution_weights(PoseSet::from_vectors({vec(1, 0), vec(0, 1), vec(-1, 0)}),
                                              PoseSet::from_vectors({vec(1, 0)}));
    const double expect[3] = {1.0 / 1501.0, 500.0 / 1501.0, 1000.0 / 1501.0};
    double worst = 0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(d.probabilities[i] - expect[i]));
    c.expect(worst <= 1e-9, str("3-pose example off by ", worst));
    return c.done(str("anti-monotone on 100 instances; 3-pose example within ", worst));
}

// ---------------------------------------------------------------- 5

Outcome published_constants() {
    Check c;
    const PipelineConfig cfg = parse_config("real_manifest = r.jsonl\n", ".");
    c.expect(cfg.M == 10 && cfg.N == 500, "M/N defaults are not 10/500");
    c.expect(cfg.resolution == 256, "resolution default is not 256");
    c.expect(cfg.f_thresholds == std::vector<double>{5.0, 15.0}, "F thresholds default is not 5/15");
    const MetricOptions mo;
    c.expect(mo.f_thresholds == std::vector<double>{5.0, 15.0}, "metric F thresholds default is not 5/15");
    const NovelViewOptions nv;
    c.expect(nv.width == 256 && nv.height == 256, "novel-view resolution default is not 256x256");
    const std::string plan = dry_run_plan(cfg);
    for (const char* s : {"M=10", "N=500", "resolution 256x256", "F thresholds 5/15 mm"}) {
        c.expect(plan.find(s) != std::string::npos, str("dry-run plan lacks '", s, "'"));
    }
    return c.done("M=10, N=500, 256x256, F@5/15 in defaults and --dry-run plan");
}

// ---------------------------------------------------------------- 6

Outcome procrustes_recovery() {
    Check c;
    Rng rng(99);
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
        const int n = 4 + static_cast<int>(uniform_index(rng, 60));
        PointSet gt(n, 3);
        std::normal_distribution<double> g(0.0, 40.0);
        for (int i = 0; i < n; ++i) gt.row(i) = Eigen::RowVector3d(g(rng), g(rng), g(rng));
        const double s = uniform(rng, 0.3, 3.0);
        const Eigen::Matrix3d R = random_rotation(rng).to_matrix();
        const Vector3d tr(uniform(rng, -300, 300), uniform(rng, -300, 300), uniform(rng, -300, 300));
        PointSet pred = ((s * gt * R.transpose()).rowwise() + tr.transpose()).eval();
        const PointSet aligned = procrustes_align(pred, gt);
        const double residual = (aligned - gt).rowwise().norm().maxCoeff();
        worst = std::max(worst, residual);
        c.expect(residual < 1e-6, str("trial ", t, ": residual ", residual, " mm"));

        // With noise: alignment never does worse than root-relative comparison.
        std::normal_distribution<double> noise(0.0, 3.0);
        for (int i = 0; i < n; ++i) pred.row(i) += Eigen::RowVector3d(noise(rng), noise(rng), noise(rng));
        const double pa = position_error(procrustes_align(pred, gt), gt);
        const double rr = position_error(root_relative(pred), root_relative(gt));
        c.expect(pa <= rr + 1e-9, str("trial ", t, ": PA error ", pa, " > root-relative ", rr));
    }
    return c.done(str("max residual ", worst, " mm over 1000 trials; PA <= RR on every trial"));
}

// ---------------------------------------------------------------- 7

MeshGeometry random_soup(Rng& rng, int tris, const Vector3d& center, double spread) {
    MeshGeometry m;
    for (int f = 0; f < tris; ++f) {
        const Vector3d base = center + Vector3d(uniform(rng, -spread, spread), uniform(rng, -spread, spread),
                                                uniform(rng, -spread, spread));
        for (int k = 0; k < 3; ++k) {
            m.vertices.push_back(base + Vector3d(uniform(rng, -6, 6), uniform(rng, -6, 6), uniform(rng, -6, 6)));
        }
        m.faces.push_back({3 * f, 3 * f + 1, 3 * f + 2});
    }
    return m;
}

Outcome geometry_oracles() {
    Check c;
    Rng rng(5150);
    double worst_d = 0;
    for (int t = 0; t < 24; ++t) {
        MeshGeometry a, b;
        switch (t % 3) {
            case 0:
                a = make_icosphere(Vector3d::Zero(), 20, 1);  // 80 faces
                b = transformed(make_cylinder({0, 0, -15}, {0, 0, 15}, 9, 16), random_rotation(rng).to_matrix(),
                                random_unit(rng) * uniform(rng, 25, 45));
                break;
            case 1:
                a = make_box({-10, -12, -8}, {14, 9, 11});
                b = transformed(make_icosphere(Vector3d::Zero(), 12, 1), random_rotation(rng).to_matrix(),
                                random_unit(rng) * uniform(rng, 5, 40));
                break;
            default:
                a = random_soup(rng, 100 + static_cast<int>(uniform_index(rng, 101)), Vector3d::Zero(), 30);
                b = random_soup(rng, 100 + static_cast<int>(uniform_index(rng, 101)), random_unit(rng) * 50, 30);
        }
        const double d = min_surface_distance(a, b);
        const double o = oracle_mesh_distance(a, b);
        worst_d = std::max(worst_d, std::abs(d - o));
        c.expect(std::abs(d - o) <= 1e-6, str("pair ", t, ": BVH ", d, " vs brute force ", o));
    }

    double worst_v = 0;
    for (int t = 0; t < 12; ++t) {
        const double s = uniform(rng, 12.0, 30.0);
        const Vector3d lo(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5));
        const Vector3d off(uniform(rng, -0.8, 0.8) * s, uniform(rng, -0.8, 0.8) * s, uniform(rng, -0.8, 0.8) * s);
        const MeshGeometry a = make_box(lo, lo + Vector3d::Constant(s));
        const MeshGeometry b = make_box(lo + off, lo + off + Vector3d::Constant(s));
        const double exact = (s - std::abs(off.x())) * (s - std::abs(off.y())) * (s - std::abs(off.z())) / 1000.0;
        const double v = intersection_volume(a, b, 1.0);
        const double rel = std::abs(v - exact) / exact;
        worst_v = std::max(worst_v, rel);
        c.expect(rel < 0.05, str("cube pair ", t, ": volume ", v, " vs ", exact, " cm^3"));
    }

    for (const auto& m : {make_box({0, 0, 0}, {30, 20, 10}), make_icosphere({1, 2, 3}, 15, 3),
                          make_cylinder({0, 0, 0}, {0, 40, 5}, 8, 24)}) {
        c.expect(self_penetration(m) == 0, "convex fixture reports self-penetration");
    }
    const MeshGeometry crossed = merge({make_box({0, 0, 0}, {30, 30, 30}), make_box({10, 10, -10}, {20, 20, 40})});
    c.expect(self_penetration(crossed) > 0, "rod through a box reports no self-penetration");
    const ToyRig toy = make_toy_rig();
    std::vector<double> curls(15, 0.0);
    for (int f = 1; f < 5; ++f) curls[3 * f] = 100, curls[3 * f + 1] = 95;  // fingers fold into the palm
    c.expect(self_penetration(pose_mesh(toy.rig, flexion_pose(toy, curls))) > 0,
             "fingers folded through the palm report no self-penetration");
    return c.done(str("distance err <= ", worst_d, " mm (24 pairs <= 200 tris); volume rel err <= ", worst_v,
                      " (12 cube pairs, 1 mm); self-penetration 0 on convex, >0 on crossings"));
}

// ---------------------------------------------------------------- 8

Outcome rasterizer_invariants(const fs::path& fixture) {
    Check c;
    // Single triangle facing an axis-aligned camera.
    Camera cam;
    cam.fx = cam.fy = 64;
    cam.cx = cam.cy = 32;
    MeshGeometry tri;
    tri.vertices = {{-50, -50, 100}, {50, -50, 100}, {0, 50, 100}};
    tri.faces = {{0, 1, 2}};
    tri.normals.assign(3, Vector3d(0, 0, -1));
    const auto axis = rasterize({{&tri, Material{}}}, cam, 64, 64);
    int covered = 0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            if (axis.segmentation.at(x, y) == 0) continue;
            ++covered;
            c.expect(axis.normal_map.at(x, y, 0) == 128 && axis.normal_map.at(x, y, 1) == 128 &&
                         axis.normal_map.at(x, y, 2) == 255,
                     str("axis triangle pixel (", x, ",", y, ") is not (128,128,255)"));
        }
    }
    c.expect(covered > 100, "axis triangle covers too few pixels");

    // Shipped toy frames: unit normals and seg == finite depth everywhere.
    const Rig rig = make_toy_rig().rig;
    const AssetRegistry assets = AssetRegistry::load(fixture / "objects");
    const Manifest real = read_manifest(fixture / "real.jsonl");
    double worst = 0;
    std::size_t pixels = 0;
    for (std::size_t i = 0; i < real.entries.size(); i += 7) {
        const ConditionSet cs = render_conditions(real.entries[i].record, rig, assets, CameraSpec{}, 256, 256);
        for (int y = 0; y < cs.height(); ++y) {
            for (int x = 0; x < cs.width(); ++x) {
                const bool finite = std::isfinite(cs.depth[static_cast<std::size_t>(y) * cs.width() + x]);
                const bool labeled = cs.segmentation.at(x, y) != kLabelBackground;
                c.expect(finite == labeled, str("frame ", i, " pixel (", x, ",", y, "): seg/depth mismatch"));
                if (!labeled) continue;
                const Vector3d n = decode_normal(cs.normal_map, x, y);
                worst = std::max(worst, std::abs(n.norm() - 1.0));
                ++pixels;
            }
        }
    }
    c.expect(pixels > 10000, "too few foreground pixels rendered");
    c.expect(worst <= 2.0 / 255.0, str("decoded normal off unit length by ", worst));
    return c.done(str("axis case (128,128,255) on ", covered, " px; |n|-1 <= ", worst, " over ", pixels,
                      " px; seg == finite depth"));
}

// ---------------------------------------------------------------- 9

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
    }
    return out;
}

Outcome end_to_end_determinism(const fs::path& fixture) {
    Check c;
    const fs::path work = fs::temp_directory_path() / ("hb_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(work);
    PipelineConfig cfg = load_config(fixture / "pipeline.cfg");
    std::vector<std::map<std::string, std::string>> trees;
    std::vector<double> seconds;
    for (int run = 0; run < 3; ++run) {
        cfg.out_dir = work / ("run" + std::to_string(run));
        cfg.workers = run == 2 ? 8 : 1;
        const auto t0 = std::chrono::steady_clock::now();
        run_pipeline(cfg);
        seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        c.expect(seconds.back() < 120.0, str("run ", run, " took ", seconds.back(), " s"));
        trees.push_back(read_tree(cfg.out_dir));
    }
    const Manifest real = read_manifest(cfg.real_manifest);
    const Manifest syn = read_manifest(cfg.synthetic_manifest);
    c.expect(real.entries.size() == 100 && syn.entries.size() == 300, "fixture is not 100 real / 300 synthetic");
    c.expect(trees[0] == trees[1], "two runs with 1 worker differ");
    c.expect(trees[0] == trees[2], "1 worker and 8 workers differ");
    std::size_t images = 0;
    for (const auto& [name, _] : trees[0]) images += name.size() > 4 && name.substr(name.size() - 4) == ".png";
    c.expect(images > 0, "no images rendered");
    const auto report = nlohmann::json::parse(trees[0]["report.json"]);
    fs::remove_all(work);
    return c.done(str(trees[0].size(), " files (", images, " PNGs) byte-identical across 2 runs and 1 vs 8 workers; ",
                      report["stages"]["render"]["condition_sets"], " condition sets; runs took ", seconds[0], "/",
                      seconds[1], "/", seconds[2], " s"));
}

// ---------------------------------------------------------------- 10

Outcome metric_self_consistency() {
    Check c;
    Rng rng(1234);
    std::normal_distribution<double> g(0.0, 50.0);
    auto cloud = [&](int n) {
        PointSet p(n, 3);
        for (int i = 0; i < n; ++i) p.row(i) = Eigen::RowVector3d(g(rng), g(rng), g(rng));
        return p;
    };
    std::vector<EvalRecord> same;
    for (int i = 0; i < 40; ++i) {
        EvalRecord r;
        r.id = str("r", i);
        r.gt_joints = cloud(21);
        r.pred_joints = r.gt_joints;
        r.gt_vertices = cloud(300);
        r.pred_vertices = r.gt_vertices;
        same.push_back(r);
    }
    const MetricReport rep = compute_report(same);
    for (const auto* b : {&rep.root_relative, &rep.procrustes}) {
        const char* name = b == &rep.root_relative ? "root-relative" : "procrustes";
        c.expect(b->j_pe == 0.0 && b->v_pe == 0.0, str(name, " J-PE/V-PE not zero: ", b->j_pe, " ", b->v_pe));
        c.expect(b->j_auc == 1.0 && b->v_auc == 1.0, str(name, " AUC not 1: ", b->j_auc, " ", b->v_auc));
        c.expect(b->f == std::vector<double>{1.0, 1.0}, str(name, " F@5/F@15 not 1"));
    }

    // Idempotence on the kept set.
    std::vector<EvalRecord> noisy = same;
    std::normal_distribution<double> n1(0.0, 1.0);
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        const double sigma = 2.0 * static_cast<double>(i % 10);
        for (auto* p : {&noisy[i].pred_joints, &noisy[i].pred_vertices}) {
            for (Eigen::Index r = 0; r < p->rows(); ++r) {
                p->row(r) += sigma * Eigen::RowVector3d(n1(rng), n1(rng), n1(rng));
            }
        }
        evaluate(noisy[i]);
    }
    const auto first = edge_case_filter(noisy, 15.0, 15.0);
    const auto second = edge_case_filter(first.first, 15.0, 15.0);
    std::vector<std::string> a, b;
    for (const auto& r : first.first) a.push_back(r.id);
    for (const auto& r : second.first) b.push_back(r.id);
    c.expect(!first.second.empty() && !first.first.empty(), "filter fixture should both keep and drop");
    c.expect(a == b && second.second.empty(), "filter is not idempotent on its kept set");
    return c.done(str("identical pred/gt: PE 0, AUC 1, F 1 (root-relative and PA); filter kept ", a.size(), "/",
                      noisy.size(), " and re-filtering keeps all"));
}

}  // namespace

int main() {
    const fs::path fixture = fs::path(HB_SOURCE_DIR) / "data" / "toy";
    struct Criterion {
        const char* name;
        double limit_s;  // 0 for no runtime bound
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"fps-oracle-equivalence", 10.0, fps_oracle},
        {"fps-dispersion", 30.0, fps_dispersion},
        {"rre-rte-closed-forms", 0, rre_rte_closed_forms},
        {"cross-distribution-ordering", 0, cross_distribution_ordering},
        {"published-constants-defaults", 0, published_constants},
        {"procrustes-recovery", 0, procrustes_recovery},
        {"geometry-oracles", 0, geometry_oracles},
        {"rasterizer-invariants", 0, [&] { return rasterizer_invariants(fixture); }},
        {"end-to-end-determinism", 0, [&] { return end_to_end_determinism(fixture); }},
        {"metric-self-consistency", 0, metric_self_consistency},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {false, str("exception: ", e.what())};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.limit_s > 0 && s >= cr.limit_s) {
            o.pass = false;
            o.detail = str("took ", s, " s, limit ", cr.limit_s, " s; ", o.detail);
        }
        failed += !o.pass;
        std::printf("%s %-30s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", cr.name, o.detail.c_str(), s);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
