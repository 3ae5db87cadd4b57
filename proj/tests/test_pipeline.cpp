// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "handbooster/config.hpp"
#include "handbooster/errors.hpp"
#include "handbooster/fixture.hpp"
#include "handbooster/manifest.hpp"
#include "handbooster/metrics.hpp"
#include "handbooster/pipeline.hpp"
#include "handbooster/skinning.hpp"

using namespace handbooster;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() /
                ("hb_" + tag + "_" + (info ? std::string(info->name()) : "x") + "_" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
    }
    return out;
}

// A small fixture so each pipeline run takes well under a second.
PipelineConfig small_setup(const fs::path& dir, FixtureOptions fx = {}, const std::string& extra = "") {
    if (fx.synthetic_grasps == 300) fx.synthetic_grasps = 45;
    fx.sequences = 3;
    fx.frames_per_sequence = 14;
    write_toy_fixture(dir, fx);
    std::string cfg = "real_manifest = real.jsonl\nassets = objects\nrig = toy\nout_dir = out\nseed = 11\n"
                      "draws_per_object = 4\nviews_per_pose = 1\nresolution = 64\n";
    if (fx.synthetic_grasps > 0) cfg += "synthetic_manifest = synthetic.jsonl\n";
    write_file_atomic(dir / "small.cfg", cfg + extra);
    return load_config(dir / "small.cfg");
}

json report_of(const fs::path& out) { return json::parse(read_file(out / "report.json")); }

std::string run_cli(const std::string& args, int& code) {
    const std::string cmd = std::string(HB_CLI) + " " + args + " > hb_cli_out.txt 2>&1";
    const int raw = std::system(cmd.c_str());
    code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::string text = read_file("hb_cli_out.txt");
    fs::remove("hb_cli_out.txt");
    return text;
}

}  // namespace

// ---------------------------------------------------------------- manifest

TEST(Manifest, RoundTripPreservesRecordsAndExtras) {
    TempDir tmp("manifest");
    const ToyRig toy = make_toy_rig();
    Manifest m;
    m.header.joint_count = 15;
    m.header.assets = "objects";
    GraspRecord g;
    g.sequence_id = "s";
    g.frame_index = 3;
    g.object_id = "mug";
    g.hand = flexion_pose(toy, std::vector<double>(15, 20.0));
    g.hand.root_translation = {1, 2, 3};
    g.object = ObjectPose(Quaternion(0.9, 0.1, -0.3, 0.2), Eigen::Vector3d(4, 5, 6));
    g.grasping = true;
    m.entries.push_back({g, {{"note", "kept"}}});
    write_manifest(tmp.path() / "m.jsonl", m);
    const Manifest r = read_manifest(tmp.path() / "m.jsonl");
    ASSERT_EQ(r.entries.size(), 1u);
    EXPECT_EQ(r.header.assets, "objects");
    const auto& h = r.entries[0].record;
    EXPECT_EQ(h.id(), "s:3");
    EXPECT_EQ(h.grasping, std::optional<bool>(true));
    EXPECT_LT((h.object.rotation() - g.object.rotation()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(h.hand.root_translation, g.hand.root_translation);
    EXPECT_EQ(r.entries[0].extra["note"], "kept");
    // A second pass is byte-stable.
    EXPECT_EQ(format_manifest(r), format_manifest(read_manifest(tmp.path() / "m.jsonl")));
}

TEST(Manifest, RejectsBadHeadersAndRecords) {
    TempDir tmp("manifest");
    const auto write = [&](const std::string& text) {
        write_file_atomic(tmp.path() / "m.jsonl", text);
        return tmp.path() / "m.jsonl";
    };
    const std::string rec =
        R"({"sequence_id":"s","frame_index":0,"source":"real","object_id":"o","hand":{"global_orient":[1,0,0,0],"joint_rots":[[1,0,0,0]]},"object":{"quat":[1,0,0,0],"translation":[0,0,0]}})";
    EXPECT_NO_THROW(read_manifest(write("{\"schema_version\":1,\"joint_count\":1}\n" + rec + "\n")));
    EXPECT_THROW(read_manifest(write("{\"schema_version\":2,\"joint_count\":1}\n")), DataError);
    EXPECT_THROW(read_manifest(write("{\"schema_version\":1,\"joint_count\":1,\"units\":\"m\"}\n")), DataError);
    EXPECT_THROW(read_manifest(write("{\"schema_version\":1,\"joint_count\":2}\n" + rec + "\n")), DataError);
    EXPECT_THROW(read_manifest(write("{\"schema_version\":1,\"joint_count\":1}\n" + rec + "\n" + rec + "\n")),
                 DataError);
    EXPECT_THROW(read_manifest(write("")), DataError);
    EXPECT_THROW(read_manifest(tmp.path() / "missing.jsonl"), DataError);
    try {
        read_manifest(write("{\"schema_version\":1,\"joint_count\":1}\n{\"sequence_id\":\"s\"}\n"));
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("m.jsonl:2"), std::string::npos) << e.what();
    }
}

// ---------------------------------------------------------------- config

TEST(Config, DefaultsAndValidation) {
    const PipelineConfig d = parse_config("real_manifest = r.jsonl\n", ".");
    EXPECT_EQ(d.M, 10u);
    EXPECT_EQ(d.N, 500u);
    EXPECT_EQ(d.resolution, 256);
    EXPECT_EQ(d.f_thresholds, (std::vector<double>{5, 15}));
    EXPECT_DOUBLE_EQ(d.label.rre_deg, 5.0);
    EXPECT_DOUBLE_EQ(d.label.rte_mm, 10.0);
    EXPECT_EQ(d.retry_cap, 10);
    EXPECT_THROW(parse_config("real_manifest = r.jsonl\n" "bogus = 1\n", "."), ConfigError);
    EXPECT_THROW(parse_config("real_manifest = r.jsonl\n" "M = 3\nM = 4\n", "."), ConfigError);
    EXPECT_THROW(parse_config("real_manifest = r.jsonl\n" "M = -3\n", "."), ConfigError);
    EXPECT_THROW(parse_config("real_manifest = r.jsonl\n" "M 3\n", "."), ConfigError);
    EXPECT_THROW(parse_config("real_manifest = r.jsonl\n" "resolution = 0\n", "."), ConfigError);
    EXPECT_THROW(parse_config("real_manifest = r.jsonl\n" "predictions = p.jsonl\nedge_j_mm = 5\n", "."), ConfigError);
    EXPECT_THROW(parse_config("real_manifest = r.jsonl\n" "variant = sketch\n", "."), ConfigError);
    const PipelineConfig p = parse_config("# comment\n\nreal_manifest = a/r.jsonl\nseed = 9\n", "/base");
    EXPECT_EQ(p.real_manifest, fs::path("/base/a/r.jsonl"));
    EXPECT_EQ(p.seed, 9u);
}

TEST(Config, HashIgnoresOutputDirAndWorkers) {
    PipelineConfig a = parse_config("real_manifest = r.jsonl\nseed = 1\n", ".");
    PipelineConfig b = a;
    b.out_dir = "elsewhere";
    b.workers = 8;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// ---------------------------------------------------------------- pipeline

TEST(Pipeline, DeterministicAcrossRunsAndWorkerCounts) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    cfg.out_dir = tmp.path() / "a";
    run_pipeline(cfg);
    cfg.out_dir = tmp.path() / "b";
    run_pipeline(cfg);
    cfg.out_dir = tmp.path() / "c";
    cfg.workers = 8;
    run_pipeline(cfg);
    const auto a = read_tree(tmp.path() / "a");
    EXPECT_GT(a.size(), 20u);
    EXPECT_TRUE(a == read_tree(tmp.path() / "b"));
    EXPECT_TRUE(a == read_tree(tmp.path() / "c"));
    EXPECT_FALSE(fs::exists(tmp.path() / "a.staging"));
}

TEST(Pipeline, ChainedStagesMatchRun) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    cfg.out_dir = tmp.path() / "run";
    run_pipeline(cfg);
    for (Stage s : all_stages()) run_stage(s, cfg, tmp.path() / "chain");
    EXPECT_TRUE(read_tree(tmp.path() / "run") == read_tree(tmp.path() / "chain"));
}

TEST(Pipeline, OutputsTraceBackToRecords) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    run_pipeline(cfg);
    const fs::path out = cfg.out_dir;
    std::set<std::string> sources;
    for (const auto& e : read_manifest(out / "labeled.jsonl").entries) sources.insert(e.record.id());
    for (const auto& e : read_manifest(out / "validated.jsonl").entries) sources.insert(e.record.id());
    const Manifest ds = read_manifest(out / "dataset.jsonl");
    ASSERT_FALSE(ds.entries.empty());
    std::set<std::string> stems;
    for (const auto& e : ds.entries) {
        EXPECT_TRUE(sources.count(e.extra["origin"].get<std::string>())) << e.extra["origin"];
        const std::string stem = e.extra["stem"];
        EXPECT_TRUE(stems.insert(stem).second);
        EXPECT_TRUE(fs::exists(out / "conditions" / (stem + ".json")));
        EXPECT_TRUE(fs::exists(out / "conditions" / (stem + ".seg.png")));
    }
    // Every evaluated synthetic attempt is either accepted or rejected.
    const json r = report_of(out);
    const auto& v = r["stages"]["validate"];
    std::size_t skipped = v["rejections"].value("object-skipped", 0);
    EXPECT_EQ(v["attempts_evaluated"].get<std::size_t>(),
              v["accepted"].get<std::size_t>() + skipped + v["rejected_attempts"].get<std::size_t>());
    EXPECT_EQ(r["stages"]["render"]["synthetic_records"], v["accepted"]);
    EXPECT_EQ(r["mode"], "full");
    EXPECT_EQ(r["seed"], 11);
    EXPECT_EQ(r["config_hash"], config_hash(cfg));
    EXPECT_EQ(r["inputs"]["real_manifest"]["sha256"], sha256_hex(read_file(cfg.real_manifest)));
}

TEST(Pipeline, EmptySyntheticPoolRunsNovelViewOnly) {
    TempDir tmp("pipe");
    FixtureOptions fx;
    fx.synthetic_grasps = 0;
    PipelineConfig cfg = small_setup(tmp.path(), fx);
    run_pipeline(cfg);
    const json r = report_of(cfg.out_dir);
    EXPECT_EQ(r["mode"], "novel-view-only");
    EXPECT_GE(r["warning_count"].get<int>(), 1);
    EXPECT_EQ(r["stages"]["render"]["synthetic_records"], 0);
    EXPECT_GT(r["stages"]["render"]["condition_sets"].get<int>(), 0);
}

TEST(Pipeline, ExhaustedRetryCapSkipsObject) {
    TempDir tmp("pipe");
    FixtureOptions fx;
    fx.far_fraction = 1.0;  // nothing touches the hand
    fx.deep_fraction = 0.0;
    PipelineConfig cfg = small_setup(tmp.path(), fx, "retry_cap = 3\n");
    run_pipeline(cfg);
    const json r = report_of(cfg.out_dir);
    const auto& v = r["stages"]["validate"];
    EXPECT_EQ(v["accepted"], 0);
    EXPECT_EQ(v["skipped_objects"].size(), 3u);
    EXPECT_GE(r["warning_count"].get<int>(), 3);
    EXPECT_EQ(v["rejections"]["no-contact"], v["attempts_evaluated"]);
    EXPECT_EQ(v["attempts_evaluated"], 3 * 4 * 3);
    EXPECT_EQ(r["stages"]["render"]["synthetic_records"], 0);
}

TEST(Pipeline, StaticObjectsYieldNoGraspingFrames) {
    TempDir tmp("pipe");
    FixtureOptions fx;
    fx.static_objects = true;
    PipelineConfig cfg = small_setup(tmp.path(), fx);
    run_stage(Stage::label, cfg, cfg.out_dir);
    const Manifest m = read_manifest(cfg.out_dir / "labeled.jsonl");
    ASSERT_EQ(m.entries.size(), 42u);
    for (const auto& e : m.entries) EXPECT_EQ(e.record.grasping, std::optional<bool>(false)) << e.record.id();
    EXPECT_EQ(report_of(cfg.out_dir)["stages"]["label"]["grasping_frames"], 0);
}

TEST(Pipeline, MovingFixtureLabelsLiftFrames) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    run_stage(Stage::label, cfg, cfg.out_dir);
    for (const auto& e : read_manifest(cfg.out_dir / "labeled.jsonl").entries) {
        // Approach frames never move the object; lift frames move it 4 mm per
        // frame, crossing 10 mm on the third.
        EXPECT_EQ(*e.record.grasping, e.record.frame_index >= 10) << e.record.id();
    }
}

TEST(Pipeline, ErrorsNameStageAndRecordAndLeaveNoOutput) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    // Point one real record at an object the registry lacks.
    std::string text = read_file(cfg.real_manifest);
    const auto pos = text.find("\"object_id\":\"mug\"");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 17, "\"object_id\":\"cup\"");
    write_file_atomic(cfg.real_manifest, text);
    try {
        run_pipeline(cfg);
        FAIL();
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("stage label"), std::string::npos) << msg;
        EXPECT_NE(msg.find("seq00:0"), std::string::npos) << msg;
    }
    EXPECT_FALSE(fs::exists(cfg.out_dir));
    fs::path staging = cfg.out_dir;
    staging += ".staging";
    EXPECT_FALSE(fs::exists(staging));
}

TEST(Pipeline, RefusesForeignOutputDirectory) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    fs::create_directories(cfg.out_dir);
    write_file_atomic(cfg.out_dir / "precious.txt", "x");
    EXPECT_THROW(run_pipeline(cfg), ConfigError);
    EXPECT_TRUE(fs::exists(cfg.out_dir / "precious.txt"));
}

TEST(Pipeline, StageOutOfOrderIsDataError) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    EXPECT_THROW(run_stage(Stage::render, cfg, cfg.out_dir), DataError);
}

TEST(Pipeline, FilterDropsRecordsAboveThresholds) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    for (Stage s : {Stage::label, Stage::sample, Stage::validate, Stage::render}) run_stage(s, cfg, cfg.out_dir);

    // Predictions: exact except every third record, whose non-root joints and
    // vertices are offset by 30 mm (a whole-hand shift would cancel out).
    std::istringstream in(read_file(cfg.out_dir / "annotations.jsonl"));
    std::string line, pred;
    std::set<std::string> expect_dropped;
    std::size_t n = 0;
    for (; std::getline(in, line); ++n) {
        json a = json::parse(line);
        if (n % 3 == 0) {
            expect_dropped.insert(a["id"]);
            for (std::size_t j = 1; j < a["joints"].size(); ++j) a["joints"][j][0] = a["joints"][j][0].get<double>() + 30.0;
            for (auto& p : a["vertices"]) p[0] = p[0].get<double>() + 30.0;
        }
        pred += a.dump() + "\n";
    }
    write_file_atomic(tmp.path() / "pred.jsonl", pred);
    cfg.predictions = tmp.path() / "pred.jsonl";
    cfg.edge_j_mm = 20;
    cfg.edge_v_mm = 20;
    run_stage(Stage::filter, cfg, cfg.out_dir);

    const json f = report_of(cfg.out_dir)["stages"]["filter"];
    EXPECT_EQ(f["skipped"], false);
    EXPECT_EQ(f["input"], n);
    EXPECT_EQ(f["kept"], n - expect_dropped.size());
    EXPECT_EQ(f["dropped"].get<std::set<std::string>>(), expect_dropped);
    EXPECT_DOUBLE_EQ(f["metrics_after"]["root_relative"]["J-PE"].get<double>(), 0.0);
    const Manifest kept = read_manifest(cfg.out_dir / "kept.jsonl");
    EXPECT_EQ(kept.entries.size(), n - expect_dropped.size());
    for (const auto& e : kept.entries) EXPECT_FALSE(expect_dropped.count(e.extra["stem"].get<std::string>()));
}

TEST(Pipeline, AnnotationsAgainstThemselvesScorePerfectly) {
    TempDir tmp("pipe");
    PipelineConfig cfg = small_setup(tmp.path());
    run_pipeline(cfg);
    auto records = load_eval_records(cfg.out_dir / "annotations.jsonl", cfg.out_dir / "annotations.jsonl");
    const MetricReport r = compute_report(records);
    EXPECT_EQ(r.root_relative.j_pe, 0.0);
    EXPECT_EQ(r.root_relative.v_pe, 0.0);
    EXPECT_EQ(r.root_relative.j_auc, 1.0);
    EXPECT_EQ(r.root_relative.v_auc, 1.0);
    EXPECT_EQ(r.root_relative.f, (std::vector<double>{1.0, 1.0}));
}

// ---------------------------------------------------------------- CLI

TEST(Cli, ExitCodesAndDryRun) {
    TempDir tmp("cli");
    small_setup(tmp.path());
    const std::string cfg = (tmp.path() / "small.cfg").string();
    int code = -1;

    std::string text = run_cli("run --config " + cfg + " --dry-run", code);
    EXPECT_EQ(code, 0) << text;
    text = run_cli("run --config " + cfg + " --dry-run --out " + (tmp.path() / "o").string(), code);
    EXPECT_FALSE(fs::exists(tmp.path() / "o"));

    // Defaults: a config that leaves everything unset.
    write_file_atomic(tmp.path() / "defaults.cfg", "real_manifest = real.jsonl\n");
    text = run_cli("run --config " + (tmp.path() / "defaults.cfg").string() + " --dry-run", code);
    EXPECT_EQ(code, 0);
    for (const char* s : {"M=10", "N=500", "256x256", "F thresholds 5/15 mm"}) {
        EXPECT_NE(text.find(s), std::string::npos) << s << "\n" << text;
    }

    run_cli("run --config " + (tmp.path() / "nope.cfg").string(), code);
    EXPECT_EQ(code, 2);
    write_file_atomic(tmp.path() / "bad.cfg", "M = ten\n");
    run_cli("run --config " + (tmp.path() / "bad.cfg").string(), code);
    EXPECT_EQ(code, 2);
    run_cli("frobnicate", code);
    EXPECT_EQ(code, 2);
    run_cli("render --config " + cfg + " --out " + (tmp.path() / "fresh").string(), code);
    EXPECT_EQ(code, 3);

    text = run_cli("run --config " + cfg + " --seed 5 --workers 2 --out " + (tmp.path() / "o").string(), code);
    EXPECT_EQ(code, 0) << text;
    EXPECT_EQ(report_of(tmp.path() / "o")["seed"], 5);

    const std::string ann = (tmp.path() / "o" / "annotations.jsonl").string();
    text = run_cli("metrics --pred " + ann + " --gt " + ann + " --out " + (tmp.path() / "m.json").string(), code);
    EXPECT_EQ(code, 0) << text;
    const json m = json::parse(read_file(tmp.path() / "m.json"));
    EXPECT_EQ(m["root_relative"]["J-PE"], 0.0);
    EXPECT_EQ(m["root_relative"]["J-AUC"], 1.0);
    EXPECT_EQ(m["procrustes"]["F@15"], 1.0);
}

TEST(Fixture, ShippedToyDatasetMatchesGenerator) {
    TempDir tmp("fixture");
    write_toy_fixture(tmp.path());
    const fs::path shipped = fs::path(HB_SOURCE_DIR) / "data" / "toy";
    for (const auto& [name, bytes] : read_tree(tmp.path())) {
        ASSERT_TRUE(fs::exists(shipped / name)) << name;
        EXPECT_TRUE(read_file(shipped / name) == bytes) << name << " is stale; regenerate with make-fixture";
    }
    const Manifest real = read_manifest(shipped / "real.jsonl");
    const Manifest syn = read_manifest(shipped / "synthetic.jsonl");
    EXPECT_EQ(real.entries.size(), 100u);
    EXPECT_EQ(syn.entries.size(), 300u);
    std::set<std::string> objects;
    for (const auto& e : real.entries) objects.insert(e.record.object_id);
    EXPECT_EQ(objects, (std::set<std::string>{"ball", "box", "mug"}));
}
