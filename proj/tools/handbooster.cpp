// SPDX-License-Identifier: Apache-2.0
//
// handbooster <label|sample|validate|render|filter|run|metrics|make-fixture>
// Exit codes: 0 ok, 2 configuration error, 3 data or processing error.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "handbooster/config.hpp"
#include "handbooster/errors.hpp"
#include "handbooster/fixture.hpp"
#include "handbooster/manifest.hpp"
#include "handbooster/metrics.hpp"
#include "handbooster/pipeline.hpp"

namespace hb = handbooster;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct CommonOpts {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> workers;
    bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config, "pipeline config file (key = value)")->required();
    cmd->add_option("--seed", o.seed, "override the root seed");
    cmd->add_option("--out", o.out, "override the output directory");
    cmd->add_option("--workers", o.workers, "worker threads");
    cmd->add_flag("--dry-run", o.dry_run, "print the stage plan and exit");
}

hb::PipelineConfig resolve(const CommonOpts& o) {
    hb::PipelineConfig cfg = hb::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out_dir = *o.out;
    if (o.workers) cfg.workers = *o.workers;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hand-object grasp dataset pipeline"};
    app.require_subcommand(1);

    CommonOpts common;
    std::vector<std::pair<CLI::App*, std::optional<hb::Stage>>> pipeline_cmds;
    for (hb::Stage s : hb::all_stages()) {
        auto* cmd = app.add_subcommand(hb::to_string(s), std::string("run the ") + hb::to_string(s) + " stage");
        add_common(cmd, common);
        pipeline_cmds.emplace_back(cmd, s);
    }
    auto* run = app.add_subcommand("run", "run every stage");
    add_common(run, common);
    pipeline_cmds.emplace_back(run, std::nullopt);

    std::string pred, gt, metrics_out, metrics_cfg;
    bool per_joint = false, index_matching = false;
    int metric_workers = 1;
    auto* metrics = app.add_subcommand("metrics", "evaluate predictions against ground truth (JSON lines)");
    metrics->add_option("--pred", pred, "predictions")->required();
    metrics->add_option("--gt", gt, "ground truth")->required();
    metrics->add_option("--config", metrics_cfg, "take AUC range and F thresholds from a pipeline config");
    metrics->add_option("--out", metrics_out, "also write the report as JSON here");
    metrics->add_flag("--per-joint-auc", per_joint, "AUC over per-joint errors instead of per-record means");
    metrics->add_flag("--index-matching", index_matching, "F-score pairs points by index");
    metrics->add_option("--workers", metric_workers, "worker threads");

    std::string fixture_dir;
    hb::FixtureOptions fx;
    auto* fixture = app.add_subcommand("make-fixture", "write the toy dataset");
    fixture->add_option("--out", fixture_dir, "target directory")->required();
    fixture->add_option("--seed", fx.seed, "fixture seed");
    fixture->add_option("--synthetic", fx.synthetic_grasps, "number of synthetic grasps (0 for none)");
    fixture->add_flag("--static-objects", fx.static_objects, "objects never move (no grasping frames)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        for (const auto& [cmd, stage] : pipeline_cmds) {
            if (!cmd->parsed()) continue;
            const hb::PipelineConfig cfg = resolve(common);
            if (common.dry_run) {
                std::cout << hb::dry_run_plan(cfg);
                return 0;
            }
            if (stage) {
                hb::run_stage(*stage, cfg, cfg.out_dir);
            } else {
                hb::run_pipeline(cfg);
            }
            std::cout << (stage ? hb::to_string(*stage) : "run") << ": done, report at "
                      << (cfg.out_dir / "report.json").string() << "\n";
            return 0;
        }
        if (metrics->parsed()) {
            hb::MetricOptions opts;
            if (!metrics_cfg.empty()) {
                const auto cfg = hb::load_config(metrics_cfg);
                opts.auc_t_max = cfg.auc_t_max;
                opts.auc_steps = cfg.auc_steps;
                opts.f_thresholds = cfg.f_thresholds;
            }
            opts.per_joint_auc = per_joint;
            opts.matching = index_matching ? hb::FMatching::index : hb::FMatching::nearest;
            opts.workers = metric_workers;
            auto records = hb::load_eval_records(pred, gt);
            const auto report = hb::compute_report(records, opts);
            std::cout << hb::report_to_table(report);
            if (!metrics_out.empty()) hb::write_file_atomic(metrics_out, hb::report_to_json(report).dump(2) + "\n");
            return 0;
        }
        if (fixture->parsed()) {
            hb::write_toy_fixture(fixture_dir, fx);
            std::cout << "fixture written to " << fixture_dir << "\n";
            return 0;
        }
    } catch (const hb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const hb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
