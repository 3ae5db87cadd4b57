// SPDX-License-Identifier: Apache-2.0
//
// Staged dataset pipeline. Every stage reads its inputs from the config and
// from earlier stages' files in the output directory, writes its own files
// plus `<stage>.stats.json`, then rebuilds report.json from all stats files.
// Running the stages one by one therefore leaves exactly the bytes that
// run_pipeline leaves.
//
//   label     real manifest        -> labeled.jsonl
//   sample    labeled + synthetic  -> candidates.jsonl   (also prepare.stats.json)
//   validate  candidates           -> validated.jsonl
//   render    labeled + validated  -> conditions/, dataset.jsonl, annotations.jsonl
//   filter    annotations + predictions -> kept.jsonl   (skipped without predictions)

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "handbooster/config.hpp"

namespace handbooster {

enum class Stage { label, sample, validate, render, filter };

const char* to_string(Stage s);
/// Throws ConfigError on unknown names.
Stage stage_from_string(const std::string& s);
const std::vector<Stage>& all_stages();

/// Runs one stage into `out` and refreshes report.json. Errors keep their
/// type and carry the stage name (and the record id where one applies).
void run_stage(Stage stage, const PipelineConfig& cfg, const std::filesystem::path& out);

/// All stages in a staging directory next to cfg.out_dir, which replaces
/// cfg.out_dir only on success. An existing out_dir must be an earlier
/// pipeline output (it holds report.json) or empty; otherwise ConfigError.
void run_pipeline(const PipelineConfig& cfg);

/// Human-readable plan for --dry-run.
std::string dry_run_plan(const PipelineConfig& cfg);

/// Rebuilds report.json in `out` from the stats files present there.
nlohmann::json write_report(const PipelineConfig& cfg, const std::filesystem::path& out);

}  // namespace handbooster
