// SPDX-License-Identifier: Apache-2.0
//
// Pipeline configuration: a plain `key = value` file. Blank lines and lines
// starting with '#' are ignored; unknown keys are errors. Relative paths
// resolve against the config file's directory.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "handbooster/condition_gen.hpp"
#include "handbooster/grasp_labeler.hpp"
#include "handbooster/validator.hpp"

namespace handbooster {

struct PipelineConfig {
    std::filesystem::path real_manifest;
    std::filesystem::path synthetic_manifest;  // optional; empty pool when unset
    std::filesystem::path assets;              // defaults to the real manifest header's
    std::string rig = "toy";                   // "toy" or a rig JSON path
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    int workers = 1;

    LabelThresholds label;
    std::size_t M = 10;
    std::size_t N = 500;
    std::size_t draws_per_object = 20;
    int retry_cap = 10;

    ValidationThresholds validation;

    int views_per_pose = 2;
    double max_perturb_deg = 30.0;
    int resolution = 256;
    ConditionVariant variant = ConditionVariant::normal_texture;
    CameraSpec camera;

    std::optional<double> edge_j_mm;
    std::optional<double> edge_v_mm;
    std::filesystem::path predictions;  // optional; filter stage is skipped without it

    double auc_t_max = 50.0;
    int auc_steps = 100;
    std::vector<double> f_thresholds{5.0, 15.0};

    /// Throws ConfigError on any out-of-range value.
    void validate() const;

    /// Canonical `key = value` listing of every setting, sorted by key.
    std::string canonical() const;
};

/// Throws ConfigError on syntax errors, unknown or repeated keys and bad
/// values.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// SHA-256 (hex) of the canonical listing without out_dir and workers.
std::string config_hash(const PipelineConfig& cfg);

std::string sha256_hex(const std::string& bytes);

}  // namespace handbooster
