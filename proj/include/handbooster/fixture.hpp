// SPDX-License-Identifier: Apache-2.0
//
// Generator for the shipped toy dataset: three object meshes, real capture
// sequences in which a hand approaches and then lifts an object, and a pool
// of canonical synthetic grasps around the palm.

#pragma once

#include <cstdint>
#include <filesystem>

namespace handbooster {

struct FixtureOptions {
    std::uint64_t seed = 2024;
    int sequences = 5;
    int frames_per_sequence = 20;
    int synthetic_grasps = 300;
    /// Fraction of synthetic grasps placed out of reach (no contact) and
    /// pushed into the palm (intersection), respectively.
    double far_fraction = 0.1;
    double deep_fraction = 0.1;
    /// When true every object in the real sequences stays put.
    bool static_objects = false;
};

/// Writes objects/*.obj, real.jsonl, synthetic.jsonl (omitted when
/// synthetic_grasps is 0), toy_rig.json and pipeline.cfg into `dir`.
void write_toy_fixture(const std::filesystem::path& dir, const FixtureOptions& opts = {});

}  // namespace handbooster
