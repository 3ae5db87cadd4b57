// SPDX-License-Identifier: Apache-2.0
//
// Similarity-aware pose sampling: greedy farthest-pose selection within one
// distribution, and dissimilarity-weighted sampling of synthetic poses
// against the selected real ones.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "handbooster/pose.hpp"
#include "handbooster/rng.hpp"

namespace handbooster {

struct PoseSet {
    std::string object_id;
    std::vector<PoseVector> vectors;
    std::vector<GraspRecord> records;  // parallel to vectors
    Source source = Source::real;

    std::size_t size() const { return vectors.size(); }

    /// Throws InvalidInput on length mismatch or mixed vector dimensions.
    void validate() const;

    /// Set built from bare vectors; records are placeholders indexed by position.
    static PoseSet from_vectors(std::vector<PoseVector> vectors, std::string object_id = "toy",
                                Source source = Source::real);

    /// Canonicalizes and embeds every record.
    static PoseSet from_records(std::vector<GraspRecord> records, std::string object_id, Source source);

    PoseSet subset(const std::vector<std::size_t>& indices) const;
};

struct FpsResult {
    PoseSet selected;
    std::vector<std::size_t> indices;  // into the input set, in selection order
    /// Nearest-selected distance of each pick at the time it was picked;
    /// the seed element has none, so this has indices.size() - 1 entries.
    std::vector<double> min_distance_trace;
};

/// Greedy max-min selection of M poses starting from P[start]. Ties go to
/// the lowest index. Throws InvalidInput if P is empty, M is not in
/// [1, |P|] or start is out of range.
FpsResult farthest_pose_sampling_from(const PoseSet& P, std::size_t M, std::size_t start);

/// As above with the start drawn uniformly from a seeded generator.
FpsResult farthest_pose_sampling(const PoseSet& P, std::size_t M, std::uint64_t seed);

struct SamplingDistribution {
    std::string object_id;
    std::vector<double> probabilities;  // over the synthetic set, sums to 1
    std::vector<double> raw_scores;     // sum_j (1 - cos(v_i^s, v_j^r))
};

/// Floor applied after min-max normalization so every pose stays reachable.
inline constexpr double kProbabilityFloor = 1e-3;

/// Scores each synthetic pose by its summed dissimilarity to the real set,
/// min-max normalizes, floors at kProbabilityFloor and sum-normalizes.
/// Equal scores give the uniform distribution. Throws InvalidInput on empty
/// sets, differing dimensions or differing object ids.
SamplingDistribution cross_distribution_weights(const PoseSet& synthetic, const PoseSet& real);

/// k independent categorical draws with replacement.
std::vector<std::size_t> draw(const SamplingDistribution& dist, std::size_t k, std::uint64_t seed);
std::size_t draw_one(const SamplingDistribution& dist, Rng& rng);

/// Smallest pairwise pose distance within a set (+inf for fewer than 2).
double min_pairwise_distance(const std::vector<PoseVector>& vectors);

}  // namespace handbooster
