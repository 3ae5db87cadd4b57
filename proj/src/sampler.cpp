// SPDX-License-Identifier: Apache-2.0

#include "handbooster/sampler.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "handbooster/errors.hpp"

namespace handbooster {

void PoseSet::validate() const {
    if (records.size() != vectors.size()) throw InvalidInput("pose set '" + object_id + "': records/vectors length mismatch");
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) throw InvalidInput("pose set '" + object_id + "': mixed vector dimensions");
    }
}

PoseSet PoseSet::from_vectors(std::vector<PoseVector> vectors, std::string object_id, Source source) {
    PoseSet s;
    s.object_id = std::move(object_id);
    s.source = source;
    s.records.resize(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        s.records[i].object_id = s.object_id;
        s.records[i].source = source;
        s.records[i].frame_index = static_cast<std::int64_t>(i);
    }
    s.vectors = std::move(vectors);
    s.validate();
    return s;
}

PoseSet PoseSet::from_records(std::vector<GraspRecord> records, std::string object_id, Source source) {
    PoseSet s;
    s.object_id = std::move(object_id);
    s.source = source;
    s.vectors.reserve(records.size());
    for (const auto& r : records) s.vectors.push_back(build_pose_vector(canonicalize(r)));
    s.records = std::move(records);
    s.validate();
    return s;
}

PoseSet PoseSet::subset(const std::vector<std::size_t>& indices) const {
    PoseSet s;
    s.object_id = object_id;
    s.source = source;
    for (std::size_t i : indices) {
        s.vectors.push_back(vectors.at(i));
        s.records.push_back(records.at(i));
    }
    return s;
}

FpsResult farthest_pose_sampling_from(const PoseSet& P, std::size_t M, std::size_t start) {
    P.validate();
    const std::size_t n = P.size();
    if (n == 0) throw InvalidInput("farthest pose sampling on an empty set");
    if (M < 1 || M > n) {
        throw InvalidInput("farthest pose sampling: M=" + std::to_string(M) + " outside [1, " + std::to_string(n) + "]");
    }
    if (start >= n) throw InvalidInput("farthest pose sampling: start index out of range");

    FpsResult out;
    std::vector<bool> chosen(n, false);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::size_t last = start;
    chosen[start] = true;
    out.indices.push_back(start);
    while (out.indices.size() < M) {
        std::size_t best = n;
        double best_d = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) continue;
            nearest[i] = std::min(nearest[i], pose_distance(P.vectors[i], P.vectors[last]));
            if (nearest[i] > best_d) {
                best_d = nearest[i];
                best = i;
            }
        }
        chosen[best] = true;
        out.indices.push_back(best);
        out.min_distance_trace.push_back(best_d);
        last = best;
    }
    out.selected = P.subset(out.indices);
    return out;
}

FpsResult farthest_pose_sampling(const PoseSet& P, std::size_t M, std::uint64_t seed) {
    if (P.size() == 0) throw InvalidInput("farthest pose sampling on an empty set");
    Rng rng(seed);
    return farthest_pose_sampling_from(P, M, uniform_index(rng, P.size()));
}

SamplingDistribution cross_distribution_weights(const PoseSet& synthetic, const PoseSet& real) {
    synthetic.validate();
    real.validate();
    if (synthetic.size() == 0 || real.size() == 0) throw InvalidInput("cross-distribution weights need non-empty sets");
    if (synthetic.vectors.front().size() != real.vectors.front().size()) {
        throw InvalidInput("cross-distribution weights: synthetic and real vectors differ in dimension");
    }
    if (synthetic.object_id != real.object_id) {
        throw InvalidInput("cross-distribution weights: object ids differ ('" + synthetic.object_id + "' vs '" +
                           real.object_id + "')");
    }
    SamplingDistribution d;
    d.object_id = synthetic.object_id;
    d.raw_scores.resize(synthetic.size());
    for (std::size_t i = 0; i < synthetic.size(); ++i) {
        double s = 0.0;
        for (const auto& r : real.vectors) s += 1.0 - cosine_similarity(synthetic.vectors[i], r);
        d.raw_scores[i] = s;
    }
    const auto [lo_it, hi_it] = std::minmax_element(d.raw_scores.begin(), d.raw_scores.end());
    const double lo = *lo_it, hi = *hi_it;
    d.probabilities.assign(synthetic.size(), 1.0 / static_cast<double>(synthetic.size()));
    if (hi > lo) {
        double total = 0.0;
        for (std::size_t i = 0; i < synthetic.size(); ++i) {
            d.probabilities[i] = std::max((d.raw_scores[i] - lo) / (hi - lo), kProbabilityFloor);
            total += d.probabilities[i];
        }
        for (auto& p : d.probabilities) p /= total;
    }
    return d;
}

std::size_t draw_one(const SamplingDistribution& dist, Rng& rng) {
    if (dist.probabilities.empty()) throw InvalidInput("draw from an empty distribution");
    // Linear scan of the running sum; the last positive bucket absorbs
    // rounding at the top end.
    const double u = uniform(rng, 0.0, 1.0);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
        if (dist.probabilities[i] <= 0.0) continue;
        acc += dist.probabilities[i];
        last_positive = i;
        if (u < acc) return i;
    }
    return last_positive;
}

std::vector<std::size_t> draw(const SamplingDistribution& dist, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw InvalidInput("draw count must be at least 1");
    Rng rng(seed);
    std::vector<std::size_t> out(k);
    for (auto& i : out) i = draw_one(dist, rng);
    return out;
}

double min_pairwise_distance(const std::vector<PoseVector>& vectors) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) best = std::min(best, pose_distance(vectors[i], vectors[j]));
    }
    return best;
}

}  // namespace handbooster
