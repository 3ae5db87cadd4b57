// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "handbooster/pose.hpp"

namespace handbooster {

/// Relative rotation error between two object poses, degrees.
double rre(const ObjectPose& first, const ObjectPose& current);

/// Relative translation error between two object poses, mm.
double rte(const ObjectPose& first, const ObjectPose& current);

enum class MotionRule {
    either,  // grasping if RRE or RTE exceeds its threshold
    both,    // grasping only if both exceed
};

struct LabelThresholds {
    double rre_deg = 5.0;
    double rte_mm = 10.0;
    MotionRule rule = MotionRule::either;
};

/// Labels every frame of one sequence against its first frame. Frames must
/// share a sequence_id; they are processed in frame_index order and returned
/// in that order. Comparisons are strict, so a frame exactly at a threshold
/// stays non-grasping. Throws InvalidInput on empty input, mixed sequences
/// or duplicate frame indices.
std::vector<GraspRecord> label_sequence(std::vector<GraspRecord> frames, const LabelThresholds& th = {});

}  // namespace handbooster
