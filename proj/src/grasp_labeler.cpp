// SPDX-License-Identifier: Apache-2.0

#include "handbooster/grasp_labeler.hpp"

#include <algorithm>

#include "handbooster/errors.hpp"

namespace handbooster {

double rre(const ObjectPose& first, const ObjectPose& current) {
    return rotation_angle(current.rotation().transpose() * first.rotation());
}

double rte(const ObjectPose& first, const ObjectPose& current) {
    return (current.translation() - first.translation()).norm();
}

std::vector<GraspRecord> label_sequence(std::vector<GraspRecord> frames, const LabelThresholds& th) {
    if (frames.empty()) throw InvalidInput("label_sequence: empty sequence");
    const std::string& seq = frames.front().sequence_id;
    for (const auto& f : frames) {
        if (f.sequence_id != seq) {
            throw InvalidInput("label_sequence: mixed sequence ids '" + seq + "' and '" + f.sequence_id + "'");
        }
    }
    std::stable_sort(frames.begin(), frames.end(),
                     [](const GraspRecord& a, const GraspRecord& b) { return a.frame_index < b.frame_index; });
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].frame_index == frames[i - 1].frame_index) {
            throw InvalidInput("label_sequence: duplicate frame index in " + frames[i].id());
        }
    }
    const ObjectPose first = frames.front().object;
    frames.front().grasping = false;
    for (std::size_t i = 1; i < frames.size(); ++i) {
        const bool rot = rre(first, frames[i].object) > th.rre_deg;
        const bool trans = rte(first, frames[i].object) > th.rte_mm;
        frames[i].grasping = th.rule == MotionRule::either ? (rot || trans) : (rot && trans);
    }
    return frames;
}

}  // namespace handbooster
