// SPDX-License-Identifier: Apache-2.0
//
// Hand reconstruction metrics (position errors, PCK AUC, F-scores, with and
// without Procrustes alignment) and the edge-case filter built on them.

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace handbooster {

using PointSet = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Deterministic pairwise (cascade) summation.
double pairwise_sum(const double* values, std::size_t n);
double pairwise_mean(const std::vector<double>& values);

/// Throws InvalidInput if root_index is out of range.
PointSet root_relative(const PointSet& points, Eigen::Index root_index = 0);

/// Per-point Euclidean distances. Throws InvalidInput on shape mismatch.
std::vector<double> point_errors(const PointSet& pred, const PointSet& gt);
/// Mean per-point distance, mm.
double position_error(const PointSet& pred, const PointSet& gt);

struct Similarity {
    double scale = 1.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    PointSet apply(const PointSet& p) const;
};

/// Least-squares similarity taking pred onto gt. Throws InvalidInput on
/// shape mismatch and DegenerateError when either set has fewer than 3
/// points or is collinear or coincident. Identical sets give the identity.
Similarity procrustes_transform(const PointSet& pred, const PointSet& gt);
PointSet procrustes_align(const PointSet& pred, const PointSet& gt);

/// Normalized trapezoidal area under the fraction-of-errors-<=-t curve on
/// steps+1 evenly spaced thresholds in [0, t_max]. Throws InvalidInput on
/// empty input and ConfigError on t_max <= 0 or steps < 1.
double pck_auc(const std::vector<double>& errors, double t_max = 50.0, int steps = 100);

enum class FMatching { nearest, index };

/// Harmonic mean of precision and recall at distance t. Nearest-neighbor
/// matching by default; index mode pairs point i with point i and requires
/// equal sizes. Throws InvalidInput on empty sets.
double f_score(const PointSet& pred, const PointSet& gt, double t, FMatching matching = FMatching::nearest);

struct EvalRecord {
    std::string id;
    PointSet pred_joints, gt_joints;
    PointSet pred_vertices, gt_vertices;  // may both be empty
    double j_pe = 0, v_pe = 0, j_pe_pa = 0, v_pe_pa = 0;  // NaN for vertex metrics without vertices

    bool has_vertices() const { return gt_vertices.rows() > 0; }
};

/// Fills the derived errors. Joints are made relative to joint 0 and
/// vertices relative to the same root joint. Throws InvalidInput on shape
/// mismatch.
void evaluate(EvalRecord& r);

/// Splits into (kept, dropped), preserving order. A record is dropped when
/// j_pe > j_thresh or v_pe > v_thresh. Records must already be evaluated.
/// Throws ConfigError unless both thresholds are positive.
std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> edge_case_filter(const std::vector<EvalRecord>& records,
                                                                             double j_thresh, double v_thresh);

struct MetricOptions {
    double auc_t_max = 50.0;
    int auc_steps = 100;
    bool per_joint_auc = false;
    std::vector<double> f_thresholds{5.0, 15.0};
    FMatching matching = FMatching::nearest;
    int workers = 1;
};

struct MetricBlock {
    double j_pe = 0, j_auc = 0, v_pe = 0, v_auc = 0;
    std::vector<double> f;  // one per f threshold
};

struct MetricReport {
    std::size_t count = 0;
    MetricOptions options;
    MetricBlock root_relative;
    MetricBlock procrustes;
};

/// Evaluates every record (in parallel) and aggregates. AUCs pool all
/// point errors unless per_joint_auc is set, in which case joint AUCs are
/// computed per joint index and averaged.
MetricReport compute_report(std::vector<EvalRecord>& records, const MetricOptions& opts = {});

nlohmann::json report_to_json(const MetricReport& r);
std::string report_to_table(const MetricReport& r);

/// Joins prediction and ground-truth JSON-lines files by "id". Each line is
/// {"id": ..., "joints": [[x,y,z], ...], "vertices": [[x,y,z], ...]} with
/// vertices optional. Output follows the prediction file's order. Throws
/// DataError on malformed lines, duplicate ids or ids missing from either
/// side.
std::vector<EvalRecord> load_eval_records(const std::filesystem::path& predictions,
                                          const std::filesystem::path& ground_truth);

}  // namespace handbooster
