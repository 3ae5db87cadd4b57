// SPDX-License-Identifier: Apache-2.0

#include "handbooster/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "handbooster/errors.hpp"
#include "handbooster/parallel.hpp"

namespace handbooster {

double pairwise_sum(const double* values, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += values[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

double pairwise_mean(const std::vector<double>& values) {
    if (values.empty()) throw InvalidInput("mean of an empty list");
    return pairwise_sum(values.data(), values.size()) / static_cast<double>(values.size());
}

PointSet root_relative(const PointSet& points, Eigen::Index root_index) {
    if (root_index < 0 || root_index >= points.rows()) throw InvalidInput("root index out of range");
    PointSet out = points;
    out.rowwise() -= points.row(root_index);
    return out;
}

namespace {

void check_shapes(const PointSet& pred, const PointSet& gt, const std::string& what) {
    if (pred.rows() != gt.rows()) {
        throw InvalidInput(what + ": prediction has " + std::to_string(pred.rows()) +
                           " points, ground truth " + std::to_string(gt.rows()));
    }
}

}  // namespace

std::vector<double> point_errors(const PointSet& pred, const PointSet& gt) {
    check_shapes(pred, gt, "point errors");
    std::vector<double> e(pred.rows());
    for (Eigen::Index i = 0; i < pred.rows(); ++i) e[i] = (pred.row(i) - gt.row(i)).norm();
    return e;
}

double position_error(const PointSet& pred, const PointSet& gt) { return pairwise_mean(point_errors(pred, gt)); }

PointSet Similarity::apply(const PointSet& p) const {
    PointSet out = (scale * (p * rotation.transpose())).eval();
    out.rowwise() += translation.transpose();
    return out;
}

namespace {

void check_spread(const PointSet& p, const char* which) {
    if (p.rows() < 3) throw DegenerateError(std::string("Procrustes alignment needs at least 3 points in ") + which);
    const PointSet c = p.rowwise() - p.colwise().mean();
    const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::MatrixXd>(c).singularValues();
    if (!(sv[0] > 1e-9) || sv[1] <= 1e-9 * sv[0]) {
        throw DegenerateError(std::string("Procrustes alignment: ") + which + " points are collinear or coincident");
    }
}

}  // namespace

Similarity procrustes_transform(const PointSet& pred, const PointSet& gt) {
    check_shapes(pred, gt, "Procrustes alignment");
    check_spread(pred, "prediction");
    check_spread(gt, "ground truth");
    // Identical sets: the identity is the exact minimizer, the SVD path would
    // only add rounding noise.
    if (pred == gt) return Similarity{};
    const Eigen::RowVector3d mp = pred.colwise().mean(), mg = gt.colwise().mean();
    const PointSet X = pred.rowwise() - mp;
    const PointSet Y = gt.rowwise() - mg;
    const Eigen::Matrix3d cov = Y.transpose() * X;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d d = Eigen::Vector3d::Ones();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d[2] = -1.0;
    Similarity s;
    s.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
    s.scale = svd.singularValues().dot(d) / X.squaredNorm();
    s.translation = mg.transpose() - s.scale * s.rotation * mp.transpose();
    return s;
}

PointSet procrustes_align(const PointSet& pred, const PointSet& gt) { return procrustes_transform(pred, gt).apply(pred); }

double pck_auc(const std::vector<double>& errors, double t_max, int steps) {
    if (errors.empty()) throw InvalidInput("PCK AUC of an empty error list");
    if (!(t_max > 0) || !std::isfinite(t_max)) throw ConfigError("PCK threshold range must be positive");
    if (steps < 1) throw ConfigError("PCK needs at least one step");
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    auto frac = [&](int k) {
        const double t = t_max * k / steps;
        return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin()) / n;
    };
    std::vector<double> f(steps + 1);
    for (int k = 0; k <= steps; ++k) f[k] = frac(k);
    std::vector<double> trapezoids(steps);
    for (int k = 0; k < steps; ++k) trapezoids[k] = 0.5 * (f[k] + f[k + 1]);
    return pairwise_sum(trapezoids.data(), trapezoids.size()) / steps;
}

namespace {

// Fraction of points in `from` whose nearest point in `to` lies within t.
double matched_fraction(const PointSet& from, const PointSet& to, double t) {
    const double t2 = t * t;
    std::size_t hit = 0;
    for (Eigen::Index i = 0; i < from.rows(); ++i) {
        for (Eigen::Index j = 0; j < to.rows(); ++j) {
            if ((from.row(i) - to.row(j)).squaredNorm() <= t2) {
                ++hit;
                break;
            }
        }
    }
    return static_cast<double>(hit) / static_cast<double>(from.rows());
}

}  // namespace

double f_score(const PointSet& pred, const PointSet& gt, double t, FMatching matching) {
    if (pred.rows() == 0 || gt.rows() == 0) throw InvalidInput("F-score needs non-empty point sets");
    if (!(t >= 0)) throw ConfigError("F-score threshold must be non-negative");
    double precision = 0, recall = 0;
    if (matching == FMatching::index) {
        check_shapes(pred, gt, "F-score (index matching)");
        std::size_t hit = 0;
        for (Eigen::Index i = 0; i < pred.rows(); ++i) hit += (pred.row(i) - gt.row(i)).norm() <= t;
        precision = recall = static_cast<double>(hit) / static_cast<double>(pred.rows());
    } else {
        precision = matched_fraction(pred, gt, t);
        recall = matched_fraction(gt, pred, t);
    }
    if (precision + recall == 0) return 0.0;
    return 2 * precision * recall / (precision + recall);
}

namespace {

PointSet relative_to(const PointSet& points, const Eigen::RowVector3d& root) { return points.rowwise() - root; }

}  // namespace

void evaluate(EvalRecord& r) {
    check_shapes(r.pred_joints, r.gt_joints, "joints of record '" + r.id + "'");
    if (r.gt_joints.rows() == 0) throw InvalidInput("record " + r.id + " has no joints");
    check_shapes(r.pred_vertices, r.gt_vertices, "vertices of record '" + r.id + "'");
    const PointSet pj = root_relative(r.pred_joints), gj = root_relative(r.gt_joints);
    r.j_pe = position_error(pj, gj);
    r.j_pe_pa = position_error(procrustes_align(pj, gj), gj);
    if (r.has_vertices()) {
        const PointSet pv = relative_to(r.pred_vertices, r.pred_joints.row(0));
        const PointSet gv = relative_to(r.gt_vertices, r.gt_joints.row(0));
        r.v_pe = position_error(pv, gv);
        r.v_pe_pa = position_error(procrustes_align(pv, gv), gv);
    } else {
        r.v_pe = r.v_pe_pa = std::numeric_limits<double>::quiet_NaN();
    }
}

std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> edge_case_filter(const std::vector<EvalRecord>& records,
                                                                             double j_thresh, double v_thresh) {
    if (!(j_thresh > 0) || !(v_thresh > 0)) throw ConfigError("edge-case thresholds must be positive");
    std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> out;
    for (const auto& r : records) {
        const bool drop = r.j_pe > j_thresh || (r.has_vertices() && r.v_pe > v_thresh);
        (drop ? out.second : out.first).push_back(r);
    }
    return out;
}

MetricReport compute_report(std::vector<EvalRecord>& records, const MetricOptions& opts) {
    if (records.empty()) throw InvalidInput("metric report over no records");
    const std::size_t nf = opts.f_thresholds.size();
    struct PerRecord {
        std::vector<double> j_err, j_err_pa, v_err, v_err_pa;
        std::vector<double> f_rr, f_pa;
    };
    std::vector<PerRecord> per(records.size());
    parallel_for(records.size(), opts.workers, [&](std::size_t i) {
        EvalRecord& r = records[i];
        evaluate(r);
        PerRecord& p = per[i];
        const PointSet pj = root_relative(r.pred_joints), gj = root_relative(r.gt_joints);
        p.j_err = point_errors(pj, gj);
        p.j_err_pa = point_errors(procrustes_align(pj, gj), gj);
        if (r.has_vertices()) {
            const PointSet pv = relative_to(r.pred_vertices, r.pred_joints.row(0));
            const PointSet gv = relative_to(r.gt_vertices, r.gt_joints.row(0));
            const PointSet pv_pa = procrustes_align(pv, gv);
            p.v_err = point_errors(pv, gv);
            p.v_err_pa = point_errors(pv_pa, gv);
            for (double t : opts.f_thresholds) {
                p.f_rr.push_back(f_score(pv, gv, t, opts.matching));
                p.f_pa.push_back(f_score(pv_pa, gv, t, opts.matching));
            }
        }
    });

    const bool with_vertices = records.front().has_vertices();
    for (const auto& r : records) {
        if (r.has_vertices() != with_vertices) throw InvalidInput("metric report mixes records with and without vertices");
    }
    auto gather = [&](auto member) {
        std::vector<double> all;
        for (const auto& p : per) all.insert(all.end(), (p.*member).begin(), (p.*member).end());
        return all;
    };
    auto joint_auc = [&](auto member) {
        if (!opts.per_joint_auc) return pck_auc(gather(member), opts.auc_t_max, opts.auc_steps);
        const std::size_t joints = (per.front().*member).size();
        std::vector<double> aucs;
        for (std::size_t j = 0; j < joints; ++j) {
            std::vector<double> e;
            for (const auto& p : per) e.push_back((p.*member)[j]);
            aucs.push_back(pck_auc(e, opts.auc_t_max, opts.auc_steps));
        }
        return pairwise_mean(aucs);
    };

    MetricReport rep;
    rep.count = records.size();
    rep.options = opts;
    std::vector<double> jpe, jpe_pa, vpe, vpe_pa;
    for (const auto& r : records) {
        jpe.push_back(r.j_pe);
        jpe_pa.push_back(r.j_pe_pa);
        vpe.push_back(r.v_pe);
        vpe_pa.push_back(r.v_pe_pa);
    }
    rep.root_relative.j_pe = pairwise_mean(jpe);
    rep.procrustes.j_pe = pairwise_mean(jpe_pa);
    rep.root_relative.j_auc = joint_auc(&PerRecord::j_err);
    rep.procrustes.j_auc = joint_auc(&PerRecord::j_err_pa);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (with_vertices) {
        rep.root_relative.v_pe = pairwise_mean(vpe);
        rep.procrustes.v_pe = pairwise_mean(vpe_pa);
        rep.root_relative.v_auc = pck_auc(gather(&PerRecord::v_err), opts.auc_t_max, opts.auc_steps);
        rep.procrustes.v_auc = pck_auc(gather(&PerRecord::v_err_pa), opts.auc_t_max, opts.auc_steps);
        for (std::size_t k = 0; k < nf; ++k) {
            std::vector<double> a, b;
            for (const auto& p : per) {
                a.push_back(p.f_rr[k]);
                b.push_back(p.f_pa[k]);
            }
            rep.root_relative.f.push_back(pairwise_mean(a));
            rep.procrustes.f.push_back(pairwise_mean(b));
        }
    } else {
        rep.root_relative.v_pe = rep.procrustes.v_pe = rep.root_relative.v_auc = rep.procrustes.v_auc = nan;
        rep.root_relative.f.assign(nf, nan);
        rep.procrustes.f.assign(nf, nan);
    }
    return rep;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string f_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "F@%g", t);
    return buf;
}

nlohmann::json block_json(const MetricBlock& b, const MetricOptions& o) {
    nlohmann::json j;
    j["J-PE"] = number_or_null(b.j_pe);
    j["J-AUC"] = number_or_null(b.j_auc);
    j["V-PE"] = number_or_null(b.v_pe);
    j["V-AUC"] = number_or_null(b.v_auc);
    for (std::size_t k = 0; k < b.f.size(); ++k) j[f_label(o.f_thresholds[k])] = number_or_null(b.f[k]);
    return j;
}

}  // namespace

nlohmann::json report_to_json(const MetricReport& r) {
    nlohmann::json j;
    j["count"] = r.count;
    j["auc_range_mm"] = {0.0, r.options.auc_t_max};
    j["auc_steps"] = r.options.auc_steps;
    j["auc_mode"] = r.options.per_joint_auc ? "per_joint" : "pooled";
    j["f_matching"] = r.options.matching == FMatching::index ? "index" : "nearest";
    j["root_relative"] = block_json(r.root_relative, r.options);
    j["procrustes"] = block_json(r.procrustes, r.options);
    return j;
}

std::string report_to_table(const MetricReport& r) {
    std::vector<std::string> cols{"J-PE", "J-AUC", "V-PE", "V-AUC"};
    for (double t : r.options.f_thresholds) cols.push_back(f_label(t));
    auto cell = [](double v, bool pe) {
        if (!std::isfinite(v)) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, pe ? "%.2f" : "%.3f", v);
        return std::string(buf);
    };
    auto row = [&](const MetricBlock& b) {
        std::vector<std::string> v{cell(b.j_pe, true), cell(b.j_auc, false), cell(b.v_pe, true), cell(b.v_auc, false)};
        for (double f : b.f) v.push_back(cell(f, false));
        return v;
    };
    std::ostringstream os;
    const int w = 8;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-14s", "");
    os << buf;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i == 4) os << " |";
        std::snprintf(buf, sizeof buf, " %*s", w, cols[i].c_str());
        os << buf;
    }
    os << '\n';
    for (const auto& [name, block] : {std::pair{"Root-relative", &r.root_relative}, std::pair{"PA", &r.procrustes}}) {
        std::snprintf(buf, sizeof buf, "%-14s", name);
        os << buf;
        const auto v = row(*block);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i == 4) os << " |";
            std::snprintf(buf, sizeof buf, " %*s", w, v[i].c_str());
            os << buf;
        }
        os << '\n';
    }
    os << "(" << r.count << " records; PE in mm; AUC over [0, " << r.options.auc_t_max << "] mm)\n";
    return os.str();
}

namespace {

PointSet parse_points(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array()) throw DataError(where + ": expected an array of [x, y, z]");
    PointSet p(static_cast<Eigen::Index>(j.size()), 3);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != 3) throw DataError(where + ": point " + std::to_string(i) + " is not [x, y, z]");
        for (int k = 0; k < 3; ++k) {
            if (!j[i][k].is_number()) throw DataError(where + ": non-numeric coordinate");
            p(static_cast<Eigen::Index>(i), k) = j[i][k].get<double>();
        }
    }
    if (!p.allFinite()) throw DataError(where + ": non-finite coordinate");
    return p;
}

struct Entry {
    PointSet joints, vertices;
};

std::vector<std::pair<std::string, Entry>> read_points_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::pair<std::string, Entry>> out;
    std::set<std::string> seen;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(n);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(where + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("joints")) {
            throw DataError(where + ": needs string \"id\" and \"joints\"");
        }
        const std::string id = j["id"].get<std::string>();
        if (!seen.insert(id).second) throw DataError(where + ": duplicate id '" + id + "'");
        Entry e;
        e.joints = parse_points(j["joints"], where + " joints");
        if (j.contains("vertices")) e.vertices = parse_points(j["vertices"], where + " vertices");
        out.emplace_back(id, std::move(e));
    }
    return out;
}

}  // namespace

std::vector<EvalRecord> load_eval_records(const std::filesystem::path& predictions,
                                          const std::filesystem::path& ground_truth) {
    const auto pred = read_points_file(predictions);
    std::map<std::string, Entry> gt;
    for (auto& [id, e] : read_points_file(ground_truth)) gt.emplace(id, std::move(e));
    std::vector<EvalRecord> out;
    for (const auto& [id, p] : pred) {
        const auto it = gt.find(id);
        if (it == gt.end()) throw DataError("prediction '" + id + "' has no ground truth");
        EvalRecord r;
        r.id = id;
        r.pred_joints = p.joints;
        r.gt_joints = it->second.joints;
        r.pred_vertices = p.vertices;
        r.gt_vertices = it->second.vertices;
        if (r.pred_joints.rows() != r.gt_joints.rows() || r.pred_vertices.rows() != r.gt_vertices.rows()) {
            throw DataError("record '" + id + "': prediction and ground truth shapes differ");
        }
        out.push_back(std::move(r));
        gt.erase(it);
    }
    if (!gt.empty()) throw DataError("ground truth '" + gt.begin()->first + "' has no prediction");
    return out;
}

}  // namespace handbooster
