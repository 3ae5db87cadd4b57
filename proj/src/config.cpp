// SPDX-License-Identifier: Apache-2.0

#include "handbooster/config.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "handbooster/errors.hpp"

namespace handbooster {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    const auto u = to_u64(key, v);
    if (u > 1'000'000'000) throw ConfigError("config key '" + key + "': value too large");
    return static_cast<int>(u);
}

Eigen::Vector3d to_vec3(const std::string& key, const std::string& v) {
    std::stringstream ss(v);
    std::string part;
    std::vector<double> xs;
    while (std::getline(ss, part, ',')) xs.push_back(to_double(key, trim(part)));
    if (xs.size() != 3) throw ConfigError("config key '" + key + "': expected three comma-separated numbers");
    return {xs[0], xs[1], xs[2]};
}

std::string fmt(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string fmt(const Eigen::Vector3d& v) { return fmt(v.x()) + "," + fmt(v.y()) + "," + fmt(v.z()); }

fs::path resolve(const fs::path& base, const std::string& v) {
    const fs::path p(v);
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

void PipelineConfig::validate() const {
    if (real_manifest.empty()) throw ConfigError("config needs real_manifest");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (!(label.rre_deg > 0) || !(label.rte_mm > 0)) throw ConfigError("grasp thresholds must be positive");
    if (M < 1 || N < 1) throw ConfigError("M and N must be at least 1");
    if (draws_per_object < 1) throw ConfigError("draws_per_object must be at least 1");
    if (retry_cap < 0) throw ConfigError("retry_cap must be non-negative");
    validation.validate();
    if (views_per_pose < 1) throw ConfigError("views_per_pose must be at least 1");
    if (!(max_perturb_deg > 0 && max_perturb_deg <= 180)) throw ConfigError("max_perturb_deg must be in (0, 180]");
    if (resolution < 8 || resolution > 8192) throw ConfigError("resolution must be in [8, 8192]");
    camera.validate();
    if (edge_j_mm && !(*edge_j_mm > 0)) throw ConfigError("edge_j_mm must be positive");
    if (edge_v_mm && !(*edge_v_mm > 0)) throw ConfigError("edge_v_mm must be positive");
    if (!predictions.empty() && (!edge_j_mm || !edge_v_mm)) {
        throw ConfigError("edge-case filtering needs both edge_j_mm and edge_v_mm");
    }
    if (!(auc_t_max > 0) || auc_steps < 1) throw ConfigError("AUC range and steps must be positive");
    if (f_thresholds.empty()) throw ConfigError("f_thresholds must list at least one threshold");
    for (double t : f_thresholds) {
        if (!(t > 0)) throw ConfigError("f_thresholds must be positive");
    }
}

namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&, const fs::path&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table{
        {"real_manifest", [](auto& c, auto& v, auto& b) { c.real_manifest = resolve(b, v); }},
        {"synthetic_manifest", [](auto& c, auto& v, auto& b) { c.synthetic_manifest = v.empty() ? fs::path() : resolve(b, v); }},
        {"assets", [](auto& c, auto& v, auto& b) { c.assets = resolve(b, v); }},
        {"rig", [](auto& c, auto& v, auto& b) { c.rig = v == "toy" ? v : resolve(b, v).string(); }},
        {"out_dir", [](auto& c, auto& v, auto& b) { c.out_dir = resolve(b, v); }},
        {"seed", [](auto& c, auto& v, auto&) { c.seed = to_u64("seed", v); }},
        {"workers", [](auto& c, auto& v, auto&) { c.workers = to_int("workers", v); }},
        {"rre_deg", [](auto& c, auto& v, auto&) { c.label.rre_deg = to_double("rre_deg", v); }},
        {"rte_mm", [](auto& c, auto& v, auto&) { c.label.rte_mm = to_double("rte_mm", v); }},
        {"grasp_rule",
         [](auto& c, auto& v, auto&) {
             if (v == "either") c.label.rule = MotionRule::either;
             else if (v == "both") c.label.rule = MotionRule::both;
             else throw ConfigError("grasp_rule must be 'either' or 'both'");
         }},
        {"M", [](auto& c, auto& v, auto&) { c.M = to_u64("M", v); }},
        {"N", [](auto& c, auto& v, auto&) { c.N = to_u64("N", v); }},
        {"draws_per_object", [](auto& c, auto& v, auto&) { c.draws_per_object = to_u64("draws_per_object", v); }},
        {"retry_cap", [](auto& c, auto& v, auto&) { c.retry_cap = to_int("retry_cap", v); }},
        {"contact_mm", [](auto& c, auto& v, auto&) { c.validation.contact_mm = to_double("contact_mm", v); }},
        {"volume_cm3", [](auto& c, auto& v, auto&) { c.validation.volume_cm3 = to_double("volume_cm3", v); }},
        {"voxel_mm", [](auto& c, auto& v, auto&) { c.validation.voxel_mm = to_double("voxel_mm", v); }},
        {"views_per_pose", [](auto& c, auto& v, auto&) { c.views_per_pose = to_int("views_per_pose", v); }},
        {"max_perturb_deg", [](auto& c, auto& v, auto&) { c.max_perturb_deg = to_double("max_perturb_deg", v); }},
        {"resolution", [](auto& c, auto& v, auto&) { c.resolution = to_int("resolution", v); }},
        {"variant", [](auto& c, auto& v, auto&) { c.variant = variant_from_string(v); }},
        {"camera_distance_mm", [](auto& c, auto& v, auto&) { c.camera.distance_mm = to_double("camera_distance_mm", v); }},
        {"camera_direction", [](auto& c, auto& v, auto&) { c.camera.direction = to_vec3("camera_direction", v); }},
        {"camera_up", [](auto& c, auto& v, auto&) { c.camera.up = to_vec3("camera_up", v); }},
        {"camera_focal_scale", [](auto& c, auto& v, auto&) { c.camera.focal_scale = to_double("camera_focal_scale", v); }},
        {"edge_j_mm", [](auto& c, auto& v, auto&) { c.edge_j_mm = to_double("edge_j_mm", v); }},
        {"edge_v_mm", [](auto& c, auto& v, auto&) { c.edge_v_mm = to_double("edge_v_mm", v); }},
        {"predictions", [](auto& c, auto& v, auto& b) { c.predictions = v.empty() ? fs::path() : resolve(b, v); }},
        {"auc_t_max", [](auto& c, auto& v, auto&) { c.auc_t_max = to_double("auc_t_max", v); }},
        {"auc_steps", [](auto& c, auto& v, auto&) { c.auc_steps = to_int("auc_steps", v); }},
        {"f_thresholds",
         [](auto& c, auto& v, auto&) {
             c.f_thresholds.clear();
             std::stringstream ss(v);
             std::string part;
             while (std::getline(ss, part, ',')) c.f_thresholds.push_back(to_double("f_thresholds", trim(part)));
         }},
    };
    return table;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir) {
    PipelineConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("config line " + std::to_string(n) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError("config line " + std::to_string(n) + ": repeated key '" + key + "'");
        it->second(cfg, value, base_dir);
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), fs::absolute(path).parent_path());
}

std::string PipelineConfig::canonical() const {
    std::map<std::string, std::string> kv{
        {"real_manifest", real_manifest.string()},
        {"synthetic_manifest", synthetic_manifest.string()},
        {"assets", assets.string()},
        {"rig", rig},
        {"out_dir", out_dir.string()},
        {"seed", std::to_string(seed)},
        {"workers", std::to_string(workers)},
        {"rre_deg", fmt(label.rre_deg)},
        {"rte_mm", fmt(label.rte_mm)},
        {"grasp_rule", label.rule == MotionRule::either ? "either" : "both"},
        {"M", std::to_string(M)},
        {"N", std::to_string(N)},
        {"draws_per_object", std::to_string(draws_per_object)},
        {"retry_cap", std::to_string(retry_cap)},
        {"contact_mm", fmt(validation.contact_mm)},
        {"volume_cm3", fmt(validation.volume_cm3)},
        {"voxel_mm", fmt(validation.voxel_mm)},
        {"views_per_pose", std::to_string(views_per_pose)},
        {"max_perturb_deg", fmt(max_perturb_deg)},
        {"resolution", std::to_string(resolution)},
        {"variant", to_string(variant)},
        {"camera_distance_mm", fmt(camera.distance_mm)},
        {"camera_direction", fmt(camera.direction)},
        {"camera_up", fmt(camera.up)},
        {"camera_focal_scale", fmt(camera.focal_scale)},
        {"edge_j_mm", edge_j_mm ? fmt(*edge_j_mm) : ""},
        {"edge_v_mm", edge_v_mm ? fmt(*edge_v_mm) : ""},
        {"predictions", predictions.string()},
        {"auc_t_max", fmt(auc_t_max)},
        {"auc_steps", std::to_string(auc_steps)},
    };
    std::string f;
    for (double t : f_thresholds) f += (f.empty() ? "" : ",") + fmt(t);
    kv["f_thresholds"] = f;
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string config_hash(const PipelineConfig& cfg) {
    PipelineConfig c = cfg;
    c.out_dir.clear();
    c.workers = 1;
    std::string listing;
    std::istringstream in(c.canonical());
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("out_dir =", 0) == 0 || line.rfind("workers =", 0) == 0) continue;
        listing += line + "\n";
    }
    return sha256_hex(listing);
}

}  // namespace handbooster
