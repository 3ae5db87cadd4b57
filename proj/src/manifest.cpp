// SPDX-License-Identifier: Apache-2.0

#include "handbooster/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "handbooster/errors.hpp"

namespace handbooster {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json quat_json(const Quaternion& q) { return {q.w(), q.x(), q.y(), q.z()}; }
json vec_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw DataError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

std::vector<double> numbers(const json& j, std::size_t n, const std::string& where) {
    if (!j.is_array() || j.size() != n) throw DataError(where + ": expected " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw DataError(where + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Quaternion quat_from(const json& j, const std::string& where) {
    const auto v = numbers(j, 4, where);
    try {
        return Quaternion(v[0], v[1], v[2], v[3]);
    } catch (const Error& e) {
        throw DataError(where + ": " + e.what());
    }
}

Eigen::Vector3d vec_from(const json& j, const std::string& where) {
    const auto v = numbers(j, 3, where);
    return {v[0], v[1], v[2]};
}

}  // namespace

json record_to_json(const GraspRecord& g) {
    json j;
    j["sequence_id"] = g.sequence_id;
    j["frame_index"] = g.frame_index;
    j["source"] = to_string(g.source);
    j["object_id"] = g.object_id;
    j["grasping"] = g.grasping ? json(*g.grasping) : json(nullptr);
    json hand;
    hand["global_orient"] = quat_json(g.hand.global_orient);
    hand["root_translation"] = vec_json(g.hand.root_translation);
    hand["joint_rots"] = json::array();
    for (const auto& q : g.hand.joint_rots) hand["joint_rots"].push_back(quat_json(q));
    j["hand"] = hand;
    j["object"] = {{"quat", quat_json(g.object.rotation_quat())}, {"translation", vec_json(g.object.translation())}};
    return j;
}

GraspRecord record_from_json(const json& j, const std::string& where) {
    GraspRecord g;
    const auto& seq = field(j, "sequence_id", where);
    const auto& frame = field(j, "frame_index", where);
    const auto& obj_id = field(j, "object_id", where);
    if (!seq.is_string() || !obj_id.is_string() || !frame.is_number_integer()) {
        throw DataError(where + ": sequence_id/object_id must be strings and frame_index an integer");
    }
    g.sequence_id = seq.get<std::string>();
    g.frame_index = frame.get<std::int64_t>();
    g.object_id = obj_id.get<std::string>();
    const auto& src = field(j, "source", where);
    if (!src.is_string()) throw DataError(where + ": source must be a string");
    try {
        g.source = source_from_string(src.get<std::string>());
    } catch (const Error& e) {
        throw DataError(where + ": " + e.what());
    }
    if (j.contains("grasping") && !j["grasping"].is_null()) {
        if (!j["grasping"].is_boolean()) throw DataError(where + ": grasping must be true, false or null");
        g.grasping = j["grasping"].get<bool>();
    }
    const auto& hand = field(j, "hand", where);
    g.hand.global_orient = quat_from(field(hand, "global_orient", where), where + " hand.global_orient");
    if (hand.contains("root_translation")) {
        g.hand.root_translation = vec_from(hand["root_translation"], where + " hand.root_translation");
    }
    const auto& rots = field(hand, "joint_rots", where);
    if (!rots.is_array()) throw DataError(where + ": hand.joint_rots must be an array");
    for (std::size_t i = 0; i < rots.size(); ++i) {
        g.hand.joint_rots.push_back(quat_from(rots[i], where + " hand.joint_rots[" + std::to_string(i) + "]"));
    }
    const auto& obj = field(j, "object", where);
    const Quaternion oq = quat_from(field(obj, "quat", where), where + " object.quat");
    const Eigen::Vector3d ot = vec_from(field(obj, "translation", where), where + " object.translation");
    if (!g.hand.root_translation.allFinite() || !ot.allFinite()) throw DataError(where + ": non-finite translation");
    g.object = ObjectPose(oq, ot);
    return g;
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << content;
        f.flush();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DataError("failed writing " + path.string());
        }
    }
    fs::rename(tmp, path);
}

Manifest read_manifest(const fs::path& path) {
    std::istringstream in(read_file(path));
    Manifest m;
    std::string line;
    bool have_header = false;
    std::set<std::pair<std::string, std::int64_t>> ids;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(n);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(where + ": " + e.what());
        }
        if (!have_header) {
            have_header = true;
            const auto& v = field(j, "schema_version", where);
            if (!v.is_number_integer() || v.get<int>() != kManifestSchemaVersion) {
                throw DataError(where + ": unsupported manifest schema version " + v.dump());
            }
            if (j.value("units", std::string("mm")) != "mm") throw DataError(where + ": manifest units must be mm");
            const auto& jc = field(j, "joint_count", where);
            if (!jc.is_number_unsigned()) throw DataError(where + ": joint_count must be a non-negative integer");
            m.header.joint_count = jc.get<std::size_t>();
            if (j.contains("assets")) {
                if (!j["assets"].is_string()) throw DataError(where + ": assets must be a string");
                m.header.assets = j["assets"].get<std::string>();
            }
            continue;
        }
        ManifestEntry e;
        e.record = record_from_json(j, where);
        if (e.record.hand.joint_rots.size() != m.header.joint_count) {
            throw DataError(where + ": record has " + std::to_string(e.record.hand.joint_rots.size()) +
                            " joint rotations, header says " + std::to_string(m.header.joint_count));
        }
        if (!ids.emplace(e.record.sequence_id, e.record.frame_index).second) {
            throw DataError(where + ": repeated record id " + e.record.id());
        }
        for (const auto& [k, v] : j.items()) {
            static const std::set<std::string> known{"sequence_id", "frame_index", "source", "object_id",
                                                     "grasping",    "hand",        "object"};
            if (!known.count(k)) e.extra[k] = v;
        }
        m.entries.push_back(std::move(e));
    }
    if (!have_header) throw DataError(path.string() + ": empty manifest (no header line)");
    return m;
}

std::string format_manifest(const Manifest& m) {
    json h;
    h["schema_version"] = m.header.schema_version;
    h["units"] = m.header.units;
    h["joint_count"] = m.header.joint_count;
    if (!m.header.assets.empty()) h["assets"] = m.header.assets;
    std::string out = h.dump() + "\n";
    for (const auto& e : m.entries) {
        json j = record_to_json(e.record);
        for (const auto& [k, v] : e.extra.items()) j[k] = v;
        out += j.dump() + "\n";
    }
    return out;
}

void write_manifest(const fs::path& path, const Manifest& m) { write_file_atomic(path, format_manifest(m)); }

}  // namespace handbooster
