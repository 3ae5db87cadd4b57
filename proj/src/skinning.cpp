// SPDX-License-Identifier: Apache-2.0

#include "handbooster/skinning.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <json.hpp>

#include "handbooster/errors.hpp"

namespace handbooster {

using json = nlohmann::json;

void Rig::validate() const {
    template_mesh.validate();
    const std::size_t V = template_mesh.vertex_count();
    const std::size_t Jp1 = joint_rest.size();
    if (Jp1 == 0) throw InvalidInput("rig has no joints");
    if (parent.size() != Jp1) throw InvalidInput("rig parent array length differs from joint count");
    if (!joint_names.empty() && joint_names.size() != Jp1) throw InvalidInput("rig joint name count mismatch");
    if (static_cast<std::size_t>(weights.rows()) != V || static_cast<std::size_t>(weights.cols()) != Jp1) {
        throw InvalidInput("rig weight matrix must be V x (J+1)");
    }
    if (parent[0] != -1) throw InvalidInput("rig joint 0 must be the root");
    for (std::size_t j = 1; j < Jp1; ++j) {
        if (parent[j] < 0 || static_cast<std::size_t>(parent[j]) >= Jp1) {
            throw InvalidInput("rig joint " + std::to_string(j) + " has invalid parent (exactly one root allowed)");
        }
        // Walking up must reach the root within Jp1 steps.
        std::size_t steps = 0;
        int k = static_cast<int>(j);
        while (k != 0) {
            k = parent[k];
            if (++steps > Jp1) throw InvalidInput("rig joint tree has a cycle");
        }
    }
    for (std::size_t v = 0; v < V; ++v) {
        const auto row = weights.row(static_cast<Eigen::Index>(v));
        if (row.minCoeff() < 0.0) throw InvalidInput("rig has negative skinning weight at vertex " + std::to_string(v));
        if (std::abs(row.sum() - 1.0) > 1e-5) {
            throw InvalidInput("rig weights at vertex " + std::to_string(v) + " do not sum to 1");
        }
    }
}

namespace {

struct Affine {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();

    Affine operator*(const Affine& o) const { return {R * o.R, R * o.t + t}; }
    Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return R * p + t; }
};

/// Joint order where every parent precedes its children.
std::vector<int> topological_order(const Rig& rig) {
    std::vector<int> order{0};
    std::vector<std::vector<int>> children(rig.joint_count());
    for (std::size_t j = 1; j < rig.joint_count(); ++j) children[rig.parent[j]].push_back(static_cast<int>(j));
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (int c : children[order[i]]) order.push_back(c);
    }
    return order;
}

/// Rig-space joint frames A_j (rest-relative chain, no global transform).
std::vector<Affine> forward_kinematics(const Rig& rig, const HandPose& pose) {
    if (pose.joint_rots.size() != rig.articulated_count()) {
        throw InvalidInput("pose has " + std::to_string(pose.joint_rots.size()) + " joint rotations, rig expects " +
                           std::to_string(rig.articulated_count()));
    }
    std::vector<Affine> A(rig.joint_count());
    for (int j : topological_order(rig)) {
        if (j == 0) {
            A[0].t = rig.joint_rest[0];
            continue;
        }
        const int p = rig.parent[j];
        A[j] = A[p] * Affine{pose.joint_rots[j - 1].to_matrix(), rig.joint_rest[j] - rig.joint_rest[p]};
    }
    return A;
}

}  // namespace

MeshGeometry pose_mesh(const Rig& rig, const HandPose& pose) {
    const auto A = forward_kinematics(rig, pose);
    std::vector<Affine> skin(A.size());
    for (std::size_t j = 0; j < A.size(); ++j) skin[j] = A[j] * Affine{Eigen::Matrix3d::Identity(), -rig.joint_rest[j]};

    const Eigen::Matrix3d Rg = pose.global_orient.to_matrix();
    const Eigen::Vector3d& tg = pose.root_translation;
    const auto& tmpl = rig.template_mesh;
    MeshGeometry out = tmpl;
    const bool has_normals = tmpl.normals.size() == tmpl.vertices.size();
    for (std::size_t v = 0; v < tmpl.vertices.size(); ++v) {
        Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
        Eigen::Vector3d t = Eigen::Vector3d::Zero();
        for (Eigen::Index j = 0; j < rig.weights.cols(); ++j) {
            const double w = rig.weights(static_cast<Eigen::Index>(v), j);
            if (w == 0.0) continue;
            R += w * skin[j].R;
            t += w * skin[j].t;
        }
        out.vertices[v] = Rg * (R * tmpl.vertices[v] + t) + tg;
        if (has_normals) out.normals[v] = (Rg * (R * tmpl.normals[v])).normalized();
    }
    return out;
}

std::vector<Eigen::Vector3d> joint_positions(const Rig& rig, const HandPose& pose) {
    const auto A = forward_kinematics(rig, pose);
    const Eigen::Matrix3d Rg = pose.global_orient.to_matrix();
    std::vector<Eigen::Vector3d> out;
    out.reserve(A.size());
    for (const auto& a : A) out.push_back(Rg * a.t + pose.root_translation);
    return out;
}

// ---------------------------------------------------------------- asset I/O

namespace {

static_assert(std::endian::native == std::endian::little, "rig codec assumes a little-endian host");

std::string base64_encode(const std::string& bytes) {
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
    std::string out(It(bytes.begin()), It(bytes.end()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

std::string base64_decode(std::string text) {
    using namespace boost::archive::iterators;
    using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    std::size_t pad = 0;
    while (!text.empty() && text.back() == '=') {
        text.pop_back();
        ++pad;
    }
    if (pad > 2) throw DataError("rig: malformed base64 padding");
    try {
        std::string out(It(text.begin()), It(text.end()));
        return out;
    } catch (const std::exception& e) {
        throw DataError(std::string("rig: malformed base64 data: ") + e.what());
    }
}

template <typename T>
std::string pack(const std::vector<T>& values) {
    std::string bytes(values.size() * sizeof(T), '\0');
    std::memcpy(bytes.data(), values.data(), bytes.size());
    return base64_encode(bytes);
}

template <typename T>
std::vector<T> unpack(const json& doc, const char* field, std::size_t expected) {
    if (!doc.contains(field) || !doc[field].is_string()) throw DataError(std::string("rig: missing field '") + field + "'");
    const std::string bytes = base64_decode(doc[field].get<std::string>());
    if (bytes.size() < expected * sizeof(T)) {
        throw DataError(std::string("rig: field '") + field + "' holds " + std::to_string(bytes.size() / sizeof(T)) +
                        " values, expected " + std::to_string(expected));
    }
    std::vector<T> out(expected);
    std::memcpy(out.data(), bytes.data(), expected * sizeof(T));
    return out;
}

}  // namespace

Rig parse_rig(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw DataError(std::string("rig: invalid JSON: ") + e.what());
    }
    if (doc.value("format", "") != "handbooster-rig") throw DataError("rig: unrecognized format tag");
    if (doc.value("version", 0) != 1) throw DataError("rig: unsupported version");
    const auto V = doc.at("num_vertices").get<std::size_t>();
    const auto F = doc.at("num_faces").get<std::size_t>();
    const auto Jp1 = doc.at("num_joints").get<std::size_t>();

    Rig rig;
    const auto verts = unpack<float>(doc, "vertices", V * 3);
    const auto faces = unpack<std::uint32_t>(doc, "faces", F * 3);
    const auto rest = unpack<float>(doc, "joint_rest_positions", Jp1 * 3);
    const auto weights = unpack<float>(doc, "weights", V * Jp1);
    for (std::size_t i = 0; i < V; ++i) rig.template_mesh.vertices.emplace_back(verts[3 * i], verts[3 * i + 1], verts[3 * i + 2]);
    for (std::size_t i = 0; i < F; ++i) {
        rig.template_mesh.faces.push_back(
            {static_cast<int>(faces[3 * i]), static_cast<int>(faces[3 * i + 1]), static_cast<int>(faces[3 * i + 2])});
    }
    for (std::size_t j = 0; j < Jp1; ++j) rig.joint_rest.emplace_back(rest[3 * j], rest[3 * j + 1], rest[3 * j + 2]);
    rig.weights.resize(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(Jp1));
    for (std::size_t v = 0; v < V; ++v) {
        for (std::size_t j = 0; j < Jp1; ++j) rig.weights(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j)) = weights[v * Jp1 + j];
    }
    if (doc.contains("colors")) {
        const auto colors = unpack<float>(doc, "colors", V * 3);
        for (std::size_t i = 0; i < V; ++i) rig.template_mesh.colors.emplace_back(colors[3 * i], colors[3 * i + 1], colors[3 * i + 2]);
    }
    if (doc.contains("normals")) {
        const auto normals = unpack<float>(doc, "normals", V * 3);
        for (std::size_t i = 0; i < V; ++i) {
            rig.template_mesh.normals.push_back(
                Eigen::Vector3d(normals[3 * i], normals[3 * i + 1], normals[3 * i + 2]).normalized());
        }
    }
    rig.parent = doc.at("parents").get<std::vector<int>>();
    if (doc.contains("joint_names")) rig.joint_names = doc["joint_names"].get<std::vector<std::string>>();
    try {
        rig.validate();
    } catch (const InvalidInput& e) {
        throw DataError(std::string("rig: ") + e.what());
    }
    return rig;
}

Rig load_rig(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open rig file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rig(ss.str());
}

std::string format_rig(const Rig& rig) {
    rig.validate();
    const auto& m = rig.template_mesh;
    std::vector<float> verts, rest, weights, colors, normals;
    std::vector<std::uint32_t> faces;
    for (const auto& v : m.vertices) verts.insert(verts.end(), {float(v.x()), float(v.y()), float(v.z())});
    for (const auto& f : m.faces) faces.insert(faces.end(), {std::uint32_t(f[0]), std::uint32_t(f[1]), std::uint32_t(f[2])});
    for (const auto& r : rig.joint_rest) rest.insert(rest.end(), {float(r.x()), float(r.y()), float(r.z())});
    for (Eigen::Index v = 0; v < rig.weights.rows(); ++v) {
        for (Eigen::Index j = 0; j < rig.weights.cols(); ++j) weights.push_back(float(rig.weights(v, j)));
    }
    json doc;
    doc["format"] = "handbooster-rig";
    doc["version"] = 1;
    doc["units"] = "mm";
    doc["num_vertices"] = m.vertices.size();
    doc["num_faces"] = m.faces.size();
    doc["num_joints"] = rig.joint_rest.size();
    doc["vertices"] = pack(verts);
    doc["faces"] = pack(faces);
    doc["joint_rest_positions"] = pack(rest);
    doc["weights"] = pack(weights);
    doc["parents"] = rig.parent;
    if (!rig.joint_names.empty()) doc["joint_names"] = rig.joint_names;
    if (m.colors.size() == m.vertices.size() && !m.colors.empty()) {
        for (const auto& c : m.colors) colors.insert(colors.end(), {float(c.x()), float(c.y()), float(c.z())});
        doc["colors"] = pack(colors);
    }
    if (m.normals.size() == m.vertices.size() && !m.normals.empty()) {
        for (const auto& n : m.normals) normals.insert(normals.end(), {float(n.x()), float(n.y()), float(n.z())});
        doc["normals"] = pack(normals);
    }
    return doc.dump(1) + "\n";
}

void save_rig(const std::filesystem::path& path, const Rig& rig) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write rig file " + path.string());
    out << format_rig(rig);
}

// ---------------------------------------------------------------- toy rig

namespace {

struct FingerSpec {
    const char* name;
    Eigen::Vector3d mcp;
    Eigen::Vector3d dir;
    double lengths[3];
    double radius;
    Eigen::Vector3d color;
};

constexpr double kTubeGap = 5.0;  // tube starts this far past the MCP joint
constexpr int kTubeSides = 12;

}  // namespace

ToyRig make_toy_rig() {
    const Eigen::Vector3d skin(0.87, 0.67, 0.55);
    const std::vector<FingerSpec> fingers = {
        {"thumb", {-40, 0, 25}, {-1, 0, 0}, {22, 20, 18}, 7.0, {0.85, 0.62, 0.50}},
        {"index", {-27, 0, 90}, {0, 0, 1}, {24, 20, 18}, 6.0, {0.88, 0.66, 0.52}},
        {"middle", {-9, 0, 90}, {0, 0, 1}, {26, 22, 19}, 6.0, {0.86, 0.68, 0.56}},
        {"ring", {9, 0, 90}, {0, 0, 1}, {25, 21, 18}, 6.0, {0.89, 0.69, 0.57}},
        {"pinky", {27, 0, 90}, {0, 0, 1}, {20, 16, 15}, 5.5, {0.84, 0.65, 0.54}},
    };
    const std::size_t Jp1 = 1 + 3 * fingers.size();

    ToyRig toy;
    Rig& rig = toy.rig;
    rig.joint_rest.push_back(Eigen::Vector3d::Zero());
    rig.parent.push_back(-1);
    rig.joint_names.push_back("wrist");

    std::vector<MeshGeometry> parts;

    MeshGeometry palm = make_box({-40, -10, 0}, {40, 10, 90});
    palm.colors.assign(palm.vertices.size(), skin);
    std::vector<std::vector<std::pair<int, double>>> vw(palm.vertices.size(), {{0, 1.0}});
    parts.push_back(palm);

    for (std::size_t f = 0; f < fingers.size(); ++f) {
        const auto& fs = fingers[f];
        const Eigen::Vector3d d = fs.dir.normalized();
        const int j0 = static_cast<int>(rig.joint_rest.size());
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            rig.joint_rest.push_back(fs.mcp + s * d);
            rig.parent.push_back(k == 0 ? 0 : j0 + k - 1);
            rig.joint_names.push_back(std::string(fs.name) + std::to_string(k + 1));
            toy.flex_axes.push_back(d.cross(Eigen::Vector3d::UnitY()).normalized());
            s += fs.lengths[k];
        }
        const double L1 = fs.lengths[0], L2 = fs.lengths[1], L3 = fs.lengths[2];
        struct Station {
            double s;
            std::vector<std::pair<int, double>> w;
        };
        const std::vector<Station> stations = {
            {kTubeGap, {{j0, 1.0}}},
            {0.5 * (kTubeGap + L1), {{j0, 1.0}}},
            {L1, {{j0, 0.5}, {j0 + 1, 0.5}}},
            {L1 + 0.5 * L2, {{j0 + 1, 1.0}}},
            {L1 + L2, {{j0 + 1, 0.5}, {j0 + 2, 0.5}}},
            {L1 + L2 + 0.5 * L3, {{j0 + 2, 1.0}}},
            {L1 + L2 + L3, {{j0 + 2, 1.0}}},
        };
        Eigen::Index minor = 0;
        d.cwiseAbs().minCoeff(&minor);
        const Eigen::Vector3d u = d.cross(Eigen::Vector3d::Unit(minor)).normalized();
        const Eigen::Vector3d w = d.cross(u);

        MeshGeometry tube;
        std::vector<std::vector<std::pair<int, double>>> tw;
        for (const auto& st : stations) {
            for (int k = 0; k < kTubeSides; ++k) {
                const double th = 2.0 * std::numbers::pi * k / kTubeSides;
                tube.vertices.push_back(fs.mcp + st.s * d + fs.radius * (std::cos(th) * u + std::sin(th) * w));
                tw.push_back(st.w);
            }
        }
        const int nr = static_cast<int>(stations.size());
        const int base_c = static_cast<int>(tube.vertices.size());
        tube.vertices.push_back(fs.mcp + stations.front().s * d);
        tw.push_back(stations.front().w);
        tube.vertices.push_back(fs.mcp + stations.back().s * d);
        tw.push_back(stations.back().w);
        const int tip_c = base_c + 1;
        for (int r = 0; r + 1 < nr; ++r) {
            for (int k = 0; k < kTubeSides; ++k) {
                const int k1 = (k + 1) % kTubeSides;
                const int a = r * kTubeSides;
                const int b = (r + 1) * kTubeSides;
                tube.faces.push_back({a + k, a + k1, b + k1});
                tube.faces.push_back({a + k, b + k1, b + k});
            }
        }
        const int last = (nr - 1) * kTubeSides;
        for (int k = 0; k < kTubeSides; ++k) {
            const int k1 = (k + 1) % kTubeSides;
            tube.faces.push_back({base_c, k1, k});
            tube.faces.push_back({tip_c, last + k, last + k1});
        }
        tube.colors.assign(tube.vertices.size(), fs.color);
        parts.push_back(tube);
        vw.insert(vw.end(), tw.begin(), tw.end());
    }

    rig.template_mesh = merge(parts);
    rig.template_mesh.normals = compute_vertex_normals(rig.template_mesh);
    rig.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vw.size()), static_cast<Eigen::Index>(Jp1));
    for (std::size_t v = 0; v < vw.size(); ++v) {
        for (const auto& [j, wt] : vw[v]) rig.weights(static_cast<Eigen::Index>(v), j) += wt;
    }
    rig.validate();
    return toy;
}

HandPose flexion_pose(const ToyRig& toy, const std::vector<double>& curls_deg) {
    if (curls_deg.size() != toy.flex_axes.size()) throw InvalidInput("flexion_pose: one curl angle per joint required");
    HandPose pose = HandPose::neutral(toy.flex_axes.size());
    for (std::size_t j = 0; j < curls_deg.size(); ++j) {
        pose.joint_rots[j] = Quaternion::from_axis_angle(toy.flex_axes[j], curls_deg[j] * std::numbers::pi / 180.0);
    }
    return pose;
}

}  // namespace handbooster
