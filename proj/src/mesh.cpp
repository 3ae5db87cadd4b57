// SPDX-License-Identifier: Apache-2.0

#include "handbooster/mesh.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "handbooster/errors.hpp"

namespace handbooster {

void MeshGeometry::validate() const {
    const auto V = vertices.size();
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw InvalidInput("mesh has non-finite vertex coordinates");
    }
    for (const auto& f : faces) {
        for (int i : f) {
            if (i < 0 || static_cast<std::size_t>(i) >= V) {
                throw InvalidInput("mesh face index " + std::to_string(i) + " out of range (V=" + std::to_string(V) +
                                   ")");
            }
        }
    }
    auto check_size = [&](std::size_t n, const char* what) {
        if (n != 0 && n != V) throw InvalidInput(std::string("mesh ") + what + " count does not match vertex count");
    };
    check_size(normals.size(), "normal");
    check_size(colors.size(), "color");
    check_size(uvs.size(), "uv");
    for (const auto& n : normals) {
        if (std::abs(n.norm() - 1.0) > 1e-4) throw InvalidInput("mesh normal is not unit length");
    }
}

Eigen::AlignedBox3d MeshGeometry::bounds() const {
    Eigen::AlignedBox3d box;
    for (const auto& v : vertices) box.extend(v);
    return box;
}

MeshGeometry transformed(const MeshGeometry& m, const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
    MeshGeometry out = m;
    for (auto& v : out.vertices) v = R * v + t;
    for (auto& n : out.normals) n = R * n;
    return out;
}

std::vector<Eigen::Vector3d> compute_vertex_normals(const MeshGeometry& m) {
    std::vector<Eigen::Vector3d> acc(m.vertices.size(), Eigen::Vector3d::Zero());
    for (const auto& f : m.faces) {
        const Eigen::Vector3d n =
            (m.vertices[f[1]] - m.vertices[f[0]]).cross(m.vertices[f[2]] - m.vertices[f[0]]);
        for (int i : f) acc[i] += n;
    }
    for (auto& n : acc) {
        const double len = n.norm();
        n = len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::UnitZ();
    }
    return acc;
}

bool is_watertight(const MeshGeometry& m) {
    if (m.faces.empty()) return false;
    std::map<std::tuple<double, double, double>, int> weld;
    std::vector<int> canon(m.vertices.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        const auto& v = m.vertices[i];
        canon[i] = weld.emplace(std::make_tuple(v.x(), v.y(), v.z()), static_cast<int>(weld.size())).first->second;
    }
    std::map<std::pair<int, int>, int> edges;
    for (const auto& f : m.faces) {
        for (int k = 0; k < 3; ++k) {
            int a = canon[f[k]];
            int b = canon[f[(k + 1) % 3]];
            if (a == b) return false;
            if (a > b) std::swap(a, b);
            ++edges[{a, b}];
        }
    }
    for (const auto& [e, count] : edges) {
        if (count != 2) return false;
    }
    return true;
}

MeshGeometry merge(const std::vector<MeshGeometry>& parts) {
    MeshGeometry out;
    bool normals = true, colors = true, uvs = true;
    for (const auto& p : parts) {
        normals = normals && (p.normals.size() == p.vertices.size());
        colors = colors && (p.colors.size() == p.vertices.size());
        uvs = uvs && (p.uvs.size() == p.vertices.size());
    }
    for (const auto& p : parts) {
        const int base = static_cast<int>(out.vertices.size());
        out.vertices.insert(out.vertices.end(), p.vertices.begin(), p.vertices.end());
        for (const auto& f : p.faces) out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
        if (normals) out.normals.insert(out.normals.end(), p.normals.begin(), p.normals.end());
        if (colors) out.colors.insert(out.colors.end(), p.colors.begin(), p.colors.end());
        if (uvs) out.uvs.insert(out.uvs.end(), p.uvs.begin(), p.uvs.end());
    }
    return out;
}

namespace {

double parse_double(std::string_view tok, const std::string& origin, int line) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw DataError(origin + ":" + std::to_string(line) + ": bad number '" + std::string(tok) + "'");
    }
    return v;
}

int resolve_index(std::string_view tok, std::size_t count, const std::string& origin, int line) {
    int idx = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || idx == 0) {
        throw DataError(origin + ":" + std::to_string(line) + ": bad face index '" + std::string(tok) + "'");
    }
    const long resolved = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
    if (resolved < 0 || static_cast<std::size_t>(resolved) >= count) {
        throw DataError(origin + ":" + std::to_string(line) + ": face index out of range");
    }
    return static_cast<int>(resolved);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

MeshGeometry parse_obj(const std::string& text, const std::string& origin) {
    std::vector<Eigen::Vector3d> pos, col, nrm;
    std::vector<Eigen::Vector2d> tex;
    bool all_colored = true;
    using Key = std::tuple<int, int, int>;
    std::map<Key, int> remap;
    MeshGeometry out;
    std::vector<Key> keys;

    std::istringstream in(text);
    std::string line_buf;
    int line_no = 0;
    while (std::getline(in, line_buf)) {
        ++line_no;
        const auto toks = split_ws(line_buf);
        if (toks.empty() || toks[0].front() == '#') continue;
        const auto& tag = toks[0];
        if (tag == "v") {
            if (toks.size() != 4 && toks.size() != 7) {
                throw DataError(origin + ":" + std::to_string(line_no) + ": vertex needs 3 or 6 values");
            }
            pos.emplace_back(parse_double(toks[1], origin, line_no), parse_double(toks[2], origin, line_no),
                             parse_double(toks[3], origin, line_no));
            if (toks.size() == 7) {
                col.emplace_back(parse_double(toks[4], origin, line_no), parse_double(toks[5], origin, line_no),
                                 parse_double(toks[6], origin, line_no));
            } else {
                all_colored = false;
            }
        } else if (tag == "vt") {
            if (toks.size() < 3) throw DataError(origin + ":" + std::to_string(line_no) + ": vt needs 2 values");
            tex.emplace_back(parse_double(toks[1], origin, line_no), parse_double(toks[2], origin, line_no));
        } else if (tag == "vn") {
            if (toks.size() != 4) throw DataError(origin + ":" + std::to_string(line_no) + ": vn needs 3 values");
            nrm.emplace_back(parse_double(toks[1], origin, line_no), parse_double(toks[2], origin, line_no),
                             parse_double(toks[3], origin, line_no));
        } else if (tag == "f") {
            if (toks.size() < 4) throw DataError(origin + ":" + std::to_string(line_no) + ": face needs 3 vertices");
            std::vector<int> poly;
            for (std::size_t k = 1; k < toks.size(); ++k) {
                std::string_view t = toks[k];
                int vi = -1, ti = -1, ni = -1;
                const auto s1 = t.find('/');
                vi = resolve_index(t.substr(0, s1), pos.size(), origin, line_no);
                if (s1 != std::string_view::npos) {
                    const auto rest = t.substr(s1 + 1);
                    const auto s2 = rest.find('/');
                    const auto tpart = rest.substr(0, s2);
                    if (!tpart.empty()) ti = resolve_index(tpart, tex.size(), origin, line_no);
                    if (s2 != std::string_view::npos) ni = resolve_index(rest.substr(s2 + 1), nrm.size(), origin, line_no);
                }
                const Key key{vi, ti, ni};
                auto [it, inserted] = remap.emplace(key, static_cast<int>(keys.size()));
                if (inserted) keys.push_back(key);
                poly.push_back(it->second);
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) out.faces.push_back({poly[0], poly[k], poly[k + 1]});
        }
        // Other statements (o, g, s, usemtl, mtllib) carry nothing we use.
    }

    bool has_uv = !keys.empty(), has_n = !keys.empty();
    for (const auto& [v, t, n] : keys) {
        has_uv = has_uv && t >= 0;
        has_n = has_n && n >= 0;
    }
    // Vertices not referenced by any face are still kept, in file order.
    if (keys.empty()) {
        out.vertices = pos;
        if (all_colored && !col.empty()) out.colors = col;
    } else {
        for (const auto& [v, t, n] : keys) {
            out.vertices.push_back(pos[v]);
            if (all_colored && !col.empty()) out.colors.push_back(col[v]);
            if (has_uv) out.uvs.push_back(tex[t]);
            if (has_n) out.normals.push_back(nrm[n].normalized());
        }
    }
    out.validate();
    return out;
}

MeshGeometry load_obj(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open mesh file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_obj(ss.str(), path.string());
}

std::string format_obj(const MeshGeometry& m) {
    std::string out;
    out.reserve(m.vertices.size() * 48 + m.faces.size() * 24);
    const bool colored = m.colors.size() == m.vertices.size() && !m.colors.empty();
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        out += "v";
        for (int k = 0; k < 3; ++k) {
            out += ' ';
            append_number(out, m.vertices[i][k]);
        }
        if (colored) {
            for (int k = 0; k < 3; ++k) {
                out += ' ';
                append_number(out, m.colors[i][k]);
            }
        }
        out += '\n';
    }
    for (const auto& f : m.faces) {
        out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' + std::to_string(f[2] + 1) + '\n';
    }
    return out;
}

void save_obj(const std::filesystem::path& path, const MeshGeometry& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write mesh file " + path.string());
    out << format_obj(m);
}

MeshGeometry make_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    MeshGeometry m;
    for (int i = 0; i < 8; ++i) {
        m.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
    }
    m.faces = {{0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}, {0, 1, 5}, {0, 5, 4},
               {2, 6, 7}, {2, 7, 3}, {0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}};
    return m;
}

MeshGeometry make_icosphere(const Eigen::Vector3d& center, double radius, int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                                      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                           {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                           {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const int idx = static_cast<int>(v.size()) - 1;
            mid.emplace(key, idx);
            return idx;
        };
        std::vector<Face> next;
        for (const auto& tri : f) {
            const int a = midpoint(tri[0], tri[1]);
            const int b = midpoint(tri[1], tri[2]);
            const int c = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], a, c});
            next.push_back({tri[1], b, a});
            next.push_back({tri[2], c, b});
            next.push_back({a, b, c});
        }
        f = std::move(next);
    }
    MeshGeometry m;
    for (const auto& p : v) {
        m.vertices.push_back(center + radius * p);
        m.normals.push_back(p);
    }
    m.faces = std::move(f);
    return m;
}

MeshGeometry make_cylinder(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius, int sides) {
    const Eigen::Vector3d d = (b - a).normalized();
    Eigen::Index minor = 0;
    d.cwiseAbs().minCoeff(&minor);
    const Eigen::Vector3d u = d.cross(Eigen::Vector3d::Unit(minor)).normalized();
    const Eigen::Vector3d w = d.cross(u);  // u x w = d
    MeshGeometry m;
    for (const auto& c : {a, b}) {
        for (int k = 0; k < sides; ++k) {
            const double th = 2.0 * std::numbers::pi * k / sides;
            m.vertices.push_back(c + radius * (std::cos(th) * u + std::sin(th) * w));
        }
    }
    const int ca = static_cast<int>(m.vertices.size());
    m.vertices.push_back(a);
    m.vertices.push_back(b);
    const int cb = ca + 1;
    for (int k = 0; k < sides; ++k) {
        const int k1 = (k + 1) % sides;
        m.faces.push_back({k, k1, sides + k1});
        m.faces.push_back({k, sides + k1, sides + k});
        m.faces.push_back({ca, k1, k});
        m.faces.push_back({cb, sides + k, sides + k1});
    }
    return m;
}

}  // namespace handbooster
