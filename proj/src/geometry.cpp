// SPDX-License-Identifier: Apache-2.0

#include "handbooster/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "handbooster/errors.hpp"

namespace handbooster {

using Eigen::Vector3d;

namespace {

Triangle face_triangle(const MeshGeometry& m, std::size_t f) {
    const auto& idx = m.faces[f];
    return {m.vertices[idx[0]], m.vertices[idx[1]], m.vertices[idx[2]]};
}

}  // namespace

double segment_segment_distance(const Vector3d& p0, const Vector3d& p1, const Vector3d& q0, const Vector3d& q1) {
    constexpr double eps = 1e-300;
    const Vector3d d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
    const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    double s = 0.0, t = 0.0;
    if (a <= eps && e <= eps) return r.norm();
    if (a <= eps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= eps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return ((p0 + d1 * s) - (q0 + d2 * t)).norm();
}

double point_triangle_distance(const Vector3d& p, const Triangle& t) {
    const Vector3d &a = t[0], &b = t[1], &c = t[2];
    const Vector3d ab = b - a, ac = c - a;
    if (ab.cross(ac).squaredNorm() <= 1e-24 * ab.squaredNorm() * ac.squaredNorm()) {
        return std::min({segment_segment_distance(p, p, a, b), segment_segment_distance(p, p, b, c),
                         segment_segment_distance(p, p, c, a)});
    }
    const Vector3d ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return ap.norm();
    const Vector3d bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return bp.norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + ab * (d1 / (d1 - d3)))).norm();
    const Vector3d cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return cp.norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + ac * (d2 / (d2 - d6)))).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    const double denom = 1.0 / (va + vb + vc);
    return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

bool segment_intersects_triangle(const Vector3d& p0, const Vector3d& p1, const Triangle& t) {
    const Vector3d dir = p1 - p0;
    const Vector3d e1 = t[1] - t[0], e2 = t[2] - t[0];
    const Vector3d h = dir.cross(e2);
    const double det = e1.dot(h);
    if (std::abs(det) <= 1e-12 * dir.norm() * e1.norm() * e2.norm()) return false;
    const double inv = 1.0 / det;
    const Vector3d s = p0 - t[0];
    const double u = inv * s.dot(h);
    if (u < 0.0 || u > 1.0) return false;
    const Vector3d q = s.cross(e1);
    const double v = inv * dir.dot(q);
    if (v < 0.0 || u + v > 1.0) return false;
    const double w = inv * e2.dot(q);
    return w >= 0.0 && w <= 1.0;
}

double triangle_distance(const Triangle& a, const Triangle& b) {
    for (int i = 0; i < 3; ++i) {
        if (segment_intersects_triangle(a[i], a[(i + 1) % 3], b)) return 0.0;
        if (segment_intersects_triangle(b[i], b[(i + 1) % 3], a)) return 0.0;
    }
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        d = std::min(d, point_triangle_distance(a[i], b));
        d = std::min(d, point_triangle_distance(b[i], a));
        for (int j = 0; j < 3; ++j) {
            d = std::min(d, segment_segment_distance(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]));
        }
    }
    return d;
}

Bvh::Bvh(const MeshGeometry& mesh, int leaf_size) : mesh_(mesh) {
    mesh.validate();
    if (mesh.faces.empty()) throw InvalidInput("bounding-volume tree over a mesh with no faces");
    tris_.reserve(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        tris_.push_back(face_triangle(mesh, f));
        centroids_.push_back((tris_.back()[0] + tris_.back()[1] + tris_.back()[2]) / 3.0);
    }
    order_.resize(tris_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * tris_.size());
    build(0, static_cast<int>(tris_.size()), std::max(1, leaf_size));
}

int Bvh::build(int begin, int end, int leaf_size) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Eigen::AlignedBox3d box, cbox;
    for (int i = begin; i < end; ++i) {
        for (const auto& v : tris_[order_[i]]) box.extend(v);
        cbox.extend(centroids_[order_[i]]);
    }
    nodes_[id].box = box;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= leaf_size) return id;
    int axis = 0;
    cbox.sizes().maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int x, int y) {
        return std::tie(centroids_[x][axis], x) < std::tie(centroids_[y][axis], y);
    });
    const int l = build(begin, mid, leaf_size);
    const int r = build(mid, end, leaf_size);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
}

double min_surface_distance(const MeshGeometry& a, const MeshGeometry& b) {
    if (a.faces.empty() || b.faces.empty()) throw InvalidInput("surface distance needs two non-empty meshes");
    const Bvh ta(a), tb(b);
    const auto& na = ta.nodes();
    const auto& nb = tb.nodes();
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty() && best > 0.0) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        if (na[i].box.exteriorDistance(nb[j].box) >= best) continue;
        if (na[i].leaf() && nb[j].leaf()) {
            for (int x = na[i].begin; x < na[i].end; ++x) {
                for (int y = nb[j].begin; y < nb[j].end; ++y) {
                    best = std::min(best, triangle_distance(ta.triangle(ta.order()[x]), tb.triangle(tb.order()[y])));
                }
            }
            continue;
        }
        const bool split_a = !na[i].leaf() && (nb[j].leaf() || na[i].box.volume() >= nb[j].box.volume());
        if (split_a) {
            stack.push_back({na[i].left, j});
            stack.push_back({na[i].right, j});
        } else {
            stack.push_back({i, nb[j].left});
            stack.push_back({i, nb[j].right});
        }
    }
    return best;
}

namespace {

std::vector<int> weld_ids(const MeshGeometry& m) {
    std::map<std::tuple<double, double, double>, int> ids;
    std::vector<int> out(m.vertices.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        const auto& v = m.vertices[i];
        out[i] = ids.emplace(std::make_tuple(v.x(), v.y(), v.z()), static_cast<int>(ids.size())).first->second;
    }
    return out;
}

}  // namespace

std::size_t self_penetration(const MeshGeometry& mesh) {
    if (mesh.faces.empty()) return 0;
    const Bvh tree(mesh);
    const auto& nodes = tree.nodes();
    const auto weld = weld_ids(mesh);
    auto share_vertex = [&](int f, int g) {
        for (int x : mesh.faces[f]) {
            for (int y : mesh.faces[g]) {
                if (weld[x] == weld[y]) return true;
            }
        }
        return false;
    };
    auto hit = [&](int f, int g) {
        return !share_vertex(f, g) && triangle_distance(tree.triangle(f), tree.triangle(g)) <= 1e-9;
    };
    std::size_t count = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        const auto& a = nodes[i];
        const auto& b = nodes[j];
        if (i == j) {
            if (a.leaf()) {
                for (int x = a.begin; x < a.end; ++x) {
                    for (int y = x + 1; y < a.end; ++y) count += hit(tree.order()[x], tree.order()[y]);
                }
            } else {
                stack.push_back({a.left, a.left});
                stack.push_back({a.right, a.right});
                stack.push_back({a.left, a.right});
            }
            continue;
        }
        if (a.box.exteriorDistance(b.box) > 1e-9) continue;
        if (a.leaf() && b.leaf()) {
            for (int x = a.begin; x < a.end; ++x) {
                for (int y = b.begin; y < b.end; ++y) count += hit(tree.order()[x], tree.order()[y]);
            }
        } else if (!a.leaf() && (b.leaf() || a.box.volume() >= b.box.volume())) {
            stack.push_back({a.left, j});
            stack.push_back({a.right, j});
        } else {
            stack.push_back({i, b.left});
            stack.push_back({i, b.right});
        }
    }
    return count;
}

namespace {

// A face projected to the yz plane for +x ray casting.
struct RayFace {
    Vector3d a, b, c;
    double area;  // signed yz orientation
    double ylo, yhi, zlo, zhi;
};

double orient_yz(const Vector3d& a, const Vector3d& b, double py, double pz) {
    return (b.y() - a.y()) * (pz - a.z()) - (b.z() - a.z()) * (py - a.y());
}

int sgn(double x) { return (x > 0) - (x < 0); }

// Side of (py, pz) relative to the directed edge u->v. Evaluated with the
// lexicographically smaller endpoint first so that the two faces sharing an
// edge see exactly opposite answers; zero results are broken by perturbing
// the point to (py + e, pz + e^2).
int edge_side(const Vector3d& u, const Vector3d& v, double py, double pz) {
    const bool swap = std::tie(v.y(), v.z()) < std::tie(u.y(), u.z());
    const Vector3d& p = swap ? v : u;
    const Vector3d& q = swap ? u : v;
    int s = sgn(orient_yz(p, q, py, pz));
    if (s == 0) s = sgn(p.z() - q.z());
    if (s == 0) s = sgn(q.y() - p.y());
    return swap ? -s : s;
}

std::vector<RayFace> ray_faces(const MeshGeometry& m) {
    std::vector<RayFace> out;
    out.reserve(m.faces.size());
    for (std::size_t f = 0; f < m.faces.size(); ++f) {
        const Triangle t = face_triangle(m, f);
        RayFace r{t[0], t[1], t[2], orient_yz(t[0], t[1], t[2].y(), t[2].z()), 0, 0, 0, 0};
        if (r.area == 0.0) continue;
        r.ylo = std::min({t[0].y(), t[1].y(), t[2].y()});
        r.yhi = std::max({t[0].y(), t[1].y(), t[2].y()});
        r.zlo = std::min({t[0].z(), t[1].z(), t[2].z()});
        r.zhi = std::max({t[0].z(), t[1].z(), t[2].z()});
        out.push_back(r);
    }
    return out;
}

// Sorted x coordinates where the line {(x, py, pz)} crosses the surface.
void crossings(const std::vector<RayFace>& faces, double py, double pz, std::vector<double>& xs) {
    xs.clear();
    for (const auto& f : faces) {
        if (py < f.ylo || py > f.yhi || pz < f.zlo || pz > f.zhi) continue;
        const int s = sgn(f.area);
        if (edge_side(f.a, f.b, py, pz) != s || edge_side(f.b, f.c, py, pz) != s || edge_side(f.c, f.a, py, pz) != s) {
            continue;
        }
        const double wa = orient_yz(f.b, f.c, py, pz);
        const double wb = orient_yz(f.c, f.a, py, pz);
        const double wc = orient_yz(f.a, f.b, py, pz);
        xs.push_back((wa * f.a.x() + wb * f.b.x() + wc * f.c.x()) / (wa + wb + wc));
    }
    std::sort(xs.begin(), xs.end());
}

bool inside_row(const std::vector<double>& xs, double x) {
    const auto above = xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
    return above % 2 == 1;
}

}  // namespace

bool point_in_mesh(const MeshGeometry& mesh, const Vector3d& p) {
    std::vector<double> xs;
    crossings(ray_faces(mesh), p.y(), p.z(), xs);
    return inside_row(xs, p.x());
}

double intersection_volume(const MeshGeometry& a, const MeshGeometry& b, double voxel_mm, const std::string& name_a,
                           const std::string& name_b) {
    if (!(voxel_mm > 0.0) || !std::isfinite(voxel_mm)) throw ConfigError("voxel pitch must be positive");
    a.validate();
    b.validate();
    if (!is_watertight(a)) throw InvalidInput("intersection volume: " + name_a + " is not watertight");
    if (!is_watertight(b)) throw InvalidInput("intersection volume: " + name_b + " is not watertight");
    const Eigen::AlignedBox3d box = a.bounds().intersection(b.bounds());
    if (box.isEmpty()) return 0.0;
    const Vector3d lo = box.min();
    // Cells tile the overlap box exactly, each axis at the largest pitch not
    // exceeding the requested one.
    Eigen::Array3i n;
    Vector3d h;
    for (int k = 0; k < 3; ++k) {
        const double ext = box.max()[k] - lo[k];
        n[k] = static_cast<int>(std::ceil(ext / voxel_mm));
        h[k] = n[k] > 0 ? ext / n[k] : 0.0;
    }
    if ((n <= 0).any()) return 0.0;
    if (static_cast<double>(n[0]) * n[1] * n[2] > 2e9) throw ConfigError("voxel pitch too fine for the overlap region");

    const auto fa = ray_faces(a);
    const auto fb = ray_faces(b);
    std::vector<double> xa, xb;
    std::int64_t count = 0;
    for (int k = 0; k < n[2]; ++k) {
        const double z = lo.z() + (k + 0.5) * h.z();
        for (int j = 0; j < n[1]; ++j) {
            const double y = lo.y() + (j + 0.5) * h.y();
            crossings(fa, y, z, xa);
            if (xa.empty()) continue;
            crossings(fb, y, z, xb);
            if (xb.empty()) continue;
            for (int i = 0; i < n[0]; ++i) {
                const double x = lo.x() + (i + 0.5) * h.x();
                count += inside_row(xa, x) && inside_row(xb, x);
            }
        }
    }
    return static_cast<double>(count) * h.prod() / 1000.0;
}

}  // namespace handbooster
