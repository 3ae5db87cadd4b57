// SPDX-License-Identifier: Apache-2.0

#include "handbooster/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "handbooster/errors.hpp"

namespace handbooster {

using Eigen::Vector2d;
using Eigen::Vector3d;

void Camera::validate() const {
    if (!(fx > 0) || !(fy > 0) || !std::isfinite(fx) || !std::isfinite(fy)) {
        throw ConfigError("camera focal lengths must be positive");
    }
    if (!std::isfinite(cx) || !std::isfinite(cy) || !translation.allFinite()) throw ConfigError("camera has non-finite values");
    if (!rotation.allFinite() || (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
        std::abs(rotation.determinant() - 1.0) > 1e-6) {
        throw ConfigError("camera rotation is not orthonormal");
    }
}

Camera Camera::look_at(const Vector3d& eye, const Vector3d& target, const Vector3d& up, double f, int width,
                       int height) {
    const Vector3d z = target - eye;
    if (z.norm() <= 0) throw ConfigError("camera eye and target coincide");
    const Vector3d zn = z.normalized();
    const Vector3d y = -(up - up.dot(zn) * zn);
    if (y.norm() < 1e-9) throw ConfigError("camera up vector is parallel to the view direction");
    const Vector3d yn = y.normalized();
    Camera c;
    c.rotation.row(0) = yn.cross(zn);
    c.rotation.row(1) = yn;
    c.rotation.row(2) = zn;
    c.translation = -c.rotation * eye;
    c.fx = c.fy = f;
    c.cx = width / 2.0;
    c.cy = height / 2.0;
    c.validate();
    return c;
}

namespace {

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

// Twice the signed area of (a, b, p), evaluated with the endpoints in a
// fixed order so that triangles sharing an edge get exactly opposite values.
double edge_value(const Vector2d& a, const Vector2d& b, const Vector2d& p) {
    const bool swap = std::tie(b.x(), b.y()) < std::tie(a.x(), a.y());
    const Vector2d& u = swap ? b : a;
    const Vector2d& v = swap ? a : b;
    const double e = (v.x() - u.x()) * (p.y() - u.y()) - (v.y() - u.y()) * (p.x() - u.x());
    return swap ? -e : e;
}

// Pixels exactly on an edge belong to exactly one of the two triangles
// sharing it.
bool owns_edge(const Vector2d& a, const Vector2d& b) {
    const Vector2d d = b - a;
    return d.y() < 0 || (d.y() == 0 && d.x() > 0);
}

Vector3d sample_bilinear(const Image& tex, const Vector2d& uv) {
    const double x = uv.x() * tex.width - 0.5;
    const double y = (1.0 - uv.y()) * tex.height - 0.5;
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    auto texel = [&](int xi, int yi) {
        xi = std::clamp(xi, 0, tex.width - 1);
        yi = std::clamp(yi, 0, tex.height - 1);
        Vector3d c;
        for (int k = 0; k < 3; ++k) c[k] = tex.at(xi, yi, tex.channels == 3 ? k : 0) / 255.0;
        return c;
    };
    return (1 - fy) * ((1 - fx) * texel(x0, y0) + fx * texel(x0 + 1, y0)) +
           fy * ((1 - fx) * texel(x0, y0 + 1) + fx * texel(x0 + 1, y0 + 1));
}

}  // namespace

RasterOutput rasterize(const std::vector<RenderItem>& items, const Camera& cam, int width, int height) {
    cam.validate();
    if (width < 8 || height < 8) throw ConfigError("render resolution must be at least 8x8");
    RasterOutput out;
    out.width = width;
    out.height = height;
    out.normal_map = Image(width, height, 3);
    out.texture_map = Image(width, height, 3);
    out.segmentation = Image(width, height, 1);
    out.depth.assign(static_cast<std::size_t>(width) * height, std::numeric_limits<double>::infinity());

    for (const auto& item : items) {
        if (item.mesh == nullptr) throw InvalidInput("render item without a mesh");
        const MeshGeometry& m = *item.mesh;
        m.validate();
        const auto normals = m.normals.empty() ? compute_vertex_normals(m) : m.normals;
        const bool use_texture = item.material.texture != nullptr && !m.uvs.empty();
        const bool use_colors = !use_texture && !m.colors.empty();

        std::vector<Vector3d> pc(m.vertices.size()), nc(m.vertices.size());
        std::vector<Vector2d> ps(m.vertices.size());
        for (std::size_t i = 0; i < m.vertices.size(); ++i) {
            pc[i] = cam.to_camera(m.vertices[i]);
            nc[i] = cam.rotation * normals[i];
            ps[i] = pc[i].z() > 0 ? cam.project_camera(pc[i]) : Vector2d::Zero();
        }

        for (const auto& face : m.faces) {
            std::array<int, 3> f = face;
            if (pc[f[0]].z() < kNearPlane || pc[f[1]].z() < kNearPlane || pc[f[2]].z() < kNearPlane) continue;
            double area = edge_value(ps[f[0]], ps[f[1]], ps[f[2]]);
            if (area == 0.0 || !std::isfinite(area)) continue;
            if (area < 0) {
                std::swap(f[1], f[2]);
                area = -area;
            }
            const Vector2d &s0 = ps[f[0]], &s1 = ps[f[1]], &s2 = ps[f[2]];
            const bool own0 = owns_edge(s1, s2), own1 = owns_edge(s2, s0), own2 = owns_edge(s0, s1);
            const double minx = std::min({s0.x(), s1.x(), s2.x()}), maxx = std::max({s0.x(), s1.x(), s2.x()});
            const double miny = std::min({s0.y(), s1.y(), s2.y()}), maxy = std::max({s0.y(), s1.y(), s2.y()});
            const int x0 = std::max(0, static_cast<int>(std::ceil(minx - 0.5)));
            const int x1 = std::min(width - 1, static_cast<int>(std::floor(maxx - 0.5)));
            const int y0 = std::max(0, static_cast<int>(std::ceil(miny - 0.5)));
            const int y1 = std::min(height - 1, static_cast<int>(std::floor(maxy - 0.5)));
            const double iz0 = 1.0 / pc[f[0]].z(), iz1 = 1.0 / pc[f[1]].z(), iz2 = 1.0 / pc[f[2]].z();

            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const Vector2d p{x + 0.5, y + 0.5};
                    const double w0 = edge_value(s1, s2, p), w1 = edge_value(s2, s0, p), w2 = edge_value(s0, s1, p);
                    if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                    if ((w0 == 0 && !own0) || (w1 == 0 && !own1) || (w2 == 0 && !own2)) continue;
                    // Screen-space weights to perspective-correct ones.
                    const double a0 = w0 / area * iz0, a1 = w1 / area * iz1, a2 = w2 / area * iz2;
                    const double z = 1.0 / (a0 + a1 + a2);
                    const std::size_t idx = static_cast<std::size_t>(y) * width + x;
                    if (!(z < out.depth[idx])) continue;
                    out.depth[idx] = z;
                    const double b0 = a0 * z, b1 = a1 * z, b2 = a2 * z;

                    Vector3d n = b0 * nc[f[0]] + b1 * nc[f[1]] + b2 * nc[f[2]];
                    if (n.norm() < 1e-12) n = (pc[f[1]] - pc[f[0]]).cross(pc[f[2]] - pc[f[0]]);
                    n.normalize();
                    out.normal_map.at(x, y, 0) = quantize(n.x() * 0.5 + 0.5);
                    out.normal_map.at(x, y, 1) = quantize(-n.y() * 0.5 + 0.5);
                    out.normal_map.at(x, y, 2) = quantize(-n.z() * 0.5 + 0.5);

                    Vector3d c = item.material.base_color;
                    if (use_texture) {
                        c = sample_bilinear(*item.material.texture, b0 * m.uvs[f[0]] + b1 * m.uvs[f[1]] + b2 * m.uvs[f[2]]);
                    } else if (use_colors) {
                        c = b0 * m.colors[f[0]] + b1 * m.colors[f[1]] + b2 * m.colors[f[2]];
                    }
                    for (int k = 0; k < 3; ++k) out.texture_map.at(x, y, k) = quantize(c[k]);
                    out.segmentation.at(x, y) = item.material.label;
                }
            }
        }
    }
    return out;
}

Vector3d decode_normal(const Image& normal_map, int x, int y) {
    Vector3d e;
    for (int k = 0; k < 3; ++k) e[k] = normal_map.at(x, y, k) / 255.0 * 2.0 - 1.0;
    return e;
}

}  // namespace handbooster
