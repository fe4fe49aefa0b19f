#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mapnbv/geometry.hpp"
#include "mapnbv/random.hpp"

namespace mapnbv {

struct Triangle {
  std::array<Point3, 3> v;

  double area() const { return 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm(); }
  Vec3 normal() const { return (v[1] - v[0]).cross(v[2] - v[0]).normalized(); }
};

using TriangleMesh = std::vector<Triangle>;

// Moller-Trumbore. Returns the ray parameter t of the hit along `dir`
// (unnormalized), or nullopt on a miss or a parallel ray.
inline std::optional<double> intersect_ray_triangle(const Point3& origin, const Vec3& dir,
                                                    const Triangle& tri) {
  const Vec3 e1 = tri.v[1] - tri.v[0];
  const Vec3 e2 = tri.v[2] - tri.v[0];
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  const double scale = e1.norm() * e2.norm() * dir.norm();
  if (std::abs(det) <= 1e-14 * scale) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - tri.v[0];
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double w = dir.dot(q) * inv;
  if (w < 0.0 || u + w > 1.0) return std::nullopt;
  return e2.dot(q) * inv;
}

// Area-weighted uniform surface sample with exactly `count` points.
inline PointCloud sample_surface(std::span<const Triangle> mesh, std::size_t count, std::uint64_t seed) {
  std::vector<double> cumulative;
  cumulative.reserve(mesh.size());
  double total = 0.0;
  for (const auto& t : mesh) {
    if (!is_finite(t.v[0]) || !is_finite(t.v[1]) || !is_finite(t.v[2]))
      throw std::invalid_argument("mesh has non-finite vertex");
    total += t.area();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw DegenerateMeshError("mesh has zero surface area");

  Rng rng(seed);
  PointCloud out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const Triangle& t = mesh[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    out.push_back((1.0 - r1) * t.v[0] + r1 * (1.0 - r2) * t.v[1] + r1 * r2 * t.v[2]);
  }
  return out;
}

inline Aabb mesh_bounds(std::span<const Triangle> mesh) {
  if (mesh.empty()) throw EmptyInputError("empty mesh");
  Aabb b{mesh.front().v[0], mesh.front().v[0]};
  for (const auto& t : mesh)
    for (const auto& p : t.v) {
      b.min = b.min.cwiseMin(p);
      b.max = b.max.cwiseMax(p);
    }
  return b;
}

}  // namespace mapnbv
