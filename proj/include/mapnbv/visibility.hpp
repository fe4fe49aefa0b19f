#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "mapnbv/convex_hull.hpp"
#include "mapnbv/geometry.hpp"
#include "mapnbv/mesh.hpp"

namespace mapnbv {

// Flipping-sphere exponent used by the planners. Larger values mark more
// points visible; 3 and above only behave on clouds of ~10^4 points or more.
inline constexpr double kDefaultHprExponent = 1.0;

struct SensorModel {
  double horizontal_fov{90.0};  // degrees
  double vertical_fov{60.0};    // degrees
  double min_range{0.5};        // meters
  double max_range{60.0};       // meters

  void validate() const {
    if (!(horizontal_fov > 0.0 && horizontal_fov < 180.0) || !(vertical_fov > 0.0 && vertical_fov < 180.0))
      throw std::invalid_argument("sensor field of view must lie in (0, 180) degrees");
    if (!(min_range >= 0.0 && min_range < max_range))
      throw std::invalid_argument("sensor range must satisfy 0 <= min_range < max_range");
  }
};

// Strictly increasing indices into the queried cloud.
struct VisibleSet {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  bool contains(std::size_t i) const { return std::binary_search(indices.begin(), indices.end(), i); }
  bool operator==(const VisibleSet&) const = default;
};

inline PointCloud select(std::span<const Point3> cloud, const VisibleSet& vis) {
  PointCloud out;
  out.reserve(vis.size());
  for (auto i : vis.indices) out.push_back(cloud[i]);
  return out;
}

// Camera basis: forward = facing, right = facing x world-up, up = right x forward.
struct CameraFrame {
  Vec3 forward, right, up;

  explicit CameraFrame(const Vec3& facing) : forward(facing) {
    Vec3 r = facing.cross(Vec3::UnitZ());
    if (r.norm() < 1e-9) r = facing.cross(Vec3::UnitY());
    right = r.normalized();
    up = right.cross(forward);
  }
};

// Keeps points inside [min_range, max_range] and inside both the horizontal and
// vertical half-angle wedges around the facing direction.
inline VisibleSet sensor_gate(std::span<const Point3> cloud, const Pose& pose, const SensorModel& sensor) {
  pose.validate();
  sensor.validate();
  constexpr double deg = std::numbers::pi / 180.0;
  const double tan_h = std::tan(0.5 * sensor.horizontal_fov * deg);
  const double tan_v = std::tan(0.5 * sensor.vertical_fov * deg);
  const CameraFrame frame(pose.facing);
  VisibleSet out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 d = cloud[i] - pose.position;
    const double range = d.norm();
    if (range < sensor.min_range || range > sensor.max_range) continue;
    const double fwd = d.dot(frame.forward);
    if (fwd <= 0.0) continue;
    if (std::abs(d.dot(frame.right)) > fwd * tan_h) continue;
    if (std::abs(d.dot(frame.up)) > fwd * tan_v) continue;
    out.indices.push_back(i);
  }
  return out;
}

// Same test as sensor_gate, counting only. Cheap rejections come first.
inline std::size_t count_in_frustum(std::span<const Point3> cloud, const Pose& pose, const SensorModel& sensor) {
  pose.validate();
  sensor.validate();
  constexpr double deg = std::numbers::pi / 180.0;
  const double tan_h = std::tan(0.5 * sensor.horizontal_fov * deg);
  const double tan_v = std::tan(0.5 * sensor.vertical_fov * deg);
  const CameraFrame frame(pose.facing);
  std::size_t n = 0;
  for (const auto& p : cloud) {
    const Vec3 d = p - pose.position;
    const double fwd = d.dot(frame.forward);
    if (fwd <= 0.0) continue;
    if (std::abs(d.dot(frame.right)) > fwd * tan_h) continue;
    if (std::abs(d.dot(frame.up)) > fwd * tan_v) continue;
    const double range = d.norm();
    if (range < sensor.min_range || range > sensor.max_range) continue;
    ++n;
  }
  return n;
}

// Hidden point removal by spherical flipping: each point is mirrored through a
// sphere of radius R around the viewpoint, and the points whose images are
// vertices of hull(images + viewpoint) are the visible ones.
// R = 10^radius_exponent * (largest viewpoint distance).
inline VisibleSet hidden_point_removal(std::span<const Point3> cloud, const Point3& viewpoint,
                                       double radius_exponent = kDefaultHprExponent) {
  if (cloud.empty()) throw EmptyInputError("hidden point removal on an empty cloud");
  if (!is_finite(viewpoint) || !std::isfinite(radius_exponent))
    throw std::invalid_argument("non-finite viewpoint or radius exponent");

  double far = 0.0;
  for (const auto& p : cloud) {
    const double r = (p - viewpoint).norm();
    if (r <= 1e-9) throw std::invalid_argument("viewpoint coincides with a cloud point");
    far = std::max(far, r);
  }

  // Canonical order: sort by (x, y, z) and collapse exact duplicates so the
  // result is independent of input order.
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto lex_less = [&](std::size_t a, std::size_t b) {
    const auto& p = cloud[a];
    const auto& q = cloud[b];
    if (p.x() != q.x()) return p.x() < q.x();
    if (p.y() != q.y()) return p.y() < q.y();
    if (p.z() != q.z()) return p.z() < q.z();
    return a < b;
  };
  std::sort(order.begin(), order.end(), lex_less);
  std::vector<std::size_t> group_of(cloud.size());
  PointCloud unique;
  unique.reserve(cloud.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || cloud[order[k]] != cloud[order[k - 1]]) unique.push_back(cloud[order[k]]);
    group_of[order[k]] = unique.size() - 1;
  }

  VisibleSet out;
  if (!spans_three_dimensions(unique)) {
    out.indices.resize(cloud.size());
    std::iota(out.indices.begin(), out.indices.end(), std::size_t{0});
    return out;
  }

  const double radius = std::pow(10.0, radius_exponent) * far;
  PointCloud flipped;
  flipped.reserve(unique.size() + 1);
  for (const auto& p : unique) {
    const Vec3 d = p - viewpoint;
    const double r = d.norm();
    flipped.push_back(d * ((2.0 * radius - r) / r));
  }
  flipped.push_back(Point3::Zero());  // the viewpoint itself, in viewpoint-centered coordinates

  const auto hull = convex_hull_vertices(flipped);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (!hull || (*hull)[group_of[i]]) out.indices.push_back(i);
  return out;
}

// Frustum/range gate followed by hidden point removal on the gated subset.
inline VisibleSet visible_points(std::span<const Point3> cloud, const Pose& pose, const SensorModel& sensor,
                                 double radius_exponent = kDefaultHprExponent) {
  const VisibleSet gated = sensor_gate(cloud, pose, sensor);
  if (gated.empty()) return gated;
  const PointCloud subset = select(cloud, gated);
  const VisibleSet local = hidden_point_removal(subset, pose.position, radius_exponent);
  VisibleSet out;
  out.indices.reserve(local.size());
  for (auto i : local.indices) out.indices.push_back(gated.indices[i]);
  return out;
}

// Exact line-of-sight against a triangle mesh. A point is hidden when the
// segment from the viewpoint hits a triangle before 1 - 1e-6 of its length.
inline VisibleSet raycast_visibility(std::span<const Triangle> mesh, std::span<const Point3> sample,
                                     const Point3& viewpoint) {
  constexpr double kTol = 1e-6;
  VisibleSet out;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Vec3 dir = sample[i] - viewpoint;
    bool blocked = false;
    for (const auto& tri : mesh) {
      const auto t = intersect_ray_triangle(viewpoint, dir, tri);
      if (t && *t > 0.0 && *t < 1.0 - kTol) {
        blocked = true;
        break;
      }
    }
    if (!blocked) out.indices.push_back(i);
  }
  return out;
}

}  // namespace mapnbv
