#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mapnbv/errors.hpp"

namespace mapnbv {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using PointCloud = std::vector<Point3>;

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

inline void require_finite(std::span<const Point3> cloud) {
  for (const auto& p : cloud)
    if (!is_finite(p)) throw std::invalid_argument("point cloud contains non-finite coordinate");
}

// Sensor position plus unit viewing direction.
struct Pose {
  Point3 position{Point3::Zero()};
  Vec3 facing{Vec3::UnitX()};

  Pose() = default;
  Pose(const Point3& pos, const Vec3& dir) : position(pos), facing(dir) { validate(); }

  // Builds a pose at `pos` looking at `target`.
  static Pose looking_at(const Point3& pos, const Point3& target) {
    Vec3 d = target - pos;
    double n = d.norm();
    if (!(n > 0.0)) throw std::invalid_argument("look-at target coincides with position");
    return Pose(pos, d / n);
  }

  void validate() const {
    if (!is_finite(position) || !is_finite(facing))
      throw std::invalid_argument("pose has non-finite component");
    if (std::abs(facing.norm() - 1.0) > 1e-6)
      throw std::invalid_argument("pose facing is not a unit vector");
  }

  bool operator==(const Pose& o) const { return position == o.position && facing == o.facing; }
};

struct RigidTransform {
  Eigen::Matrix3d rotation{Eigen::Matrix3d::Identity()};
  Vec3 translation{Vec3::Zero()};

  RigidTransform() = default;
  RigidTransform(const Eigen::Matrix3d& r, const Vec3& t) : rotation(r), translation(t) { validate(); }

  void validate() const {
    if (!((rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-6))
      throw std::invalid_argument("rotation is not orthonormal");
    if (!(std::abs(rotation.determinant() - 1.0) <= 1e-6))
      throw std::invalid_argument("rotation determinant is not +1");
    if (!is_finite(translation)) throw std::invalid_argument("translation is not finite");
  }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
};

struct CloudStats {
  Point3 centroid{Point3::Zero()};
  double d_max{0.0};
  double z_range{0.0};
};

// Integer voxel coordinate floor(p / leaf), anchored at the world origin.
struct VoxelKey {
  std::int64_t x{0}, y{0}, z{0};
  auto operator<=>(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Sorted, duplicate-free list of voxel keys. Sorted vectors give deterministic
// iteration order and cheap merges.
using KeySet = std::vector<VoxelKey>;

inline void require_positive_leaf(double leaf, const char* what) {
  if (!(leaf > 0.0) || !std::isfinite(leaf))
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

inline VoxelKey voxel_key(const Point3& p, double leaf) {
  return {static_cast<std::int64_t>(std::floor(p.x() / leaf)),
          static_cast<std::int64_t>(std::floor(p.y() / leaf)),
          static_cast<std::int64_t>(std::floor(p.z() / leaf))};
}

inline KeySet key_set(std::span<const Point3> cloud, double leaf) {
  require_positive_leaf(leaf, "voxel leaf");
  KeySet keys;
  keys.reserve(cloud.size());
  for (const auto& p : cloud) keys.push_back(voxel_key(p, leaf));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

inline KeySet key_union(const KeySet& a, const KeySet& b) {
  KeySet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline KeySet key_difference(const KeySet& a, const KeySet& b) {
  KeySet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

namespace detail {

// Pulls a coordinate back into [key*leaf, (key+1)*leaf) when rounding in the
// centroid sum pushed it across a voxel face.
inline double clamp_into_voxel(double c, std::int64_t key, double leaf) {
  const double inf = std::numeric_limits<double>::infinity();
  while (static_cast<std::int64_t>(std::floor(c / leaf)) > key) c = std::nextafter(c, -inf);
  while (static_cast<std::int64_t>(std::floor(c / leaf)) < key) c = std::nextafter(c, inf);
  return c;
}

}  // namespace detail

// One centroid per occupied voxel, emitted in ascending key order.
inline PointCloud voxel_downsample(std::span<const Point3> cloud, double leaf) {
  require_positive_leaf(leaf, "voxel leaf");
  struct Acc {
    Vec3 sum{Vec3::Zero()};
    std::size_t n{0};
  };
  std::unordered_map<VoxelKey, Acc, VoxelKeyHash> cells;
  cells.reserve(cloud.size());
  for (const auto& p : cloud) {
    auto& a = cells[voxel_key(p, leaf)];
    a.sum += p;
    ++a.n;
  }
  std::vector<std::pair<VoxelKey, Point3>> ordered;
  ordered.reserve(cells.size());
  for (const auto& [k, a] : cells) {
    Point3 c = a.sum / static_cast<double>(a.n);
    c.x() = detail::clamp_into_voxel(c.x(), k.x, leaf);
    c.y() = detail::clamp_into_voxel(c.y(), k.y, leaf);
    c.z() = detail::clamp_into_voxel(c.z(), k.z, leaf);
    ordered.emplace_back(k, c);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  PointCloud out;
  out.reserve(ordered.size());
  for (auto& kv : ordered) out.push_back(kv.second);
  return out;
}

inline PointCloud transform(std::span<const Point3> cloud, const RigidTransform& t) {
  t.validate();
  PointCloud out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(t.apply(p));
  return out;
}

// Deduplicating union: voxel_downsample of the concatenation.
inline PointCloud merge_unique(std::span<const PointCloud> clouds, double resolution) {
  require_positive_leaf(resolution, "merge resolution");
  PointCloud all;
  std::size_t total = 0;
  for (const auto& c : clouds) total += c.size();
  all.reserve(total);
  for (const auto& c : clouds) all.insert(all.end(), c.begin(), c.end());
  return voxel_downsample(all, resolution);
}

inline CloudStats cloud_stats(std::span<const Point3> cloud) {
  if (cloud.empty()) throw EmptyInputError("cloud_stats of an empty cloud");
  CloudStats s;
  Vec3 sum = Vec3::Zero();
  double zmin = cloud.front().z(), zmax = cloud.front().z();
  for (const auto& p : cloud) {
    sum += p;
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
  }
  s.centroid = sum / static_cast<double>(cloud.size());
  for (const auto& p : cloud) s.d_max = std::max(s.d_max, (p - s.centroid).norm());
  s.z_range = zmax - zmin;
  return s;
}

struct Aabb {
  Point3 min{Point3::Zero()};
  Point3 max{Point3::Zero()};

  bool contains(const Point3& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
  Vec3 extent() const { return max - min; }
  Point3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return extent().norm(); }
};

inline Aabb bounding_box(std::span<const Point3> cloud) {
  if (cloud.empty()) throw EmptyInputError("bounding box of an empty cloud");
  Aabb b{cloud.front(), cloud.front()};
  for (const auto& p : cloud) {
    b.min = b.min.cwiseMin(p);
    b.max = b.max.cwiseMax(p);
  }
  return b;
}

}  // namespace mapnbv
