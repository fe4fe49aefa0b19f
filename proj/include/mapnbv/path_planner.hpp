#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mapnbv/errors.hpp"
#include "mapnbv/geometry.hpp"
#include "mapnbv/lattice.hpp"
#include "mapnbv/random.hpp"
#include "mapnbv/scene.hpp"

namespace mapnbv {

// Dense lattice of blocked cells; used for the object itself, already dilated
// by the safety margin.
struct BlockedVoxels {
  Point3 origin{Point3::Zero()};
  double resolution{1.0};
  std::array<int, 3> dims{0, 0, 0};
  std::vector<std::uint8_t> blocked;

  bool empty() const { return blocked.empty(); }
  bool is_blocked(const CellCoord& c) const {
    if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[0] >= dims[0] || c[1] >= dims[1] || c[2] >= dims[2]) return false;
    return blocked[(static_cast<std::size_t>(c[2]) * dims[1] + c[1]) * dims[0] + c[0]] != 0;
  }
};

// Obstacles inflated by `safety_margin`. Boxes grow into larger boxes (square
// corners); spheres grow their radius.
struct CollisionWorld {
  Aabb bounds;
  std::vector<Aabb> boxes;
  std::vector<SphereObstacle> spheres;
  double safety_margin{0.0};
  BlockedVoxels voxels;

  bool point_free(const Point3& p) const {
    if (!bounds.contains(p)) return false;
    for (const auto& b : boxes)
      if (b.contains(p, safety_margin)) return false;
    for (const auto& s : spheres)
      if ((p - s.center).norm() <= s.radius + safety_margin) return false;
    if (!voxels.empty() && voxels.is_blocked(lattice_cell(voxels.origin, voxels.resolution, p))) return false;
    return true;
  }
};

namespace detail {

// Slab test of segment a->b against an axis-aligned box.
inline bool segment_hits_box(const Point3& a, const Point3& b, const Point3& lo, const Point3& hi) {
  double t0 = 0.0, t1 = 1.0;
  const Vec3 d = b - a;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-300) {
      if (a[k] < lo[k] || a[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - a[k]) / d[k], tb = (hi[k] - a[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

inline double segment_point_distance(const Point3& a, const Point3& b, const Point3& p) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (a + t * d - p).norm();
}

}  // namespace detail

// Exact segment test against every inflated obstacle; the blocked-voxel layer
// is checked by walking every lattice cell the segment crosses.
inline bool is_collision_free(const CollisionWorld& world, const Point3& a, const Point3& b) {
  if (!world.bounds.contains(a) || !world.bounds.contains(b)) return false;
  const Vec3 m = Vec3::Constant(world.safety_margin);
  for (const auto& box : world.boxes)
    if (detail::segment_hits_box(a, b, box.min - m, box.max + m)) return false;
  for (const auto& s : world.spheres)
    if (detail::segment_point_distance(a, b, s.center) <= s.radius + world.safety_margin) return false;
  if (!world.voxels.empty()) {
    bool free = true;
    walk_lattice(world.voxels.origin, world.voxels.resolution, a, b, [&](const CellCoord& c) {
      if (world.voxels.is_blocked(c)) free = false;
      return free;
    });
    if (!free) return false;
  }
  return true;
}

// Collision world for a scene: its obstacles plus the ground-truth object
// voxelized at `voxel_resolution`, dilated so every cell within
// `safety_margin` of an object cell is blocked.
inline CollisionWorld make_collision_world(const Scene& scene, double voxel_resolution, double safety_margin) {
  require_positive_leaf(voxel_resolution, "collision voxel resolution");
  if (!(safety_margin >= 0.0)) throw std::invalid_argument("safety margin must be non-negative");
  CollisionWorld w;
  w.bounds = scene.world_bounds;
  w.boxes = scene.boxes;
  w.spheres = scene.spheres;
  w.safety_margin = safety_margin;

  BlockedVoxels& v = w.voxels;
  v.origin = scene.world_bounds.min;
  v.resolution = voxel_resolution;
  for (int a = 0; a < 3; ++a)
    v.dims[a] = std::max(1, static_cast<int>(std::ceil(scene.world_bounds.extent()[a] / voxel_resolution)));
  v.blocked.assign(static_cast<std::size_t>(v.dims[0]) * v.dims[1] * v.dims[2], 0);

  const int reach = static_cast<int>(std::ceil(safety_margin / voxel_resolution)) + 1;
  std::vector<CellCoord> offsets;
  for (int i = -reach; i <= reach; ++i)
    for (int j = -reach; j <= reach; ++j)
      for (int k = -reach; k <= reach; ++k) {
        auto gap = [](int o) { return static_cast<double>(std::max(std::abs(o) - 1, 0)); };
        const double d = voxel_resolution * std::sqrt(gap(i) * gap(i) + gap(j) * gap(j) + gap(k) * gap(k));
        if (d <= safety_margin) offsets.push_back({i, j, k});
      }
  for (const auto& p : scene.object_cloud) {
    const CellCoord c = lattice_cell(v.origin, v.resolution, p);
    for (const auto& o : offsets) {
      const CellCoord n{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
      if (n[0] < 0 || n[1] < 0 || n[2] < 0 || n[0] >= v.dims[0] || n[1] >= v.dims[1] || n[2] >= v.dims[2]) continue;
      v.blocked[(static_cast<std::size_t>(n[2]) * v.dims[1] + n[1]) * v.dims[0] + n[0]] = 1;
    }
  }
  return w;
}

struct Path {
  std::vector<Point3> waypoints;
  double length{0.0};

  bool operator==(const Path&) const = default;
};

inline double polyline_length(std::span<const Point3> pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

struct RrtConfig {
  double step_size{1.0};
  int max_iterations{4000};
  double goal_tolerance{1e-9};
  std::uint64_t seed{0};
  double goal_bias{0.05};

  void validate() const {
    if (!(step_size > 0.0)) throw std::invalid_argument("RRT step size must be positive");
    if (max_iterations <= 0) throw std::invalid_argument("RRT max_iterations must be positive");
    if (!(goal_tolerance >= 0.0)) throw std::invalid_argument("RRT goal tolerance must be non-negative");
  }
};

// Greedy shortcutting: from each kept waypoint jump to the farthest later
// waypoint reachable in a straight line.
inline std::vector<Point3> shortcut(const CollisionWorld& world, std::span<const Point3> pts) {
  std::vector<Point3> out;
  if (pts.empty()) return out;
  std::size_t i = 0;
  out.push_back(pts[0]);
  while (i + 1 < pts.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = pts.size() - 1; j > i + 1; --j)
      if (is_collision_free(world, pts[i], pts[j])) {
        next = j;
        break;
      }
    out.push_back(pts[next]);
    i = next;
  }
  return out;
}

namespace detail {

struct Tree {
  std::vector<Point3> nodes;
  std::vector<int> parent;

  int nearest(const Point3& q) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = (nodes[i] - q).squaredNorm();
      if (d < best_d) best_d = d, best = static_cast<int>(i);
    }
    return best;
  }
  int add(const Point3& p, int par) {
    nodes.push_back(p);
    parent.push_back(par);
    return static_cast<int>(nodes.size()) - 1;
  }
  std::vector<Point3> branch(int leaf) const {
    std::vector<Point3> out;
    for (int i = leaf; i >= 0; i = parent[static_cast<std::size_t>(i)]) out.push_back(nodes[static_cast<std::size_t>(i)]);
    return out;  // leaf first, root last
  }
};

enum class Extend { trapped, advanced, reached };

inline std::pair<Extend, int> extend(const CollisionWorld& world, Tree& tree, const Point3& target, const RrtConfig& cfg) {
  const int near = tree.nearest(target);
  const Point3 from = tree.nodes[static_cast<std::size_t>(near)];
  const Vec3 d = target - from;
  const double dist = d.norm();
  const bool reaches = dist <= cfg.step_size;
  const Point3 next = reaches ? target : Point3(from + d * (cfg.step_size / dist));
  if (!is_collision_free(world, from, next)) return {Extend::trapped, -1};
  if (reaches || (next - target).norm() <= cfg.goal_tolerance) return {Extend::reached, tree.add(target, near)};
  return {Extend::advanced, tree.add(next, near)};
}

}  // namespace detail

inline std::uint64_t path_seed(std::uint64_t seed, const Point3& from, const Point3& to) {
  std::uint64_t h = splitmix64(seed);
  for (int a = 0; a < 3; ++a) h = hash_combine(h, from[a]);
  for (int a = 0; a < 3; ++a) h = hash_combine(h, to[a]);
  return h;
}

// RRT-Connect between two free points followed by greedy shortcutting. The
// random stream is seeded from (cfg.seed, from, to), so a query's answer does
// not depend on what was planned before it.
inline Path plan_path(const CollisionWorld& world, const Point3& from, const Point3& to, const RrtConfig& cfg) {
  cfg.validate();
  if (!world.point_free(from)) throw std::invalid_argument("path start is not collision-free");
  if (!world.point_free(to)) throw std::invalid_argument("path goal is not collision-free");
  if (from == to) return {{from}, 0.0};
  if (is_collision_free(world, from, to)) return {{from, to}, (to - from).norm()};

  Rng rng(path_seed(cfg.seed, from, to));
  detail::Tree start_tree, goal_tree;
  start_tree.add(from, -1);
  goal_tree.add(to, -1);
  detail::Tree* a = &start_tree;
  detail::Tree* b = &goal_tree;
  const Aabb& box = world.bounds;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Point3 q;
    if (rng.uniform() < cfg.goal_bias) {
      q = b->nodes.front();
    } else {
      q = Point3(rng.uniform(box.min.x(), box.max.x()), rng.uniform(box.min.y(), box.max.y()),
                 rng.uniform(box.min.z(), box.max.z()));
    }
    const auto [status, added] = detail::extend(world, *a, q, cfg);
    if (status != detail::Extend::trapped) {
      const Point3 target = a->nodes[static_cast<std::size_t>(added)];
      std::pair<detail::Extend, int> c{detail::Extend::advanced, -1};
      while (c.first == detail::Extend::advanced) c = detail::extend(world, *b, target, cfg);
      if (c.first == detail::Extend::reached) {
        std::vector<Point3> from_a = a->branch(added);
        std::vector<Point3> from_b = b->branch(c.second);
        std::reverse(from_a.begin(), from_a.end());  // root of a ... junction
        from_a.insert(from_a.end(), from_b.begin() + 1, from_b.end());  // junction ... root of b
        if (a != &start_tree) std::reverse(from_a.begin(), from_a.end());
        std::vector<Point3> smooth = shortcut(world, from_a);
        const double len = polyline_length(smooth);
        return {std::move(smooth), len};
      }
    }
    std::swap(a, b);
  }
  throw PlanningFailure("RRT-Connect found no path within the iteration budget");
}

// Distance flown between two poses. Yaw is free.
inline double control_effort(const CollisionWorld& world, const Pose& from, const Pose& to, const RrtConfig& cfg) {
  return plan_path(world, from.position, to.position, cfg).length;
}

}  // namespace mapnbv
