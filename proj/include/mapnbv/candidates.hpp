#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "mapnbv/errors.hpp"
#include "mapnbv/geometry.hpp"
#include "mapnbv/path_planner.hpp"

namespace mapnbv {

struct CandidateConfig {
  double mid_radius_scale{1.5};
  double outer_radius_scale{1.2};
  double height_offset_scale{0.25};
  double angular_step{30.0};  // degrees

  void validate() const {
    if (!(mid_radius_scale > 0.0 && outer_radius_scale > 0.0 && height_offset_scale > 0.0))
      throw std::invalid_argument("candidate ring scales must be positive");
    if (!(angular_step > 0.0 && angular_step <= 120.0))
      throw std::invalid_argument("angular step must lie in (0, 120] degrees");
    const double per_ring = 360.0 / angular_step;
    if (std::abs(per_ring - std::round(per_ring)) > 1e-9)
      throw std::invalid_argument("angular step must divide 360 degrees");
  }
  int poses_per_ring() const { return static_cast<int>(std::lround(360.0 / angular_step)); }
};

// Ring 0 sits at the centroid height; rings 1 and 2 above and below it.
// Candidates that cannot be occupied stay in the set with feasible = false so
// indices are stable across steps.
struct CandidateSet {
  std::vector<Pose> poses;
  std::vector<int> ring;
  std::vector<double> angle;  // degrees
  std::vector<bool> feasible;

  std::size_t size() const { return poses.size(); }
};

inline CandidateSet generate_candidates(const CloudStats& stats, const CandidateConfig& cfg = {}) {
  cfg.validate();
  if (!(stats.d_max > 0.0)) throw DegenerateObjectError("object has zero extent; cannot place candidate rings");
  const Point3& c = stats.centroid;
  const double mid = cfg.mid_radius_scale * stats.d_max;
  const double outer = cfg.outer_radius_scale * stats.d_max;
  const double dz = cfg.height_offset_scale * stats.z_range;
  const struct { double radius, z; } rings[3] = {{mid, c.z()}, {outer, c.z() + dz}, {outer, c.z() - dz}};
  const int n = cfg.poses_per_ring();

  CandidateSet out;
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < n; ++k) {
      const double deg = k * cfg.angular_step;
      const double rad = deg * std::numbers::pi / 180.0;
      const Point3 p(c.x() + rings[r].radius * std::cos(rad), c.y() + rings[r].radius * std::sin(rad), rings[r].z);
      out.poses.push_back(Pose::looking_at(p, Point3(c.x(), c.y(), c.z())));
      out.ring.push_back(r);
      out.angle.push_back(deg);
    }
  }
  out.feasible.assign(out.poses.size(), true);
  return out;
}

// Marks candidates outside the world or inside an inflated obstacle.
inline void mark_feasibility(CandidateSet& set, const CollisionWorld& world) {
  for (std::size_t i = 0; i < set.size(); ++i) set.feasible[i] = world.point_free(set.poses[i].position);
}

}  // namespace mapnbv
