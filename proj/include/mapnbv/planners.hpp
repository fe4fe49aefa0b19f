#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mapnbv/candidates.hpp"
#include "mapnbv/errors.hpp"
#include "mapnbv/geometry.hpp"
#include "mapnbv/path_planner.hpp"
#include "mapnbv/scene.hpp"
#include "mapnbv/visibility.hpp"

namespace mapnbv {

enum class PlannerKind { map_nbv, pred_nbv, frontier_multi };

inline std::string_view to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::map_nbv: return "map_nbv";
    case PlannerKind::pred_nbv: return "pred_nbv";
    case PlannerKind::frontier_multi: return "frontier_multi";
  }
  return "?";
}

inline PlannerKind parse_planner_kind(std::string_view s) {
  if (s == "map_nbv") return PlannerKind::map_nbv;
  if (s == "pred_nbv") return PlannerKind::pred_nbv;
  if (s == "frontier_multi") return PlannerKind::frontier_multi;
  throw std::invalid_argument("unknown planner kind: " + std::string(s));
}

struct PlannerConfig {
  double tau{0.95};
  double dedup_resolution{0.1};
  double hpr_exponent{kDefaultHprExponent};
  double baseline_distance_threshold{1.0};
  int max_team_size{3};
  // Frontier baseline.
  double standoff_scale{1.5};   // pose distance from the observed centroid, in observed d_max
  double object_proximity{0.4};  // frontier cells must lie this close to an observed point

  void validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
    require_positive_leaf(dedup_resolution, "dedup resolution");
    if (!std::isfinite(hpr_exponent)) throw std::invalid_argument("hpr exponent must be finite");
    if (!(baseline_distance_threshold >= 0.0)) throw std::invalid_argument("baseline distance threshold must be >= 0");
    if (max_team_size < 1) throw std::invalid_argument("max team size must be >= 1");
    if (!(standoff_scale > 0.0)) throw std::invalid_argument("standoff scale must be positive");
    if (!(object_proximity > 0.0)) throw std::invalid_argument("object proximity must be positive");
  }
};

struct AgentState {
  int id{0};
  Pose pose;
  std::vector<Pose> trajectory;  // poses reached, spawn first
  std::vector<Path> paths;       // flown paths, one per move
  double distance_traveled{0.0};
};

struct TeamSelection {
  std::vector<Pose> poses;           // one per agent, in agent order
  std::vector<int> candidate_index;  // index into the candidate (or frontier-pose) list
  std::size_t joint_gain{0};
  double total_effort{0.0};
  bool threshold_fallback{false};    // frontier baseline only
};

// Keys of the predicted points visible from `pose` that have not been observed.
inline KeySet expected_gain(std::span<const Point3> prediction, const KeySet& observed_keys, const Pose& pose,
                            const SensorModel& sensor, const PlannerConfig& cfg) {
  if (prediction.empty()) throw EmptyInputError("expected gain needs a non-empty prediction");
  const VisibleSet vis = visible_points(prediction, pose, sensor, cfg.hpr_exponent);
  return key_difference(key_set(select(prediction, vis), cfg.dedup_resolution), observed_keys);
}

inline std::size_t joint_gain(std::span<const Point3> prediction, const KeySet& observed_keys,
                              std::span<const Pose> poses, const SensorModel& sensor, const PlannerConfig& cfg) {
  if (poses.empty()) throw std::invalid_argument("joint gain needs at least one pose");
  KeySet all;
  for (const auto& p : poses) all = key_union(all, expected_gain(prediction, observed_keys, p, sensor, cfg));
  return all.size();
}

// Abstract tuple selection: candidate gain sets over a shared id universe and
// per-(agent, candidate) efforts, absent where the agent cannot reach the
// candidate. Candidates with equal `position_class` may not be chosen together.
struct SelectionProblem {
  std::vector<std::vector<std::uint32_t>> gains;            // per candidate, ids
  std::vector<std::vector<std::optional<double>>> effort;  // [agent][candidate]
  std::vector<int> position_class;                         // empty: all distinct
  double tau{0.95};
};

struct TupleChoice {
  std::vector<int> candidates;  // per agent
  std::size_t gain{0};
  double effort{0.0};
  std::size_t best_gain{0};  // g* over all admissible tuples
};

namespace detail {

using Bits = std::vector<std::uint64_t>;

inline std::size_t popcount(const Bits& b) {
  std::size_t n = 0;
  for (auto w : b) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

struct Scored {
  std::vector<int> tuple;
  std::size_t gain;
  double effort;
};

}  // namespace detail

// Exhaustive search over ordered tuples of pairwise-distinct reachable
// candidates. Returns the tuple of least total effort among those reaching
// tau * g*; ties go to the larger gain, then to the lexicographically
// smallest candidate tuple.
inline TupleChoice select_tuple(const SelectionProblem& pb) {
  const std::size_t agents = pb.effort.size();
  const std::size_t m = pb.gains.size();
  if (agents == 0) throw std::invalid_argument("selection needs at least one agent");
  if (!(pb.tau > 0.0 && pb.tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  for (const auto& row : pb.effort)
    if (row.size() != m) throw std::invalid_argument("effort row size differs from candidate count");
  if (!pb.position_class.empty() && pb.position_class.size() != m)
    throw std::invalid_argument("position class size differs from candidate count");

  std::uint32_t universe = 0;
  for (const auto& g : pb.gains)
    for (auto id : g) universe = std::max(universe, id + 1);
  const std::size_t words = (universe + 63) / 64;
  std::vector<detail::Bits> bits(m, detail::Bits(words, 0));
  for (std::size_t c = 0; c < m; ++c)
    for (auto id : pb.gains[c]) bits[c][id / 64] |= std::uint64_t{1} << (id % 64);
  auto cls = [&](int c) { return pb.position_class.empty() ? c : pb.position_class[static_cast<std::size_t>(c)]; };

  std::vector<detail::Scored> all;
  std::vector<int> tuple(agents, -1);
  std::vector<detail::Bits> acc(agents + 1, detail::Bits(words, 0));
  std::vector<double> eff(agents + 1, 0.0);
  auto recurse = [&](auto&& self, std::size_t a) -> void {
    if (a == agents) {
      all.push_back({tuple, detail::popcount(acc[a]), eff[a]});
      return;
    }
    for (std::size_t c = 0; c < m; ++c) {
      const auto& e = pb.effort[a][c];
      if (!e) continue;
      bool clash = false;
      for (std::size_t b = 0; b < a; ++b) clash |= cls(tuple[b]) == cls(static_cast<int>(c));
      if (clash) continue;
      tuple[a] = static_cast<int>(c);
      for (std::size_t w = 0; w < words; ++w) acc[a + 1][w] = acc[a][w] | bits[c][w];
      eff[a + 1] = eff[a] + *e;
      self(self, a + 1);
    }
  };
  recurse(recurse, 0);
  if (all.empty()) throw PlannerStuck("no admissible tuple of reachable, distinct candidates");

  std::size_t g_star = 0;
  for (const auto& s : all) g_star = std::max(g_star, s.gain);
  const double need = pb.tau * static_cast<double>(g_star);
  const detail::Scored* best = nullptr;
  for (const auto& s : all) {
    if (static_cast<double>(s.gain) < need) continue;
    if (!best || s.effort < best->effort || (s.effort == best->effort && s.gain > best->gain) ||
        (s.effort == best->effort && s.gain == best->gain && s.tuple < best->tuple))
      best = &s;
  }
  return {best->tuple, best->gain, best->effort, g_star};
}

inline bool visited(const AgentState& agent, const Point3& p, double tol = 1e-3) {
  for (const auto& q : agent.trajectory)
    if ((q.position - p).norm() <= tol) return true;
  return false;
}

// Candidates closer than 1e-9 share a class so two agents never take the same spot.
inline std::vector<int> position_classes(const CandidateSet& set) {
  std::vector<int> cls(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    cls[i] = static_cast<int>(i);
    for (std::size_t j = 0; j < i; ++j)
      if ((set.poses[i].position - set.poses[j].position).norm() < 1e-9) {
        cls[i] = cls[j];
        break;
      }
  }
  return cls;
}

// Joint selection for a team. Gains are evaluated once per feasible candidate
// and efforts once per (agent, candidate); candidates an agent has already
// visited, or cannot reach, are excluded for that agent only.
inline TeamSelection select_map_nbv(const CandidateSet& candidates, std::span<const AgentState> agents,
                                    std::span<const Point3> prediction, const KeySet& observed_keys,
                                    const CollisionWorld& world, const SensorModel& sensor, const PlannerConfig& cfg,
                                    const RrtConfig& rrt) {
  cfg.validate();
  if (agents.empty()) throw std::invalid_argument("team is empty");
  if (static_cast<int>(agents.size()) > cfg.max_team_size) throw std::invalid_argument("team exceeds max_team_size");
  const std::size_t m = candidates.size();

  SelectionProblem pb;
  pb.tau = cfg.tau;
  pb.position_class = position_classes(candidates);
  pb.gains.resize(m);
  std::vector<KeySet> gain_keys(m);
  for (std::size_t c = 0; c < m; ++c)
    if (candidates.feasible[c]) gain_keys[c] = expected_gain(prediction, observed_keys, candidates.poses[c], sensor, cfg);
  {
    KeySet universe;
    for (const auto& g : gain_keys) universe = key_union(universe, g);
    for (std::size_t c = 0; c < m; ++c)
      for (const auto& k : gain_keys[c])
        pb.gains[c].push_back(
            static_cast<std::uint32_t>(std::lower_bound(universe.begin(), universe.end(), k) - universe.begin()));
  }
  pb.effort.assign(agents.size(), std::vector<std::optional<double>>(m));
  for (std::size_t a = 0; a < agents.size(); ++a)
    for (std::size_t c = 0; c < m; ++c) {
      if (!candidates.feasible[c] || visited(agents[a], candidates.poses[c].position)) continue;
      try {
        pb.effort[a][c] = control_effort(world, agents[a].pose, candidates.poses[c], rrt);
      } catch (const PlanningFailure&) {
      }
    }

  const TupleChoice choice = select_tuple(pb);
  TeamSelection out;
  for (int c : choice.candidates) out.poses.push_back(candidates.poses[static_cast<std::size_t>(c)]);
  out.candidate_index = choice.candidates;
  out.joint_gain = choice.gain;
  out.total_effort = choice.effort;
  return out;
}

inline TeamSelection select_pred_nbv(const CandidateSet& candidates, const AgentState& agent,
                                     std::span<const Point3> prediction, const KeySet& observed_keys,
                                     const CollisionWorld& world, const SensorModel& sensor, const PlannerConfig& cfg,
                                     const RrtConfig& rrt) {
  return select_map_nbv(candidates, std::span(&agent, 1), prediction, observed_keys, world, sensor, cfg, rrt);
}

// Free cells with at least one unknown face neighbour. Neighbours outside the
// grid do not count as unknown.
inline std::vector<std::size_t> detect_frontiers(const OccupancyGrid& grid) {
  static constexpr int kFace[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.cells[i] != CellState::free) continue;
    const auto c = grid.coords(i);
    for (const auto& f : kFace) {
      const std::array<int, 3> n{c[0] + f[0], c[1] + f[1], c[2] + f[2]};
      if (grid.in_grid(n) && grid.at(n) == CellState::unknown) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

// Greedy frontier assignment. Poses are ranked by score (then index); the
// first agent takes the best pose it can reach, each later agent the best
// remaining reachable pose farther than `threshold` from every pose already
// taken, falling back to ignoring the threshold when none qualifies.
// `reach(agent, pose)` returns the path length or nothing.
template <class Reach>
TeamSelection greedy_frontier_assignment(std::span<const Pose> poses, std::span<const std::size_t> scores,
                                         std::size_t agents, double threshold, Reach&& reach) {
  std::vector<int> order(poses.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  TeamSelection out;
  std::vector<bool> taken(poses.size(), false);
  for (std::size_t a = 0; a < agents; ++a) {
    std::optional<int> pick;
    double cost = 0.0;
    for (int pass = 0; pass < 2 && !pick; ++pass) {
      const bool use_threshold = pass == 0;
      for (int i : order) {
        const auto ui = static_cast<std::size_t>(i);
        if (taken[ui]) continue;
        bool clash = false;
        for (const auto& chosen : out.poses) {
          const double d = (chosen.position - poses[ui].position).norm();
          clash |= d < 1e-9 || (use_threshold && d <= threshold);
        }
        if (clash) continue;
        if (const std::optional<double> len = reach(a, poses[ui])) {
          pick = i;
          cost = *len;
          break;
        }
      }
      if (!pick && use_threshold && a > 0) out.threshold_fallback = true;
      if (a == 0) break;  // the threshold is irrelevant for the first agent
    }
    if (!pick) throw PlannerStuck("no reachable frontier pose left for agent " + std::to_string(a));
    taken[static_cast<std::size_t>(*pick)] = true;
    out.poses.push_back(poses[static_cast<std::size_t>(*pick)]);
    out.candidate_index.push_back(*pick);
    out.total_effort += cost;
  }
  return out;
}

struct FrontierPoses {
  std::vector<Pose> poses;
  std::vector<std::size_t> cells;   // frontier cell behind each pose
  std::vector<std::size_t> scores;  // unknown cells in the sensor frustum
};

// One pose per distinct frontier direction near the object: the frontier cell
// centre pushed out to `standoff` from the observed centroid, facing it.
// Scores count the unknown cells of the whole grid inside the sensor frustum.
inline FrontierPoses frontier_poses(const OccupancyGrid& grid, std::span<const Point3> observed,
                                    const SensorModel& sensor, const PlannerConfig& cfg) {
  if (observed.empty()) throw EmptyInputError("frontier poses need observed points");
  const CloudStats st = cloud_stats(observed);
  const double standoff = cfg.standoff_scale * std::max(st.d_max, grid.resolution);

  // Spatial hash of observed points at the proximity radius.
  const double h = cfg.object_proximity;
  std::unordered_map<VoxelKey, std::vector<std::size_t>, VoxelKeyHash> bins;
  for (std::size_t i = 0; i < observed.size(); ++i) bins[voxel_key(observed[i], h)].push_back(i);
  auto near_object = [&](const Point3& q) {
    const VoxelKey k = voxel_key(q, h);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = bins.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == bins.end()) continue;
          for (auto i : it->second)
            if ((observed[i] - q).norm() <= h) return true;
        }
    return false;
  };

  FrontierPoses out;
  std::unordered_map<VoxelKey, bool, VoxelKeyHash> seen_pose;
  for (std::size_t cell : detect_frontiers(grid)) {
    const Point3 f = grid.center(cell);
    if (!near_object(f)) continue;
    const Vec3 dir = f - st.centroid;
    if (dir.norm() < 1e-9) continue;
    const Point3 pos = st.centroid + dir.normalized() * standoff;
    // Frontiers in the same direction collapse onto one pose.
    if (!seen_pose.emplace(voxel_key(pos, grid.resolution), true).second) continue;
    out.poses.push_back(Pose::looking_at(pos, st.centroid));
    out.cells.push_back(cell);
  }

  PointCloud unknown;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.cells[i] == CellState::unknown) unknown.push_back(grid.center(i));
  out.scores.reserve(out.poses.size());
  for (const auto& pose : out.poses) out.scores.push_back(count_in_frustum(unknown, pose, sensor));
  return out;
}

// Multi-agent frontier baseline. Poses outside the world or inside an
// obstacle are dropped before ranking.
inline TeamSelection select_frontier_multi(const OccupancyGrid& grid, std::span<const AgentState> agents,
                                           std::span<const Point3> observed, const CollisionWorld& world,
                                           const SensorModel& sensor, const PlannerConfig& cfg, const RrtConfig& rrt) {
  cfg.validate();
  if (agents.empty()) throw std::invalid_argument("team is empty");
  FrontierPoses fp = frontier_poses(grid, observed, sensor, cfg);
  FrontierPoses usable;
  for (std::size_t i = 0; i < fp.poses.size(); ++i) {
    if (!world.point_free(fp.poses[i].position)) continue;
    usable.poses.push_back(fp.poses[i]);
    usable.cells.push_back(fp.cells[i]);
    usable.scores.push_back(fp.scores[i]);
  }
  if (usable.poses.empty()) throw PlannerStuck("no usable frontier near the object");
  auto reach = [&](std::size_t a, const Pose& p) -> std::optional<double> {
    try {
      return control_effort(world, agents[a].pose, p, rrt);
    } catch (const PlanningFailure&) {
      return std::nullopt;
    }
  };
  TeamSelection out =
      greedy_frontier_assignment(usable.poses, usable.scores, agents.size(), cfg.baseline_distance_threshold, reach);
  for (int i : out.candidate_index) out.joint_gain += usable.scores[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace mapnbv
