#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mapnbv/candidates.hpp"
#include "mapnbv/errors.hpp"
#include "mapnbv/geometry.hpp"
#include "mapnbv/path_planner.hpp"
#include "mapnbv/planners.hpp"
#include "mapnbv/predictor.hpp"
#include "mapnbv/random.hpp"
#include "mapnbv/scene.hpp"

namespace mapnbv {

enum class Termination { converged, max_steps, planner_stuck };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_steps: return "max_steps";
    case Termination::planner_stuck: return "planner_stuck";
  }
  return "?";
}

inline Termination parse_termination(std::string_view s) {
  if (s == "converged") return Termination::converged;
  if (s == "max_steps") return Termination::max_steps;
  if (s == "planner_stuck") return Termination::planner_stuck;
  throw std::invalid_argument("unknown termination reason: " + std::string(s));
}

// Replaces the built-in predictors when set: partial cloud in, full cloud out.
using ExternalPredictor = std::function<PointCloud(std::span<const Point3>)>;

struct EpisodeConfig {
  std::shared_ptr<const Scene> scene;
  int team_size{2};
  std::vector<Pose> spawn_poses;  // empty: derived from the scene (see default_spawn)
  double spawn_azimuth{45.0};     // degrees, used when spawn_poses is empty
  double spawn_spacing_scale{0.1};  // neighbour spacing, in ground-truth d_max
  PredictorKind predictor{PredictorKind::mirror_symmetry};
  MirrorAxis mirror_axis{MirrorAxis::minor};
  ExternalPredictor external_predictor;
  std::string external_predictor_name;
  SensorModel sensor;
  PlannerKind planner{PlannerKind::map_nbv};
  PlannerConfig planner_cfg;
  RrtConfig rrt;
  CandidateConfig candidates;
  double occupancy_resolution{0.2};
  double safety_margin{0.4};
  double stopping_ratio{0.95};
  int max_steps{30};
  std::uint64_t seed{0};

  void validate() const {
    if (!scene) throw std::invalid_argument("episode has no scene");
    if (team_size < 1) throw std::invalid_argument("team size must be >= 1");
    if (!(stopping_ratio > 0.0 && stopping_ratio < 1.0)) throw std::invalid_argument("stopping ratio must lie in (0, 1)");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (!spawn_poses.empty() && static_cast<int>(spawn_poses.size()) < effective_team_size())
      throw std::invalid_argument("fewer spawn poses than agents");
    require_positive_leaf(occupancy_resolution, "occupancy resolution");
    if (!(safety_margin >= 0.0)) throw std::invalid_argument("safety margin must be >= 0");
    if (!(spawn_spacing_scale > 0.0)) throw std::invalid_argument("spawn spacing must be positive");
    sensor.validate();
    planner_cfg.validate();
    rrt.validate();
    candidates.validate();
    if (effective_team_size() > planner_cfg.max_team_size) throw std::invalid_argument("team exceeds max_team_size");
  }

  // Pred-NBV is the single-agent case whatever team size was asked for.
  int effective_team_size() const { return planner == PlannerKind::pred_nbv ? 1 : team_size; }

  std::string predictor_name() const {
    return external_predictor ? (external_predictor_name.empty() ? "external" : external_predictor_name)
                              : std::string(to_string(predictor));
  }
};

// Defaults tied to the scene's scale: dedup at the scene resolution,
// occupancy at twice that, margin at twice occupancy, frontier proximity 4
// cells, baseline separation 10 cells, RRT step a tenth of the object diagonal.
inline EpisodeConfig default_episode_config(std::shared_ptr<const Scene> scene) {
  EpisodeConfig cfg;
  const double dedup = scene->dedup_resolution;
  cfg.occupancy_resolution = 2.0 * dedup;
  cfg.safety_margin = 2.0 * cfg.occupancy_resolution;
  cfg.planner_cfg.dedup_resolution = dedup;
  cfg.planner_cfg.object_proximity = 4.0 * cfg.occupancy_resolution;
  cfg.planner_cfg.baseline_distance_threshold = 2.0 * cfg.occupancy_resolution * 5.0;
  cfg.rrt.step_size = 0.1 * bounding_box(scene->object_cloud).diagonal();
  cfg.scene = std::move(scene);
  return cfg;
}

// Agents side by side on the mid ring around the ground truth, at centroid
// height, facing the centroid.
inline std::vector<Pose> default_spawn(const Scene& scene, int agents, double azimuth_deg, double spacing_scale,
                                       double radius_scale = 1.5) {
  const CloudStats st = cloud_stats(scene.object_cloud);
  const double r = radius_scale * st.d_max;
  const double step = spacing_scale * st.d_max / r;  // radians between neighbours
  std::vector<Pose> out;
  for (int i = 0; i < agents; ++i) {
    const double a = azimuth_deg * std::numbers::pi / 180.0 + i * step;
    const Point3 p = st.centroid + r * Vec3(std::cos(a), std::sin(a), 0.0);
    out.push_back(Pose::looking_at(p, st.centroid));
  }
  return out;
}

struct EpisodeSettings {
  std::string scene;
  std::string label;
  std::string planner;
  std::string predictor;
  std::string mirror_axis;
  int team_size{1};
  std::uint64_t seed{0};
  SensorModel sensor;
  double tau{0.95};
  double dedup_resolution{0.0};
  double hpr_exponent{0.0};
  double occupancy_resolution{0.0};
  double safety_margin{0.0};
  double baseline_distance_threshold{0.0};
  double object_proximity{0.0};
  double stopping_ratio{0.95};
  int max_steps{30};
  double rrt_step_size{0.0};
  int rrt_max_iterations{0};
  std::size_t object_points{0};

  bool operator==(const EpisodeSettings& o) const {
    return scene == o.scene && label == o.label && planner == o.planner && predictor == o.predictor &&
           mirror_axis == o.mirror_axis && team_size == o.team_size && seed == o.seed &&
           sensor.horizontal_fov == o.sensor.horizontal_fov && sensor.vertical_fov == o.sensor.vertical_fov &&
           sensor.min_range == o.sensor.min_range && sensor.max_range == o.sensor.max_range && tau == o.tau &&
           dedup_resolution == o.dedup_resolution && hpr_exponent == o.hpr_exponent &&
           occupancy_resolution == o.occupancy_resolution && safety_margin == o.safety_margin &&
           baseline_distance_threshold == o.baseline_distance_threshold && object_proximity == o.object_proximity &&
           stopping_ratio == o.stopping_ratio && max_steps == o.max_steps && rrt_step_size == o.rrt_step_size &&
           rrt_max_iterations == o.rrt_max_iterations && object_points == o.object_points;
  }
};

// Index t = 0 is the spawn observation; each later entry is one
// plan-and-move cycle.
struct EpisodeReport {
  EpisodeSettings settings;
  std::vector<std::size_t> points;                // |P_t|
  std::vector<std::vector<double>> distance;      // [t][agent], cumulative
  std::vector<std::vector<Pose>> poses;           // [t][agent]
  std::vector<std::size_t> predicted_points;      // [t], 0 at t = 0 and for the baseline
  std::vector<std::size_t> planned_gain;          // [t], joint gain of the chosen team
  std::vector<std::vector<Point3>> trajectories;  // per agent, flown waypoints
  Termination termination{Termination::max_steps};
  std::string message;

  // Not part of the serialized metrics: wall-clock and per-step clouds.
  std::vector<double> step_seconds;
  std::vector<PointCloud> step_clouds;

  std::size_t steps() const { return points.empty() ? 0 : points.size() - 1; }

  bool same_metrics(const EpisodeReport& o) const {
    return settings == o.settings && points == o.points && distance == o.distance && poses == o.poses &&
           predicted_points == o.predicted_points && planned_gain == o.planned_gain &&
           trajectories == o.trajectories && termination == o.termination && message == o.message;
  }
};

// |P_{t-1}| >= ratio * |P_t|.
inline bool should_stop(std::size_t previous, std::size_t current, double ratio) {
  return static_cast<double>(previous) >= ratio * static_cast<double>(current);
}

namespace detail {

inline EpisodeSettings settings_of(const EpisodeConfig& cfg) {
  EpisodeSettings s;
  s.scene = cfg.scene->name;
  s.label = cfg.scene->label;
  s.planner = std::string(to_string(cfg.planner));
  s.predictor = cfg.planner == PlannerKind::frontier_multi ? "none" : cfg.predictor_name();
  s.mirror_axis = std::string(to_string(cfg.mirror_axis));
  s.team_size = cfg.effective_team_size();
  s.seed = cfg.seed;
  s.sensor = cfg.sensor;
  s.tau = cfg.planner_cfg.tau;
  s.dedup_resolution = cfg.planner_cfg.dedup_resolution;
  s.hpr_exponent = cfg.planner_cfg.hpr_exponent;
  s.occupancy_resolution = cfg.occupancy_resolution;
  s.safety_margin = cfg.safety_margin;
  s.baseline_distance_threshold = cfg.planner_cfg.baseline_distance_threshold;
  s.object_proximity = cfg.planner_cfg.object_proximity;
  s.stopping_ratio = cfg.stopping_ratio;
  s.max_steps = cfg.max_steps;
  s.rrt_step_size = cfg.rrt.step_size;
  s.rrt_max_iterations = cfg.rrt.max_iterations;
  s.object_points = cfg.scene->object_cloud.size();
  return s;
}

}  // namespace detail

// observe -> accumulate -> predict -> plan -> fly, until the unique-point
// count stops growing by more than (1 - stopping_ratio), max_steps is hit, or
// no team assignment exists.
inline EpisodeReport run_episode(const EpisodeConfig& cfg) {
  cfg.validate();
  const Scene& scene = *cfg.scene;
  const int n = cfg.effective_team_size();
  const double res = cfg.planner_cfg.dedup_resolution;

  RrtConfig rrt = cfg.rrt;
  rrt.seed = hash_combine(cfg.seed, hash_string("rrt"));
  const CollisionWorld world = make_collision_world(scene, cfg.occupancy_resolution, cfg.safety_margin);

  std::vector<Pose> spawn = cfg.spawn_poses.empty()
                                ? default_spawn(scene, n, cfg.spawn_azimuth, cfg.spawn_spacing_scale)
                                : std::vector<Pose>(cfg.spawn_poses.begin(), cfg.spawn_poses.begin() + n);
  std::vector<AgentState> agents(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& a = agents[static_cast<std::size_t>(i)];
    a.id = i;
    a.pose = spawn[static_cast<std::size_t>(i)];
    a.trajectory = {a.pose};
    if (!world.point_free(a.pose.position))
      throw SetupError("spawn pose of agent " + std::to_string(i) + " is not collision-free");
  }

  EpisodeReport report;
  report.settings = detail::settings_of(cfg);
  report.trajectories.resize(static_cast<std::size_t>(n));
  OccupancyGrid grid = OccupancyGrid::covering(scene.world_bounds, cfg.occupancy_resolution);
  PointCloud observed;

  using clock = std::chrono::steady_clock;
  auto observe_all = [&](int t) {
    std::vector<Observation> obs;
    for (const auto& a : agents) obs.push_back(synthesize_observation(scene, a.pose, cfg.sensor, cfg.planner_cfg.hpr_exponent, a.id, t));
    for (const auto& o : obs) grid = update_occupancy(std::move(grid), o);
    observed = mapnbv::accumulate(observed, obs, res);
    return obs;
  };
  auto record = [&](std::size_t predicted, std::size_t gain, double seconds) {
    report.points.push_back(key_set(observed, res).size());
    std::vector<double> d;
    std::vector<Pose> p;
    for (const auto& a : agents) {
      d.push_back(a.distance_traveled);
      p.push_back(a.pose);
    }
    report.distance.push_back(std::move(d));
    report.poses.push_back(std::move(p));
    report.predicted_points.push_back(predicted);
    report.planned_gain.push_back(gain);
    report.step_seconds.push_back(seconds);
    report.step_clouds.push_back(observed);
  };

  auto t0 = clock::now();
  for (const auto& o : observe_all(0))
    if (o.cloud.empty())
      throw SetupError("agent " + std::to_string(o.agent_id) + " does not see the object from its spawn pose");
  for (std::size_t i = 0; i < agents.size(); ++i) report.trajectories[i].push_back(agents[i].pose.position);
  record(0, 0, std::chrono::duration<double>(clock::now() - t0).count());

  for (int t = 1;; ++t) {
    t0 = clock::now();
    TeamSelection sel;
    std::size_t predicted = 0;
    try {
      if (cfg.planner == PlannerKind::frontier_multi) {
        sel = select_frontier_multi(grid, agents, observed, world, cfg.sensor, cfg.planner_cfg, rrt);
      } else {
        const PointCloud prediction = cfg.external_predictor
                                          ? cfg.external_predictor(observed)
                                          : predict(cfg.predictor, observed, &scene, res, cfg.mirror_axis).cloud;
        if (prediction.empty()) throw PlannerStuck("predictor returned an empty cloud");
        predicted = prediction.size();
        CandidateSet cands = generate_candidates(cloud_stats(prediction), cfg.candidates);
        mark_feasibility(cands, world);
        const KeySet observed_keys = key_set(observed, res);
        sel = select_map_nbv(cands, agents, prediction, observed_keys, world, cfg.sensor, cfg.planner_cfg, rrt);
      }
    } catch (const PlannerStuck& e) {
      report.termination = Termination::planner_stuck;
      report.message = e.what();
      break;
    } catch (const DegenerateObjectError& e) {
      report.termination = Termination::planner_stuck;
      report.message = e.what();
      break;
    }

    // Fly every agent; the paths replay the plans the selection was costed on.
    for (std::size_t i = 0; i < agents.size(); ++i) {
      auto& a = agents[i];
      const Path path = plan_path(world, a.pose.position, sel.poses[i].position, rrt);
      a.distance_traveled += path.length;
      a.pose = sel.poses[i];
      a.trajectory.push_back(a.pose);
      a.paths.push_back(path);
      report.trajectories[i].insert(report.trajectories[i].end(), path.waypoints.begin() + 1, path.waypoints.end());
    }
    observe_all(t);
    record(predicted, sel.joint_gain, std::chrono::duration<double>(clock::now() - t0).count());

    const auto& pts = report.points;
    if (should_stop(pts[pts.size() - 2], pts.back(), cfg.stopping_ratio)) {
      report.termination = Termination::converged;
      break;
    }
    if (t >= cfg.max_steps) {
      report.termination = Termination::max_steps;
      break;
    }
  }
  return report;
}

// |P_1|: unique points after one plan-and-move cycle from spawn (|P_0| if
// the planner cannot move).
inline std::size_t first_iteration_gain(EpisodeConfig cfg) {
  cfg.max_steps = 1;
  const EpisodeReport r = run_episode(cfg);
  return r.points.back();
}

struct SuiteCell {
  std::string scene;
  PlannerKind planner{PlannerKind::map_nbv};
  std::uint64_t seed{0};
  std::optional<EpisodeReport> report;
  std::string error;  // set when the cell failed before producing a report
};

inline std::uint64_t cell_seed(std::uint64_t master, std::string_view scene, PlannerKind planner,
                               std::uint64_t replicate = 0) {
  std::uint64_t h = hash_combine(master, hash_string(scene));
  h = hash_combine(h, hash_string(to_string(planner)));
  return hash_combine(h, replicate);
}

// Cartesian product of scenes x planners x replicates. `configure` turns a
// scene into its base config (team size, predictor, overrides); the planner
// kind and the derived seed are set per cell. Failures are recorded and the
// suite carries on.
template <class Configure>
std::vector<SuiteCell> run_suite(std::span<const std::shared_ptr<const Scene>> scenes,
                                 std::span<const PlannerKind> planners, int replicates, std::uint64_t master_seed,
                                 Configure&& configure) {
  std::vector<SuiteCell> out;
  for (const auto& scene : scenes)
    for (PlannerKind planner : planners)
      for (int r = 0; r < replicates; ++r) {
        SuiteCell cell;
        cell.scene = scene->name;
        cell.planner = planner;
        cell.seed = cell_seed(master_seed, scene->name, planner, static_cast<std::uint64_t>(r));
        try {
          EpisodeConfig cfg = configure(scene);
          cfg.planner = planner;
          cfg.seed = cell.seed;
          cell.report = run_episode(cfg);
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
        out.push_back(std::move(cell));
      }
  return out;
}

}  // namespace mapnbv
