#pragma once

// Episode exports: metrics.json (everything but wall-clock), steps.csv,
// plot_data.csv, timing.csv, clouds/step_<t>.ply and trajectories.ply.

#include <charconv>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "mapnbv/episode.hpp"
#include "mapnbv/io/mesh_io.hpp"

namespace mapnbv::io {

using json = nlohmann::json;

// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

namespace detail {

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 json_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("metrics.json", 0, "expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace detail

inline json settings_json(const EpisodeSettings& s) {
  return {{"scene", s.scene},
          {"label", s.label},
          {"planner", s.planner},
          {"predictor", s.predictor},
          {"mirror_axis", s.mirror_axis},
          {"team_size", s.team_size},
          {"seed", s.seed},
          {"sensor",
           {{"horizontal_fov", s.sensor.horizontal_fov},
            {"vertical_fov", s.sensor.vertical_fov},
            {"min_range", s.sensor.min_range},
            {"max_range", s.sensor.max_range}}},
          {"tau", s.tau},
          {"dedup_resolution", s.dedup_resolution},
          {"hpr_exponent", s.hpr_exponent},
          {"occupancy_resolution", s.occupancy_resolution},
          {"safety_margin", s.safety_margin},
          {"baseline_distance_threshold", s.baseline_distance_threshold},
          {"object_proximity", s.object_proximity},
          {"stopping_ratio", s.stopping_ratio},
          {"max_steps", s.max_steps},
          {"rrt_step_size", s.rrt_step_size},
          {"rrt_max_iterations", s.rrt_max_iterations},
          {"object_points", s.object_points}};
}

inline EpisodeSettings settings_from_json(const json& j) {
  EpisodeSettings s;
  j.at("scene").get_to(s.scene);
  j.at("label").get_to(s.label);
  j.at("planner").get_to(s.planner);
  j.at("predictor").get_to(s.predictor);
  j.at("mirror_axis").get_to(s.mirror_axis);
  j.at("team_size").get_to(s.team_size);
  j.at("seed").get_to(s.seed);
  const json& se = j.at("sensor");
  se.at("horizontal_fov").get_to(s.sensor.horizontal_fov);
  se.at("vertical_fov").get_to(s.sensor.vertical_fov);
  se.at("min_range").get_to(s.sensor.min_range);
  se.at("max_range").get_to(s.sensor.max_range);
  j.at("tau").get_to(s.tau);
  j.at("dedup_resolution").get_to(s.dedup_resolution);
  j.at("hpr_exponent").get_to(s.hpr_exponent);
  j.at("occupancy_resolution").get_to(s.occupancy_resolution);
  j.at("safety_margin").get_to(s.safety_margin);
  j.at("baseline_distance_threshold").get_to(s.baseline_distance_threshold);
  j.at("object_proximity").get_to(s.object_proximity);
  j.at("stopping_ratio").get_to(s.stopping_ratio);
  j.at("max_steps").get_to(s.max_steps);
  j.at("rrt_step_size").get_to(s.rrt_step_size);
  j.at("rrt_max_iterations").get_to(s.rrt_max_iterations);
  j.at("object_points").get_to(s.object_points);
  return s;
}

inline json metrics_json(const EpisodeReport& r) {
  json steps = json::array();
  for (std::size_t t = 0; t < r.points.size(); ++t) {
    json agents = json::array();
    for (std::size_t i = 0; i < r.poses[t].size(); ++i)
      agents.push_back({{"distance", r.distance[t][i]},
                        {"position", detail::vec_json(r.poses[t][i].position)},
                        {"facing", detail::vec_json(r.poses[t][i].facing)}});
    steps.push_back({{"t", t},
                     {"points", r.points[t]},
                     {"predicted_points", r.predicted_points[t]},
                     {"planned_gain", r.planned_gain[t]},
                     {"agents", std::move(agents)}});
  }
  json traj = json::array();
  for (const auto& line : r.trajectories) {
    json pts = json::array();
    for (const auto& p : line) pts.push_back(detail::vec_json(p));
    traj.push_back(std::move(pts));
  }
  return {{"settings", settings_json(r.settings)},
          {"termination", to_string(r.termination)},
          {"message", r.message},
          {"steps", std::move(steps)},
          {"trajectories", std::move(traj)}};
}

inline EpisodeReport report_from_json(const json& j) {
  try {
    EpisodeReport r;
    r.settings = settings_from_json(j.at("settings"));
    r.termination = parse_termination(j.at("termination").get<std::string>());
    j.at("message").get_to(r.message);
    for (const auto& s : j.at("steps")) {
      r.points.push_back(s.at("points").get<std::size_t>());
      r.predicted_points.push_back(s.at("predicted_points").get<std::size_t>());
      r.planned_gain.push_back(s.at("planned_gain").get<std::size_t>());
      std::vector<double> d;
      std::vector<Pose> p;
      for (const auto& a : s.at("agents")) {
        d.push_back(a.at("distance").get<double>());
        p.emplace_back(detail::json_vec(a.at("position")), detail::json_vec(a.at("facing")));
      }
      r.distance.push_back(std::move(d));
      r.poses.push_back(std::move(p));
    }
    for (const auto& line : j.at("trajectories")) {
      std::vector<Point3> pts;
      for (const auto& p : line) pts.push_back(detail::json_vec(p));
      r.trajectories.push_back(std::move(pts));
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError("metrics.json", 0, e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError("metrics.json", 0, e.what());
  }
}

inline EpisodeReport load_metrics(const fs::path& path) {
  try {
    return report_from_json(json::parse(detail::slurp(path)));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

inline double team_distance(const std::vector<double>& per_agent) {
  double d = 0.0;
  for (double x : per_agent) d += x;
  return d;
}

inline void write_text(const fs::path& path, const std::string& text) {
  auto out = detail::open_out(path, true);
  out << text;
  detail::finish(out, path);
}

inline std::string steps_csv(const EpisodeReport& r) {
  const std::size_t n = static_cast<std::size_t>(std::max(r.settings.team_size, 0));
  std::string s = "t,points,predicted_points,planned_gain,team_distance";
  for (std::size_t i = 0; i < n; ++i) s += ",distance_" + std::to_string(i);
  s += '\n';
  for (std::size_t t = 0; t < r.points.size(); ++t) {
    s += std::to_string(t) + ',' + std::to_string(r.points[t]) + ',' + std::to_string(r.predicted_points[t]) + ',' +
         std::to_string(r.planned_gain[t]) + ',' + fmt(team_distance(r.distance[t]));
    for (double d : r.distance[t]) s += ',' + fmt(d);
    s += '\n';
  }
  return s;
}

// Long form: one row per step on the step curve and one on the distance curve.
inline std::string plot_csv(const EpisodeReport& r) {
  std::string s = "curve,x,points\n";
  for (std::size_t t = 0; t < r.points.size(); ++t) s += "step," + std::to_string(t) + ',' + std::to_string(r.points[t]) + '\n';
  for (std::size_t t = 0; t < r.points.size(); ++t)
    s += "distance," + fmt(team_distance(r.distance[t])) + ',' + std::to_string(r.points[t]) + '\n';
  return s;
}

inline std::string timing_csv(const EpisodeReport& r) {
  std::string s = "t,seconds\n";
  for (std::size_t t = 0; t < r.step_seconds.size(); ++t) s += std::to_string(t) + ',' + fmt(r.step_seconds[t]) + '\n';
  return s;
}

inline void export_report(const EpisodeReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "metrics.json", metrics_json(r).dump(2) + '\n');
  write_text(dir / "steps.csv", steps_csv(r));
  write_text(dir / "plot_data.csv", plot_csv(r));
  write_text(dir / "timing.csv", timing_csv(r));
  for (std::size_t t = 0; t < r.step_clouds.size(); ++t)
    write_ply(dir / "clouds" / ("step_" + std::to_string(t) + ".ply"), r.step_clouds[t]);
  write_polylines_ply(dir / "trajectories.ply", r.trajectories);
}

}  // namespace mapnbv::io
