#pragma once

// Run configuration: a TOML subset or JSON document, checked against a fixed
// schema (unknown keys and wrong types are errors) and mapped onto
// EpisodeConfig plus the suite lists.
//
// TOML subset: comments, [table] and [a.b] headers, bare or dotted keys,
// basic and literal strings, integers, floats, booleans and (possibly
// multi-line) arrays of those. No inline tables, arrays of tables or dates.

#include <cctype>
#include <charconv>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mapnbv/episode.hpp"
#include "mapnbv/errors.hpp"
#include "mapnbv/io/mesh_io.hpp"
#include "mapnbv/procedural.hpp"

namespace mapnbv::io {

using json = nlohmann::json;

namespace detail {

class TomlReader {
 public:
  TomlReader(std::string_view text, std::string file) : s_(text), file_(std::move(file)) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (skip_blank_lines()) {
      if (peek() == '[') {
        ++i_;
        if (peek() == '[') fail("arrays of tables are not supported");
        const auto path = key_path();
        skip_ws();
        expect(']');
        table = &root;
        for (const auto& k : path) {
          json& next = (*table)[k];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("'" + k + "' is not a table");
          table = &next;
        }
        if (!defined_tables_.insert(joined(path)).second) fail("table [" + joined(path) + "] defined twice");
      } else {
        const auto path = key_path();
        skip_ws();
        expect('=');
        skip_ws();
        json* t = table;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
          json& next = (*t)[path[k]];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("'" + path[k] + "' is not a table");
          t = &next;
        }
        if (t->contains(path.back())) fail("key '" + path.back() + "' defined twice");
        (*t)[path.back()] = value();
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(file_ + ":" + std::to_string(line_) + ": " + what); }
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }
  void skip_ws() {
    while (peek() == ' ' || peek() == '\t') ++i_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (i_ < s_.size() && s_[i_] != '\n') ++i_;
  }
  // Skips whitespace, comments and newlines; false at end of input.
  bool skip_blank_lines() {
    for (;;) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++i_;
      if (peek() == '\n') {
        ++i_;
        ++line_;
        continue;
      }
      return i_ < s_.size();
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++i_;
    if (i_ < s_.size() && peek() != '\n') fail("unexpected text after value");
  }
  static std::string joined(const std::vector<std::string>& p) {
    std::string out;
    for (const auto& k : p) out += (out.empty() ? "" : ".") + k;
    return out;
  }
  std::string bare_key() {
    const auto start = i_;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-') ++i_;
    if (i_ == start) fail("expected a key");
    return std::string(s_.substr(start, i_ - start));
  }
  std::vector<std::string> key_path() {
    std::vector<std::string> out;
    for (;;) {
      skip_ws();
      out.push_back(peek() == '"' ? basic_string() : bare_key());
      skip_ws();
      if (peek() != '.') return out;
      ++i_;
    }
  }
  std::string basic_string() {
    expect('"');
    std::string out;
    for (;;) {
      const char c = peek();
      if (c == '\0' || c == '\n') fail("unterminated string");
      ++i_;
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      const char e = peek();
      ++i_;
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }
  std::string literal_string() {
    expect('\'');
    const auto end = s_.find('\'', i_);
    const auto nl = s_.find('\n', i_);
    if (end == std::string_view::npos || (nl != std::string_view::npos && nl < end)) fail("unterminated string");
    std::string out(s_.substr(i_, end - i_));
    i_ = end + 1;
    return out;
  }
  json value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (c == '{') fail("inline tables are not supported");
    const auto start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(peek())) || std::string_view("+-._").find(peek()) != std::string_view::npos)) ++i_;
    std::string tok(s_.substr(start, i_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("expected a value");
    std::string digits;
    for (char ch : tok)
      if (ch != '_') digits += ch;
    if (digits.find_first_of(".eE") == std::string::npos) {
      std::int64_t v{};
      const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
      const auto [p, ec] = std::from_chars(b, digits.data() + digits.size(), v);
      if (ec == std::errc{} && p == digits.data() + digits.size()) return v;
    } else {
      double v{};
      const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
      const auto [p, ec] = std::from_chars(b, digits.data() + digits.size(), v);
      if (ec == std::errc{} && p == digits.data() + digits.size() && std::isfinite(v)) return v;
    }
    fail("bad value '" + tok + "'");
  }
  json array() {
    expect('[');
    json out = json::array();
    for (;;) {
      skip_blank_lines();
      if (peek() == ']') {
        ++i_;
        return out;
      }
      out.push_back(value());
      skip_blank_lines();
      if (peek() == ',') {
        ++i_;
        continue;
      }
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  std::string_view s_;
  std::string file_;
  std::size_t i_{0};
  std::size_t line_{1};
  std::set<std::string> defined_tables_;
};

}  // namespace detail

inline json parse_toml(std::string_view text, const std::string& file = "<toml>") {
  return detail::TomlReader(text, file).parse();
}

inline json parse_json_config(std::string_view text, const std::string& file = "<json>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(file + ": " + e.what());
  }
}

// Allowed keys. Leaves name their type; nested objects are tables.
inline const json& config_schema() {
  static const json schema = json::parse(R"({
    "seed": "integer",
    "scenes": {"bundled": "string[]", "paths": "string[]", "surface_samples": "integer", "sample_seed": "integer",
               "dedup_scale": "number", "world_margin_scale": "number"},
    "episode": {"planner": "string", "team_size": "integer", "stopping_ratio": "number", "max_steps": "integer",
                "spawn_azimuth": "number", "spawn_spacing_scale": "number", "occupancy_resolution": "number",
                "safety_margin": "number"},
    "predictor": {"kind": "string", "mirror_axis": "string", "command": "string"},
    "sensor": {"horizontal_fov": "number", "vertical_fov": "number", "min_range": "number", "max_range": "number"},
    "planner": {"tau": "number", "dedup_resolution": "number", "hpr_exponent": "number",
                "baseline_distance_threshold": "number", "max_team_size": "integer", "standoff_scale": "number",
                "object_proximity": "number"},
    "rrt": {"step_size": "number", "max_iterations": "integer", "goal_bias": "number", "goal_tolerance": "number"},
    "candidates": {"mid_radius_scale": "number", "outer_radius_scale": "number", "height_offset_scale": "number",
                   "angular_step": "number"},
    "suite": {"planners": "string[]", "predictors": "string[]", "team_sizes": "integer[]", "replicates": "integer"}
  })");
  return schema;
}

namespace detail {

inline bool has_type(const json& v, std::string_view type) {
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "string") return v.is_string();
  if (type == "bool") return v.is_boolean();
  if (type.ends_with("[]")) {
    if (!v.is_array()) return false;
    for (const auto& e : v)
      if (!has_type(e, type.substr(0, type.size() - 2))) return false;
    return true;
  }
  return false;
}

inline void check_schema(const json& doc, const json& schema, const std::string& prefix) {
  if (!doc.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + " must be a table");
  for (const auto& [key, v] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    const json& s = schema.at(key);
    if (s.is_object()) check_schema(v, s, path);
    else if (!has_type(v, s.get<std::string>()))
      throw ConfigError("config key '" + path + "' must be of type " + s.get<std::string>());
  }
}

}  // namespace detail

inline void validate_config(const json& doc) { detail::check_schema(doc, config_schema(), ""); }

// Parses by extension (.toml or .json) and validates.
inline json load_config(const fs::path& path) {
  std::string text;
  try {
    text = detail::slurp(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  const std::string ext = path.extension().string();
  json doc;
  if (ext == ".json") doc = parse_json_config(text, path.string());
  else if (ext == ".toml") doc = parse_toml(text, path.string());
  else throw ConfigError("config must be .toml or .json: " + path.string());
  validate_config(doc);
  return doc;
}

struct SceneSource {
  std::string name;
  std::string bundled;  // bundled scene name, or empty
  fs::path path;        // mesh file, or empty
};

struct RunConfig {
  json doc;
  std::uint64_t seed{0};
  std::vector<SceneSource> scenes;
  SceneOptions scene_options;
  std::vector<PlannerKind> planners;
  std::vector<std::string> predictors;
  std::vector<int> team_sizes;
  int replicates{1};
  std::string predictor_command;
};

namespace detail {

template <class T>
void take(const json& table, const char* key, T& into) {
  if (!table.contains(key)) return;
  const json& v = table.at(key);
  if constexpr (std::is_unsigned_v<T>)
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
      throw ConfigError(std::string("config key '") + key + "' must be non-negative");
  into = v.get<T>();
}

template <class F>
auto wrap_invalid(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace detail

// Relative mesh paths resolve against `base` (the config's directory).
inline RunConfig run_config_from(const json& doc, const fs::path& base = {}) {
  validate_config(doc);
  RunConfig rc;
  rc.doc = doc;
  detail::take(doc, "seed", rc.seed);
  const json scenes = doc.value("scenes", json::object());
  for (const auto& n : scenes.value("bundled", json::array())) {
    const std::string name = n.get<std::string>();
    if (name == "all") {
      for (const auto& m : procedural::bundled_scenes()) rc.scenes.push_back({m.name, m.name, {}});
      continue;
    }
    bool found = false;
    for (const auto& m : procedural::bundled_scenes()) found = found || m.name == name;
    if (!found) throw ConfigError("unknown bundled scene '" + name + "'");
    rc.scenes.push_back({name, name, {}});
  }
  for (const auto& p : scenes.value("paths", json::array())) {
    fs::path path = p.get<std::string>();
    if (path.is_relative() && !base.empty()) path = base / path;
    rc.scenes.push_back({path.stem().string(), {}, path});
  }
  if (rc.scenes.empty()) throw ConfigError("config names no scenes (scenes.bundled or scenes.paths)");
  detail::take(scenes, "surface_samples", rc.scene_options.surface_samples);
  detail::take(scenes, "sample_seed", rc.scene_options.sample_seed);
  detail::take(scenes, "dedup_scale", rc.scene_options.dedup_scale);
  detail::take(scenes, "world_margin_scale", rc.scene_options.world_margin_scale);
  if (rc.scene_options.surface_samples == 0) throw ConfigError("scenes.surface_samples must be positive");
  if (!(rc.scene_options.dedup_scale > 0.0)) throw ConfigError("scenes.dedup_scale must be positive");
  if (!(rc.scene_options.world_margin_scale > 0.0)) throw ConfigError("scenes.world_margin_scale must be positive");

  const json suite = doc.value("suite", json::object());
  const json episode = doc.value("episode", json::object());
  const json predictor = doc.value("predictor", json::object());
  detail::wrap_invalid([&] {
    for (const auto& p : suite.value("planners", json::array())) rc.planners.push_back(parse_planner_kind(p.get<std::string>()));
    if (rc.planners.empty()) rc.planners.push_back(parse_planner_kind(episode.value("planner", "map_nbv")));
    for (const auto& p : suite.value("predictors", json::array())) {
      parse_predictor_kind(p.get<std::string>());
      rc.predictors.push_back(p.get<std::string>());
    }
    if (rc.predictors.empty()) rc.predictors.push_back(predictor.value("kind", "mirror_symmetry"));
    parse_predictor_kind(rc.predictors.front());
    return 0;
  });
  for (const auto& t : suite.value("team_sizes", json::array())) rc.team_sizes.push_back(t.get<int>());
  if (rc.team_sizes.empty()) rc.team_sizes.push_back(episode.value("team_size", 2));
  for (int t : rc.team_sizes)
    if (t < 1) throw ConfigError("team sizes must be >= 1");
  detail::take(suite, "replicates", rc.replicates);
  if (rc.replicates < 1) throw ConfigError("suite.replicates must be >= 1");
  detail::take(predictor, "command", rc.predictor_command);
  return rc;
}

inline RunConfig load_run_config(const fs::path& path) {
  return run_config_from(load_config(path), path.parent_path());
}

inline std::shared_ptr<const Scene> build_scene(const SceneSource& src, const SceneOptions& opt) {
  if (!src.bundled.empty())
    for (const auto& m : procedural::bundled_scenes())
      if (m.name == src.bundled) return std::make_shared<const Scene>(make_scene(m.name, m.label, m.mesh, opt));
  if (src.path.empty()) throw ConfigError("scene '" + src.name + "' has no source");
  return std::make_shared<const Scene>(make_scene(src.name, "mesh", load_mesh(src.path), opt));
}

// Scene-derived defaults, then every key present in the document.
inline EpisodeConfig episode_config(const RunConfig& rc, std::shared_ptr<const Scene> scene) {
  EpisodeConfig cfg = default_episode_config(std::move(scene));
  const json& d = rc.doc;
  const json none = json::object();
  const json& ep = d.contains("episode") ? d.at("episode") : none;
  const json& pr = d.contains("predictor") ? d.at("predictor") : none;
  const json& se = d.contains("sensor") ? d.at("sensor") : none;
  const json& pl = d.contains("planner") ? d.at("planner") : none;
  const json& rr = d.contains("rrt") ? d.at("rrt") : none;
  const json& ca = d.contains("candidates") ? d.at("candidates") : none;
  return detail::wrap_invalid([&] {
    if (ep.contains("planner")) cfg.planner = parse_planner_kind(ep.at("planner").get<std::string>());
    detail::take(ep, "team_size", cfg.team_size);
    detail::take(ep, "stopping_ratio", cfg.stopping_ratio);
    detail::take(ep, "max_steps", cfg.max_steps);
    detail::take(ep, "spawn_azimuth", cfg.spawn_azimuth);
    detail::take(ep, "spawn_spacing_scale", cfg.spawn_spacing_scale);
    detail::take(ep, "occupancy_resolution", cfg.occupancy_resolution);
    detail::take(ep, "safety_margin", cfg.safety_margin);
    if (pr.contains("kind")) cfg.predictor = parse_predictor_kind(pr.at("kind").get<std::string>());
    if (pr.contains("mirror_axis")) cfg.mirror_axis = parse_mirror_axis(pr.at("mirror_axis").get<std::string>());
    detail::take(se, "horizontal_fov", cfg.sensor.horizontal_fov);
    detail::take(se, "vertical_fov", cfg.sensor.vertical_fov);
    detail::take(se, "min_range", cfg.sensor.min_range);
    detail::take(se, "max_range", cfg.sensor.max_range);
    detail::take(pl, "tau", cfg.planner_cfg.tau);
    detail::take(pl, "dedup_resolution", cfg.planner_cfg.dedup_resolution);
    detail::take(pl, "hpr_exponent", cfg.planner_cfg.hpr_exponent);
    detail::take(pl, "baseline_distance_threshold", cfg.planner_cfg.baseline_distance_threshold);
    detail::take(pl, "max_team_size", cfg.planner_cfg.max_team_size);
    detail::take(pl, "standoff_scale", cfg.planner_cfg.standoff_scale);
    detail::take(pl, "object_proximity", cfg.planner_cfg.object_proximity);
    detail::take(rr, "step_size", cfg.rrt.step_size);
    detail::take(rr, "max_iterations", cfg.rrt.max_iterations);
    detail::take(rr, "goal_bias", cfg.rrt.goal_bias);
    detail::take(rr, "goal_tolerance", cfg.rrt.goal_tolerance);
    detail::take(ca, "mid_radius_scale", cfg.candidates.mid_radius_scale);
    detail::take(ca, "outer_radius_scale", cfg.candidates.outer_radius_scale);
    detail::take(ca, "height_offset_scale", cfg.candidates.height_offset_scale);
    detail::take(ca, "angular_step", cfg.candidates.angular_step);
    cfg.seed = rc.seed;
    cfg.validate();
    return cfg;
  });
}

}  // namespace mapnbv::io
