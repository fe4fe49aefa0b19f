#pragma once

// Config-driven runs: one episode, or the full comparison matrix with its
// per-cell exports, summary.csv and comparison.csv.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "mapnbv/episode.hpp"
#include "mapnbv/io/config.hpp"
#include "mapnbv/io/external_predictor.hpp"
#include "mapnbv/io/report_io.hpp"
#include "mapnbv/io/tables.hpp"

namespace mapnbv::io {

// Applies the config's predictor entry (built-in kind or external command).
inline EpisodeConfig configure_episode(const RunConfig& rc, std::shared_ptr<const Scene> scene,
                                       const std::string& predictor, const fs::path& scratch) {
  EpisodeConfig cfg = episode_config(rc, std::move(scene));
  if (!rc.predictor_command.empty()) {
    cfg.external_predictor = command_predictor(rc.predictor_command, scratch);
    cfg.external_predictor_name = "command";
  } else {
    cfg.predictor = parse_predictor_kind(predictor);
  }
  return cfg;
}

inline EpisodeReport run_single(const RunConfig& rc, const fs::path& out, std::optional<std::uint64_t> seed) {
  const auto scene = build_scene(rc.scenes.front(), rc.scene_options);
  EpisodeConfig cfg = configure_episode(rc, scene, rc.predictors.front(), out / "predictor");
  if (seed) cfg.seed = *seed;
  EpisodeReport r = run_episode(cfg);
  export_report(r, out);
  return r;
}

struct SuiteRow {
  std::string scene;
  std::string label;
  PlannerKind planner{PlannerKind::map_nbv};
  int team_size{1};
  std::string predictor;
  int replicate{0};
  std::uint64_t seed{0};
  fs::path dir;
  std::optional<EpisodeReport> report;
  std::string error;
};

struct SuiteOutcome {
  std::vector<SuiteRow> rows;

  bool any_error() const {
    for (const auto& r : rows)
      if (!r.error.empty()) return true;
    return false;
  }
  // True when no cell ended other than planner_stuck.
  bool all_stuck() const {
    bool any = false;
    for (const auto& r : rows) {
      if (!r.report) continue;
      any = true;
      if (r.report->termination != Termination::planner_stuck) return false;
    }
    return any;
  }
};

inline std::string cell_name(PlannerKind planner, int team, const std::string& predictor) {
  return std::string(to_string(planner)) + "-n" + std::to_string(team) + "-" + predictor;
}

// Scenes x team sizes x predictors x planners x replicates. Pred-NBV ignores
// the team size and the frontier baseline ignores the predictor, so those
// cells run once per scene and replicate.
inline SuiteOutcome run_configured_suite(const RunConfig& rc, const fs::path& out, std::ostream* log = nullptr) {
  SuiteOutcome outcome;
  for (const auto& src : rc.scenes) {
    std::shared_ptr<const Scene> scene;
    std::string scene_error;
    try {
      scene = build_scene(src, rc.scene_options);
    } catch (const std::exception& e) {
      scene_error = e.what();
    }
    const std::vector<std::shared_ptr<const Scene>> one{scene};
    for (std::size_t ti = 0; ti < rc.team_sizes.size(); ++ti)
      for (std::size_t pi = 0; pi < rc.predictors.size(); ++pi)
        for (PlannerKind planner : rc.planners) {
          if (planner == PlannerKind::pred_nbv && ti > 0) continue;
          if (planner == PlannerKind::frontier_multi && pi > 0) continue;
          const int team = planner == PlannerKind::pred_nbv ? 1 : rc.team_sizes[ti];
          const std::string pred = planner == PlannerKind::frontier_multi ? "none" : rc.predictors[pi];
          const fs::path cell_dir = out / src.name / cell_name(planner, team, pred);
          std::vector<SuiteCell> cells;
          if (scene) {
            const std::vector<PlannerKind> kinds{planner};
            int replicate = 0;
            cells = run_suite(one, kinds, rc.replicates, rc.seed, [&](const std::shared_ptr<const Scene>& s) {
              EpisodeConfig cfg = configure_episode(rc, s, rc.predictors[pi],
                                                    cell_dir / ("r" + std::to_string(replicate++)) / "predictor");
              cfg.team_size = team;
              return cfg;
            });
          } else {
            for (int r = 0; r < rc.replicates; ++r)
              cells.push_back({src.name, planner, cell_seed(rc.seed, src.name, planner, static_cast<std::uint64_t>(r)), {}, scene_error});
          }
          for (std::size_t r = 0; r < cells.size(); ++r) {
            SuiteRow row{src.name, scene ? scene->label : "", planner, team, pred, static_cast<int>(r), cells[r].seed,
                         cell_dir / ("r" + std::to_string(r)), std::move(cells[r].report), cells[r].error};
            if (row.report) export_report(*row.report, row.dir);
            if (log) {
              *log << row.scene << ' ' << cell_name(planner, team, pred) << " r" << r << ": ";
              if (row.report)
                *log << to_string(row.report->termination) << ", " << row.report->points.back() << " points, "
                     << row.report->steps() << " steps\n";
              else
                *log << "error: " << row.error << '\n';
            }
            outcome.rows.push_back(std::move(row));
          }
        }
  }

  std::string summary = "scene,label,planner,team_size,predictor,replicate,seed,termination,steps,points,team_distance,error\n";
  for (const auto& r : outcome.rows) {
    summary += r.scene + ',' + r.label + ',' + std::string(to_string(r.planner)) + ',' + std::to_string(r.team_size) +
               ',' + r.predictor + ',' + std::to_string(r.replicate) + ',' + std::to_string(r.seed) + ',';
    if (r.report)
      summary += std::string(to_string(r.report->termination)) + ',' + std::to_string(r.report->steps()) + ',' +
                 std::to_string(r.report->points.back()) + ',' + fmt(team_distance(r.report->distance.back())) + ",\n";
    else
      summary += ",,,,\"" + r.error + "\"\n";
  }
  write_text(out / "summary.csv", summary);

  // MAP-NBV against every other planner run on the same scene and replicate
  // (same team size and predictor where those apply).
  std::string cmp = "scene,label,team_size,predictor,replicate,planner_b,points_map_nbv,points_b,improvement_percent\n";
  for (const auto& a : outcome.rows) {
    if (a.planner != PlannerKind::map_nbv || !a.report) continue;
    for (const auto& b : outcome.rows) {
      if (b.planner == PlannerKind::map_nbv || !b.report || b.scene != a.scene || b.replicate != a.replicate) continue;
      if (b.planner == PlannerKind::frontier_multi && b.team_size != a.team_size) continue;
      if (b.planner == PlannerKind::pred_nbv && b.predictor != a.predictor) continue;
      const double pa = static_cast<double>(a.report->points.back());
      const double pb = static_cast<double>(b.report->points.back());
      cmp += a.scene + ',' + a.label + ',' + std::to_string(a.team_size) + ',' + a.predictor + ',' +
             std::to_string(a.replicate) + ',' + std::string(to_string(b.planner)) + ',' + fmt(pa) + ',' + fmt(pb) +
             ',' + fmt(round_half_even(improvement(pa, pb))) + '\n';
    }
  }
  write_text(out / "comparison.csv", cmp);
  return outcome;
}

}  // namespace mapnbv::io
