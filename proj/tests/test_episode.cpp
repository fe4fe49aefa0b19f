#include <gtest/gtest.h>

#include "mapnbv/episode.hpp"
#include "mapnbv/procedural.hpp"

namespace mapnbv {
namespace {

std::shared_ptr<const Scene> small_sphere(const char* name = "sphere") {
  SceneOptions opt;
  opt.surface_samples = 8000;
  return std::make_shared<const Scene>(make_scene(name, "blob", procedural::sphere(Point3(0, 0, 5), 4.0), opt));
}

std::shared_ptr<const Scene> bundled(const std::string& name) {
  for (auto& m : procedural::bundled_scenes())
    if (m.name == name) return std::make_shared<const Scene>(make_scene(m.name, m.label, m.mesh));
  throw std::logic_error("no bundled scene " + name);
}

TEST(StoppingRule, Examples) {
  EXPECT_TRUE(should_stop(100, 104, 0.95));
  EXPECT_FALSE(should_stop(100, 200, 0.95));
  EXPECT_TRUE(should_stop(100, 100, 0.95));
}

TEST(EpisodeConfig, RejectsInvalid) {
  auto cfg = default_episode_config(small_sphere());
  auto bad = cfg;
  bad.stopping_ratio = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.team_size = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.team_size = 4;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.spawn_poses = {Pose::looking_at(Point3(10, 0, 5), Point3(0, 0, 5))};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.scene = nullptr;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Episode, SetupErrors) {
  auto cfg = default_episode_config(small_sphere());
  cfg.team_size = 1;
  cfg.spawn_poses = {Pose::looking_at(Point3(4, 0, 5), Point3(10, 0, 5))};  // on the surface
  EXPECT_THROW(run_episode(cfg), SetupError);
  cfg.spawn_poses = {Pose::looking_at(Point3(8, 0, 5), Point3(16, 0, 5))};  // facing away
  EXPECT_THROW(run_episode(cfg), SetupError);
}

TEST(Episode, OracleCoversVisibleGroundTruth) {
  auto scene = small_sphere();
  auto cfg = default_episode_config(scene);
  cfg.predictor = PredictorKind::oracle;
  cfg.planner = PlannerKind::map_nbv;
  cfg.team_size = 2;
  const auto r = run_episode(cfg);
  EXPECT_EQ(r.termination, Termination::converged);

  // Oracle: union of observations from a full orbit on the mid ring at
  // centroid height, sampled at the candidate angular step.
  const double res = cfg.planner_cfg.dedup_resolution;
  const CloudStats st = cloud_stats(scene->object_cloud);
  KeySet visible;
  for (int k = 0; k < 12; ++k) {
    const double a = k * 30.0 * std::numbers::pi / 180.0;
    const Point3 p = st.centroid + 1.5 * st.d_max * Vec3(std::cos(a), std::sin(a), 0.0);
    const auto obs = synthesize_observation(*scene, Pose::looking_at(p, st.centroid), cfg.sensor);
    visible = key_union(visible, key_set(obs.cloud, res));
  }
  const KeySet got = key_set(r.step_clouds.back(), res);
  const auto covered = visible.size() - key_difference(visible, got).size();
  EXPECT_GE(static_cast<double>(covered), 0.95 * static_cast<double>(visible.size())) << covered << "/" << visible.size();
}

TEST(Episode, PropertyReportInvariants) {
  for (auto planner : {PlannerKind::map_nbv, PlannerKind::pred_nbv, PlannerKind::frontier_multi}) {
    auto cfg = default_episode_config(small_sphere());
    cfg.planner = planner;
    const auto r = run_episode(cfg);
    const std::size_t n = static_cast<std::size_t>(cfg.effective_team_size());
    ASSERT_GE(r.points.size(), 1u);
    EXPECT_EQ(r.distance.size(), r.points.size());
    EXPECT_EQ(r.poses.size(), r.points.size());
    EXPECT_EQ(r.step_seconds.size(), r.points.size());
    EXPECT_EQ(r.trajectories.size(), n);
    for (std::size_t t = 1; t < r.points.size(); ++t) {
      EXPECT_GE(r.points[t], r.points[t - 1]);
      for (std::size_t i = 0; i < n; ++i) {
        const bool moved = (r.poses[t][i].position - r.poses[t - 1][i].position).norm() > 0.0;
        if (moved) EXPECT_GT(r.distance[t][i], r.distance[t - 1][i]);
        else EXPECT_EQ(r.distance[t][i], r.distance[t - 1][i]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(r.trajectories[i].front(), r.poses.front()[i].position);
      EXPECT_NEAR(polyline_length(r.trajectories[i]), r.distance.back()[i], 1e-9);
    }
    if (r.termination == Termination::converged) {
      const auto& p = r.points;
      EXPECT_TRUE(should_stop(p[p.size() - 2], p.back(), cfg.stopping_ratio));
    }
  }
}

TEST(Episode, MaxStepsHonoured) {
  auto cfg = default_episode_config(small_sphere());
  cfg.max_steps = 1;
  cfg.stopping_ratio = 0.999;
  const auto r = run_episode(cfg);
  EXPECT_EQ(r.steps(), 1u);
  EXPECT_EQ(r.termination, Termination::max_steps);
}

TEST(Episode, DeterministicAtFixedSeed) {
  auto cfg = default_episode_config(small_sphere());
  cfg.seed = 77;
  cfg.max_steps = 3;
  for (auto planner : {PlannerKind::map_nbv, PlannerKind::frontier_multi}) {
    cfg.planner = planner;
    EXPECT_TRUE(run_episode(cfg).same_metrics(run_episode(cfg)));
  }
  EXPECT_EQ(first_iteration_gain(cfg), first_iteration_gain(cfg));
}

TEST(Episode, PredNbvIsSingleAgentMapNbv) {
  auto cfg = default_episode_config(small_sphere());
  cfg.predictor = PredictorKind::passthrough;
  cfg.planner = PlannerKind::pred_nbv;
  cfg.team_size = 3;
  const auto pred = run_episode(cfg);
  EXPECT_EQ(pred.settings.team_size, 1);
  EXPECT_EQ(pred.poses.front().size(), 1u);
  cfg.planner = PlannerKind::map_nbv;
  cfg.team_size = 1;
  const auto map = run_episode(cfg);
  EXPECT_EQ(pred.points, map.points);
  EXPECT_EQ(pred.poses, map.poses);
  EXPECT_EQ(pred.distance, map.distance);
  EXPECT_EQ(pred.termination, map.termination);
}

TEST(FirstIterationGain, SinglePointSceneGainsNothing) {
  auto s = std::make_shared<Scene>();
  s->name = "dot";
  s->label = "dot";
  s->object_cloud = {Point3(0, 0, 0)};
  s->world_bounds = Aabb{Point3(-10, -10, -10), Point3(10, 10, 10)};
  s->dedup_resolution = 0.1;
  s->validate();
  EpisodeConfig cfg;
  cfg.scene = s;
  cfg.team_size = 1;
  cfg.spawn_poses = {Pose::looking_at(Point3(3, 0, 0), Point3(0, 0, 0))};
  const auto r = run_episode(cfg);
  EXPECT_EQ(r.points.front(), 1u);
  EXPECT_EQ(first_iteration_gain(cfg), r.points.front());
  EXPECT_EQ(r.termination, Termination::planner_stuck);
}

TEST(FirstIterationGain, TeamOfTwoAtLeastTeamOfOne) {
  for (const char* name : {"rocket_b", "tower_b", "blob_b"}) {
    auto cfg = default_episode_config(bundled(name));
    cfg.seed = 5;
    cfg.planner = PlannerKind::map_nbv;
    cfg.team_size = 1;
    const auto one = first_iteration_gain(cfg);
    cfg.team_size = 2;
    EXPECT_GE(first_iteration_gain(cfg), one) << name;
  }
}

TEST(Suite, OneSceneOnePlanner) {
  const std::vector<std::shared_ptr<const Scene>> scenes{small_sphere()};
  const std::vector<PlannerKind> planners{PlannerKind::map_nbv};
  auto configure = [](const std::shared_ptr<const Scene>& s) { return default_episode_config(s); };
  const auto cells = run_suite(scenes, planners, 1, 9, configure);
  ASSERT_EQ(cells.size(), 1u);
  ASSERT_TRUE(cells[0].report.has_value());
  EXPECT_EQ(cells[0].seed, cell_seed(9, "sphere", PlannerKind::map_nbv, 0));
  EXPECT_EQ(cells[0].report->settings.seed, cells[0].seed);
}

TEST(Suite, RepeatableAndRecordsErrors) {
  const std::vector<std::shared_ptr<const Scene>> scenes{small_sphere("good"), small_sphere("bad")};
  const std::vector<PlannerKind> planners{PlannerKind::map_nbv, PlannerKind::frontier_multi};
  auto configure = [](const std::shared_ptr<const Scene>& s) {
    auto cfg = default_episode_config(s);
    cfg.max_steps = 2;
    if (s->name == "bad") cfg.spawn_poses = {Pose::looking_at(Point3(4, 0, 5), Point3(5, 0, 5)),
                                             Pose::looking_at(Point3(4, 0, 5), Point3(5, 0, 5))};
    return cfg;
  };
  const auto a = run_suite(scenes, planners, 1, 3, configure);
  const auto b = run_suite(scenes, planners, 1, 3, configure);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].scene, b[i].scene);
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_EQ(a[i].error, b[i].error);
    ASSERT_EQ(a[i].report.has_value(), b[i].report.has_value());
    if (a[i].report) {
      EXPECT_TRUE(a[i].report->same_metrics(*b[i].report));
    }
    EXPECT_EQ(a[i].scene == "bad", !a[i].error.empty());
  }
  EXPECT_NE(cell_seed(3, "good", PlannerKind::map_nbv), cell_seed(3, "good", PlannerKind::frontier_multi));
  EXPECT_NE(cell_seed(3, "good", PlannerKind::map_nbv, 0), cell_seed(3, "good", PlannerKind::map_nbv, 1));
}

}  // namespace
}  // namespace mapnbv
