#include <gtest/gtest.h>

#include <numbers>
#include <set>

#include "mapnbv/procedural.hpp"
#include "mapnbv/scene.hpp"
#include "test_support.hpp"

namespace mapnbv {
namespace {

Scene sphere_scene(std::size_t samples = 3000) {
  SceneOptions opt;
  opt.surface_samples = samples;
  return make_scene("sphere", "blob", procedural::sphere(Point3::Zero(), 2.0, 48, 24), opt);
}

TEST(Lattice, WalkIsFaceConnectedAndCoversDenseSamples) {
  Rng rng(101);
  const Point3 origin(-0.3, 0.1, 0.0);
  const double res = 0.7;
  for (int trial = 0; trial < 200; ++trial) {
    const Point3 a(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Point3 b(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    std::vector<CellCoord> cells;
    walk_lattice(origin, res, a, b, [&](const CellCoord& c) {
      cells.push_back(c);
      return true;
    });
    ASSERT_FALSE(cells.empty());
    EXPECT_EQ(cells.front(), lattice_cell(origin, res, a));
    EXPECT_EQ(cells.back(), lattice_cell(origin, res, b));
    for (std::size_t i = 1; i < cells.size(); ++i) {
      int manhattan = 0;
      for (int k = 0; k < 3; ++k) manhattan += std::abs(cells[i][k] - cells[i - 1][k]);
      EXPECT_EQ(manhattan, 1);
    }
    const std::set<CellCoord> walked(cells.begin(), cells.end());
    EXPECT_EQ(walked.size(), cells.size()) << "cell visited twice";
    for (int s = 0; s <= 2000; ++s) {
      const Point3 p = a + (b - a) * (s / 2000.0);
      EXPECT_TRUE(walked.count(lattice_cell(origin, res, p))) << "sampled cell missing from walk";
    }
  }
}

TEST(Lattice, WalkStopsWhenVisitorDeclines) {
  int visits = 0;
  walk_lattice(Point3::Zero(), 1.0, Point3(0.5, 0.5, 0.5), Point3(9.5, 0.5, 0.5), [&](const CellCoord&) {
    return ++visits < 3;
  });
  EXPECT_EQ(visits, 3);
}

TEST(SceneBuild, ObjectCloudIsDedupedAndInsideBounds) {
  const Scene s = sphere_scene();
  EXPECT_NEAR(s.dedup_resolution, 0.0125 * mesh_bounds(s.mesh).diagonal(), 1e-12);
  EXPECT_EQ(key_set(s.object_cloud, s.dedup_resolution).size(), s.object_cloud.size());
  for (const auto& p : s.object_cloud) EXPECT_TRUE(s.world_bounds.contains(p));
}

TEST(SceneBuild, RejectsEmptyOrPointMesh) {
  EXPECT_THROW(make_scene("x", "x", TriangleMesh{}), EmptyInputError);
  const Point3 p(1, 1, 1);
  EXPECT_THROW(make_scene("x", "x", TriangleMesh{{{p, p, p}}}), DegenerateMeshError);
}

TEST(SynthesizeObservation, ObjectBehindSensorIsEmpty) {
  const Scene s = sphere_scene();
  const auto obs = synthesize_observation(s, Pose(Point3(6, 0, 0), Vec3::UnitX()), SensorModel{});
  EXPECT_TRUE(obs.cloud.empty());
}

TEST(SynthesizeObservation, OutsideBoundsRejected) {
  const Scene s = sphere_scene();
  EXPECT_THROW(synthesize_observation(s, Pose::looking_at(Point3(100, 0, 0), Point3::Zero()), SensorModel{}),
               std::invalid_argument);
}

TEST(SynthesizeObservation, SubsetOfObjectCloud) {
  const Scene s = sphere_scene();
  const auto obs = synthesize_observation(s, Pose::looking_at(Point3(5, 1, 1), Point3::Zero()), SensorModel{});
  ASSERT_EQ(obs.cloud.size(), obs.indices.size());
  for (std::size_t i = 0; i < obs.indices.size(); ++i) EXPECT_EQ(obs.cloud[i], s.object_cloud[obs.indices[i]]);
}

TEST(SynthesizeObservation, ConvexObjectMatchesRaycast) {
  const Scene s = sphere_scene();
  for (const Point3& eye : {Point3(6, 0, 0), Point3(-4, 3, 2), Point3(0, -5, -3)}) {
    const auto obs = synthesize_observation(s, Pose::looking_at(eye, Point3::Zero()), SensorModel{});
    const auto ray = raycast_visibility(s.mesh, s.object_cloud, eye);
    std::size_t sym_diff = 0;
    for (std::size_t i = 0; i < s.object_cloud.size(); ++i) {
      const bool a = std::binary_search(obs.indices.begin(), obs.indices.end(), i);
      sym_diff += a != ray.contains(i);
    }
    EXPECT_LE(sym_diff, s.object_cloud.size() / 20) << eye.transpose();
  }
}

TEST(SynthesizeObservation, OppositeViewsAddCoverage) {
  const Scene s = sphere_scene();
  const auto a = synthesize_observation(s, Pose::looking_at(Point3(6, 0, 0), Point3::Zero()), SensorModel{});
  const auto b = synthesize_observation(s, Pose::looking_at(Point3(-6, 0, 0), Point3::Zero()), SensorModel{});
  const auto both = key_union(key_set(a.cloud, s.dedup_resolution), key_set(b.cloud, s.dedup_resolution));
  EXPECT_GT(both.size(), a.cloud.size());
  EXPECT_GT(both.size(), b.cloud.size());
}

TEST(SynthesizeObservation, OrbitOfTwelveCoversConvexObject) {
  const Scene s = sphere_scene();
  PointCloud seen;
  for (int k = 0; k < 12; ++k) {
    const double a = k * std::numbers::pi / 6.0;
    const double z = (k % 3 - 1) * 3.0;
    const Point3 eye(6 * std::cos(a), 6 * std::sin(a), z);
    const Observation obs = synthesize_observation(s, Pose::looking_at(eye, Point3::Zero()), SensorModel{});
    seen = mapnbv::accumulate(seen, std::span(&obs, 1), s.dedup_resolution);
  }
  EXPECT_GE(static_cast<double>(key_set(seen, s.dedup_resolution).size()), 0.95 * s.object_cloud.size());
}

TEST(Accumulate, NoObservationsKeepsKeys) {
  Rng rng(103);
  const auto cloud = testing::random_cloud(rng, 200);
  EXPECT_EQ(key_set(mapnbv::accumulate(cloud, {}, 0.1), 0.1), key_set(cloud, 0.1));
}

TEST(Accumulate, DuplicateObservationIsIdempotent) {
  Rng rng(107);
  Observation obs;
  obs.cloud = testing::random_cloud(rng, 200);
  const auto once = mapnbv::accumulate({}, std::span(&obs, 1), 0.1);
  const std::vector<Observation> twice{obs, obs};
  EXPECT_EQ(key_set(mapnbv::accumulate(once, twice, 0.1), 0.1), key_set(once, 0.1));
}

TEST(Accumulate, DisjointObservationGrowsByItsKeys) {
  Rng rng(109);
  const auto base = testing::random_cloud(rng, 300, 0.0, 1.0);
  Observation obs;
  obs.cloud = testing::random_cloud(rng, 300, 5.0, 6.0);
  const auto k = key_set(obs.cloud, 0.1).size();
  const auto out = mapnbv::accumulate(base, std::span(&obs, 1), 0.1);
  EXPECT_EQ(key_set(out, 0.1).size(), key_set(base, 0.1).size() + k);
}

TEST(Accumulate, PropertyMonotone) {
  Rng rng(113);
  PointCloud acc;
  std::size_t prev = 0;
  for (int i = 0; i < 10; ++i) {
    Observation obs;
    obs.cloud = testing::random_cloud(rng, 50);
    acc = mapnbv::accumulate(acc, std::span(&obs, 1), 0.2);
    const KeySet now = key_set(acc, 0.2);
    EXPECT_GE(now.size(), prev);
    EXPECT_EQ(key_union(now, key_set(obs.cloud, 0.2)), now);
    prev = now.size();
  }
}

Observation single_ray(const Point3& from, const PointCloud& pts) {
  Observation o;
  o.pose = Pose(from, Vec3::UnitX());
  o.cloud = pts;
  return o;
}

TEST(Occupancy, EmptyObservationLeavesGridUnchanged) {
  const OccupancyGrid g(Point3::Zero(), 1.0, {8, 3, 3});
  EXPECT_EQ(update_occupancy(g, single_ray(Point3(0.5, 1.5, 1.5), {})), g);
}

TEST(Occupancy, PointFiveCellsAlongX) {
  const OccupancyGrid g(Point3::Zero(), 1.0, {8, 3, 3});
  const auto out = update_occupancy(g, single_ray(Point3(0.5, 1.5, 1.5), {Point3(5.5, 1.5, 1.5)}));
  EXPECT_EQ(out.at({5, 1, 1}), CellState::occupied);
  for (int x = 1; x <= 4; ++x) EXPECT_EQ(out.at({x, 1, 1}), CellState::free) << x;
  EXPECT_EQ(out.at({6, 1, 1}), CellState::unknown);
  std::size_t touched = 0;
  for (auto c : out.cells) touched += c != CellState::unknown;
  EXPECT_EQ(touched, 6u);  // the sensor's own cell is carved too
}

TEST(Occupancy, IdempotentAndNeverDowngrades) {
  Rng rng(127);
  OccupancyGrid g = OccupancyGrid::covering(Aabb{Point3::Constant(-4), Point3::Constant(4)}, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const Point3 eye(rng.uniform(-3.9, 3.9), rng.uniform(-3.9, 3.9), rng.uniform(-3.9, 3.9));
    const auto obs = single_ray(eye, testing::random_cloud(rng, 30, -3.9, 3.9));
    const auto next = update_occupancy(g, obs);
    EXPECT_EQ(update_occupancy(next, obs), next);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.cells[i] == CellState::occupied) {
        EXPECT_EQ(next.cells[i], CellState::occupied);
      }
      if (g.cells[i] == CellState::free) {
        EXPECT_NE(next.cells[i], CellState::unknown);
      }
    }
    for (const auto& p : obs.cloud) EXPECT_EQ(next.at(next.cell_of(p)), CellState::occupied);
    g = next;
  }
}

TEST(Occupancy, PoseOutsideGridRejected) {
  const OccupancyGrid g(Point3::Zero(), 1.0, {4, 4, 4});
  EXPECT_THROW(update_occupancy(g, single_ray(Point3(-3, 1, 1), {Point3(1, 1, 1)})), std::invalid_argument);
}

}  // namespace
}  // namespace mapnbv
