#include <gtest/gtest.h>

#include <numbers>

#include "mapnbv/convex_hull.hpp"
#include "mapnbv/geometry.hpp"
#include "test_support.hpp"

namespace mapnbv {
namespace {

using testing::key_tuples;
using testing::random_cloud;

TEST(VoxelDownsample, TwoPointsInOneVoxelBecomeCentroid) {
  const PointCloud in{{0.1, 0, 0}, {0.2, 0, 0}};
  const auto out = voxel_downsample(in, 1.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].x(), 0.15, 1e-15);
  EXPECT_EQ(out[0].y(), 0.0);
  EXPECT_EQ(out[0].z(), 0.0);
}

TEST(VoxelDownsample, EmptyInput) { EXPECT_TRUE(voxel_downsample(PointCloud{}, 0.5).empty()); }

TEST(VoxelDownsample, RejectsNonPositiveLeaf) {
  const PointCloud in{{0, 0, 0}};
  EXPECT_THROW(voxel_downsample(in, 0.0), std::invalid_argument);
  EXPECT_THROW(voxel_downsample(in, -1.0), std::invalid_argument);
}

TEST(VoxelDownsample, CountMatchesHashSetOracle) {
  Rng rng(7);
  const auto cloud = random_cloud(rng, 1000);
  const auto out = voxel_downsample(cloud, 0.1);
  EXPECT_EQ(out.size(), key_tuples(cloud, 0.1).size());
  EXPECT_EQ(key_tuples(out, 0.1), key_tuples(cloud, 0.1));
}

TEST(VoxelDownsample, BoundaryPointsGoToLowerIndexVoxelFromAbove) {
  // floor semantics: x = 1.0 with leaf 0.5 is voxel 2, x = 0.999 is voxel 1.
  EXPECT_EQ(voxel_key({1.0, 0, 0}, 0.5).x, 2);
  EXPECT_EQ(voxel_key({0.999, 0, 0}, 0.5).x, 1);
  EXPECT_EQ(voxel_key({-0.25, 0, 0}, 0.5).x, -1);
}

TEST(VoxelDownsample, PropertyIdempotentAndInsideVoxel) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double leaf = rng.uniform(0.01, 0.5);
    auto cloud = random_cloud(rng, 200 + rng.below(300), -3.0, 3.0);
    // Clusters just under voxel faces stress centroid rounding.
    for (int k = 0; k < 20; ++k) {
      const double x = leaf * static_cast<double>(rng.below(10)) - 1e-12;
      for (int r = 0; r < 3; ++r) cloud.emplace_back(x, 0.1, 0.1);
    }
    const auto once = voxel_downsample(cloud, leaf);
    const auto twice = voxel_downsample(once, leaf);
    EXPECT_LE(once.size(), cloud.size());
    EXPECT_EQ(key_set(once, leaf), key_set(twice, leaf));
    EXPECT_EQ(key_set(once, leaf), key_set(cloud, leaf));
    for (const auto& p : once) {
      const auto k = voxel_key(p, leaf);
      EXPECT_EQ(voxel_key(p, leaf), k);
      EXPECT_GE(p.x(), static_cast<double>(k.x) * leaf - 1e-12);
      EXPECT_LE(p.x(), static_cast<double>(k.x + 1) * leaf + 1e-12);
    }
  }
}

TEST(Transform, IdentityLeavesCloudUnchanged) {
  Rng rng(3);
  const auto cloud = random_cloud(rng, 50);
  EXPECT_EQ(transform(cloud, RigidTransform{}), cloud);
}

TEST(Transform, QuarterTurnAboutZ) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()).toRotationMatrix();
  const auto out = transform(PointCloud{{1, 0, 0}}, RigidTransform(r, Vec3::Zero()));
  EXPECT_NEAR(out[0].x(), 0.0, 1e-9);
  EXPECT_NEAR(out[0].y(), 1.0, 1e-9);
  EXPECT_NEAR(out[0].z(), 0.0, 1e-9);
}

TEST(Transform, RejectsInvalidRotation) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r(0, 0) = -1.0;  // reflection, det = -1
  EXPECT_THROW(RigidTransform(r, Vec3::Zero()), std::invalid_argument);
  r = Eigen::Matrix3d::Identity() * 1.1;
  EXPECT_THROW(RigidTransform(r, Vec3::Zero()), std::invalid_argument);
}

TEST(Transform, PropertyPairwiseDistancesPreserved) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cloud = random_cloud(rng, 40, -10.0, 10.0);
    const Eigen::Quaterniond q =
        Eigen::Quaterniond(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
    const RigidTransform t(q.toRotationMatrix(), Vec3(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)));
    const auto out = transform(cloud, t);
    ASSERT_EQ(out.size(), cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
      for (std::size_t j = i + 1; j < cloud.size(); ++j) {
        const double a = (cloud[i] - cloud[j]).norm();
        const double b = (out[i] - out[j]).norm();
        EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, a));
      }
  }
}

TEST(Transform, TranslationPreservesStats) {
  Rng rng(9);
  const auto cloud = random_cloud(rng, 100);
  const auto moved = transform(cloud, RigidTransform(Eigen::Matrix3d::Identity(), Vec3(3, -2, 7)));
  const auto a = cloud_stats(cloud), b = cloud_stats(moved);
  EXPECT_NEAR(a.d_max, b.d_max, 1e-12);
  EXPECT_NEAR(a.z_range, b.z_range, 1e-12);
}

TEST(MergeUnique, SelfUnionIsIdempotent) {
  Rng rng(13);
  const auto a = random_cloud(rng, 300);
  const std::vector<PointCloud> twice{a, a}, once{a};
  EXPECT_EQ(key_set(merge_unique(twice, 0.05), 0.05), key_set(merge_unique(once, 0.05), 0.05));
}

TEST(MergeUnique, DisjointVoxelsAddUp) {
  Rng rng(17);
  const auto a = random_cloud(rng, 200, 0.0, 1.0);
  const auto b = random_cloud(rng, 200, 2.0, 3.0);
  const std::vector<PointCloud> both{a, b};
  EXPECT_EQ(key_set(merge_unique(both, 0.1), 0.1).size(), key_set(a, 0.1).size() + key_set(b, 0.1).size());
}

TEST(MergeUnique, PropertySetUnionCommutativeAssociative) {
  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const double r = rng.uniform(0.02, 0.3);
    const auto a = random_cloud(rng, 100, 0.0, 1.0);
    const auto b = random_cloud(rng, 100, 0.5, 1.5);
    const auto c = random_cloud(rng, 100, 0.2, 1.2);
    auto oracle = key_tuples(a, r);
    for (const auto& k : key_tuples(b, r)) oracle.insert(k);
    for (const auto& k : key_tuples(c, r)) oracle.insert(k);
    const std::vector<PointCloud> abc{a, b, c}, cba{c, b, a};
    const auto ab = merge_unique(std::vector<PointCloud>{a, b}, r);
    const auto nested = merge_unique(std::vector<PointCloud>{ab, c}, r);
    EXPECT_EQ(key_tuples(merge_unique(abc, r), r), oracle);
    EXPECT_EQ(key_set(merge_unique(abc, r), r), key_set(merge_unique(cba, r), r));
    EXPECT_EQ(key_set(nested, r), key_set(merge_unique(abc, r), r));
  }
}

TEST(MergeUnique, RejectsNonPositiveResolution) {
  EXPECT_THROW(merge_unique(std::vector<PointCloud>{}, 0.0), std::invalid_argument);
}

TEST(CloudStats, TwoPoints) {
  const auto s = cloud_stats(PointCloud{{0, 0, 0}, {2, 0, 0}});
  EXPECT_EQ(s.centroid, Point3(1, 0, 0));
  EXPECT_DOUBLE_EQ(s.d_max, 1.0);
  EXPECT_DOUBLE_EQ(s.z_range, 0.0);
}

TEST(CloudStats, UnitCubeCorners) {
  PointCloud corners;
  for (int i = 0; i < 8; ++i) corners.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const auto s = cloud_stats(corners);
  EXPECT_NEAR((s.centroid - Point3(0.5, 0.5, 0.5)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(s.d_max, std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.z_range, 1.0);
}

TEST(CloudStats, MatchesLinearScan) {
  Rng rng(23);
  const auto cloud = random_cloud(rng, 500, -4.0, 4.0);
  Vec3 sum = Vec3::Zero();
  for (const auto& p : cloud) sum += p;
  const Point3 c = sum / 500.0;
  double dmax = 0, zlo = 1e9, zhi = -1e9;
  for (const auto& p : cloud) {
    dmax = std::max(dmax, (p - c).norm());
    zlo = std::min(zlo, p.z());
    zhi = std::max(zhi, p.z());
  }
  const auto s = cloud_stats(cloud);
  EXPECT_NEAR((s.centroid - c).norm(), 0.0, 1e-12);
  EXPECT_NEAR(s.d_max, dmax, 1e-12);
  EXPECT_DOUBLE_EQ(s.z_range, zhi - zlo);
}

TEST(CloudStats, EmptyCloudThrows) { EXPECT_THROW(cloud_stats(PointCloud{}), EmptyInputError); }

TEST(ConvexHull, MatchesBruteForceOnRandomSets) {
  Rng rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = random_cloud(rng, 8 + rng.below(30), -1.0, 1.0);
    const auto hull = convex_hull_vertices(pts);
    ASSERT_TRUE(hull.has_value());
    EXPECT_EQ(*hull, testing::brute_force_hull_vertices(pts)) << "trial " << trial;
  }
}

TEST(ConvexHull, SphereSampleIsAllHull) {
  Rng rng(31);
  const auto pts = testing::sphere_sample(rng, 2000, Point3(1, 2, 3), 5.0);
  const auto hull = convex_hull_vertices(pts);
  ASSERT_TRUE(hull.has_value());
  for (char c : *hull) EXPECT_TRUE(c);
}

TEST(ConvexHull, InteriorPointsExcluded) {
  PointCloud pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  Rng rng(37);
  for (int i = 0; i < 200; ++i) pts.emplace_back(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
  const auto hull = convex_hull_vertices(pts);
  ASSERT_TRUE(hull.has_value());
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ((*hull)[i] != 0, i < 8) << i;
}

TEST(ConvexHull, CoplanarInputIsDegenerate) {
  PointCloud pts;
  for (int i = 0; i < 20; ++i) pts.emplace_back(i % 5, i / 5, 2.0);
  EXPECT_FALSE(convex_hull_vertices(pts).has_value());
  EXPECT_FALSE(spans_three_dimensions(pts));
  pts.emplace_back(0, 0, 3.0);
  EXPECT_TRUE(spans_three_dimensions(pts));
}

}  // namespace
}  // namespace mapnbv
