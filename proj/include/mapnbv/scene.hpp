#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mapnbv/geometry.hpp"
#include "mapnbv/lattice.hpp"
#include "mapnbv/mesh.hpp"
#include "mapnbv/visibility.hpp"

namespace mapnbv {

struct SphereObstacle {
  Point3 center{Point3::Zero()};
  double radius{0.0};
};

// Ground-truth world. Immutable once built.
struct Scene {
  std::string name;
  std::string label;
  PointCloud object_cloud;  // voxel-filtered surface sample
  TriangleMesh mesh;        // source surface, kept for ray-cast checks; may be empty
  std::vector<Aabb> boxes;
  std::vector<SphereObstacle> spheres;
  Aabb world_bounds;
  double dedup_resolution{0.0};

  void validate() const {
    if (object_cloud.empty()) throw std::invalid_argument("scene object cloud is empty");
    require_finite(object_cloud);
    for (const auto& p : object_cloud)
      if (!world_bounds.contains(p)) throw std::invalid_argument("object cloud leaves world bounds");
    for (const auto& b : boxes)
      if (!world_bounds.contains(b.min) || !world_bounds.contains(b.max))
        throw std::invalid_argument("box obstacle leaves world bounds");
    for (const auto& s : spheres)
      if (!world_bounds.contains(s.center - Vec3::Constant(s.radius)) ||
          !world_bounds.contains(s.center + Vec3::Constant(s.radius)))
        throw std::invalid_argument("sphere obstacle leaves world bounds");
    require_positive_leaf(dedup_resolution, "dedup resolution");
  }
};

struct SceneOptions {
  std::size_t surface_samples{60000};
  std::uint64_t sample_seed{1};
  double dedup_scale{0.0125};  // dedup resolution as a fraction of the object bounding diagonal
  double world_margin_scale{1.0};  // world bounds = object bounds grown by this many diagonals
};

// Samples the mesh, voxel-filters the sample at the dedup resolution and
// derives world bounds around it.
inline Scene make_scene(std::string name, std::string label, TriangleMesh mesh, const SceneOptions& opt = {}) {
  Scene s;
  s.name = std::move(name);
  s.label = std::move(label);
  const Aabb mb = mesh_bounds(mesh);
  const double diag = mb.diagonal();
  if (!(diag > 0.0)) throw DegenerateMeshError("mesh has zero extent");
  s.dedup_resolution = opt.dedup_scale * diag;
  s.object_cloud = voxel_downsample(sample_surface(mesh, opt.surface_samples, opt.sample_seed), s.dedup_resolution);
  const Vec3 grow = Vec3::Constant(opt.world_margin_scale * diag);
  s.world_bounds = Aabb{mb.min - grow, mb.max + grow};
  s.mesh = std::move(mesh);
  s.validate();
  return s;
}

struct Observation {
  int agent_id{0};
  Pose pose;
  PointCloud cloud;                  // world frame
  std::vector<std::size_t> indices;  // into Scene::object_cloud
  int step_index{0};
};

// Simulated depth sensing of the object of interest. Obstacles block flight,
// not sight.
inline Observation synthesize_observation(const Scene& scene, const Pose& pose, const SensorModel& sensor,
                                          double hpr_exponent = kDefaultHprExponent, int agent_id = 0,
                                          int step_index = 0) {
  if (!scene.world_bounds.contains(pose.position))
    throw std::invalid_argument("observation pose lies outside world bounds");
  Observation obs;
  obs.agent_id = agent_id;
  obs.pose = pose;
  obs.step_index = step_index;
  const VisibleSet vis = visible_points(scene.object_cloud, pose, sensor, hpr_exponent);
  obs.indices = vis.indices;
  obs.cloud = select(scene.object_cloud, vis);
  return obs;
}

inline PointCloud accumulate(const PointCloud& observed, std::span<const Observation> new_obs, double resolution) {
  std::vector<PointCloud> parts;
  parts.reserve(new_obs.size() + 1);
  parts.push_back(observed);
  for (const auto& o : new_obs) parts.push_back(o.cloud);
  return merge_unique(parts, resolution);
}

enum class CellState : std::uint8_t { unknown = 0, free = 1, occupied = 2 };

struct OccupancyGrid {
  Point3 origin{Point3::Zero()};
  double resolution{1.0};
  std::array<int, 3> dims{1, 1, 1};
  std::vector<CellState> cells;

  OccupancyGrid() : cells(1, CellState::unknown) {}
  OccupancyGrid(const Point3& o, double res, std::array<int, 3> d) : origin(o), resolution(res), dims(d) {
    require_positive_leaf(res, "grid resolution");
    if (d[0] <= 0 || d[1] <= 0 || d[2] <= 0) throw std::invalid_argument("grid dimensions must be positive");
    cells.assign(static_cast<std::size_t>(d[0]) * d[1] * d[2], CellState::unknown);
  }

  // Grid covering `bounds` exactly (rounded up to whole cells).
  static OccupancyGrid covering(const Aabb& bounds, double res) {
    require_positive_leaf(res, "grid resolution");
    const Vec3 ext = bounds.extent();
    std::array<int, 3> d{};
    for (int a = 0; a < 3; ++a) d[a] = std::max(1, static_cast<int>(std::ceil(ext[a] / res)));
    return OccupancyGrid(bounds.min, res, d);
  }

  std::size_t size() const { return cells.size(); }

  bool in_grid(const std::array<int, 3>& c) const {
    return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < dims[0] && c[1] < dims[1] && c[2] < dims[2];
  }
  std::size_t index(const std::array<int, 3>& c) const {
    return (static_cast<std::size_t>(c[2]) * dims[1] + c[1]) * dims[0] + c[0];
  }
  std::array<int, 3> coords(std::size_t i) const {
    const auto nx = static_cast<std::size_t>(dims[0]), ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny), static_cast<int>(i / (nx * ny))};
  }
  std::array<int, 3> cell_of(const Point3& p) const { return lattice_cell(origin, resolution, p); }
  Point3 center(const std::array<int, 3>& c) const {
    return origin + resolution * Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
  }
  Point3 center(std::size_t i) const { return center(coords(i)); }
  Aabb extent() const {
    return {origin, origin + resolution * Vec3(dims[0], dims[1], dims[2])};
  }

  CellState at(const std::array<int, 3>& c) const { return cells[index(c)]; }
  bool operator==(const OccupancyGrid&) const = default;
};

// Carves free space along each sensor ray and marks the hit cell occupied.
// Occupied cells are never downgraded; cells outside the grid are ignored.
inline void integrate_observation(OccupancyGrid& grid, const Observation& obs) {
  for (const auto& p : obs.cloud) {
    const auto hit = grid.cell_of(p);
    walk_lattice(grid.origin, grid.resolution, obs.pose.position, p, [&](const CellCoord& c) {
      if (c == hit) return false;
      if (grid.in_grid(c)) {
        auto& s = grid.cells[grid.index(c)];
        if (s == CellState::unknown) s = CellState::free;
      }
      return true;
    });
    if (grid.in_grid(hit)) grid.cells[grid.index(hit)] = CellState::occupied;
  }
}

inline OccupancyGrid update_occupancy(OccupancyGrid grid, const Observation& obs) {
  if (!obs.cloud.empty() && !grid.extent().contains(obs.pose.position))
    throw std::invalid_argument("observation pose lies outside the grid");
  integrate_observation(grid, obs);
  return grid;
}

}  // namespace mapnbv
