#pragma once

#include <array>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mapnbv/geometry.hpp"

namespace mapnbv {

// True when the points are not all coplanar (within a tolerance relative to
// their spread).
inline bool spans_three_dimensions(std::span<const Point3> pts) {
  if (pts.size() < 4) return false;
  const Aabb box = bounding_box(pts);
  const double scale = box.diagonal();
  if (!(scale > 0.0)) return false;
  const double eps = 256.0 * DBL_EPSILON * (scale + box.max.cwiseAbs().cwiseMax(box.min.cwiseAbs()).maxCoeff());
  const Point3& a = pts.front();
  std::size_t ib = 0;
  double best = eps;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = (pts[i] - a).norm();
    if (d > best) best = d, ib = i;
  }
  if (ib == 0) return false;
  const Vec3 line = (pts[ib] - a).normalized();
  std::size_t ic = 0;
  best = eps;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec3 d = pts[i] - a;
    const double dist = (d - d.dot(line) * line).norm();
    if (dist > best) best = dist, ic = i;
  }
  if (ic == 0) return false;
  const Vec3 normal = (pts[ib] - a).cross(pts[ic] - a).normalized();
  for (const auto& p : pts)
    if (std::abs(normal.dot(p - a)) > eps) return true;
  return false;
}

// 3D quickhull. Returns one flag per input point, set when the point is a
// vertex of the convex hull, or nullopt when the input spans fewer than three
// dimensions. Input points must be pairwise distinct. The result depends only
// on the input order, never on hashing or allocation.
inline std::optional<std::vector<char>> convex_hull_vertices(std::span<const Point3> input) {
  const int n = static_cast<int>(input.size());
  if (n < 4) return std::nullopt;

  Aabb box = bounding_box(input);
  const Point3 center = box.center();
  std::vector<Point3> pts;
  pts.reserve(input.size());
  for (const auto& p : input) pts.push_back(p - center);
  // Coordinates are centered, so |q| <= scale for every point.
  const double scale = (box.max - center).norm();
  if (!(scale > 0.0)) return std::nullopt;
  const double eps = 256.0 * DBL_EPSILON * scale;

  // Initial simplex from the axis with the widest spread.
  int axis = 0;
  box.extent().maxCoeff(&axis);
  int i0 = 0, i1 = 0;
  for (int i = 1; i < n; ++i) {
    if (pts[i][axis] < pts[i0][axis]) i0 = i;
    if (pts[i][axis] > pts[i1][axis]) i1 = i;
  }
  if (i0 == i1) return std::nullopt;
  const Vec3 line = (pts[i1] - pts[i0]).normalized();
  int i2 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    const Vec3 d = pts[i] - pts[i0];
    const double dist = (d - d.dot(line) * line).norm();
    if (dist > best) best = dist, i2 = i;
  }
  if (i2 < 0) return std::nullopt;
  const Vec3 base_normal = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const double dist = std::abs(base_normal.dot(pts[i] - pts[i0]));
    if (dist > best) best = dist, i3 = i;
  }
  if (i3 < 0) return std::nullopt;

  struct Face {
    std::array<int, 3> v;
    Vec3 normal;
    double offset;
    std::vector<int> outside;
    int farthest{-1};
    double farthest_dist{0.0};
    bool alive{true};
  };
  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, int> edge_owner;  // directed edge -> face
  auto edge_id = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };
  auto distance = [&](const Face& f, int p) { return f.normal.dot(pts[p]) - f.offset; };
  auto add_face = [&](int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    f.normal = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double len = f.normal.norm();
    f.normal = len > 0.0 ? Vec3(f.normal / len) : Vec3::Zero();
    f.offset = f.normal.dot(pts[a]);
    faces.push_back(std::move(f));
    const int id = static_cast<int>(faces.size()) - 1;
    edge_owner[edge_id(a, b)] = id;
    edge_owner[edge_id(b, c)] = id;
    edge_owner[edge_id(c, a)] = id;
    return id;
  };

  {
    // Orient the tetrahedron so every face normal points away from the fourth vertex.
    const bool flip = base_normal.dot(pts[i3] - pts[i0]) > 0.0;
    if (flip) {
      add_face(i0, i2, i1);
      add_face(i0, i1, i3);
      add_face(i1, i2, i3);
      add_face(i2, i0, i3);
    } else {
      add_face(i0, i1, i2);
      add_face(i0, i3, i1);
      add_face(i1, i3, i2);
      add_face(i2, i3, i0);
    }
  }

  auto assign = [&](int p, std::span<const int> candidates) {
    for (int fid : candidates) {
      Face& f = faces[fid];
      const double d = distance(f, p);
      if (d > eps) {
        f.outside.push_back(p);
        if (d > f.farthest_dist) f.farthest_dist = d, f.farthest = p;
        return;
      }
    }
  };

  {
    const std::array<int, 4> initial{0, 1, 2, 3};
    for (int i = 0; i < n; ++i) {
      if (i == i0 || i == i1 || i == i2 || i == i3) continue;
      assign(i, initial);
    }
  }

  std::vector<int> pending{0, 1, 2, 3};
  std::vector<int> visible, new_faces, orphans;
  std::vector<std::pair<int, int>> horizon;
  std::vector<int> stamp(faces.size(), -1);
  int round = 0;

  while (!pending.empty()) {
    const int fid = pending.back();
    pending.pop_back();
    if (!faces[fid].alive || faces[fid].outside.empty()) continue;
    const int eye = faces[fid].farthest;
    ++round;

    visible.clear();
    horizon.clear();
    stamp.resize(faces.size(), -1);
    visible.push_back(fid);
    stamp[fid] = round;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const Face& f = faces[visible[k]];
      for (int e = 0; e < 3; ++e) {
        const int a = f.v[e], b = f.v[(e + 1) % 3];
        const int nb = edge_owner.at(edge_id(b, a));
        if (stamp[nb] == round) {
          continue;
        }
        if (distance(faces[nb], eye) > eps) {
          stamp[nb] = round;
          visible.push_back(nb);
        }
      }
    }
    // Horizon: edges of visible faces whose twin belongs to a hidden face.
    for (int vf : visible) {
      const Face& f = faces[vf];
      for (int e = 0; e < 3; ++e) {
        const int a = f.v[e], b = f.v[(e + 1) % 3];
        const int nb = edge_owner.at(edge_id(b, a));
        if (stamp[nb] != round) horizon.emplace_back(a, b);
      }
    }

    orphans.clear();
    for (int vf : visible) {
      Face& f = faces[vf];
      f.alive = false;
      for (int p : f.outside)
        if (p != eye) orphans.push_back(p);
      f.outside.clear();
      f.outside.shrink_to_fit();
      for (int e = 0; e < 3; ++e) edge_owner.erase(edge_id(f.v[e], f.v[(e + 1) % 3]));
    }

    new_faces.clear();
    for (auto [a, b] : horizon) new_faces.push_back(add_face(a, b, eye));
    stamp.resize(faces.size(), -1);
    std::sort(orphans.begin(), orphans.end());
    for (int p : orphans) assign(p, new_faces);
    for (int nf : new_faces)
      if (!faces[nf].outside.empty()) pending.push_back(nf);
  }

  std::vector<char> on_hull(input.size(), 0);
  for (const auto& f : faces)
    if (f.alive)
      for (int v : f.v) on_hull[v] = 1;
  return on_hull;
}

}  // namespace mapnbv
