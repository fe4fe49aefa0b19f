#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "mapnbv/errors.hpp"
#include "mapnbv/geometry.hpp"
#include "mapnbv/scene.hpp"

namespace mapnbv {

// Stand-ins for a learned shape-completion network.
//   oracle          - ground truth, bounds prediction quality from above
//   passthrough     - the partial cloud itself, i.e. no prediction
//   mirror_symmetry - partial plus its reflection across a vertical plane
enum class PredictorKind { oracle, passthrough, mirror_symmetry };

inline std::string_view to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::oracle: return "oracle";
    case PredictorKind::passthrough: return "passthrough";
    case PredictorKind::mirror_symmetry: return "mirror_symmetry";
  }
  return "?";
}

inline PredictorKind parse_predictor_kind(std::string_view s) {
  if (s == "oracle") return PredictorKind::oracle;
  if (s == "passthrough") return PredictorKind::passthrough;
  if (s == "mirror_symmetry" || s == "mirror") return PredictorKind::mirror_symmetry;
  throw std::invalid_argument("unknown predictor kind: " + std::string(s));
}

struct Prediction {
  PointCloud cloud;
  PredictorKind kind{PredictorKind::passthrough};
};

// Which horizontal eigen-direction of the xy covariance becomes the mirror
// normal. `major` flips along the object's long axis; `minor` keeps the long
// axis in the plane, which is the bilateral symmetry of hulls and airframes
// seen from one side.
enum class MirrorAxis { major, minor };

inline MirrorAxis parse_mirror_axis(std::string_view s) {
  if (s == "major") return MirrorAxis::major;
  if (s == "minor") return MirrorAxis::minor;
  throw std::invalid_argument("unknown mirror axis: " + std::string(s));
}

inline std::string_view to_string(MirrorAxis a) { return a == MirrorAxis::major ? "major" : "minor"; }

struct MirrorPlane {
  Point3 point;  // on the plane
  Vec3 normal;   // horizontal unit vector
};

// Vertical plane through the centroid whose normal is an eigenvector of the xy
// covariance. An isotropic covariance picks the x axis for either choice.
inline MirrorPlane principal_mirror_plane(std::span<const Point3> cloud, MirrorAxis which = MirrorAxis::major) {
  if (cloud.empty()) throw EmptyInputError("mirror plane of an empty cloud");
  Vec3 sum = Vec3::Zero();
  for (const auto& p : cloud) sum += p;
  const Point3 c = sum / static_cast<double>(cloud.size());
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& p : cloud) {
    const double dx = p.x() - c.x(), dy = p.y() - c.y();
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double n = static_cast<double>(cloud.size());
  sxx /= n, syy /= n, sxy /= n;
  // Closed-form dominant eigenvector of [[sxx, sxy], [sxy, syy]].
  const double half_gap = 0.5 * (sxx - syy);
  const double disc = std::hypot(half_gap, sxy);
  const double scale = std::max({sxx, syy, 1e-300});
  Vec3 axis = Vec3::UnitX();
  if (disc > 1e-12 * scale) {
    const double lambda = 0.5 * (sxx + syy) + disc;
    // Of the two equivalent eigenvector forms, take the longer one.
    Eigen::Vector2d v = (std::abs(sxx - lambda) > std::abs(syy - lambda)) ? Eigen::Vector2d(sxy, lambda - sxx)
                                                                            : Eigen::Vector2d(lambda - syy, sxy);
    v.normalize();
    if (which == MirrorAxis::minor) v = Eigen::Vector2d(-v.y(), v.x());
    // Canonical sign: first nonzero component positive.
    if (v.x() < 0 || (v.x() == 0 && v.y() < 0)) v = -v;
    axis = Vec3(v.x(), v.y(), 0.0);
  }
  return {c, axis};
}

inline Point3 reflect(const Point3& p, const MirrorPlane& plane) {
  return p - 2.0 * (p - plane.point).dot(plane.normal) * plane.normal;
}

inline PointCloud mirror_complete(std::span<const Point3> partial, double resolution,
                                  MirrorAxis which = MirrorAxis::major) {
  const MirrorPlane plane = principal_mirror_plane(partial, which);
  PointCloud both(partial.begin(), partial.end());
  both.reserve(2 * partial.size());
  for (const auto& p : partial) both.push_back(reflect(p, plane));
  return voxel_downsample(both, resolution);
}

inline Prediction predict(PredictorKind kind, std::span<const Point3> partial, const Scene* scene,
                          double resolution, MirrorAxis which = MirrorAxis::major) {
  if (partial.empty()) throw EmptyInputError("cannot predict from an empty partial cloud");
  switch (kind) {
    case PredictorKind::oracle:
      if (scene == nullptr) throw std::invalid_argument("oracle predictor needs the scene");
      return {scene->object_cloud, kind};
    case PredictorKind::passthrough:
      return {PointCloud(partial.begin(), partial.end()), kind};
    case PredictorKind::mirror_symmetry:
      return {mirror_complete(partial, resolution, which), kind};
  }
  throw std::invalid_argument("unknown predictor kind");
}

}  // namespace mapnbv
