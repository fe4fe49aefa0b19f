#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mapnbv/mesh.hpp"
#include "mapnbv/random.hpp"

namespace mapnbv::procedural {

inline void append_quad(TriangleMesh& m, const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  m.push_back({{a, b, c}});
  m.push_back({{a, c, d}});
}

// Closed axis-aligned box, outward-facing triangles.
inline TriangleMesh box(const Point3& lo, const Point3& hi) {
  const Point3 p000(lo.x(), lo.y(), lo.z()), p100(hi.x(), lo.y(), lo.z());
  const Point3 p010(lo.x(), hi.y(), lo.z()), p110(hi.x(), hi.y(), lo.z());
  const Point3 p001(lo.x(), lo.y(), hi.z()), p101(hi.x(), lo.y(), hi.z());
  const Point3 p011(lo.x(), hi.y(), hi.z()), p111(hi.x(), hi.y(), hi.z());
  TriangleMesh m;
  append_quad(m, p000, p010, p110, p100);  // -z
  append_quad(m, p001, p101, p111, p011);  // +z
  append_quad(m, p000, p100, p101, p001);  // -y
  append_quad(m, p010, p011, p111, p110);  // +y
  append_quad(m, p000, p001, p011, p010);  // -x
  append_quad(m, p100, p110, p111, p101);  // +x
  return m;
}

// Latitude/longitude sphere, optionally scaled per axis into an ellipsoid.
inline TriangleMesh ellipsoid(const Point3& center, const Vec3& radii, int slices = 32, int stacks = 16) {
  auto at = [&](int i, int j) {
    const double theta = std::numbers::pi * j / stacks;
    const double phi = 2.0 * std::numbers::pi * i / slices;
    return Point3(center.x() + radii.x() * std::sin(theta) * std::cos(phi),
                  center.y() + radii.y() * std::sin(theta) * std::sin(phi),
                  center.z() + radii.z() * std::cos(theta));
  };
  TriangleMesh m;
  for (int j = 0; j < stacks; ++j)
    for (int i = 0; i < slices; ++i) {
      const Point3 a = at(i, j), b = at(i, j + 1), c = at(i + 1, j + 1), d = at(i + 1, j);
      if (j != 0) m.push_back({{a, b, d}});
      if (j != stacks - 1) m.push_back({{b, c, d}});
    }
  return m;
}

inline TriangleMesh sphere(const Point3& center, double radius, int slices = 32, int stacks = 16) {
  return ellipsoid(center, Vec3::Constant(radius), slices, stacks);
}

// Frustum of a cone along an axis: radius r0 at `base`, r1 at base + axis.
// Caps are added where the radius is positive.
inline TriangleMesh frustum(const Point3& base, const Vec3& axis, double r0, double r1, int slices = 24) {
  const Vec3 w = axis.normalized();
  Vec3 u = w.cross(Vec3::UnitZ());
  if (u.norm() < 1e-9) u = w.cross(Vec3::UnitX());
  u.normalize();
  const Vec3 v = w.cross(u);
  const Point3 top = base + axis;
  auto ring = [&](const Point3& c, double r, int i) {
    const double a = 2.0 * std::numbers::pi * i / slices;
    return Point3(c + r * (std::cos(a) * u + std::sin(a) * v));
  };
  TriangleMesh m;
  for (int i = 0; i < slices; ++i) {
    const Point3 a0 = ring(base, r0, i), a1 = ring(base, r0, i + 1);
    const Point3 b0 = ring(top, r1, i), b1 = ring(top, r1, i + 1);
    if (r0 > 0.0) m.push_back({{a0, b0, a1}});
    if (r1 > 0.0) m.push_back({{a1, b0, b1}});
    if (r0 > 0.0) m.push_back({{base, a0, a1}});
    if (r1 > 0.0) m.push_back({{top, b1, b0}});
  }
  return m;
}

inline void append(TriangleMesh& dst, const TriangleMesh& src) { dst.insert(dst.end(), src.begin(), src.end()); }

// Flat slab between two chord lines, used for wings and fins.
inline TriangleMesh slab(const Point3& root_front, const Point3& root_back, const Point3& tip_front,
                         const Point3& tip_back, double thickness) {
  const Vec3 up(0.0, 0.0, 0.5 * thickness);
  TriangleMesh m;
  const Point3 a = root_front + up, b = root_back + up, c = tip_back + up, d = tip_front + up;
  const Point3 e = root_front - up, f = root_back - up, g = tip_back - up, h = tip_front - up;
  append_quad(m, a, b, c, d);
  append_quad(m, e, h, g, f);
  append_quad(m, a, d, h, e);
  append_quad(m, b, f, g, c);
  append_quad(m, d, c, g, h);
  append_quad(m, a, e, f, b);
  return m;
}

// Fuselage plus swept wings and a tail fin. Nose points to +x; ground at z = 0.
inline TriangleMesh plane(double length, double span, double fuselage_radius) {
  const double zc = fuselage_radius + 1.0;
  TriangleMesh m = ellipsoid(Point3(0, 0, zc), Vec3(0.5 * length, fuselage_radius, fuselage_radius), 32, 12);
  const double chord = 0.2 * length;
  const double sweep = 0.1 * length;
  append(m, slab(Point3(0.1 * length, 0, zc), Point3(0.1 * length - chord, 0, zc),
                 Point3(0.1 * length - sweep, 0.5 * span, zc), Point3(0.1 * length - sweep - 0.5 * chord, 0.5 * span, zc),
                 0.25 * fuselage_radius));
  append(m, slab(Point3(0.1 * length, 0, zc), Point3(0.1 * length - chord, 0, zc),
                 Point3(0.1 * length - sweep, -0.5 * span, zc), Point3(0.1 * length - sweep - 0.5 * chord, -0.5 * span, zc),
                 0.25 * fuselage_radius));
  const double tail = -0.45 * length;
  append(m, box(Point3(tail - 0.06 * length, -0.1 * fuselage_radius, zc),
                Point3(tail + 0.04 * length, 0.1 * fuselage_radius, zc + 2.2 * fuselage_radius)));
  return m;
}

// Cylindrical body with a nose cone and four fins, standing upright.
inline TriangleMesh rocket(double height, double radius) {
  const double body = 0.75 * height;
  TriangleMesh m = frustum(Point3(0, 0, 0.5), Vec3(0, 0, body), radius, radius);
  append(m, frustum(Point3(0, 0, 0.5 + body), Vec3(0, 0, height - body), radius, 0.0));
  for (int k = 0; k < 4; ++k) {
    const double a = k * std::numbers::pi / 2.0;
    const Vec3 dir(std::cos(a), std::sin(a), 0.0);
    const Vec3 side(-dir.y(), dir.x(), 0.0);
    const Point3 c = Point3(0, 0, 0.5) + radius * dir;
    append(m, box((c - 0.05 * radius * side).cwiseMin(c + 1.2 * radius * dir + 0.05 * radius * side),
                  (c - 0.05 * radius * side).cwiseMax(c + 1.2 * radius * dir + 0.05 * radius * side) +
                      Vec3(0, 0, 0.18 * height)));
  }
  return m;
}

// Stacked boxes narrowing toward the top.
inline TriangleMesh tower(double width, double height, int tiers) {
  TriangleMesh m;
  double z = 0.5, w = width;
  const double tier_h = height / tiers;
  for (int t = 0; t < tiers; ++t) {
    append(m, box(Point3(-0.5 * w, -0.5 * w, z), Point3(0.5 * w, 0.5 * w, z + tier_h)));
    z += tier_h;
    w *= 0.75;
  }
  return m;
}

// Tapered hull with a superstructure block. Bow points to +x.
inline TriangleMesh boat(double length, double beam, double depth) {
  const int n = 16;
  TriangleMesh m;
  auto half_beam = [&](double s) {  // s in [0,1] along the hull from stern to bow
    return 0.5 * beam * std::sqrt(std::max(0.0, 1.0 - std::pow(2.0 * s - 1.0, 4.0))) + 1e-3;
  };
  const double z0 = 0.5, z1 = 0.5 + depth;
  for (int i = 0; i < n; ++i) {
    const double s0 = static_cast<double>(i) / n, s1 = static_cast<double>(i + 1) / n;
    const double x0 = (s0 - 0.5) * length, x1 = (s1 - 0.5) * length;
    const double b0 = half_beam(s0), b1 = half_beam(s1);
    // Keel line is narrower than the deck.
    const Point3 dl0(x0, -b0, z1), dl1(x1, -b1, z1), dr0(x0, b0, z1), dr1(x1, b1, z1);
    const Point3 kl0(x0, -0.4 * b0, z0), kl1(x1, -0.4 * b1, z0), kr0(x0, 0.4 * b0, z0), kr1(x1, 0.4 * b1, z0);
    append_quad(m, kl0, kl1, dl1, dl0);
    append_quad(m, kr0, dr0, dr1, kr1);
    append_quad(m, kl0, kr0, kr1, kl1);
    append_quad(m, dl0, dl1, dr1, dr0);
  }
  append(m, box(Point3(-0.3 * length, -0.25 * beam, z1), Point3(0.05 * length, 0.25 * beam, z1 + 0.8 * depth)));
  return m;
}

// Randomly perturbed ellipsoid. Radial noise stays small enough that the
// surface remains star-shaped.
inline TriangleMesh blob(const Vec3& radii, std::uint64_t seed) {
  Rng rng(seed);
  const double a1 = rng.uniform(0.0, 0.08), a2 = rng.uniform(0.0, 0.08);
  const double f1 = 2.0 + static_cast<double>(rng.below(2)), f2 = 3.0;
  const double ph1 = rng.uniform(0.0, 6.28), ph2 = rng.uniform(0.0, 6.28);
  TriangleMesh m = ellipsoid(Point3(0, 0, radii.z() + 0.5), radii, 36, 18);
  const Point3 c(0, 0, radii.z() + 0.5);
  for (auto& t : m)
    for (auto& p : t.v) {
      const Vec3 d = p - c;
      const double az = std::atan2(d.y(), d.x());
      const double el = std::atan2(d.z(), std::hypot(d.x(), d.y()));
      const double s = 1.0 + a1 * std::sin(f1 * az + ph1) + a2 * std::cos(f2 * el + ph2);
      p = c + d * s;
    }
  return m;
}

struct NamedMesh {
  std::string name;
  std::string label;  // object class
  TriangleMesh mesh;
};

// Ten bundled scenes: two variants each of plane, rocket, tower, boat, blob.
inline std::vector<NamedMesh> bundled_scenes() {
  std::vector<NamedMesh> out;
  out.push_back({"plane_a", "plane", plane(30.0, 28.0, 2.0)});
  out.push_back({"plane_b", "plane", plane(24.0, 30.0, 1.6)});
  out.push_back({"rocket_a", "rocket", rocket(20.0, 2.0)});
  out.push_back({"rocket_b", "rocket", rocket(14.0, 1.8)});
  out.push_back({"tower_a", "tower", tower(8.0, 22.0, 3)});
  out.push_back({"tower_b", "tower", tower(10.0, 16.0, 2)});
  out.push_back({"boat_a", "boat", boat(26.0, 8.0, 3.0)});
  out.push_back({"boat_b", "boat", boat(18.0, 7.0, 2.5)});
  out.push_back({"blob_a", "blob", blob(Vec3(6.0, 4.0, 3.5), 11)});
  out.push_back({"blob_b", "blob", blob(Vec3(5.0, 5.0, 4.0), 23)});
  return out;
}

}  // namespace mapnbv::procedural
