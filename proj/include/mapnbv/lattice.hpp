#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "mapnbv/geometry.hpp"

namespace mapnbv {

using CellCoord = std::array<int, 3>;

inline CellCoord lattice_cell(const Point3& origin, double res, const Point3& p) {
  return {static_cast<int>(std::floor((p.x() - origin.x()) / res)),
          static_cast<int>(std::floor((p.y() - origin.y()) / res)),
          static_cast<int>(std::floor((p.z() - origin.z()) / res))};
}

// Integer ray walk (Amanatides-Woo) over a cubic lattice. Visits every cell
// from the cell containing `from` to the cell containing `to`, both included.
// On an exact boundary tie the lowest axis steps first; the walk stops early
// if visit(cell) returns false.
template <class Visit>
void walk_lattice(const Point3& origin, double res, const Point3& from, const Point3& to, Visit&& visit) {
  CellCoord cell = lattice_cell(origin, res, from);
  const CellCoord end = lattice_cell(origin, res, to);
  const Vec3 dir = to - from;
  std::array<int, 3> step{};
  std::array<double, 3> t_max{}, t_delta{};
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0) {
      step[a] = 1;
      t_max[a] = (origin[a] + (cell[a] + 1) * res - from[a]) / dir[a];
      t_delta[a] = res / dir[a];
    } else if (dir[a] < 0) {
      step[a] = -1;
      t_max[a] = (origin[a] + cell[a] * res - from[a]) / dir[a];
      t_delta[a] = -res / dir[a];
    } else {
      step[a] = 0;
      t_max[a] = t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }
  const int guard = std::abs(end[0] - cell[0]) + std::abs(end[1] - cell[1]) + std::abs(end[2] - cell[2]) + 3;
  for (int n = 0; n < guard; ++n) {
    if (!visit(static_cast<const CellCoord&>(cell))) return;
    if (cell == end) return;
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    // Rounding can leave an axis aligned with the end cell while t_max says
    // step it; step the nearest unaligned axis instead.
    if (cell[axis] == end[axis]) {
      int alt = -1;
      for (int a = 0; a < 3; ++a)
        if (cell[a] != end[a] && (alt < 0 || t_max[a] < t_max[alt])) alt = a;
      if (alt < 0) return;
      axis = alt;
    }
    cell[axis] += step[axis];
    t_max[axis] += t_delta[axis];
  }
}

}  // namespace mapnbv
