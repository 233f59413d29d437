#pragma once

// Phase boundaries of binary patterns: marching-squares extraction on the
// cell-center lattice, perimeter, and the matrix-weighted jump measure whose
// atoms discretize eps * H^1 restricted to the interfaces.

#include <vector>

#include "stripes/common.hpp"
#include "stripes/grid.hpp"
#include "stripes/pattern.hpp"

namespace stripes {

// A closed interface loop.  On periodic grids the closing edge may cross the
// torus seam; `period` carries the grid extent so segment vectors are taken
// in the minimum-image convention.
struct InterfaceLoop {
  std::vector<Vec2> pts;
  bool periodic = false;
  double period_x = 0.0, period_y = 0.0;

  int segments() const { return static_cast<int>(pts.size()); }  // closed
  // Minimum-image vector from pts[i] to the next point.
  Vec2 edge(int i) const;
  double length() const;
};

struct InterfaceSet {
  std::vector<InterfaceLoop> loops;
  double total_length() const;
};

// Marching squares at level 1/2 over the cell-center lattice (outside cells
// count as phase 0).  Ambiguous saddles are resolved by separating the high
// corners.  Loops are oriented with the u = 1 phase to the right of travel,
// so rot90(tangent) points from phase 1 into phase 0.
InterfaceSet extract_interfaces(const BinaryPattern& p);

// Builds an InterfaceSet from analytic phase-boundary polylines (e.g. the
// stripe construction's offset curves), keeping their stored orientation.
InterfaceSet interfaces_from_loops(std::vector<InterfaceLoop> loops);
InterfaceSet interfaces_from_family(const StripeFamily& family);

double perimeter(const InterfaceSet& is);

// Matrix-weighted atoms: one atom per interface segment at its midpoint with
// weight eps * segment_length and matrix tau tau^T (tau the unit tangent).
struct JumpMeasure {
  std::vector<Vec2> x;
  std::vector<double> w;
  std::vector<Mat2> P;
  double total_mass = 0.0;
};

JumpMeasure jump_measure(const InterfaceSet& is, double eps);

}  // namespace stripes
