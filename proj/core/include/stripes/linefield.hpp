#pragma once

// Cell-sampled fields of rank-one orthogonal projections (line fields), their
// discrete divergence, admissibility diagnostics, and the limit energy
// (1/8) * integral of |div P|^2 over the domain.

#include <functional>
#include <string>
#include <vector>

#include "stripes/common.hpp"
#include "stripes/domain.hpp"
#include "stripes/grid.hpp"

namespace stripes {

struct LineField {
  Grid grid;
  std::vector<Mat2> P;  // indexed like grid cells; meaningful on inside cells

  const Mat2& at(int i, int j) const { return P[grid.index(i, j)]; }
  Mat2& at(int i, int j) { return P[grid.index(i, j)]; }
};

// Samples an arbitrary matrix-valued function on the inside cells.
LineField make_line_field(const Grid& grid, const std::function<Mat2(const Vec2&)>& f);

// The tangential stripe field of a tube: P = e e^T with e the unit tangent of
// the level sets of the boundary distance (e = rot90 of its gradient).
LineField canonical_field(const TubularDomain& dom, const Grid& grid,
                          ReferenceBoundary ref = ReferenceBoundary::inner);

// Row-wise discrete divergence (div P)_i = sum_j d_j P_ij with centered
// differences, falling back to one-sided stencils next to the mask edge.
// Cells with no usable stencil on some axis are flagged invalid and excluded
// from integrals.
struct DivergenceField {
  Grid grid;
  std::vector<Vec2> v;
  std::vector<std::uint8_t> valid;
  int excluded = 0;

  const Vec2& at(int i, int j) const { return v[grid.index(i, j)]; }
  // Bilinear interpolation over cell centers (valid cells only contribute).
  Vec2 sample(const Vec2& x) const;
};

DivergenceField divergence(const LineField& field);

// Residuals of the admissibility conditions for limit line fields:
// symmetry, idempotency, unit trace (rank one), square-integrable divergence,
// P div P = 0, and vanishing boundary trace P n.
struct K0Report {
  double sym_max = 0.0;          // max |P - P^T|
  double idem_max = 0.0;         // max |P^2 - P|
  double trace_max = 0.0;        // max |tr P - 1|
  double div_l2_sq = 0.0;        // integral of |div P|^2 (valid cells)
  double div_l2 = 0.0;
  double excluded_fraction = 0.0;
  double pdivp_max = 0.0;        // max |P div P|
  double pdivp_l2 = 0.0;
  double trace_bc_max = 0.0;     // max |P n| on boundary cells
  int boundary_cells = 0;
  int inside_cells = 0;
  double h = 0.0;
  std::string violation;  // empty when the field passes the thresholds

  bool pass() const { return violation.empty(); }
};

struct K0Options {
  double algebraic_tol = 1e-9;  // symmetry / idempotency / trace
  double pdivp_tol = 0.05;      // max |P div P| allowed at this resolution
  double trace_slope = 0.0;     // if > 0, require |P n| <= trace_slope * h
  bool strict = false;          // throw on violation instead of reporting
};

// When `dom` is supplied the outward boundary normal is evaluated from the
// tube geometry; otherwise it is estimated from the mask stencil (coarse,
// only suitable for axis-aligned masks).
K0Report check_admissible_field(const LineField& field, const TubularDomain* dom,
                                const K0Options& opts = {});

struct LimitEnergyReport {
  double value = 0.0;  // (1/8) * sum |div P|^2 h^2 over valid inside cells
  K0Report k0;
};

LimitEnergyReport limit_energy(const LineField& field, const TubularDomain* dom,
                               const K0Options& opts = {});

}  // namespace stripes
