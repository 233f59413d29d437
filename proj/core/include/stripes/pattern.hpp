#pragma once

// Binary cell patterns (the phase indicator u), admissibility checks, exact
// straight-stripe constructions on periodic grids, and the curved stripe
// construction whose width profile is tuned so that transversal transport
// balances mass exactly at second order in the stripe width.

#include <optional>
#include <string>
#include <vector>

#include "stripes/common.hpp"
#include "stripes/curve.hpp"
#include "stripes/domain.hpp"
#include "stripes/grid.hpp"

namespace stripes {

struct BinaryPattern {
  Grid grid;
  std::vector<std::uint8_t> u;  // one value per cell; meaningful inside
  double epsilon = 0.0;         // stripe scale the pattern was built for

  // Bookkeeping from construction: cells flipped to balance the two phases
  // and cells trimmed from the mask to make its count even.
  int balance_flips = 0;
  int trimmed_cells = 0;

  int ones_count() const;
  double mean_inside() const;  // average of u over inside cells
};

struct AdmissibilityReport {
  int boundary_violations = 0;  // u=1 cells touching the outside
  double mean = 0.0;
  double imbalance = 0.0;  // |mean - 1/2|
  double balance_tol = 0.0;
  bool boundary_ok = false;
  bool balance_ok = false;
  bool pass() const { return boundary_ok && balance_ok; }
};

// balance_tol < 0 selects the default bound h * interface_length / (2 |mask|)
// with the interface length measured on the raster.
AdmissibilityReport check_admissible(const BinaryPattern& p, double balance_tol = -1.0);

// Straight stripes of period `period` along unit normal direction `normal`:
// u(x) = 1 iff frac((x . normal - phase)/period) < 1/2.  On periodic grids the
// period must tile the torus along `normal` (commensurability is checked and
// violations are rejected with the offending ratio in the message).
BinaryPattern straight_stripes(const Grid& grid, double period, double phase,
                               const Vec2& normal, double epsilon);

// One stripe of the curved construction: a center level curve, the
// transversal-frame curvature kappa at its samples, and the signed offsets
// rho_plus/rho_minus of the phase boundaries along the unit transversal
// direction (grad phi).
struct Stripe {
  ClosedCurve center;
  double level = 0.0;                // phi value of the center curve
  std::vector<double> kappa;         // transversal-frame curvature per sample
  std::vector<double> rho_plus;      // upper phase boundary offset (> 0)
  std::vector<double> rho_minus;     // lower phase boundary offset (< 0)
  std::vector<Vec2> transversal;     // unit grad phi per sample
  // Phase boundary polylines (sample i of `center` displaced by rho along the
  // transversal); oriented so the u = 1 side lies to the right of travel.
  std::vector<Vec2> upper_interface;
  std::vector<Vec2> lower_interface;

  double upper_length() const;
  double lower_length() const;
};

struct StripeFamily {
  TubularDomain dom;
  ReferenceBoundary ref = ReferenceBoundary::inner;
  double eps = 0.0;
  int count = 0;  // number of stripes N = delta / (2 eps)
  std::vector<Stripe> stripes;

  double level_of(int k) const { return 2.0 * eps * (2 * k + 1); }
  // Total length of all phase boundaries.
  double interface_length() const;
};

// Signed phase-boundary offsets along the transversal direction for stripe
// half-width eps and transversal-frame curvature kappa.  Evaluated in the
// cancellation-free conjugate form; rho_plus > 0 > rho_minus and the mass
// coordinates of the two offsets are +eps(1 - eps kappa) and
// -eps(1 + eps kappa).  Requires the discriminants to stay positive
// (|eps*kappa| small enough), otherwise throws.
double stripe_offset_upper(double eps, double kappa);
double stripe_offset_lower(double eps, double kappa);

struct RecoveryOptions {
  ReferenceBoundary ref = ReferenceBoundary::inner;
  int curve_samples = 0;  // per level curve; 0 = auto from grid resolution
  double grid_h = 0.0;    // cell size; 0 = eps / 8
  double resonance_tol = 1e-9;
};

struct RecoveryResult {
  StripeFamily family;
  BinaryPattern pattern;
};

// Builds the N = delta/(2 eps) stripe family on the tube (rejecting
// non-integer N, with the offending ratio in the message) and rasterizes the
// phase indicator.  The raster is balanced exactly: if the inside cell count
// is odd one boundary-adjacent cell is trimmed, then interface-adjacent cells
// farthest from the domain boundary are flipped (deterministic cell-index
// order) until both phases hold the same number of cells.
RecoveryResult stripe_recovery(const TubularDomain& dom, double eps,
                               const RecoveryOptions& opts = {});

}  // namespace stripes
