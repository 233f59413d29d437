#pragma once

// The explicit transversal transport map of the stripe construction: each
// stripe splits at its center curve and pushes the two phase half-widths onto
// the adjacent empty half-stripes by matching mass coordinates.  Provides the
// map's exact cost in closed form, an independent quadrature route, a
// pushforward (marginal) verification, and the resulting upper bound for the
// transport distance.

#include <vector>

#include "stripes/common.hpp"
#include "stripes/pattern.hpp"
#include "stripes/transport.hpp"

namespace stripes {

// Per-unit-length cost of the upward (+) and downward (-) half-stripe maps
// at transversal-frame curvature kappa: the integral over the phase
// half-width of the matched displacement, in closed form via the
// antiderivative of t(m).  Both equal eps^2 at kappa = 0 and expand as
//   eps^2 (1 -+ eps k - (eps k)^2/4 -+ (eps k)^3/4 + O((eps k)^4)).
double map_cost_density_upper(double eps, double kappa);
double map_cost_density_lower(double eps, double kappa);

// Truncated series form of the densities (through the cubic term); exposed
// for the near-flat consistency test against the closed form.
double map_cost_density_upper_series(double eps, double kappa);
double map_cost_density_lower_series(double eps, double kappa);

struct StripeCost {
  double length = 0.0;         // center curve length
  double cost_closed = 0.0;    // closed-form density integrated along s
  double cost_quad = 0.0;      // Gauss quadrature in m, trapezoid in s
  double density_max_dev = 0.0;  // max |closed - quad| per-sample density
};

struct StripeMapReport {
  std::vector<StripeCost> per_stripe;
  double cost_closed = 0.0;
  double cost_quad = 0.0;
  // Pushforward check: relative mismatch of integrals of test monomials
  // (1, x, y, x^2+y^2) under the map vs. directly over the target territory.
  double pushforward_rel_err = 0.0;
};

struct StripeMapOptions {
  int gauss_points = 32;
  bool check_pushforward = true;
};

StripeMapReport stripe_transport_map(const StripeFamily& family,
                                     const StripeMapOptions& opts = {});

// Upper bound for d(u, 1-u) induced by the map: the closed-form cost summed
// over stripes.  Any feasible plan dominates the optimum, so this bounds the
// exact distance from above.
double upper_bound_d1(const StripeFamily& family);

// Certified upper bound for the rasterized instance: an explicit feasible
// plan on the pattern's atoms.  Atoms are classified by stripe and half
// (mirroring the raster fill), each (stripe, half) group is matched
// monotonically in the transversal offset within angular columns one cell
// wide, and group leftovers (balance flips, jagged band edges) are rank
// matched across a residual pool.  The returned cost dominates exact_d1 of
// the same atoms because the plan is feasible by construction.
struct RasterUpperBound {
  double cost = 0.0;
  double residual_cost = 0.0;  // contribution of the cross-group leftovers
  int residual_pairs = 0;
  std::vector<PlanEntry> plan;
};

// col_width controls the angular column size of the monotone matching;
// 0 selects one grid cell.
RasterUpperBound upper_bound_d1(const StripeFamily& family, const TransportAtoms& atoms,
                                double col_width = 0.0);

}  // namespace stripes
