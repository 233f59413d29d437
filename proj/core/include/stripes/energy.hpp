#pragma once

// Energy assembly and its two-sided diagnostics: the rescaled functional from
// perimeter and transport parts, the ray-based lower bound, the
// curvature/divergence upper-bound routes for stripe constructions, the
// mollified pairwise alignment defect, measure convergence gaps against the
// uniform limit measure, and the discrete first variation of interface
// length.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "stripes/common.hpp"
#include "stripes/domain.hpp"
#include "stripes/interface.hpp"
#include "stripes/linefield.hpp"
#include "stripes/pattern.hpp"
#include "stripes/rays.hpp"

namespace stripes {

struct EnergyReport {
  double eps = 0.0;
  double area = 0.0;             // |Omega|
  double perimeter = 0.0;        // total interface length
  double perimeter_term = 0.0;   // eps * perimeter
  double transport_term = 0.0;   // d1 / eps (midpoint when bracketed)
  double d1 = 0.0;
  double d1_lower = 0.0;
  double d1_upper = 0.0;
  std::string d_source;          // "exact" | "upper-bound-map" | "bracket"
  std::string perimeter_source;  // "analytic" | "raster"
  double F = 0.0;                // perimeter_term + transport_term
  double G = 0.0;                // (F - area) / eps^2
  double G_lower = 0.0;          // from the d interval
  double G_upper = 0.0;
};

// Assembles F and G from measured parts; the d interval propagates into
// [G_lower, G_upper].  Rejects empty d intervals (d_upper < d_lower) and
// non-positive eps/area.
EnergyReport assemble_energy(double eps, double area, double perimeter,
                             const std::string& perimeter_source, double d_lower,
                             double d_upper, const std::string& d_source);

struct CurveTerms {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
};

struct LowerBoundReport {
  // Weighted with eps ds over valid samples:
  double t1 = 0.0;  // (1/eps^2) (1/sin b - 1) (M/eps)^2
  double t2 = 0.0;  // (1/eps^2) (M/eps - 1)^2
  double t3 = 0.0;  // (1/(4 sin b)) (M/(eps sin b))^4 alpha'^2
  double total = 0.0;
  std::vector<CurveTerms> per_curve;
  // Unsharpened variant, comparable to eps^2 * G:
  //   integral of [(M/eps - 1)^2 + (1/sin b - 1) + eps^2/4 alpha'^2] eps ds.
  double basic_total = 0.0;
  double covered_arc = 0.0;
  double excluded_fraction = 0.0;
  bool unreliable = false;  // excluded fraction above 1/2
  int samples = 0;
};

// Integrates the three lower-bound terms over valid ray samples.  Excluded
// samples do not contribute, so the value underestimates the full integral
// (consistent with its role as a lower bound).
LowerBoundReport lower_bound_terms(const RayField& rays, double eps);

struct UpperBoundReport {
  // Route (a): curvature integrals along stripe center curves,
  //   sum_h eps * closed-integral of kappa_h^2 / 2 ds.
  double curvature_route = 0.0;
  // Route (b): (1/2) integral of |div P|^2 d nu with nu = eps H^1 restricted
  // to the center curves, div P interpolated from the grid divergence of the
  // tangential line field.
  double divergence_route = 0.0;
  double rel_dev = 0.0;  // |a - b| / max(a, b)
  std::vector<double> per_stripe_curvature;
};

// The two routes are independent discretizations of the same quantity and
// must agree within quadrature/stencil tolerance; `field` is the tangential
// line field of the same tube sampled on a grid.
UpperBoundReport upper_bound_report(const StripeFamily& family, const LineField& field);

// Mollified pairwise misalignment of the matrix-weighted interface atoms:
//   D_k = sum_{i != j} rho_k(|x_i - x_j|) |P_i - P_j|_F w_i w_j
// with rho_k(z) = (3 k^2 / pi) (1 - k^2 z^2)^2 on |z| < 1/k (unit mass).
// Neighbor search uses a spatial hash of cell width 1/k; atoms are
// canonically ordered before accumulation, so the value is invariant under
// relabeling.
struct DefectReport {
  double value = 0.0;
  double k = 0.0;
  std::int64_t pairs = 0;
};

DefectReport alignment_defect(const JumpMeasure& jm, double k);

// Convergence gaps of the interface measure against the uniform measure
// (1/2) Lebesgue on the tube.  weak_gap = max over a fixed 10-element
// dictionary (tensor products of {1, x, y, sin pi x, sin pi y} with two
// basis matrices) of |sum_atoms f P:M w - (1/2) integral_Omega f P_ref:M dx|;
// strong_gap compares total squared-Frobenius mass.  Reference integrals use
// the tube's normal-coordinate chart with the exact area element and the
// analytic tangential field (raster-independent).
struct GapReport {
  double weak_gap = 0.0;
  std::vector<double> dictionary_gaps;
  double strong_gap = 0.0;
  double atom_mass = 0.0;
  double reference_mass = 0.0;
};

GapReport pair_convergence_gap(const JumpMeasure& jm, const TubularDomain& dom,
                               ReferenceBoundary ref = ReferenceBoundary::inner,
                               int quad_s = 2048, int quad_w = 64);

// Grid-reference variant: both routes integrate against mu_scale * Lebesgue
// restricted to the mask (atoms vs. cell quadrature of the given field).
// With atoms placed at the cell centers of the same field it reduces to an
// exact quadrature identity.
GapReport pair_convergence_gap(const JumpMeasure& jm, const LineField& reference,
                               double mu_scale);

// Discrete first variation of eps * length for a polyline loop under a
// displacement field eta:
//   dV(eta) = -eps * sum_v eta(v) . Delta tau_v,
// where Delta tau_v is the turning vector (difference of adjacent unit edge
// tangents).  vertex_mean_curvature[v] = Delta tau_v / dual_length points
// along the discrete curvature normal; for a regular polygon its magnitude
// equals the circumradius curvature exactly, and it is orthogonal to the
// mean of the adjacent edge tangents by construction.  dV_edge_route is the
// direct tangential-divergence sum eps * sum_e tau_e . (eta(end)-eta(start)),
// an algebraically identical dual route used for verification.
struct FirstVariationReport {
  double dV = 0.0;
  double dV_edge_route = 0.0;
  std::vector<Vec2> vertex_mean_curvature;
  std::vector<double> dual_length;
  Vec2 turning_sum;             // closure residual (zero for closed loops)
  double max_tangential = 0.0;  // worst |H . mean tangent| over vertices
  std::vector<Vec2> endpoint_forces;  // singular part; empty for closed loops
  double total_variation_mass = 0.0;  // eps * sum |Delta tau_v|
};

FirstVariationReport first_variation(const std::vector<Vec2>& loop, double eps,
                                     const std::function<Vec2(const Vec2&)>& eta,
                                     bool closed = true);

// Aggregates the per-loop reports of an interface set (sums dV and masses,
// worst-case residuals).
FirstVariationReport first_variation(const InterfaceSet& iset, double eps,
                                     const std::function<Vec2(const Vec2&)>& eta);

}  // namespace stripes
