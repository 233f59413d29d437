#pragma once

// Transport-ray decomposition: the local frame (ray direction, crossing
// angle, angular rate) sampled along interface curves, the mass-coordinate
// chart along rays, and the ray statistics (unit-slope extents, effective
// in-phase length, mass width M) that feed the energy lower bound.

#include <functional>
#include <vector>

#include "stripes/common.hpp"
#include "stripes/interface.hpp"
#include "stripes/transport.hpp"

namespace stripes {

// Frame of a ray crossing a base curve: sin of the crossing angle
// (det(tangent, theta), positive by orientation) and the arclength rate of
// the ray-direction angle.
struct RayFrame {
  double sin_beta = 1.0;
  double alpha_prime = 0.0;
};

// Mass coordinate along the ray: m(t) = t sin(beta) - t^2/2 * alpha'.
double mass_coordinate(const RayFrame& f, double t);

// Inverse chart t(m), evaluated in the cancellation-free conjugate form
//   t = 2 m / (sin(beta) (1 + sqrt(1 - 2 alpha' m / sin^2(beta))))
// which reduces to m / sin(beta) as alpha' -> 0.  Throws when the
// discriminant is negative (m outside the chart domain), naming m.
double inverse_mass_coordinate(const RayFrame& f, double m);

enum RayExclusion : std::uint8_t {
  kRayOk = 0,
  kRaySlope = 1,        // WLS gradient not unit within slope_tol
  kRayAngle = 2,        // sin(beta) below threshold
  kRayChart = 4,        // chart domain violated along the ray
  kRayEmpty = 8,        // theta points out of the phase, l+ = 0
};

struct RaySample {
  Vec2 p;                  // base point on the interface
  int loop = 0;            // interface loop index
  double s = 0.0;          // arclength along the loop
  double ds = 0.0;         // arc weight of the sample
  Vec2 theta;              // ray direction (unit gradient of the potential)
  double grad_norm = 0.0;  // WLS gradient magnitude before normalization
  double sin_beta = 1.0;
  double alpha = 0.0;        // angle of theta (unwrapped along the loop)
  double alpha_prime = 0.0;  // windowed least-squares slope of alpha
  double ell_plus = 0.0;     // unit-slope extent along +theta
  double ell_minus = 0.0;    // unit-slope extent along -theta (<= 0)
  double l_plus = 0.0;       // in-phase portion of [0, ell_plus]
  double M = 0.0;            // mass width m(l_plus)
  std::uint8_t excluded = kRayOk;

  RayFrame frame() const { return {sin_beta, alpha_prime}; }
};

struct RayField {
  std::vector<RaySample> samples;
  double total_arc = 0.0;
  double excluded_arc = 0.0;
  double excluded_fraction = 0.0;
};

struct RayOptions {
  double sample_spacing = 0.0;  // 0: one sample per interface vertex
  double fit_radius = 0.0;      // WLS ball radius; 0: 3h
  double grid_h = 0.0;          // informs defaults; required if fit_radius 0
  double slope_tol = 0.02;      // |grad|-1 and unit-slope marching tolerance
  double sin_beta_min = 0.05;
  int angle_window = 3;         // minimum +- samples in the windowed fits
  double smoothing_arc = 0.0;   // half-window arc for the periodic local fits
                                // of alpha', sin(beta) and the marched
                                // extents; 0: eps/2.  Raw marched lengths
                                // carry grid-scale potential noise that a
                                // quadratic functional amplifies by 1/eps^3.
  double march_step = 0.0;      // 0: h/2
  double march_tol = 0.012;     // relative unit-slope acceptance while
                                // marching (an absolute floor of 0.2 grid_h
                                // guards the envelope ripple of a discrete
                                // potential); the systematic half-band
                                // overshoot at the ridge is subtracted
  double max_ray_length = 0.0;  // 0: 8 eps … set by caller; hard stop
  double bisect_tol = 1e-12;    // in-phase exit refinement
};

// Membership oracle for Int(supp u); analytic when available (stripe
// constructions), raster lookup otherwise.
using PhaseMembership = std::function<bool(const Vec2&)>;

// Samples the transport-ray frame along every interface loop.  theta is the
// normalized weighted-least-squares gradient of the potential at the base
// point; arclength data (alpha') comes from an unwrapped windowed fit along
// the loop; extents come from marching the potential along +-theta with the
// unit-slope test and bisection refinement; l+ additionally respects the
// phase membership.  Samples failing the frame tests are kept but flagged,
// and the excluded arc fraction is reported.
RayField extract_rays(const KantorovichPotential& phi, const InterfaceSet& interfaces,
                      const PhaseMembership& in_phase, double eps, const RayOptions& opts);

// Independent checks of the ray parameterization (used by tests and the
// study diagnostics): integral of g over the phase via the (s, m) chart,
//   sum_j int ds int_0^M g(gamma + t(m) theta) dm,
// and the ray form of the transport cost,
//   sum_j int ds int_0^M [t(m) - t(m - M)] dm.
double ray_phase_integral(const RayField& rays, const std::function<double(const Vec2&)>& g,
                          int gauss_points = 16);
double ray_transport_cost(const RayField& rays, int gauss_points = 16);

// Lower bound for the same cost: sum_j int ds int_0^M t(m) dm.
double ray_transport_cost_lower(const RayField& rays, int gauss_points = 16);

}  // namespace stripes
