#pragma once

// Study orchestration: convergence sweeps over stripe counts on a tubular
// domain (energies, bounds, gaps, defects per row), the flat-torus baseline,
// persistence of CSV/JSON/SVG outputs with a hashed manifest.

#include <optional>
#include <string>
#include <vector>

#include "stripes/common.hpp"
#include "stripes/domain.hpp"
#include "stripes/energy.hpp"
#include "stripes/io.hpp"

namespace stripes {

struct StudyConfig {
  // Domain: a circle or axis-aligned ellipse center curve with tube
  // half-width delta.
  std::string domain_kind = "circle";  // "circle" | "ellipse"
  double radius = 1.0;
  double rx = 1.0, ry = 1.0;
  double cx = 0.0, cy = 0.0;
  double delta = 0.25;
  std::string reference = "inner";  // reference boundary for the distance
  int curve_samples = 2048;         // center curve resolution

  // Epsilon schedule: stripe counts N (eps = delta / (2N), resonance-safe) or
  // an explicit eps list validated against the resonance condition.
  std::vector<int> stripe_counts = {2, 4, 8};
  std::vector<double> eps_list;  // optional; validated if non-empty

  double h_ratio = 8.0;  // h = eps / h_ratio; must keep h <= eps/4

  // Transport solver policy.
  long exact_cap = 30000;  // atoms/side above which exact d is skipped
  int knn = 32;

  // Diagnostics.  The alignment-defect kernel widths 1/k must stay below the
  // finest inter-interface spacing (2*min eps) of the sweep: a wider kernel
  // measures the angle spread between neighbouring interfaces, which is a
  // property of the geometry, not of the resolution, and does not vanish.
  std::vector<double> defect_k = {36, 48, 64};
  int gauss_points = 32;

  // Outputs.
  std::string out_dir;  // empty: no files written
  bool write_svg = true;
  bool write_pgm = false;
  unsigned seed = 0;  // recorded in the manifest (all paths deterministic)

  double resonance_tol = 1e-9;
};

// Parses and validates a config from key-value text; unknown keys and
// invariant violations (non-resonant eps, h > eps/4) are rejected with the
// offending entry named.
StudyConfig study_config_from_kv(const KeyValueConfig& kv);

struct StudyRow {
  int N = 0;
  double eps = 0.0;
  double h = 0.0;

  // Primary energy: d from the stripe-map upper bound (the construction the
  // sweep is probing), identical semantics for every row.
  EnergyReport energy;
  // Raster-instance energy: exact d when the atom count is under the cap,
  // otherwise the certified bracket (entropic/sawtooth lower, feasible-plan
  // upper).  Exactly one of the two is set on successful rows.
  std::optional<EnergyReport> energy_exact;
  std::optional<EnergyReport> energy_bracket;
  // Certified feasible-plan upper bound for the rasterized instance.
  double d_plan = 0.0;
  int plan_residual_pairs = 0;
  double g0_reference = 0.0;

  LowerBoundReport lower;      // from extracted rays (exact solves only)
  bool lower_present = false;

  double upper_bound_total = 0.0;   // curvature route
  double upper_bound_div = 0.0;     // divergence route
  double upper_c_estimate = 0.0;    // (G_upper - upper_bound_total between)/eps

  double weak_gap = 0.0;
  double strong_gap = 0.0;
  std::vector<double> defects;  // aligned with config defect_k

  double seconds_total = 0.0;
  double seconds_transport = 0.0;
  std::string error;  // non-empty when a stage failed; row partial
};

struct StudyResult {
  StudyConfig config;
  double g0 = 0.0;  // limit energy of the canonical field (grid quadrature)
  double g0_analytic = 0.0;  // closed form when available (circle tubes)
  std::vector<StudyRow> rows;
  std::vector<std::pair<std::string, std::string>> manifest;  // file -> hash
  std::string csv;  // the study table (also written to out_dir)
};

StudyResult run_gamma_study(const StudyConfig& cfg);

// Flat-torus baseline: straight stripes of width factor * 2 eps on the unit
// torus (period = 2 * width), exact transport, raster perimeter (exact for
// axis-aligned stripes).  `angle_deg` selects the stripe normal: 0 or 90
// (axis-aligned) or 45 (diagonal, commensurability permitting).
struct BaselineConfig {
  double eps = 1.0 / 16.0;
  double h_ratio = 8.0;
  double width_factor = 1.0;  // stripe width = width_factor * 2 eps
  double angle_deg = 0.0;
  double phase = 0.0;
  long exact_cap = 40000;
  std::string out_dir;
};

struct BaselineRow {
  EnergyReport energy;
  double d_oracle = 0.0;  // 1-D cumulative-mass oracle (axis-aligned only)
  double period = 0.0;
  std::string error;
};

BaselineRow run_baseline_torus(const BaselineConfig& cfg);

// The closed-form limit energy of a circular tube: (1/8) * 2 pi * ln((R +
// delta)/(R - delta)) ... evaluated for the canonical field |div P| = 1/r:
//   (1/8) integral = (pi/4) ln((R+delta)/(R-delta)).
double annulus_limit_energy(double R, double delta);

}  // namespace stripes
