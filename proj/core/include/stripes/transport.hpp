#pragma once

// The 1-Wasserstein distance d(u, 1-u) between the two phases of a binary
// pattern, computed either exactly (sparse network simplex with column
// generation and a certificate of optimality) or approximately (log-domain
// entropic regularization with a rigorous lower/upper bracket), plus the
// Kantorovich dual potential extended off the atoms as a 1-Lipschitz
// function.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stripes/common.hpp"
#include "stripes/pattern.hpp"

namespace stripes {

// Point masses at cell centers: phase-1 cells are sources, phase-0 inside
// cells are sinks; every atom carries mass h^2.
struct TransportAtoms {
  std::vector<Vec2> source;
  std::vector<Vec2> sink;
  double cell_mass = 0.0;
  bool periodic = false;
  double period_x = 0.0, period_y = 0.0;

  // Ground distance, minimum-image when periodic.
  double dist(const Vec2& a, const Vec2& b) const;
  Vec2 min_image(const Vec2& d) const;  // shortest representative of d
};

TransportAtoms atoms_from_pattern(const BinaryPattern& p);

struct PlanEntry {
  int src = 0;
  int snk = 0;
  double mass = 0.0;
};

struct TransportSolution {
  double cost = 0.0;                  // total transport cost (mass-weighted)
  double cost_lower = 0.0;            // certified bracket; equal when exact
  double cost_upper = 0.0;
  std::vector<PlanEntry> plan;        // support of the plan
  std::vector<double> phi_src;        // Kantorovich potential on source atoms
  std::vector<double> phi_snk;        // and on sink atoms
  double dual_value = 0.0;            // sum a.phi_src - sum b.phi_snk
  double duality_gap_rel = 0.0;       // |cost - dual| / max(cost, tiny)
  double marginal_error = 0.0;        // max atom mass deviation of the plan
  std::string method;                 // "exact" or "entropic"
  std::int64_t pivots = 0;
  int refine_rounds = 0;
  int arcs_used = 0;
};

struct ExactOptions {
  int knn = 24;                   // candidate sinks per source (and reverse)
  int max_refine_rounds = 12;     // column-generation rounds
  int add_per_node = 4;           // violated arcs admitted per node per round
  double pivot_tol = 1e-11;
  long atom_cap = 30000;          // refuse larger instances (per side)
  bool dense_fallback = true;     // full arc set if refinement stalls (small n)
};

// Exact solve.  Throws when source/sink counts differ, the instance exceeds
// atom_cap, or optimality cannot be certified (no violated candidate arcs is
// the certificate; see duality_gap_rel in the result).
TransportSolution exact_d1(const TransportAtoms& atoms, const ExactOptions& opts = {});

struct EntropicOptions {
  double reg = 0.0;         // 0 = auto: ~2% of the mean nearest-sink distance
  int max_iter = 5000;
  double tol = 1e-10;       // potential convergence in the log domain
  int plan_top_k = 4;       // plan entries retained per source (largest mass)
  int knn = 32;             // sparse support: candidate sinks per source
};

// Entropic bracket: iterations run on a sparse nearest-neighbour support, but
// both ends of the bracket are certified globally — cost_lower from the
// c-transformed (hence feasible) dual pair with exact global c-transforms,
// cost_upper from a rounded feasible plan; cost is their midpoint.
TransportSolution approx_d1(const TransportAtoms& atoms, const EntropicOptions& opts = {});

// 1-Lipschitz extensions of the optimal dual potential.  The lower envelope
// max_i(phi_src[i] - |z - x_i|) and the upper envelope
// min_j(phi_snk[j] + |z - y_j|) agree with the atom duals on every atom;
// eval() returns their average, a symmetric choice between the two extreme
// extensions.  Evaluation is accelerated by bucket grids with cone pruning.
class KantorovichPotential {
 public:
  KantorovichPotential(const TransportAtoms& atoms, const TransportSolution& sol);
  ~KantorovichPotential();
  KantorovichPotential(KantorovichPotential&&) noexcept;
  KantorovichPotential& operator=(KantorovichPotential&&) noexcept;

  double eval(const Vec2& z) const { return 0.5 * (eval_lower(z) + eval_upper(z)); }
  double eval_lower(const Vec2& z) const;
  double eval_upper(const Vec2& z) const;

  // Diagnostics computed at construction.
  double envelope_mismatch() const { return envelope_mismatch_; }  // max over atoms
  double slackness_max() const { return slackness_max_; }  // over plan support
  int n_source() const { return n_src_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double envelope_mismatch_ = 0.0;
  double slackness_max_ = 0.0;
  int n_src_ = 0;
};

// Exact optimal-transport cost between two interleaved families of point
// masses on a circle of circumference `period` (positions folded into
// [0, period)), by the cumulative-mass characterization: the cost is the
// integral of |F_src - F_snk - c*| with c* the mass-weighted median level.
// Serves as an independent oracle for striped patterns that are invariant
// transverse to the stripe normal.
double periodic_line_transport(std::vector<double> src, std::vector<double> snk,
                               double period, double atom_mass);

}  // namespace stripes
