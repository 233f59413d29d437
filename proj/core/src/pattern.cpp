#include "stripes/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace stripes {

int BinaryPattern::ones_count() const {
  int n = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (grid.inside[i] && u[i]) ++n;
  return n;
}

double BinaryPattern::mean_inside() const {
  const int inside = grid.inside_count();
  return inside > 0 ? static_cast<double>(ones_count()) / inside : 0.0;
}

namespace {

// Number of inside 4-neighbour pairs with differing phase; h * count is the
// staircase interface length on the raster.
int phase_edge_count(const BinaryPattern& p) {
  const Grid& g = p.grid;
  int edges = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int idx = g.index(i, j);
      if (!g.inside[idx]) continue;
      for (const auto& [di, dj] : {std::pair{1, 0}, {0, 1}}) {
        int ni, nj;
        if (g.neighbor(i, j, di, dj, ni, nj) && g.inside[g.index(ni, nj)] &&
            p.u[idx] != p.u[g.index(ni, nj)])
          ++edges;
      }
    }
  return edges;
}

bool touches_outside(const Grid& g, int i, int j) {
  for (const auto& [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
    int ni, nj;
    if (!g.neighbor(i, j, di, dj, ni, nj) || !g.inside[g.index(ni, nj)]) return true;
  }
  return false;
}

}  // namespace

AdmissibilityReport check_admissible(const BinaryPattern& p, double balance_tol) {
  const Grid& g = p.grid;
  AdmissibilityReport r;
  if (g.periodic) {
    r.boundary_ok = true;  // boundary condition suspended on the torus
  } else {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const int idx = g.index(i, j);
        const bool one = idx < static_cast<int>(p.u.size()) && p.u[idx];
        if (!one) continue;
        if (!g.inside[idx] || touches_outside(g, i, j)) ++r.boundary_violations;
      }
    r.boundary_ok = r.boundary_violations == 0;
  }

  r.mean = p.mean_inside();
  r.imbalance = std::fabs(r.mean - 0.5);
  if (balance_tol < 0.0) {
    const double raster_len = g.h * phase_edge_count(p);
    const double mask = g.mask_area();
    balance_tol = mask > 0.0 ? g.h * raster_len / (2.0 * mask) : 0.0;
  }
  r.balance_tol = balance_tol;
  r.balance_ok = r.imbalance <= balance_tol;
  return r;
}

BinaryPattern straight_stripes(const Grid& grid, double period, double phase,
                               const Vec2& normal, double epsilon) {
  if (period <= 0.0) throw Error("stripe period must be positive");
  const Vec2 n = normalized(normal);
  if (grid.periodic) {
    // The pattern must be invariant under both torus translations.
    const double rx = grid.width() * n.x / period;
    const double ry = grid.height() * n.y / period;
    for (const double r : {rx, ry}) {
      if (std::fabs(r - std::round(r)) > 1e-9 * std::max(1.0, std::fabs(r))) {
        std::ostringstream os;
        os << "stripe period " << period << " does not tile the torus: extent/period "
           << "projections are (" << rx << ", " << ry << "), expected integers";
        throw Error(os.str());
      }
    }
  }

  BinaryPattern p;
  p.grid = grid;
  p.epsilon = epsilon;
  p.u.assign(grid.inside.size(), 0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int idx = grid.index(i, j);
      if (!grid.inside[idx]) continue;
      const double z = (dot(grid.center(i, j), n) - phase) / period;
      const double frac = z - std::floor(z);
      p.u[idx] = frac < 0.5 ? 1 : 0;
    }
  return p;
}

double stripe_offset_upper(double eps, double kappa) {
  const double ek = eps * kappa;
  const double disc = 1.0 - 2.0 * ek + 2.0 * ek * ek;
  if (disc <= 0.0 || std::fabs(ek) >= 0.25)
    throw Error("stripe curvature too large for the width profile: eps*kappa = " +
                format_double(ek));
  // Conjugate form of (1 - sqrt(disc))/kappa; exact at kappa = 0.
  return 2.0 * eps * (1.0 - ek) / (1.0 + std::sqrt(disc));
}

double stripe_offset_lower(double eps, double kappa) {
  const double ek = eps * kappa;
  const double disc = 1.0 + 2.0 * ek + 2.0 * ek * ek;
  if (disc <= 0.0 || std::fabs(ek) >= 0.25)
    throw Error("stripe curvature too large for the width profile: eps*kappa = " +
                format_double(ek));
  return -2.0 * eps * (1.0 + ek) / (1.0 + std::sqrt(disc));
}

double Stripe::upper_length() const {
  double L = 0.0;
  const std::size_t n = upper_interface.size();
  for (std::size_t i = 0; i < n; ++i)
    L += (upper_interface[(i + 1) % n] - upper_interface[i]).norm();
  return L;
}

double Stripe::lower_length() const {
  double L = 0.0;
  const std::size_t n = lower_interface.size();
  for (std::size_t i = 0; i < n; ++i)
    L += (lower_interface[(i + 1) % n] - lower_interface[i]).norm();
  return L;
}

double StripeFamily::interface_length() const {
  double L = 0.0;
  for (const Stripe& s : stripes) L += s.upper_length() + s.lower_length();
  return L;
}

namespace {

// Distance of a tube point to the nearer tube boundary, from its level value.
double boundary_distance(double phi, double delta) {
  return std::min(phi, 2.0 * delta - phi);
}

void trim_and_balance(BinaryPattern& p, const std::vector<double>& phi, double delta) {
  Grid& g = p.grid;

  if (g.inside_count() % 2 != 0) {
    // Drop one boundary-adjacent empty cell (nearest the boundary) so the two
    // phases can hold exactly half the cells each.
    int best = -1;
    double best_d = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const int idx = g.index(i, j);
        if (!g.inside[idx] || p.u[idx] || !touches_outside(g, i, j)) continue;
        const double d = boundary_distance(phi[idx], delta);
        if (best < 0 || d < best_d) {
          best = idx;
          best_d = d;
        }
      }
    if (best < 0) throw Error("cannot trim raster mask to an even cell count");
    g.inside[best] = 0;
    p.trimmed_cells = 1;
  }

  const int target = g.inside_count() / 2;
  int diff = p.ones_count() - target;
  if (diff == 0) return;
  const std::uint8_t from = diff > 0 ? 1 : 0;

  // Candidate flips, chosen on the original raster: cells of the majority
  // phase next to the opposite phase, keeping the boundary condition intact.
  struct Candidate {
    double depth;
    int idx;
  };
  std::vector<Candidate> cands;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int idx = g.index(i, j);
      if (!g.inside[idx] || p.u[idx] != from || touches_outside(g, i, j)) continue;
      bool near_interface = false;
      for (const auto& [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        int ni, nj;
        if (g.neighbor(i, j, di, dj, ni, nj) && g.inside[g.index(ni, nj)] &&
            p.u[g.index(ni, nj)] != from) {
          near_interface = true;
          break;
        }
      }
      if (near_interface) cands.push_back({boundary_distance(phi[idx], delta), idx});
    }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.idx < b.idx;
  });

  int need = std::abs(diff);
  if (need > static_cast<int>(cands.size()))
    throw Error("not enough interface-adjacent cells to balance the pattern: need " +
                std::to_string(need) + ", have " + std::to_string(cands.size()));
  for (int k = 0; k < need; ++k) p.u[cands[k].idx] = from ^ 1;
  p.balance_flips = need;
}

}  // namespace

RecoveryResult stripe_recovery(const TubularDomain& dom, double eps,
                               const RecoveryOptions& opts) {
  if (eps <= 0.0) throw Error("stripe width must be positive");
  const double ratio = dom.delta() / (2.0 * eps);
  const int count = static_cast<int>(std::llround(ratio));
  if (count < 1 || std::fabs(ratio - count) > opts.resonance_tol * std::max(1.0, ratio))
    throw Error("stripe width does not resonate with the tube: delta/(2 eps) = " +
                format_double(ratio) + " is not a positive integer");

  const double h = opts.grid_h > 0.0 ? opts.grid_h : eps / 8.0;
  DomainDistance phi(dom, opts.ref);
  const ClosedCurve& base = dom.center();
  const double ref_sign = opts.ref == ReferenceBoundary::inner ? -1.0 : 1.0;

  RecoveryResult out;
  StripeFamily& fam = out.family;
  fam.dom = dom;
  fam.ref = opts.ref;
  fam.eps = eps;
  fam.count = count;

  int samples = opts.curve_samples;
  if (samples <= 0)
    samples = std::max(2048, 4 * static_cast<int>(std::ceil(base.length() / h)));

  for (int k = 0; k < count; ++k) {
    Stripe st;
    st.level = fam.level_of(k);
    st.center = phi.level_curve(st.level, samples);
    st.kappa.resize(samples);
    st.rho_plus.resize(samples);
    st.rho_minus.resize(samples);
    st.transversal.resize(samples);
    st.upper_interface.resize(samples);
    st.lower_interface.resize(samples);
    const double wk = phi.level_offset(st.level);
    for (int i = 0; i < samples; ++i) {
      // Curvature of the level set through this vertex, from the offset
      // relation to the tube center: discrete polyline curvature is far too
      // noisy on resampled curves to feed the interface offsets.
      const CurveProjection f = base.project(st.center.vertex(i));
      const double kc = base.curvature_at(f.s);
      const double k_level = kc / (1.0 - wk * kc);
      const double k_rec = ref_sign * k_level;
      const Vec2 that = f.nu * ref_sign;  // unit grad phi
      st.kappa[i] = k_rec;
      st.rho_plus[i] = stripe_offset_upper(eps, k_rec);
      st.rho_minus[i] = stripe_offset_lower(eps, k_rec);
      st.transversal[i] = that;
      st.upper_interface[i] = st.center.vertex(i) + that * st.rho_plus[i];
      st.lower_interface[i] = st.center.vertex(i) + that * st.rho_minus[i];
    }
    // Orient each phase boundary with u = 1 to the right of travel.  The curve
    // runs parallel to the center curve, whose left-hand normal is rot90(tau);
    // for the upper boundary u = 1 lies opposite the transversal.
    const bool upper_reversed = opts.ref == ReferenceBoundary::inner;
    if (upper_reversed)
      std::reverse(st.upper_interface.begin(), st.upper_interface.end());
    else
      std::reverse(st.lower_interface.begin(), st.lower_interface.end());
    fam.stripes.push_back(std::move(st));
  }

  // Rasterize by cell-center membership in {rho_minus < t < rho_plus}.
  BinaryPattern& p = out.pattern;
  p.grid = rasterize(dom, h);
  p.epsilon = eps;
  p.u.assign(p.grid.inside.size(), 0);
  std::vector<double> phival(p.grid.inside.size(), 0.0);
  for (int j = 0; j < p.grid.ny; ++j)
    for (int i = 0; i < p.grid.nx; ++i) {
      const int idx = p.grid.index(i, j);
      if (!p.grid.inside[idx]) continue;
      const CurveProjection f = dom.frame(p.grid.center(i, j));
      const double pv = opts.ref == ReferenceBoundary::inner ? dom.delta() - f.w
                                                             : dom.delta() + f.w;
      phival[idx] = pv;
      int k = static_cast<int>(std::floor(pv / (4.0 * eps)));
      k = std::max(0, std::min(count - 1, k));
      const double wk = phi.level_offset(fam.level_of(k));
      const double t = ref_sign * (f.w - wk);  // signed offset along grad phi
      const double kc = base.curvature_at(f.s);
      const double k_level = kc / (1.0 - wk * kc);
      const double k_rec = ref_sign * k_level;
      p.u[idx] =
          (t > stripe_offset_lower(eps, k_rec) && t < stripe_offset_upper(eps, k_rec))
              ? 1
              : 0;
    }

  trim_and_balance(p, phival, dom.delta());
  return out;
}

}  // namespace stripes
