#include "stripes/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "stripes/netsimplex.hpp"

namespace stripes {

Vec2 TransportAtoms::min_image(const Vec2& d) const {
  if (!periodic) return d;
  return Vec2{d.x - period_x * std::round(d.x / period_x),
              d.y - period_y * std::round(d.y / period_y)};
}

double TransportAtoms::dist(const Vec2& a, const Vec2& b) const {
  return min_image(b - a).norm();
}

TransportAtoms atoms_from_pattern(const BinaryPattern& p) {
  const Grid& g = p.grid;
  TransportAtoms atoms;
  atoms.cell_mass = g.h * g.h;
  atoms.periodic = g.periodic;
  atoms.period_x = g.width();
  atoms.period_y = g.height();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int idx = g.index(i, j);
      if (!g.inside[idx]) continue;
      (p.u[idx] ? atoms.source : atoms.sink).push_back(g.center(i, j));
    }
  return atoms;
}

namespace {

// Uniform bucket grid over a point set; supports k-nearest queries and
// best-first extremum queries with per-bucket bounds, optionally with torus
// wrap-around.  Visited stamps let repeated queries reuse the cell table.
class PointBuckets {
 public:
  PointBuckets(const std::vector<Vec2>& pts, bool periodic, double px, double py)
      : pts_(pts), periodic_(periodic), px_(px), py_(py) {
    if (pts.empty()) throw Error("bucket grid needs at least one point");
    if (periodic_) {
      lo_ = Vec2{0.0, 0.0};
      hi_ = Vec2{px_, py_};
    } else {
      lo_ = hi_ = pts[0];
      for (const Vec2& p : pts) {
        lo_.x = std::min(lo_.x, p.x);
        lo_.y = std::min(lo_.y, p.y);
        hi_.x = std::max(hi_.x, p.x);
        hi_.y = std::max(hi_.y, p.y);
      }
    }
    const double area = std::max((hi_.x - lo_.x) * (hi_.y - lo_.y), 1e-12);
    cell_ = std::max(std::sqrt(4.0 * area / pts.size()), 1e-9);
    nx_ = std::max(1, static_cast<int>(std::ceil((hi_.x - lo_.x) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((hi_.y - lo_.y) / cell_)));
    if (periodic_) {
      cell_ = 0.0;  // recomputed per axis so cells tile exactly
      cw_ = px_ / nx_;
      ch_ = py_ / ny_;
    } else {
      cw_ = ch_ = cell_;
    }
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    std::vector<int> cnt(static_cast<std::size_t>(nx_) * ny_, 0);
    std::vector<int> cell_of(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cell_of[i] = cell_index(pts[i]);
      ++cnt[cell_of[i]];
    }
    for (std::size_t c = 0; c < cnt.size(); ++c) start_[c + 1] = start_[c] + cnt[c];
    items_.resize(pts.size());
    std::vector<int> cursor(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) items_[cursor[cell_of[i]]++] = i;
    stamp_.assign(cnt.size(), 0);
  }

  Vec2 min_image(const Vec2& d) const {
    if (!periodic_) return d;
    return Vec2{d.x - px_ * std::round(d.x / px_), d.y - py_ * std::round(d.y / py_)};
  }

  // k nearest points to z (ties broken by index), returned sorted by distance.
  void knn(const Vec2& z, int k, std::vector<std::pair<double, int>>& out) const {
    out.clear();
    visit_rings(z, [&](int c) {
      for (int s = start_[c]; s < start_[c + 1]; ++s) {
        const int i = items_[s];
        out.push_back({min_image(pts_[i] - z).norm(), i});
        std::push_heap(out.begin(), out.end());  // max-heap of the k best
        if (static_cast<int>(out.size()) > k) {
          std::pop_heap(out.begin(), out.end());
          out.pop_back();
        }
      }
      return static_cast<int>(out.size()) >= k ? out.front().first
                                               : std::numeric_limits<double>::infinity();
    });
    std::sort(out.begin(), out.end());
  }

  // Minimizes value[i] + |z - p_i| (a lower-bounded cone query).  bucket_base
  // must hold, per bucket, the minimum of value over its points.
  double cone_min(const Vec2& z, const std::vector<double>& value,
                  const std::vector<double>& bucket_min, int* argmin = nullptr) const {
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    visit_rings(z, [&](int c) {
      if (start_[c] < start_[c + 1] && bucket_min[c] + rect_dist(z, c) < best) {
        for (int s = start_[c]; s < start_[c + 1]; ++s) {
          const int i = items_[s];
          const double v = value[i] + min_image(pts_[i] - z).norm();
          if (v < best || (v == best && i < best_i)) {
            best = v;
            best_i = i;
          }
        }
      }
      return best - global_min_value_;  // radius beyond which no cone can win
    });
    if (argmin) *argmin = best_i;
    return best;
  }

  // The k smallest values of value[i] + |z - p_i|, sorted ascending.
  void cone_min_k(const Vec2& z, const std::vector<double>& value,
                  const std::vector<double>& bucket_min, int k,
                  std::vector<std::pair<double, int>>& out) const {
    out.clear();
    visit_rings(z, [&](int c) {
      const double have =
          static_cast<int>(out.size()) >= k ? out.front().first
                                            : std::numeric_limits<double>::infinity();
      if (start_[c] < start_[c + 1] && bucket_min[c] + rect_dist(z, c) < have) {
        for (int s = start_[c]; s < start_[c + 1]; ++s) {
          const int i = items_[s];
          out.push_back({value[i] + min_image(pts_[i] - z).norm(), i});
          std::push_heap(out.begin(), out.end());
          if (static_cast<int>(out.size()) > k) {
            std::pop_heap(out.begin(), out.end());
            out.pop_back();
          }
        }
      }
      return (static_cast<int>(out.size()) >= k
                  ? out.front().first
                  : std::numeric_limits<double>::infinity()) -
             global_min_value_;
    });
    std::sort(out.begin(), out.end());
  }

  void set_global_min_value(double v) { global_min_value_ = v; }

  // Per-bucket minimum of a value array (+inf on empty buckets).
  std::vector<double> bucket_minima(const std::vector<double>& value) const {
    std::vector<double> m(start_.size() - 1, std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c + 1 < start_.size(); ++c)
      for (int s = start_[c]; s < start_[c + 1]; ++s)
        m[c] = std::min(m[c], value[items_[s]]);
    return m;
  }

 private:
  int cell_index(const Vec2& p) const {
    int i, j;
    locate(p, i, j);
    return j * nx_ + i;
  }

  void locate(const Vec2& p, int& i, int& j) const {
    if (periodic_) {
      double fx = std::fmod(p.x, px_);
      double fy = std::fmod(p.y, py_);
      if (fx < 0) fx += px_;
      if (fy < 0) fy += py_;
      i = std::min(nx_ - 1, static_cast<int>(fx / cw_));
      j = std::min(ny_ - 1, static_cast<int>(fy / ch_));
    } else {
      i = std::max(0, std::min(nx_ - 1, static_cast<int>((p.x - lo_.x) / cw_)));
      j = std::max(0, std::min(ny_ - 1, static_cast<int>((p.y - lo_.y) / ch_)));
    }
  }

  // Exact distance from z to bucket c's rectangle (min-image aware).
  double rect_dist(const Vec2& z, int c) const {
    const int ci = c % nx_, cj = c / nx_;
    const double x0 = lo_.x + ci * cw_, x1 = x0 + cw_;
    const double y0 = lo_.y + cj * ch_, y1 = y0 + ch_;
    double dx, dy;
    if (periodic_) {
      // Nearest representative of the x-interval [x0, x1] to z.x.
      const double mx = z.x - px_ * std::round((z.x - 0.5 * (x0 + x1)) / px_);
      dx = mx < x0 ? x0 - mx : (mx > x1 ? mx - x1 : 0.0);
      const double my = z.y - py_ * std::round((z.y - 0.5 * (y0 + y1)) / py_);
      dy = my < y0 ? y0 - my : (my > y1 ? my - y1 : 0.0);
    } else {
      dx = z.x < x0 ? x0 - z.x : (z.x > x1 ? z.x - x1 : 0.0);
      dy = z.y < y0 ? y0 - z.y : (z.y > y1 ? z.y - y1 : 0.0);
    }
    return std::hypot(dx, dy);
  }

  // Expanding square rings around z's cell.  The callback inspects one cell
  // and returns the query's current cutoff radius: once the nearest possible
  // point of the next ring lies beyond it, the search stops.
  template <typename Visit>
  void visit_rings(const Vec2& z, Visit&& visit) const {
    ++epoch_;
    int ci, cj;
    locate(z, ci, cj);
    const int max_r = std::max(nx_, ny_) + 1;
    double cutoff = std::numeric_limits<double>::infinity();
    const double step = std::min(cw_, ch_);
    for (int r = 0; r <= max_r; ++r) {
      if (static_cast<double>(r - 1) * step > cutoff) break;
      bool any = false;
      auto handle = [&](int i, int j) {
        if (periodic_) {
          i = ((i % nx_) + nx_) % nx_;
          j = ((j % ny_) + ny_) % ny_;
        } else if (i < 0 || i >= nx_ || j < 0 || j >= ny_) {
          return;
        }
        const int c = j * nx_ + i;
        if (stamp_[c] == epoch_) return;
        stamp_[c] = epoch_;
        any = true;
        cutoff = std::min(cutoff, visit(c));
      };
      if (r == 0) {
        handle(ci, cj);
      } else {
        for (int d = -r; d <= r; ++d) {
          handle(ci + d, cj - r);
          handle(ci + d, cj + r);
        }
        for (int d = -r + 1; d <= r - 1; ++d) {
          handle(ci - r, cj + d);
          handle(ci + r, cj + d);
        }
      }
      if (!any && r > 0 && periodic_) break;  // every cell stamped
    }
  }

  const std::vector<Vec2>& pts_;
  bool periodic_ = false;
  double px_ = 0.0, py_ = 0.0;
  Vec2 lo_, hi_;
  double cell_ = 0.0, cw_ = 0.0, ch_ = 0.0;
  int nx_ = 1, ny_ = 1;
  std::vector<int> start_, items_;
  mutable std::vector<std::uint32_t> stamp_;
  mutable std::uint32_t epoch_ = 0;
  double global_min_value_ = 0.0;
};

struct ArcKey {
  std::size_t operator()(std::uint64_t k) const { return std::hash<std::uint64_t>{}(k); }
};

}  // namespace

TransportSolution exact_d1(const TransportAtoms& atoms, const ExactOptions& opts) {
  const int ns = static_cast<int>(atoms.source.size());
  const int nk = static_cast<int>(atoms.sink.size());
  if (ns == 0 || nk == 0) throw Error("transport needs atoms on both sides");
  if (ns != nk)
    throw Error("transport marginals are unbalanced: " + std::to_string(ns) +
                " sources vs " + std::to_string(nk) + " sinks");
  if (ns > opts.atom_cap)
    throw Error("instance exceeds the exact-solver cap (" + std::to_string(ns) + " > " +
                std::to_string(opts.atom_cap) + " atoms per side); use approx_d1");

  NetworkSimplex net(2 * ns);
  net.set_tolerance(opts.pivot_tol);
  for (int i = 0; i < ns; ++i) net.set_supply(i, 1.0);
  for (int j = 0; j < nk; ++j) net.set_supply(ns + j, -1.0);

  std::unordered_set<std::uint64_t, ArcKey> have;
  std::vector<int> arc_src, arc_snk, arc_id;
  auto add_arc = [&](int i, int j) {
    const std::uint64_t key = static_cast<std::uint64_t>(i) * nk + j;
    if (!have.insert(key).second) return;
    arc_src.push_back(i);
    arc_snk.push_back(j);
    arc_id.push_back(net.add_arc(i, ns + j, atoms.dist(atoms.source[i], atoms.sink[j])));
  };

  PointBuckets sink_buckets(atoms.sink, atoms.periodic, atoms.period_x, atoms.period_y);
  PointBuckets src_buckets(atoms.source, atoms.periodic, atoms.period_x, atoms.period_y);
  {
    std::vector<std::pair<double, int>> nn;
    for (int i = 0; i < ns; ++i) {
      sink_buckets.knn(atoms.source[i], opts.knn, nn);
      for (const auto& [d, j] : nn) add_arc(i, j);
    }
    for (int j = 0; j < nk; ++j) {
      src_buckets.knn(atoms.sink[j], opts.knn, nn);
      for (const auto& [d, i] : nn) add_arc(i, j);
    }
    // Feasibility backbone: a full (if far-fetched) pairing so the candidate
    // graph always supports a balanced flow.
    for (int i = 0; i < ns; ++i) add_arc(i, i);
  }

  TransportSolution sol;
  sol.method = "exact";
  const double verify_tol = 1e-9;
  bool certified = false;
  std::vector<std::pair<double, int>> cand;
  for (int round = 0; round <= opts.max_refine_rounds; ++round) {
    const NetworkSimplex::Status st = net.solve();
    if (st == NetworkSimplex::Status::infeasible)
      throw Error("transport solve reported infeasible despite balanced supplies");
    if (st == NetworkSimplex::Status::iteration_limit)
      throw Error("transport solve hit its pivot limit");
    sol.refine_rounds = round;

    // Certificate scan: price every absent arc via the sink-side cone query.
    // Arc (i, j) is violated iff dist + phi_snk[j]... no wait: reduced cost
    // c_ij + pi_i - pi_j < 0  <=>  c_ij - pi_j < -pi_i.
    std::vector<double> neg_pi_snk(nk);
    double min_val = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nk; ++j) {
      neg_pi_snk[j] = -net.potential(ns + j);
      min_val = std::min(min_val, neg_pi_snk[j]);
    }
    sink_buckets.set_global_min_value(min_val);
    const std::vector<double> bmin = sink_buckets.bucket_minima(neg_pi_snk);
    long violated = 0;
    for (int i = 0; i < ns; ++i) {
      const double target = -net.potential(i) - verify_tol;
      sink_buckets.cone_min_k(atoms.source[i], neg_pi_snk, bmin, opts.add_per_node,
                              cand);
      for (const auto& [v, j] : cand)
        if (v < target) {
          add_arc(i, j);
          ++violated;
        }
    }
    if (violated == 0) {
      certified = true;
      break;
    }
    if (round == opts.max_refine_rounds - 1 && opts.dense_fallback && ns <= 4096) {
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nk; ++j) add_arc(i, j);
    }
  }
  if (!certified)
    throw Error("transport optimality could not be certified within the refinement "
                "budget; raise knn or max_refine_rounds");

  const double mass = atoms.cell_mass;
  sol.cost = net.total_cost() * mass;
  sol.cost_lower = sol.cost_upper = sol.cost;
  sol.pivots = net.pivots();
  sol.arcs_used = static_cast<int>(arc_id.size());

  sol.phi_src.resize(ns);
  sol.phi_snk.resize(nk);
  for (int i = 0; i < ns; ++i) sol.phi_src[i] = -net.potential(i);
  for (int j = 0; j < nk; ++j) sol.phi_snk[j] = -net.potential(ns + j);

  std::vector<double> row_mass(ns, 0.0), col_mass(nk, 0.0);
  for (std::size_t a = 0; a < arc_id.size(); ++a) {
    const double f = net.flow(arc_id[a]);
    if (f > 1e-12) {
      sol.plan.push_back({arc_src[a], arc_snk[a], f * mass});
      row_mass[arc_src[a]] += f;
      col_mass[arc_snk[a]] += f;
    }
  }
  double marg = 0.0;
  for (int i = 0; i < ns; ++i) marg = std::max(marg, std::fabs(row_mass[i] - 1.0));
  for (int j = 0; j < nk; ++j) marg = std::max(marg, std::fabs(col_mass[j] - 1.0));
  sol.marginal_error = marg * mass;

  std::vector<double> dual_terms;
  dual_terms.reserve(ns + nk);
  for (int i = 0; i < ns; ++i) dual_terms.push_back(sol.phi_src[i] * mass);
  for (int j = 0; j < nk; ++j) dual_terms.push_back(-sol.phi_snk[j] * mass);
  sol.dual_value = pairwise_sum(dual_terms);
  sol.duality_gap_rel =
      std::fabs(sol.cost - sol.dual_value) / std::max(sol.cost, 1e-300);
  return sol;
}

TransportSolution approx_d1(const TransportAtoms& atoms, const EntropicOptions& opts) {
  const int ns = static_cast<int>(atoms.source.size());
  const int nk = static_cast<int>(atoms.sink.size());
  if (ns == 0 || nk == 0) throw Error("transport needs atoms on both sides");
  if (ns != nk)
    throw Error("transport marginals are unbalanced: " + std::to_string(ns) +
                " sources vs " + std::to_string(nk) + " sinks");

  PointBuckets sink_buckets(atoms.sink, atoms.periodic, atoms.period_x, atoms.period_y);
  PointBuckets src_buckets(atoms.source, atoms.periodic, atoms.period_x, atoms.period_y);

  // Sparse support: nearest sinks per source and vice versa, stored CSR by
  // source row in deterministic (i, j) order.
  std::vector<std::pair<int, int>> pairs;
  {
    std::vector<std::pair<double, int>> nn;
    const int k = std::max(1, opts.knn);
    for (int i = 0; i < ns; ++i) {
      sink_buckets.knn(atoms.source[i], k, nn);
      for (const auto& [d, j] : nn) pairs.push_back({i, j});
    }
    for (int j = 0; j < nk; ++j) {
      src_buckets.knn(atoms.sink[j], k, nn);
      for (const auto& [d, i] : nn) pairs.push_back({i, j});
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  }
  const int m = static_cast<int>(pairs.size());
  std::vector<int> row_start(ns + 1, 0), col_of(m);
  std::vector<double> c_arc(m);
  double mean_nn = 0.0;
  {
    for (const auto& [i, j] : pairs) ++row_start[i + 1];
    for (int i = 0; i < ns; ++i) row_start[i + 1] += row_start[i];
    for (int a = 0; a < m; ++a) {
      col_of[a] = pairs[a].second;
      c_arc[a] = atoms.dist(atoms.source[pairs[a].first], atoms.sink[pairs[a].second]);
    }
    std::vector<std::pair<double, int>> nn;
    for (int i = 0; i < ns; ++i) {
      sink_buckets.knn(atoms.source[i], 1, nn);
      mean_nn += nn[0].first;
    }
    mean_nn /= ns;
  }
  std::vector<int> col_start(nk + 1, 0), arc_of_col(m);
  {
    for (int a = 0; a < m; ++a) ++col_start[col_of[a] + 1];
    for (int j = 0; j < nk; ++j) col_start[j + 1] += col_start[j];
    std::vector<int> cur(col_start.begin(), col_start.end() - 1);
    for (int a = 0; a < m; ++a) arc_of_col[cur[col_of[a]]++] = a;
  }

  const double reg = opts.reg > 0.0 ? opts.reg : std::max(0.02 * mean_nn, 1e-12);

  // Log-domain Sinkhorn restricted to the sparse support, uniform marginals
  // 1/n folded in as log-weights.  The regularizer anneals down to its target
  // so that small targets still converge within the iteration budget.
  const double log_marg = -std::log(static_cast<double>(ns));
  std::vector<double> f(ns, 0.0), g(nk, 0.0);
  std::vector<double> scratch(std::max(ns, nk));
  auto lse = [](const double* x, int n) {
    double hi = x[0];
    for (int t = 1; t < n; ++t) hi = std::max(hi, x[t]);
    double s = 0.0;
    for (int t = 0; t < n; ++t) s += std::exp(x[t] - hi);
    return hi + std::log(s);
  };
  int iters_left = opts.max_iter;
  std::vector<double> stages;
  for (double r = std::max(reg, 4.0 * mean_nn); r > reg; r *= 0.5) stages.push_back(r);
  std::reverse(stages.begin(), stages.end());  // coarse first once popped
  stages.insert(stages.begin(), reg);
  while (stages.size() > 1 || iters_left > 0) {
    const double r = stages.back();
    const bool last = stages.size() == 1;
    const double stage_tol = last ? opts.tol : std::max(opts.tol, 0.05 * r);
    const int stage_cap = last ? iters_left : std::min(iters_left, 250);
    double err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < stage_cap && err > stage_tol; ++it, --iters_left) {
      for (int i = 0; i < ns; ++i) {
        int t = 0;
        for (int a = row_start[i]; a < row_start[i + 1]; ++a, ++t)
          scratch[t] = (g[col_of[a]] - c_arc[a]) / r + log_marg;
        if (t > 0) f[i] = -r * lse(scratch.data(), t);
      }
      err = 0.0;
      for (int j = 0; j < nk; ++j) {
        int t = 0;
        for (int s = col_start[j]; s < col_start[j + 1]; ++s, ++t) {
          const int a = arc_of_col[s];
          scratch[t] = (f[pairs[a].first] - c_arc[a]) / r + log_marg;
        }
        if (t == 0) continue;
        const double new_g = -r * lse(scratch.data(), t);
        err = std::max(err, std::fabs(new_g - g[j]));
        g[j] = new_g;
      }
    }
    if (last) break;
    stages.pop_back();
  }

  // Certified lower bound: exact global c-transforms make (u, v) feasible for
  // every source-sink pair, not just the sparse support.
  std::vector<double> u(ns), v(nk), neg_g(nk);
  for (int j = 0; j < nk; ++j) neg_g[j] = -g[j];
  {
    double mn = std::numeric_limits<double>::infinity();
    for (const double x : neg_g) mn = std::min(mn, x);
    sink_buckets.set_global_min_value(mn);
    const std::vector<double> bmin = sink_buckets.bucket_minima(neg_g);
    for (int i = 0; i < ns; ++i)
      u[i] = sink_buckets.cone_min(atoms.source[i], neg_g, bmin);
  }
  std::vector<double> neg_u(ns);
  for (int i = 0; i < ns; ++i) neg_u[i] = -u[i];
  {
    double mn = std::numeric_limits<double>::infinity();
    for (const double x : neg_u) mn = std::min(mn, x);
    src_buckets.set_global_min_value(mn);
    const std::vector<double> bmin = src_buckets.bucket_minima(neg_u);
    for (int j = 0; j < nk; ++j)
      v[j] = src_buckets.cone_min(atoms.sink[j], neg_u, bmin);
  }
  const double mass = atoms.cell_mass;
  std::vector<double> dual_terms;
  dual_terms.reserve(ns + nk);
  for (int i = 0; i < ns; ++i) dual_terms.push_back(u[i] * mass);
  for (int j = 0; j < nk; ++j) dual_terms.push_back(v[j] * mass);
  const double lower = pairwise_sum(dual_terms);

  // Feasible plan: entropic weights on the support, rows then columns scaled
  // down to their targets, leftovers shipped by a greedy pairing.  Scaling
  // happens in the log domain: entries stay bounded by the target mass even
  // when the potentials are far from the final regularizer (no overflow).
  std::vector<double> lp(m);
  const double log_target = log_marg;  // log(1/n)
  for (int a = 0; a < m; ++a)
    lp[a] = (f[pairs[a].first] + g[col_of[a]] - c_arc[a]) / reg + 2 * log_marg;
  auto log_scale = [&](auto arcs_of, int first, int last) {
    double hi = -std::numeric_limits<double>::infinity();
    for (int t = first; t < last; ++t) hi = std::max(hi, lp[arcs_of(t)]);
    if (hi == -std::numeric_limits<double>::infinity()) return;
    double s = 0.0;
    for (int t = first; t < last; ++t) s += std::exp(lp[arcs_of(t)] - hi);
    const double lse = hi + std::log(s);
    if (lse > log_target)
      for (int t = first; t < last; ++t) lp[arcs_of(t)] += log_target - lse;
  };
  for (int i = 0; i < ns; ++i)
    log_scale([](int t) { return t; }, row_start[i], row_start[i + 1]);
  for (int j = 0; j < nk; ++j)
    log_scale([&](int t) { return arc_of_col[t]; }, col_start[j], col_start[j + 1]);
  std::vector<double> P(m);
  const double target = 1.0 / ns;
  for (int a = 0; a < m; ++a) P[a] = std::exp(lp[a]);
  std::vector<double> row_res(ns, target), col_res(nk, target);
  for (int a = 0; a < m; ++a) {
    row_res[pairs[a].first] -= P[a];
    col_res[col_of[a]] -= P[a];
  }
  std::vector<double> upper_terms;
  upper_terms.reserve(m + ns);
  for (int a = 0; a < m; ++a)
    if (P[a] > 0.0) upper_terms.push_back(P[a] * c_arc[a]);
  double unshipped = 0.0;
  {
    // Leftovers are paired in spatial (y, x) order so that the completion
    // stays local when the support plan is already nearly feasible.
    auto by_pos = [](const std::vector<Vec2>& p) {
      return [&p](int a, int b) {
        return std::tie(p[a].y, p[a].x, a) < std::tie(p[b].y, p[b].x, b);
      };
    };
    std::vector<int> rows, cols;
    for (int i = 0; i < ns; ++i)
      if (row_res[i] > 1e-18) rows.push_back(i);
    for (int j = 0; j < nk; ++j)
      if (col_res[j] > 1e-18) cols.push_back(j);
    std::sort(rows.begin(), rows.end(), by_pos(atoms.source));
    std::sort(cols.begin(), cols.end(), by_pos(atoms.sink));
    std::size_t t = 0;
    for (const int i : rows) {
      double need = row_res[i];
      while (need > 1e-18) {
        while (t < cols.size() && col_res[cols[t]] <= 1e-18) ++t;
        if (t >= cols.size()) break;
        const int j = cols[t];
        const double take = std::min(need, col_res[j]);
        upper_terms.push_back(take * atoms.dist(atoms.source[i], atoms.sink[j]));
        col_res[j] -= take;
        need -= take;
      }
      unshipped = std::max(unshipped, std::max(need, 0.0));
    }
    for (; t < cols.size(); ++t)
      unshipped = std::max(unshipped, std::max(col_res[cols[t]], 0.0));
  }
  const double total_mass = mass * ns;
  const double upper = pairwise_sum(upper_terms) * total_mass;

  TransportSolution sol;
  sol.method = "entropic";
  sol.arcs_used = m;
  sol.cost_lower = lower;
  sol.cost_upper = upper;
  sol.cost = 0.5 * (lower + upper);
  sol.phi_src = std::move(u);
  sol.phi_snk.resize(nk);
  for (int j = 0; j < nk; ++j) sol.phi_snk[j] = -v[j];
  sol.dual_value = lower;
  sol.duality_gap_rel = (upper - lower) / std::max(std::fabs(upper), 1e-300);

  // The rounded plan (scaled support + greedy shipments) misses its marginals
  // only by whatever the greedy stage could not pair off.
  sol.marginal_error = unshipped * total_mass;

  std::vector<std::pair<double, int>> top;
  for (int i = 0; i < ns; ++i) {
    top.clear();
    for (int a = row_start[i]; a < row_start[i + 1]; ++a)
      if (P[a] > 0.0) top.push_back({P[a], col_of[a]});
    std::sort(top.begin(), top.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int t = 0; t < std::min<int>(opts.plan_top_k, static_cast<int>(top.size()));
         ++t)
      sol.plan.push_back({i, top[t].second, top[t].first * total_mass});
  }
  return sol;
}

struct KantorovichPotential::Impl {
  std::vector<Vec2> src_pts, snk_pts;
  std::vector<double> neg_phi_src;  // cone values for the lower envelope
  std::vector<double> phi_snk;
  std::unique_ptr<PointBuckets> src_buckets, snk_buckets;
  std::vector<double> src_bucket_min, snk_bucket_min;
};

KantorovichPotential::KantorovichPotential(const TransportAtoms& atoms,
                                           const TransportSolution& sol)
    : impl_(new Impl) {
  if (sol.phi_src.size() != atoms.source.size() ||
      sol.phi_snk.size() != atoms.sink.size())
    throw Error("potential sizes do not match the atom sets");
  impl_->src_pts = atoms.source;
  impl_->snk_pts = atoms.sink;
  n_src_ = static_cast<int>(atoms.source.size());

  // Lower envelope max_i(phi_src_i - d) == -min_i(-phi_src_i + d).
  impl_->neg_phi_src.resize(sol.phi_src.size());
  for (std::size_t i = 0; i < sol.phi_src.size(); ++i)
    impl_->neg_phi_src[i] = -sol.phi_src[i];
  impl_->phi_snk = sol.phi_snk;

  impl_->src_buckets = std::make_unique<PointBuckets>(
      impl_->src_pts, atoms.periodic, atoms.period_x, atoms.period_y);
  impl_->snk_buckets = std::make_unique<PointBuckets>(
      impl_->snk_pts, atoms.periodic, atoms.period_x, atoms.period_y);
  impl_->src_bucket_min = impl_->src_buckets->bucket_minima(impl_->neg_phi_src);
  impl_->snk_bucket_min = impl_->snk_buckets->bucket_minima(impl_->phi_snk);
  double mn = std::numeric_limits<double>::infinity();
  for (const double v : impl_->neg_phi_src) mn = std::min(mn, v);
  impl_->src_buckets->set_global_min_value(mn);
  mn = std::numeric_limits<double>::infinity();
  for (const double v : impl_->phi_snk) mn = std::min(mn, v);
  impl_->snk_buckets->set_global_min_value(mn);

  for (std::size_t i = 0; i < impl_->src_pts.size(); ++i) {
    envelope_mismatch_ = std::max(
        envelope_mismatch_, std::fabs(eval_lower(impl_->src_pts[i]) - sol.phi_src[i]));
    envelope_mismatch_ = std::max(
        envelope_mismatch_, std::fabs(eval_upper(impl_->src_pts[i]) - sol.phi_src[i]));
  }
  for (std::size_t j = 0; j < impl_->snk_pts.size(); ++j) {
    envelope_mismatch_ = std::max(
        envelope_mismatch_, std::fabs(eval_lower(impl_->snk_pts[j]) - sol.phi_snk[j]));
    envelope_mismatch_ = std::max(
        envelope_mismatch_, std::fabs(eval_upper(impl_->snk_pts[j]) - sol.phi_snk[j]));
  }
  for (const PlanEntry& e : sol.plan) {
    const double c = atoms.dist(atoms.source[e.src], atoms.sink[e.snk]);
    slackness_max_ = std::max(
        slackness_max_, std::fabs(c - (sol.phi_src[e.src] - sol.phi_snk[e.snk])));
  }
}

KantorovichPotential::~KantorovichPotential() = default;
KantorovichPotential::KantorovichPotential(KantorovichPotential&&) noexcept = default;
KantorovichPotential& KantorovichPotential::operator=(KantorovichPotential&&) noexcept =
    default;

double KantorovichPotential::eval_lower(const Vec2& z) const {
  return -impl_->src_buckets->cone_min(z, impl_->neg_phi_src, impl_->src_bucket_min);
}

double KantorovichPotential::eval_upper(const Vec2& z) const {
  return impl_->snk_buckets->cone_min(z, impl_->phi_snk, impl_->snk_bucket_min);
}

double periodic_line_transport(std::vector<double> src, std::vector<double> snk,
                               double period, double atom_mass) {
  if (period <= 0.0) throw Error("line transport needs a positive period");
  if (src.empty() || src.size() != snk.size())
    throw Error("line transport needs equally many sources and sinks");
  struct Event {
    double x;
    double charge;
  };
  std::vector<Event> events;
  events.reserve(src.size() + snk.size());
  auto fold = [&](double x) {
    const double f = std::fmod(x, period);
    return f < 0.0 ? f + period : f;
  };
  for (const double x : src) events.push_back({fold(x), atom_mass});
  for (const double x : snk) events.push_back({fold(x), -atom_mass});
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.x < b.x; });

  // Piecewise-constant cumulative charge; the optimal constant offset is the
  // length-weighted median of its values.
  struct Piece {
    double value;
    double len;
  };
  std::vector<Piece> pieces;
  double acc = 0.0;
  for (std::size_t e = 0; e < events.size(); ++e) {
    acc += events[e].charge;
    const double x_next = e + 1 < events.size() ? events[e + 1].x : period + events[0].x;
    const double len = x_next - events[e].x;
    if (len > 0.0) pieces.push_back({acc, len});
  }
  std::vector<Piece> sorted = pieces;
  std::sort(sorted.begin(), sorted.end(),
            [](const Piece& a, const Piece& b) { return a.value < b.value; });
  double half = 0.0;
  for (const Piece& p : sorted) half += p.len;
  half *= 0.5;
  double run = 0.0, median = sorted.back().value;
  for (const Piece& p : sorted) {
    run += p.len;
    if (run >= half) {
      median = p.value;
      break;
    }
  }
  std::vector<double> terms;
  terms.reserve(pieces.size());
  for (const Piece& p : pieces) terms.push_back(std::fabs(p.value - median) * p.len);
  return pairwise_sum(terms);
}

}  // namespace stripes
