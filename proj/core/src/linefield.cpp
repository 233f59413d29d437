#include "stripes/linefield.hpp"

#include <cmath>
#include <sstream>

namespace stripes {

LineField make_line_field(const Grid& grid, const std::function<Mat2(const Vec2&)>& f) {
  LineField lf;
  lf.grid = grid;
  lf.P.assign(grid.inside.size(), Mat2{});
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (grid.is_inside(i, j)) lf.P[grid.index(i, j)] = f(grid.center(i, j));
  return lf;
}

LineField canonical_field(const TubularDomain& dom, const Grid& grid,
                          ReferenceBoundary ref) {
  const double sgn = ref == ReferenceBoundary::inner ? -1.0 : 1.0;
  return make_line_field(grid, [&](const Vec2& x) {
    const CurveProjection f = dom.frame(x);
    const Vec2 grad = f.nu * sgn;      // unit gradient of the boundary distance
    const Vec2 e = rot90(grad);        // level-set tangent
    return Mat2::outer(e, e);
  });
}

Vec2 DivergenceField::sample(const Vec2& x) const {
  // Bilinear interpolation over cell centers, renormalized over valid cells.
  const double fx = (x.x - grid.x0) / grid.h - 0.5;
  const double fy = (x.y - grid.y0) / grid.h - 0.5;
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  const double tx = fx - i0;
  const double ty = fy - j0;
  Vec2 acc;
  double wsum = 0.0;
  for (int dj = 0; dj <= 1; ++dj) {
    for (int di = 0; di <= 1; ++di) {
      int i = i0 + di, j = j0 + dj;
      if (grid.periodic) {
        i = ((i % grid.nx) + grid.nx) % grid.nx;
        j = ((j % grid.ny) + grid.ny) % grid.ny;
      } else if (!grid.in_bounds(i, j)) {
        continue;
      }
      const int idx = grid.index(i, j);
      if (!grid.inside[idx] || !valid[idx]) continue;
      const double w = (di ? tx : 1.0 - tx) * (dj ? ty : 1.0 - ty);
      acc += v[idx] * w;
      wsum += w;
    }
  }
  return wsum > 1e-12 ? acc / wsum : Vec2{};
}

DivergenceField divergence(const LineField& field) {
  const Grid& g = field.grid;
  DivergenceField df;
  df.grid = g;
  df.v.assign(g.inside.size(), Vec2{});
  df.valid.assign(g.inside.size(), 0);
  const double h = g.h;

  // One axis of the row-wise divergence: d/dxi of the pair (P1i, P2i).
  auto axis_diff = [&](int i, int j, int di, int dj, bool& ok) -> std::array<double, 4> {
    int ip, jp, im, jm;
    const bool has_p = g.neighbor(i, j, di, dj, ip, jp) && g.inside[g.index(ip, jp)];
    const bool has_m = g.neighbor(i, j, -di, -dj, im, jm) && g.inside[g.index(im, jm)];
    const Mat2& c = field.P[g.index(i, j)];
    ok = true;
    if (has_p && has_m) {
      const Mat2& a = field.P[g.index(ip, jp)];
      const Mat2& b = field.P[g.index(im, jm)];
      return {(a.a11 - b.a11) / (2 * h), (a.a12 - b.a12) / (2 * h),
              (a.a21 - b.a21) / (2 * h), (a.a22 - b.a22) / (2 * h)};
    }
    if (has_p) {
      const Mat2& a = field.P[g.index(ip, jp)];
      return {(a.a11 - c.a11) / h, (a.a12 - c.a12) / h, (a.a21 - c.a21) / h,
              (a.a22 - c.a22) / h};
    }
    if (has_m) {
      const Mat2& b = field.P[g.index(im, jm)];
      return {(c.a11 - b.a11) / h, (c.a12 - b.a12) / h, (c.a21 - b.a21) / h,
              (c.a22 - b.a22) / h};
    }
    ok = false;
    return {0, 0, 0, 0};
  };

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int idx = g.index(i, j);
      if (!g.inside[idx]) continue;
      bool okx = false, oky = false;
      const auto dx = axis_diff(i, j, 1, 0, okx);  // d/dx of P columns
      const auto dy = axis_diff(i, j, 0, 1, oky);  // d/dy
      if (!okx || !oky) {
        ++df.excluded;
        continue;
      }
      // (div P)_i = d_x P_i1 + d_y P_i2
      df.v[idx] = Vec2{dx[0] + dy[1], dx[2] + dy[3]};
      df.valid[idx] = 1;
    }
  }
  return df;
}

K0Report check_admissible_field(const LineField& field, const TubularDomain* dom,
                                const K0Options& opts) {
  const Grid& g = field.grid;
  K0Report r;
  r.h = g.h;
  const DivergenceField df = divergence(field);

  std::vector<double> div_terms, pdivp_terms;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int idx = g.index(i, j);
      if (!g.inside[idx]) continue;
      ++r.inside_cells;
      const Mat2& P = field.P[idx];
      r.sym_max = std::max(r.sym_max, (P - P.transpose()).max_abs());
      r.idem_max = std::max(r.idem_max, (P * P - P).max_abs());
      r.trace_max = std::max(r.trace_max, std::fabs(P.trace() - 1.0));
      if (df.valid[idx]) {
        const Vec2 d = df.v[idx];
        div_terms.push_back(d.norm2() * g.h * g.h);
        const Vec2 pd = P * d;
        r.pdivp_max = std::max(r.pdivp_max, pd.norm());
        pdivp_terms.push_back(pd.norm2() * g.h * g.h);
      }

      // Boundary trace |P n| on cells touching the outside.
      if (!g.periodic) {
        bool boundary = false;
        for (const auto& [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          int ni, nj;
          if (!g.neighbor(i, j, di, dj, ni, nj) || !g.inside[g.index(ni, nj)]) {
            boundary = true;
            break;
          }
        }
        if (boundary) {
          ++r.boundary_cells;
          Vec2 n;
          if (dom) {
            const CurveProjection f = dom->frame(g.center(i, j));
            n = f.w >= 0.0 ? f.nu : -f.nu;  // toward the nearer tube boundary
          } else {
            // Mask-stencil estimate: mean direction toward outside neighbours.
            Vec2 acc;
            for (const auto& [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
              int ni, nj;
              if (!g.neighbor(i, j, di, dj, ni, nj) || !g.inside[g.index(ni, nj)])
                acc += Vec2{static_cast<double>(di), static_cast<double>(dj)};
            }
            n = acc.norm() > 0 ? normalized(acc) : Vec2{1, 0};
          }
          r.trace_bc_max = std::max(r.trace_bc_max, (P * n).norm());
        }
      }
    }
  }
  r.excluded_fraction =
      r.inside_cells > 0 ? static_cast<double>(df.excluded) / r.inside_cells : 0.0;
  r.div_l2_sq = pairwise_sum(div_terms);
  r.div_l2 = std::sqrt(r.div_l2_sq);
  r.pdivp_l2 = std::sqrt(pairwise_sum(pdivp_terms));

  std::ostringstream os;
  if (r.sym_max > opts.algebraic_tol)
    os << "symmetry residual " << r.sym_max << " > " << opts.algebraic_tol << "; ";
  if (r.idem_max > opts.algebraic_tol)
    os << "idempotency residual " << r.idem_max << " > " << opts.algebraic_tol << "; ";
  if (r.trace_max > opts.algebraic_tol)
    os << "trace residual " << r.trace_max << " > " << opts.algebraic_tol << "; ";
  if (r.pdivp_max > opts.pdivp_tol)
    os << "|P div P| max " << r.pdivp_max << " > " << opts.pdivp_tol << "; ";
  if (opts.trace_slope > 0.0 && r.trace_bc_max > opts.trace_slope * g.h)
    os << "boundary trace " << r.trace_bc_max << " > " << opts.trace_slope << "*h; ";
  r.violation = os.str();
  if (opts.strict && !r.pass())
    throw Error("line field fails admissibility: " + r.violation);
  return r;
}

LimitEnergyReport limit_energy(const LineField& field, const TubularDomain* dom,
                               const K0Options& opts) {
  LimitEnergyReport rep;
  rep.k0 = check_admissible_field(field, dom, opts);
  const Grid& g = field.grid;
  const DivergenceField df = divergence(field);
  std::vector<double> terms;
  terms.reserve(g.inside.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int idx = g.index(i, j);
      if (g.inside[idx] && df.valid[idx]) terms.push_back(df.v[idx].norm2() * g.h * g.h);
    }
  rep.value = 0.125 * pairwise_sum(terms);
  return rep;
}

}  // namespace stripes
