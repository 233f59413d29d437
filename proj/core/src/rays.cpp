#include "stripes/rays.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stripes/common.hpp"

namespace stripes {

double mass_coordinate(const RayFrame& f, double t) {
  return t * f.sin_beta - 0.5 * t * t * f.alpha_prime;
}

double inverse_mass_coordinate(const RayFrame& f, double m) {
  const double sb = f.sin_beta;
  const double disc = 1.0 - 2.0 * f.alpha_prime * m / (sb * sb);
  if (disc < 0.0)
    throw Error("mass coordinate " + format_double(m) +
                " outside the ray chart (discriminant " + format_double(disc) + ")");
  return 2.0 * m / (sb * (1.0 + std::sqrt(disc)));
}

namespace {

// One resolved sampling site on a loop before the ray frame is attached.
struct Site {
  Vec2 p;
  Vec2 tau;
  double s = 0.0;
  double ds = 0.0;
};

std::vector<Site> sample_loop(const InterfaceLoop& loop, double spacing) {
  const int n = loop.segments();
  std::vector<Site> sites;
  if (n < 2) return sites;
  std::vector<double> seg_len(n), s_at(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    seg_len[i] = loop.edge(i).norm();
    s_at[i + 1] = s_at[i] + seg_len[i];
  }
  const double L = s_at[n];
  if (L <= 0.0) return sites;

  if (spacing <= 0.0) {
    // One site per vertex; tangent from the adjacent edge pair.
    sites.resize(n);
    for (int i = 0; i < n; ++i) {
      const Vec2 e_prev = loop.edge((i + n - 1) % n);
      const Vec2 e_next = loop.edge(i);
      Vec2 t = e_prev / std::max(seg_len[(i + n - 1) % n], 1e-300) +
               e_next / std::max(seg_len[i], 1e-300);
      if (t.norm() < 1e-12) t = e_next;  // hairpin: fall back to one side
      sites[i] = {loop.pts[i], normalized(t), s_at[i],
                  0.5 * (seg_len[(i + n - 1) % n] + seg_len[i])};
    }
    return sites;
  }

  const int ns = std::max(4, static_cast<int>(std::llround(L / spacing)));
  const double ds = L / ns;
  sites.resize(ns);
  int seg = 0;
  for (int i = 0; i < ns; ++i) {
    const double s = (i + 0.5) * ds;
    while (seg + 1 < n && s_at[seg + 1] < s) ++seg;
    const double local = (s - s_at[seg]) / std::max(seg_len[seg], 1e-300);
    sites[i] = {loop.pts[seg] + loop.edge(seg) * local,
                normalized(loop.edge(seg)), s, ds};
  }
  return sites;
}

// Weighted least-squares linear fit of phi over a two-ring stencil; returns
// the gradient estimate.  The quartic weights keep the fit local while
// smoothing over the piecewise-linear kinks of the potential envelopes.
Vec2 wls_gradient(const KantorovichPotential& phi, const Vec2& p, double radius) {
  double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
  double b0 = 0, b1 = 0, b2 = 0;
  auto add = [&](const Vec2& d, double w) {
    const double v = phi.eval(p + d);
    a00 += w;
    a01 += w * d.x;
    a02 += w * d.y;
    a11 += w * d.x * d.x;
    a12 += w * d.x * d.y;
    a22 += w * d.y * d.y;
    b0 += w * v;
    b1 += w * v * d.x;
    b2 += w * v * d.y;
  };
  add({0.0, 0.0}, 1.0);
  for (int ring = 1; ring <= 2; ++ring) {
    const double r = radius * ring / 3.0;
    const double w = (ring == 1) ? 0.79 : 0.31;  // (1 - (r/R)^2)^2
    for (int k = 0; k < 8; ++k) {
      const double ang = (k + 0.5 * (ring - 1)) * kPi / 4.0;
      add({r * std::cos(ang), r * std::sin(ang)}, w);
    }
  }
  // 3x3 symmetric solve by elimination (matrix is well conditioned: the
  // stencil is fixed and isotropic).
  double m[3][4] = {{a00, a01, a02, b0}, {a01, a11, a12, b1}, {a02, a12, a22, b2}};
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int cc = c; cc < 4; ++cc) m[r][cc] -= f * m[c][cc];
    }
  }
  const double gy = m[2][3] / m[2][2];
  const double gx = (m[1][3] - m[1][2] * gy) / m[1][1];
  return {gx, gy};
}

}  // namespace

RayField extract_rays(const KantorovichPotential& phi, const InterfaceSet& interfaces,
                      const PhaseMembership& in_phase, double eps,
                      const RayOptions& opts) {
  if (eps <= 0.0) throw Error("extract_rays: eps must be positive");
  const double fit_radius = opts.fit_radius > 0.0 ? opts.fit_radius : 3.0 * opts.grid_h;
  if (fit_radius <= 0.0)
    throw Error("extract_rays: fit_radius (or grid_h for its default) required");
  const double step = opts.march_step > 0.0 ? opts.march_step : 0.5 * opts.grid_h;
  if (step <= 0.0)
    throw Error("extract_rays: march_step (or grid_h for its default) required");
  const double max_len = opts.max_ray_length > 0.0 ? opts.max_ray_length : 8.0 * eps;
  const double len_floor = opts.grid_h > 0.0 ? 3.0 * opts.grid_h : fit_radius;

  RayField out;
  SumAccumulator total_arc, excluded_arc;

  for (std::size_t li = 0; li < interfaces.loops.size(); ++li) {
    const std::vector<Site> sites = sample_loop(interfaces.loops[li], opts.sample_spacing);
    const int n = static_cast<int>(sites.size());
    if (n == 0) continue;
    const double L = interfaces.loops[li].length();

    // Frame directions and the unwrapped ray angle along the loop.
    std::vector<RaySample> rs(n);
    std::vector<double> alpha_raw(n);
    for (int k = 0; k < n; ++k) {
      RaySample& r = rs[k];
      r.p = sites[k].p;
      r.loop = static_cast<int>(li);
      r.s = sites[k].s;
      r.ds = sites[k].ds;
      const Vec2 grad = wls_gradient(phi, r.p, fit_radius);
      r.grad_norm = grad.norm();
      if (std::fabs(r.grad_norm - 1.0) > opts.slope_tol) r.excluded |= kRaySlope;
      r.theta = r.grad_norm > 1e-12 ? grad / r.grad_norm : Vec2{1.0, 0.0};
      alpha_raw[k] = std::atan2(r.theta.y, r.theta.x);
    }
    std::vector<double> alpha(n);
    alpha[0] = alpha_raw[0];
    for (int k = 1; k < n; ++k)
      alpha[k] = alpha[k - 1] + wrap_angle(alpha_raw[k] - alpha_raw[k - 1]);
    double winding = alpha[n - 1] - alpha[0];
    winding += wrap_angle(alpha_raw[0] - alpha_raw[n - 1]);  // closing step

    // Half-window of the periodic local fits, in samples.  The marched
    // extents and the crossing angle inherit grid-scale noise from the
    // discrete potential; the energy terms square those quantities, so
    // unsmoothed data biases them upward by arc * variance / eps^3.
    const double smooth_arc = opts.smoothing_arc > 0.0 ? opts.smoothing_arc : 0.5 * eps;
    const double ds_mean = L / n;
    int w = std::max(std::max(1, opts.angle_window),
                     static_cast<int>(std::llround(smooth_arc / ds_mean)));
    w = std::min(w, (n - 1) / 2);

    // Windowed least-squares fit of the unwrapped ray angle, loop-periodic in
    // both s and the angle; samples with an off-slope gradient are left out.
    // The fit value replaces the raw angle (pointwise gradient noise enters
    // the crossing angle quadratically, so averaging the angle -- not its
    // cosine -- is what removes the bias), and the fit slope is d(alpha)/ds.
    for (int k = 0; k < n; ++k) {
      double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
      int cnt = 0;
      for (int d = -w; d <= w; ++d) {
        int j = k + d;
        double s_j, a_j;
        if (j < 0) {
          if (rs[j + n].excluded) continue;
          s_j = sites[j + n].s - L;
          a_j = alpha[j + n] - winding;
        } else if (j >= n) {
          if (rs[j - n].excluded) continue;
          s_j = sites[j - n].s + L;
          a_j = alpha[j - n] + winding;
        } else {
          if (rs[j].excluded) continue;
          s_j = sites[j].s;
          a_j = alpha[j];
        }
        sx += s_j;
        sy += a_j;
        sxx += s_j * s_j;
        sxy += s_j * a_j;
        ++cnt;
      }
      const double denom = cnt * sxx - sx * sx;
      const double slope = denom > 1e-300 ? (cnt * sxy - sx * sy) / denom : 0.0;

      RaySample& r = rs[k];
      if (cnt > 0) {
        r.alpha = (sy + slope * (cnt * sites[k].s - sx)) / cnt;
        r.theta = {std::cos(r.alpha), std::sin(r.alpha)};
      } else {
        r.alpha = alpha[k];
      }
      const double det = cross(sites[k].tau, r.theta);
      r.alpha_prime = det >= 0.0 ? slope : -slope;
      r.sin_beta = std::min(1.0, std::fabs(det));
      if (r.sin_beta < opts.sin_beta_min) r.excluded |= kRayAngle;
    }

    // Periodic moving average over the same window, skipping flagged samples.
    auto smooth = [&](const std::vector<double>& v, const auto& bad) {
      std::vector<double> out_v(v);
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        int cnt = 0;
        for (int d = -w; d <= w; ++d) {
          const int j = (k + d % n + n) % n;
          if (bad(j)) continue;
          sum += v[j];
          ++cnt;
        }
        if (cnt > 0) out_v[k] = sum / cnt;
      }
      return out_v;
    };

    // Extents: unit-slope marching with bisection refinement (raw, per
    // sample), the periodic fit, then the in-phase cap for l+.
    std::vector<double> ell_p_raw(n, 0.0), ell_m_raw(n, 0.0);
    for (int k = 0; k < n; ++k) {
      RaySample& r = rs[k];
      const double phi0 = phi.eval(r.p);
      auto band = [&](double t) {
        return std::max(opts.march_tol * (std::fabs(t) + len_floor),
                        0.2 * opts.grid_h);
      };
      // Walks outward tracking f(t) = phi - phi0, which ascends at unit slope
      // until either the slope ridge (f turns to slope -1: drop from the
      // running maximum grows at half the rate of |f - t|) or a sideways exit
      // of the unit-slope region (f stalls without dropping).  A discrete
      // potential chamfers the ridge corner at the atom scale, so the ridge
      // position comes from intersecting the ideal branches: on the clean
      // descending branch f(t) = 2 t_r - t.
      auto march = [&](double dir) {
        const double drop_needed = std::max(2.0 * step, opts.grid_h);
        const double dome = 4.0 * std::max(step, opts.grid_h);
        double f_best = 0.0, t_best = 0.0, t_side = -1.0;
        auto sideways = [&](double t_s) {
          auto ok = [&](double tt) {
            const double err =
                std::fabs(phi.eval(r.p + r.theta * (dir * tt)) - phi0 - tt);
            return err <= band(tt);
          };
          double lo = std::max(t_s - step, 0.0), hi = t_s;
          while (hi - lo > opts.bisect_tol) (ok(0.5 * (lo + hi)) ? lo : hi) = 0.5 * (lo + hi);
          return std::max(lo - 0.5 * band(lo), 0.0);
        };
        for (double t = step; t <= max_len + 0.5 * step; t += step) {
          const double f = phi.eval(r.p + r.theta * (dir * t)) - phi0;
          if (f > f_best) {
            f_best = f;
            t_best = t;
          }
          const double drop = f_best - f;
          if (drop >= drop_needed) {
            // Evaluate the descending branch well past the apex: the envelope
            // of a discrete potential sags below the ideal tent in a dome a
            // few atoms wide around the ridge, but is tight on the branches.
            const double t2 = t + 2.5 * opts.grid_h;
            const double f2 = phi.eval(r.p + r.theta * (dir * t2)) - phi0;
            const double f3 = phi.eval(r.p + r.theta * (dir * (t2 + step))) - phi0;
            if (std::fabs((f3 - f2) + step) <= 0.25 * step)
              return std::min(std::max(0.5 * (f2 + t2), 0.0), max_len);
            return t_best;  // irregular turn: keep the running maximum
          }
          // Leaving the acceptance band without a drop is either a sideways
          // exit of the unit-slope region or the leading sag of an apex dome;
          // give the turn a few more atoms to materialize before concluding.
          if (t_side < 0.0 && std::fabs(f - t) > band(t)) t_side = t;
          if (t_side >= 0.0 && t - t_side > dome) return sideways(t_side);
        }
        return t_side >= 0.0 ? sideways(t_side) : max_len;
      };
      ell_p_raw[k] = march(1.0);
      ell_m_raw[k] = -march(-1.0);
    }
    auto frame_bad = [&](int j) {
      return (rs[j].excluded & (kRaySlope | kRayAngle)) != 0;
    };
    const auto ell_p = smooth(ell_p_raw, frame_bad);
    const auto ell_m = smooth(ell_m_raw, frame_bad);

    for (int k = 0; k < n; ++k) {
      RaySample& r = rs[k];
      r.ell_plus = ell_p[k];
      r.ell_minus = ell_m[k];

      double lp = r.ell_plus;
      for (double t = step; t <= r.ell_plus + 0.5 * step; t += step) {
        const double tt = std::min(t, r.ell_plus);
        if (!in_phase(r.p + r.theta * tt)) {
          double lo = std::max(tt - step, 0.0), hi = tt;
          while (hi - lo > opts.bisect_tol)
            (in_phase(r.p + r.theta * (0.5 * (lo + hi))) ? lo : hi) = 0.5 * (lo + hi);
          lp = lo;
          break;
        }
        if (tt == r.ell_plus) break;
      }
      r.l_plus = lp;
      if (r.l_plus < 0.25 * step) r.excluded |= kRayEmpty;

      // Chart validity on the used interval: m strictly increasing up to
      // l_plus and the mirrored coordinate t(-M) defined.
      r.M = mass_coordinate(r.frame(), r.l_plus);
      const double sb = r.sin_beta;
      if (sb - r.l_plus * r.alpha_prime <= 0.0 ||
          1.0 + 2.0 * r.alpha_prime * r.M / (sb * sb) < 0.0)
        r.excluded |= kRayChart;

      total_arc.add(r.ds);
      if (r.excluded != kRayOk) excluded_arc.add(r.ds);
    }
    out.samples.insert(out.samples.end(), rs.begin(), rs.end());
  }

  out.total_arc = total_arc.total();
  out.excluded_arc = excluded_arc.total();
  out.excluded_fraction = out.total_arc > 0.0 ? out.excluded_arc / out.total_arc : 0.0;
  return out;
}

namespace {

// Integrates fn(m) over [0, M] per sample, weighted by the arc element.
template <typename PerSample>
double ray_integral(const RayField& rays, int gauss_points, PerSample&& fn) {
  const auto& nw = gauss_legendre(gauss_points);
  SumAccumulator acc;
  acc.reserve(rays.samples.size());
  for (const RaySample& r : rays.samples) {
    if (r.excluded != kRayOk || r.M <= 0.0) continue;
    double sum = 0.0;
    for (const auto& [x, wq] : nw) {
      const double m = 0.5 * r.M * (x + 1.0);
      sum += wq * fn(r, m);
    }
    acc.add(0.5 * r.M * sum * r.ds);
  }
  return acc.total();
}

}  // namespace

double ray_phase_integral(const RayField& rays, const std::function<double(const Vec2&)>& g,
                          int gauss_points) {
  return ray_integral(rays, gauss_points, [&](const RaySample& r, double m) {
    return g(r.p + r.theta * inverse_mass_coordinate(r.frame(), m));
  });
}

double ray_transport_cost(const RayField& rays, int gauss_points) {
  return ray_integral(rays, gauss_points, [](const RaySample& r, double m) {
    return inverse_mass_coordinate(r.frame(), m) -
           inverse_mass_coordinate(r.frame(), m - r.M);
  });
}

double ray_transport_cost_lower(const RayField& rays, int gauss_points) {
  return ray_integral(rays, gauss_points, [](const RaySample& r, double m) {
    return inverse_mass_coordinate(r.frame(), m);
  });
}

}  // namespace stripes
