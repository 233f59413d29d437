#include "stripes/energy.hpp"

#include <algorithm>
#include <cmath>

namespace stripes {

EnergyReport assemble_energy(double eps, double area, double perimeter,
                             const std::string& perimeter_source, double d_lower,
                             double d_upper, const std::string& d_source) {
  if (eps <= 0.0) throw Error("assemble_energy: eps = " + format_double(eps));
  if (area <= 0.0) throw Error("assemble_energy: area = " + format_double(area));
  if (d_upper < d_lower)
    throw Error("assemble_energy: empty d interval [" + format_double(d_lower) +
                ", " + format_double(d_upper) + "]");
  if (d_lower < 0.0)
    throw Error("assemble_energy: negative transport cost " + format_double(d_lower));
  if (d_source != "exact" && d_source != "upper-bound-map" && d_source != "bracket")
    throw Error("assemble_energy: unknown d source tag '" + d_source + "'");

  EnergyReport r;
  r.eps = eps;
  r.area = area;
  r.perimeter = perimeter;
  r.perimeter_source = perimeter_source;
  r.perimeter_term = eps * perimeter;
  r.d_source = d_source;
  r.d1_lower = d_lower;
  r.d1_upper = d_upper;
  r.d1 = 0.5 * (d_lower + d_upper);
  r.transport_term = r.d1 / eps;
  r.F = r.perimeter_term + r.transport_term;
  const double e2 = eps * eps;
  r.G = (r.F - area) / e2;
  r.G_lower = (r.perimeter_term + d_lower / eps - area) / e2;
  r.G_upper = (r.perimeter_term + d_upper / eps - area) / e2;
  return r;
}

LowerBoundReport lower_bound_terms(const RayField& rays, double eps) {
  if (eps <= 0.0) throw Error("lower_bound_terms: eps = " + format_double(eps));
  LowerBoundReport rep;
  rep.excluded_fraction = rays.excluded_fraction;
  rep.unreliable = rays.excluded_fraction > 0.5;

  int loops = 0;
  for (const RaySample& r : rays.samples) loops = std::max(loops, r.loop + 1);
  rep.per_curve.assign(loops, {});

  SumAccumulator t1, t2, t3, basic, arc;
  for (const RaySample& r : rays.samples) {
    if (r.excluded != kRayOk) continue;
    const double sb = r.sin_beta;
    const double ratio = r.M / eps;
    const double w = eps * r.ds;
    const double v1 = (1.0 / sb - 1.0) * ratio * ratio / (eps * eps);
    const double v2 = (ratio - 1.0) * (ratio - 1.0) / (eps * eps);
    const double q = ratio / sb;
    const double v3 = q * q * q * q * r.alpha_prime * r.alpha_prime / (4.0 * sb);
    t1.add(v1 * w);
    t2.add(v2 * w);
    t3.add(v3 * w);
    basic.add(((ratio - 1.0) * (ratio - 1.0) + (1.0 / sb - 1.0) +
               0.25 * eps * eps * r.alpha_prime * r.alpha_prime) *
              eps * r.ds);
    arc.add(r.ds);
    CurveTerms& ct = rep.per_curve[r.loop];
    ct.t1 += v1 * w;
    ct.t2 += v2 * w;
    ct.t3 += v3 * w;
    ++rep.samples;
  }
  rep.t1 = t1.total();
  rep.t2 = t2.total();
  rep.t3 = t3.total();
  rep.total = rep.t1 + rep.t2 + rep.t3;
  rep.basic_total = basic.total();
  rep.covered_arc = arc.total();
  return rep;
}

UpperBoundReport upper_bound_report(const StripeFamily& family, const LineField& field) {
  if (family.stripes.empty()) throw Error("upper bound report: family has no stripes");
  const DivergenceField div = divergence(field);

  UpperBoundReport rep;
  SumAccumulator curv_total, div_total;
  rep.per_stripe_curvature.reserve(family.stripes.size());
  for (const Stripe& st : family.stripes) {
    const double ds = st.center.ds();
    SumAccumulator curv, dvg;
    for (int i = 0; i < st.center.size(); ++i) {
      const double k = st.kappa[i];
      curv.add(0.5 * k * k * ds);
      const Vec2 d = div.sample(st.center.vertex(i));
      dvg.add(0.5 * d.norm2() * ds);
    }
    const double c = family.eps * curv.total();
    rep.per_stripe_curvature.push_back(c);
    curv_total.add(c);
    div_total.add(family.eps * dvg.total());
  }
  rep.curvature_route = curv_total.total();
  rep.divergence_route = div_total.total();
  const double hi = std::max(rep.curvature_route, rep.divergence_route);
  rep.rel_dev = hi > 0.0 ? std::fabs(rep.curvature_route - rep.divergence_route) / hi : 0.0;
  return rep;
}

namespace {

// Shared polyline core: edges[i] runs from vertex i to vertex i+1 (closed:
// edge n-1 wraps back to vertex 0).
FirstVariationReport variation_core(const std::vector<Vec2>& verts,
                                    const std::vector<Vec2>& edges, bool closed,
                                    double eps,
                                    const std::function<Vec2(const Vec2&)>& eta) {
  const int n = static_cast<int>(verts.size());
  const int ne = static_cast<int>(edges.size());
  FirstVariationReport rep;
  rep.vertex_mean_curvature.assign(n, Vec2{});
  rep.dual_length.assign(n, 0.0);

  std::vector<Vec2> tau(ne);
  std::vector<double> elen(ne);
  for (int e = 0; e < ne; ++e) {
    elen[e] = edges[e].norm();
    if (elen[e] <= 0.0)
      throw Error("first variation: zero-length edge at index " + std::to_string(e));
    tau[e] = edges[e] / elen[e];
  }

  std::vector<Vec2> eta_v(n);
  for (int v = 0; v < n; ++v) eta_v[v] = eta(verts[v]);

  SumAccumulator dv, tv_mass;
  Vec2 turning{};
  const int v_first = closed ? 0 : 1;
  const int v_last = closed ? n : n - 1;
  for (int v = v_first; v < v_last; ++v) {
    const int e_in = closed ? (v + ne - 1) % ne : v - 1;
    const int e_out = closed ? v % ne : v;
    const Vec2 dtau = tau[e_out] - tau[e_in];
    const double dual = 0.5 * (elen[e_in] + elen[e_out]);
    rep.dual_length[v] = dual;
    rep.vertex_mean_curvature[v] = dtau / dual;
    turning += dtau;
    dv.add(-eps * dot(eta_v[v], dtau));
    tv_mass.add(eps * dtau.norm());
    const Vec2 mean = tau[e_in] + tau[e_out];
    if (mean.norm() > 1e-12)
      rep.max_tangential = std::max(
          rep.max_tangential,
          std::fabs(dot(rep.vertex_mean_curvature[v], normalized(mean))));
  }
  if (!closed) {
    // Singular endpoint part of the variation of length.
    rep.endpoint_forces = {tau[0] * -eps, tau[ne - 1] * eps};
    dv.add(dot(eta_v[0], rep.endpoint_forces[0]));
    dv.add(dot(eta_v[n - 1], rep.endpoint_forces[1]));
  }
  rep.dV = dv.total();
  rep.turning_sum = turning;
  rep.total_variation_mass = tv_mass.total();

  SumAccumulator edge_route;
  for (int e = 0; e < ne; ++e) {
    const Vec2& a = eta_v[e];
    const Vec2& b = eta_v[closed ? (e + 1) % n : e + 1];
    edge_route.add(eps * dot(tau[e], b - a));
  }
  rep.dV_edge_route = edge_route.total();
  return rep;
}

}  // namespace

FirstVariationReport first_variation(const std::vector<Vec2>& loop, double eps,
                                     const std::function<Vec2(const Vec2&)>& eta,
                                     bool closed) {
  const int n = static_cast<int>(loop.size());
  if (n < (closed ? 3 : 2))
    throw Error("first variation: polyline needs at least " +
                std::string(closed ? "3" : "2") + " vertices");
  std::vector<Vec2> edges;
  edges.reserve(n);
  for (int i = 0; i + 1 < n; ++i) edges.push_back(loop[i + 1] - loop[i]);
  if (closed) edges.push_back(loop[0] - loop[n - 1]);
  return variation_core(loop, edges, closed, eps, eta);
}

FirstVariationReport first_variation(const InterfaceSet& iset, double eps,
                                     const std::function<Vec2(const Vec2&)>& eta) {
  FirstVariationReport agg;
  SumAccumulator dv, dv_edge, tv;
  for (const InterfaceLoop& loop : iset.loops) {
    std::vector<Vec2> edges(loop.segments());
    for (int i = 0; i < loop.segments(); ++i) edges[i] = loop.edge(i);
    FirstVariationReport r = variation_core(loop.pts, edges, true, eps, eta);
    dv.add(r.dV);
    dv_edge.add(r.dV_edge_route);
    tv.add(r.total_variation_mass);
    if (r.turning_sum.norm() > agg.turning_sum.norm()) agg.turning_sum = r.turning_sum;
    agg.max_tangential = std::max(agg.max_tangential, r.max_tangential);
    agg.vertex_mean_curvature.insert(agg.vertex_mean_curvature.end(),
                                     r.vertex_mean_curvature.begin(),
                                     r.vertex_mean_curvature.end());
    agg.dual_length.insert(agg.dual_length.end(), r.dual_length.begin(),
                           r.dual_length.end());
  }
  agg.dV = dv.total();
  agg.dV_edge_route = dv_edge.total();
  agg.total_variation_mass = tv.total();
  return agg;
}

}  // namespace stripes
