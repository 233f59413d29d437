#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "stripes/energy.hpp"

namespace stripes {

namespace {

// Canonical atom order (position, then weight, then matrix entries): the
// pairwise accumulation below follows this order, so the result is bitwise
// invariant under relabeling of the input atoms.
std::vector<int> canonical_order(const JumpMeasure& jm) {
  std::vector<int> idx(jm.x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&jm](int a, int b) {
    const Vec2 &xa = jm.x[a], &xb = jm.x[b];
    if (xa.x != xb.x) return xa.x < xb.x;
    if (xa.y != xb.y) return xa.y < xb.y;
    if (jm.w[a] != jm.w[b]) return jm.w[a] < jm.w[b];
    const Mat2 &pa = jm.P[a], &pb = jm.P[b];
    if (pa.a11 != pb.a11) return pa.a11 < pb.a11;
    if (pa.a12 != pb.a12) return pa.a12 < pb.a12;
    if (pa.a21 != pb.a21) return pa.a21 < pb.a21;
    return pa.a22 < pb.a22;
  });
  return idx;
}

}  // namespace

DefectReport alignment_defect(const JumpMeasure& jm, double k) {
  if (k <= 0.0) throw Error("alignment_defect: k = " + format_double(k));
  if (jm.x.size() != jm.w.size() || jm.x.size() != jm.P.size())
    throw Error("alignment_defect: inconsistent atom arrays");

  DefectReport rep;
  rep.k = k;
  const int n = static_cast<int>(jm.x.size());
  if (n < 2) return rep;

  const std::vector<int> order = canonical_order(jm);

  // Spatial hash with cell width 1/k: the mollifier support fits in the 3x3
  // neighborhood of a cell.
  const double cell = 1.0 / k;
  Vec2 lo = jm.x[0];
  for (const Vec2& p : jm.x) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
  }
  const auto cell_of = [&](const Vec2& p, std::int64_t& ci, std::int64_t& cj) {
    ci = static_cast<std::int64_t>(std::floor((p.x - lo.x) / cell));
    cj = static_cast<std::int64_t>(std::floor((p.y - lo.y) / cell));
  };
  std::unordered_map<std::int64_t, std::vector<int>> buckets;
  buckets.reserve(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    std::int64_t ci, cj;
    cell_of(jm.x[order[r]], ci, cj);
    buckets[ci * 0x100000LL + cj].push_back(r);  // ranks in canonical order
  }

  const double rho_scale = 3.0 * k * k / kPi;
  SumAccumulator total;
  std::vector<int> nbr;
  for (int r = 0; r < n; ++r) {
    const int i = order[r];
    std::int64_t ci, cj;
    cell_of(jm.x[i], ci, cj);
    nbr.clear();
    for (std::int64_t dj = -1; dj <= 1; ++dj)
      for (std::int64_t di = -1; di <= 1; ++di) {
        const auto it = buckets.find((ci + di) * 0x100000LL + cj + dj);
        if (it == buckets.end()) continue;
        for (int q : it->second)
          if (q > r) nbr.push_back(q);
      }
    std::sort(nbr.begin(), nbr.end());
    nbr.erase(std::unique(nbr.begin(), nbr.end()), nbr.end());
    for (int q : nbr) {
      const int j = order[q];
      const double z2 = (jm.x[i] - jm.x[j]).norm2();
      const double u = 1.0 - k * k * z2;
      if (u <= 0.0) continue;
      const double rho = rho_scale * u * u;
      total.add(rho * (jm.P[i] - jm.P[j]).frobenius() * jm.w[i] * jm.w[j]);
      rep.pairs += 2;  // both ordered pairs (i,j) and (j,i)
    }
  }
  rep.value = 2.0 * total.total();
  return rep;
}

namespace {

constexpr int kDictFns = 5;

double dict_fn(int which, const Vec2& p) {
  switch (which) {
    case 0: return 1.0;
    case 1: return p.x;
    case 2: return p.y;
    case 3: return std::sin(kPi * p.x);
    default: return std::sin(kPi * p.y);
  }
}

Mat2 dict_mat(int which) {
  if (which == 0) return {1.0, 0.0, 0.0, 0.0};
  const double r = 1.0 / std::sqrt(2.0);
  return {0.0, r, r, 0.0};
}

// Atom-side pairings sum_i f(x_i) (P_i : M) w_i for the whole dictionary,
// plus the squared-Frobenius mass.
struct AtomSums {
  std::array<double, 2 * kDictFns> pairings{};
  double mass = 0.0;
};

AtomSums atom_pairings(const JumpMeasure& jm) {
  if (jm.x.size() != jm.w.size() || jm.x.size() != jm.P.size())
    throw Error("pair_convergence_gap: inconsistent atom arrays");
  std::array<SumAccumulator, 2 * kDictFns> acc;
  SumAccumulator mass;
  const Mat2 m0 = dict_mat(0), m1 = dict_mat(1);
  for (std::size_t i = 0; i < jm.x.size(); ++i) {
    const double w = jm.w[i];
    const double p0 = frobenius_inner(jm.P[i], m0) * w;
    const double p1 = frobenius_inner(jm.P[i], m1) * w;
    for (int f = 0; f < kDictFns; ++f) {
      const double fv = dict_fn(f, jm.x[i]);
      acc[2 * f].add(fv * p0);
      acc[2 * f + 1].add(fv * p1);
    }
    const double fr = jm.P[i].frobenius();
    mass.add(fr * fr * w);
  }
  AtomSums out;
  for (int t = 0; t < 2 * kDictFns; ++t) out.pairings[t] = acc[t].total();
  out.mass = mass.total();
  return out;
}

GapReport finish_gaps(const AtomSums& atoms, const std::array<double, 2 * kDictFns>& ref,
                      double ref_mass) {
  GapReport rep;
  rep.dictionary_gaps.resize(2 * kDictFns);
  for (int t = 0; t < 2 * kDictFns; ++t) {
    rep.dictionary_gaps[t] = std::fabs(atoms.pairings[t] - ref[t]);
    rep.weak_gap = std::max(rep.weak_gap, rep.dictionary_gaps[t]);
  }
  rep.atom_mass = atoms.mass;
  rep.reference_mass = ref_mass;
  rep.strong_gap = std::fabs(atoms.mass - ref_mass);
  return rep;
}

}  // namespace

GapReport pair_convergence_gap(const JumpMeasure& jm, const TubularDomain& dom,
                               ReferenceBoundary ref, int quad_s, int quad_w) {
  if (quad_s < 4 || quad_w < 2)
    throw Error("pair_convergence_gap: quadrature orders " + std::to_string(quad_s) +
                ", " + std::to_string(quad_w));
  (void)ref;  // the reference field is a line field, insensitive to orientation

  const AtomSums atoms = atom_pairings(jm);

  // Reference side: (1/2) integral of f (P_ref : M) over the tube in normal
  // coordinates, P_ref = tau tau^T at the foot, area element 1 - w kappa.
  const ClosedCurve& c = dom.center();
  const double delta = dom.delta();
  const double ds = c.length() / quad_s;
  const auto& gauss = gauss_legendre(quad_w);
  std::array<SumAccumulator, 2 * kDictFns> acc;
  SumAccumulator mass;
  const Mat2 m0 = dict_mat(0), m1 = dict_mat(1);
  for (int a = 0; a < quad_s; ++a) {
    const double s = (a + 0.5) * ds;
    const Vec2 foot = c.point(s);
    const Vec2 tau = c.tangent_at(s);
    const Vec2 nu = rot90(tau);
    const double kappa = c.curvature_at(s);
    const Mat2 pref = Mat2::outer(tau, tau);
    const double q0 = frobenius_inner(pref, m0);
    const double q1 = frobenius_inner(pref, m1);
    for (const auto& [node, gw] : gauss) {
      const double w = delta * node;
      const double elem = 0.5 * (1.0 - w * kappa) * delta * gw * ds;
      const Vec2 p = foot + nu * w;
      for (int f = 0; f < kDictFns; ++f) {
        const double fv = dict_fn(f, p);
        acc[2 * f].add(fv * q0 * elem);
        acc[2 * f + 1].add(fv * q1 * elem);
      }
      mass.add(elem);  // |P_ref|_F^2 = 1
    }
  }
  std::array<double, 2 * kDictFns> refsums;
  for (int t = 0; t < 2 * kDictFns; ++t) refsums[t] = acc[t].total();
  return finish_gaps(atoms, refsums, mass.total());
}

GapReport pair_convergence_gap(const JumpMeasure& jm, const LineField& reference,
                               double mu_scale) {
  if (mu_scale <= 0.0)
    throw Error("pair_convergence_gap: mu_scale = " + format_double(mu_scale));

  const AtomSums atoms = atom_pairings(jm);

  const Grid& g = reference.grid;
  const double cell_w = mu_scale * g.h * g.h;
  std::array<SumAccumulator, 2 * kDictFns> acc;
  SumAccumulator mass;
  const Mat2 m0 = dict_mat(0), m1 = dict_mat(1);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!g.is_inside(i, j)) continue;
      const Vec2 p = g.center(i, j);
      const Mat2& pc = reference.at(i, j);
      const double q0 = frobenius_inner(pc, m0) * cell_w;
      const double q1 = frobenius_inner(pc, m1) * cell_w;
      for (int f = 0; f < kDictFns; ++f) {
        const double fv = dict_fn(f, p);
        acc[2 * f].add(fv * q0);
        acc[2 * f + 1].add(fv * q1);
      }
      const double fr = pc.frobenius();
      mass.add(fr * fr * cell_w);
    }
  std::array<double, 2 * kDictFns> refsums;
  for (int t = 0; t < 2 * kDictFns; ++t) refsums[t] = acc[t].total();
  return finish_gaps(atoms, refsums, mass.total());
}

}  // namespace stripes
