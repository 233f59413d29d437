#include "stripes/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>

#include "stripes/curve.hpp"
#include "stripes/grid.hpp"
#include "stripes/interface.hpp"
#include "stripes/linefield.hpp"
#include "stripes/pattern.hpp"
#include "stripes/rays.hpp"
#include "stripes/stripe_map.hpp"
#include "stripes/transport.hpp"

namespace stripes {

double annulus_limit_energy(double R, double delta) {
  if (delta <= 0.0 || delta >= R)
    throw Error("annulus_limit_energy: need 0 < delta < R, got R = " + format_double(R) +
                ", delta = " + format_double(delta));
  return 0.25 * kPi * std::log((R + delta) / (R - delta));
}

namespace {

bool parse_bool(const KeyValueConfig& kv, const std::string& key, bool fallback) {
  const std::string v = kv.get(key);
  if (v.empty()) return fallback;
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw Error("config key '" + key + "': expected true/false, got '" + v + "'");
}

void check_resonance(double ratio, double tol, const std::string& what) {
  const double nearest = std::round(ratio);
  if (nearest < 1.0 || std::fabs(ratio - nearest) > tol * std::max(1.0, std::fabs(ratio)))
    throw Error(what + ": stripe count " + format_double(ratio) +
                " is not a positive integer (resonance violated)");
}

}  // namespace

StudyConfig study_config_from_kv(const KeyValueConfig& kv) {
  static const std::set<std::string> known = {
      "domain",      "radius",     "rx",          "ry",          "cx",
      "cy",          "delta",      "reference",   "curve_samples", "stripe_counts",
      "eps_list",    "h_ratio",    "exact_cap",   "knn",         "defect_k",
      "gauss_points", "out_dir",   "write_svg",   "write_pgm",   "seed",
      "resonance_tol"};
  for (const auto& [k, v] : kv.entries)
    if (!known.count(k)) throw Error("unknown config key '" + k + "'");

  StudyConfig cfg;
  cfg.domain_kind = kv.get("domain", cfg.domain_kind);
  if (cfg.domain_kind != "circle" && cfg.domain_kind != "ellipse")
    throw Error("config key 'domain': expected circle or ellipse, got '" + cfg.domain_kind +
                "'");
  cfg.radius = kv.get_double("radius", cfg.radius);
  cfg.rx = kv.get_double("rx", cfg.rx);
  cfg.ry = kv.get_double("ry", cfg.ry);
  cfg.cx = kv.get_double("cx", cfg.cx);
  cfg.cy = kv.get_double("cy", cfg.cy);
  cfg.delta = kv.get_double("delta", cfg.delta);
  if (cfg.delta <= 0.0) throw Error("config key 'delta': must be positive");
  cfg.reference = kv.get("reference", cfg.reference);
  if (cfg.reference != "inner" && cfg.reference != "outer")
    throw Error("config key 'reference': expected inner or outer, got '" + cfg.reference +
                "'");
  cfg.curve_samples = kv.get_int("curve_samples", cfg.curve_samples);
  if (cfg.curve_samples < 16) throw Error("config key 'curve_samples': need at least 16");
  cfg.resonance_tol = kv.get_double("resonance_tol", cfg.resonance_tol);

  if (kv.has("stripe_counts")) {
    cfg.stripe_counts.clear();
    for (double v : kv.get_list("stripe_counts")) {
      if (v < 1.0 || std::fabs(v - std::round(v)) > 1e-12)
        throw Error("config key 'stripe_counts': entry " + format_double(v) +
                    " is not a positive integer");
      cfg.stripe_counts.push_back(static_cast<int>(std::lround(v)));
    }
    if (cfg.stripe_counts.empty())
      throw Error("config key 'stripe_counts': empty list");
  }
  if (kv.has("eps_list")) {
    cfg.eps_list = kv.get_list("eps_list");
    for (double e : cfg.eps_list) {
      if (e <= 0.0) throw Error("config key 'eps_list': eps " + format_double(e));
      check_resonance(cfg.delta / (2.0 * e), cfg.resonance_tol,
                      "config key 'eps_list': eps " + format_double(e));
    }
  }

  cfg.h_ratio = kv.get_double("h_ratio", cfg.h_ratio);
  if (cfg.h_ratio < 4.0)
    throw Error("config key 'h_ratio': value " + format_double(cfg.h_ratio) +
                " gives h > eps/4");
  cfg.exact_cap = static_cast<long>(kv.get_int("exact_cap", static_cast<int>(cfg.exact_cap)));
  if (cfg.exact_cap < 1) throw Error("config key 'exact_cap': must be positive");
  cfg.knn = kv.get_int("knn", cfg.knn);
  if (cfg.knn < 4) throw Error("config key 'knn': need at least 4");
  if (kv.has("defect_k")) {
    cfg.defect_k = kv.get_list("defect_k");
    for (double k : cfg.defect_k)
      if (k <= 0.0) throw Error("config key 'defect_k': scale " + format_double(k));
  }
  cfg.gauss_points = kv.get_int("gauss_points", cfg.gauss_points);
  if (cfg.gauss_points < 2) throw Error("config key 'gauss_points': need at least 2");
  cfg.out_dir = kv.get("out_dir", cfg.out_dir);
  cfg.write_svg = parse_bool(kv, "write_svg", cfg.write_svg);
  cfg.write_pgm = parse_bool(kv, "write_pgm", cfg.write_pgm);
  cfg.seed = static_cast<unsigned>(kv.get_int("seed", static_cast<int>(cfg.seed)));
  return cfg;
}

namespace {

std::string config_echo(const StudyConfig& c) {
  std::string out;
  out += "domain = " + c.domain_kind + "\n";
  out += "radius = " + format_double(c.radius) + "\n";
  out += "rx = " + format_double(c.rx) + "\n";
  out += "ry = " + format_double(c.ry) + "\n";
  out += "cx = " + format_double(c.cx) + "\n";
  out += "cy = " + format_double(c.cy) + "\n";
  out += "delta = " + format_double(c.delta) + "\n";
  out += "reference = " + c.reference + "\n";
  out += "curve_samples = " + std::to_string(c.curve_samples) + "\n";
  out += "stripe_counts = ";
  for (std::size_t i = 0; i < c.stripe_counts.size(); ++i)
    out += (i ? "," : "") + std::to_string(c.stripe_counts[i]);
  out += "\n";
  if (!c.eps_list.empty()) {
    out += "eps_list = ";
    for (std::size_t i = 0; i < c.eps_list.size(); ++i)
      out += (i ? "," : "") + format_double(c.eps_list[i]);
    out += "\n";
  }
  out += "h_ratio = " + format_double(c.h_ratio) + "\n";
  out += "exact_cap = " + std::to_string(c.exact_cap) + "\n";
  out += "knn = " + std::to_string(c.knn) + "\n";
  out += "defect_k = ";
  for (std::size_t i = 0; i < c.defect_k.size(); ++i)
    out += (i ? "," : "") + format_double(c.defect_k[i]);
  out += "\n";
  out += "gauss_points = " + std::to_string(c.gauss_points) + "\n";
  out += "write_svg = " + std::string(c.write_svg ? "true" : "false") + "\n";
  out += "write_pgm = " + std::string(c.write_pgm ? "true" : "false") + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  out += "resonance_tol = " + format_double(c.resonance_tol) + "\n";
  return out;
}

// 1-Lipschitz sawtooth dual potential: phi(x) = -dist(t(x), stripe center
// levels).  |grad t| = 1 inside the tube, so phi is 1-Lipschitz and
// sum phi d(mu+ - mu-) is a certified lower bound for the transport cost
// (it is the exact limit dual, so the slack vanishes with eps).
double sawtooth_dual_value(const TransportAtoms& atoms, const DomainDistance& dd,
                           double eps) {
  const double period = 4.0 * eps;
  const auto phi = [&](const Vec2& x) {
    const double t = dd.value(x, 1e-6);
    const double r = t - period * std::floor(t / period);
    return -std::fabs(r - 2.0 * eps);
  };
  SumAccumulator acc;
  acc.reserve(atoms.source.size() + atoms.sink.size());
  for (const Vec2& s : atoms.source) acc.add(phi(s));
  for (const Vec2& s : atoms.sink) acc.add(-phi(s));
  return atoms.cell_mass * acc.total();
}

// Analytic phase membership for the stripe construction: project onto the
// stripe's center curve selected by the tube level and compare the
// transversal offset against the interpolated boundary offsets.
class StripeMembership {
 public:
  StripeMembership(const StripeFamily& family, const DomainDistance& dd)
      : family_(family), dd_(dd) {}

  bool operator()(const Vec2& x) const {
    const CurveProjection fr = family_.dom.frame(x);
    if (std::fabs(fr.w) >= family_.dom.delta()) return false;
    const double t = dd_.value_from_offset(fr.w);
    const int k = static_cast<int>(std::floor(t / (4.0 * family_.eps)));
    if (k < 0 || k >= family_.count) return false;
    const Stripe& st = family_.stripes[k];
    const CurveProjection pr = st.center.project(x);
    // Offset along the transversal direction (the projection normal is
    // parallel to it up to sign).
    const int n = st.center.size();
    int i = static_cast<int>(std::floor(pr.s / st.center.ds()));
    i = std::clamp(i, 0, n - 1);
    const double frac =
        std::clamp(pr.s / st.center.ds() - i, 0.0, 1.0);
    const int i1 = (i + 1) % n;
    const double sgn = dot(st.transversal[i], pr.nu) >= 0.0 ? 1.0 : -1.0;
    const double rho = sgn * pr.w;
    const double rp = (1.0 - frac) * st.rho_plus[i] + frac * st.rho_plus[i1];
    const double rm = (1.0 - frac) * st.rho_minus[i] + frac * st.rho_minus[i1];
    return rho > rm && rho < rp;
  }

 private:
  const StripeFamily& family_;
  const DomainDistance& dd_;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

StudyResult run_gamma_study(const StudyConfig& cfg) {
  StudyResult res;
  res.config = cfg;

  std::vector<std::pair<int, double>> schedule;
  if (!cfg.eps_list.empty()) {
    for (double e : cfg.eps_list)
      schedule.emplace_back(static_cast<int>(std::lround(cfg.delta / (2.0 * e))), e);
  } else {
    for (int N : cfg.stripe_counts) schedule.emplace_back(N, cfg.delta / (2.0 * N));
  }
  if (schedule.empty()) throw Error("study: empty eps schedule");

  // The chord sag of the center polyline is a fixed geometric error, and G
  // divides by eps^2, so the center resolution must track the finest row of
  // the schedule; cfg.curve_samples acts as a floor.
  const auto make_center = [&](int samples) {
    return cfg.domain_kind == "circle"
               ? make_circle({cfg.cx, cfg.cy}, cfg.radius, samples)
               : make_ellipse({cfg.cx, cfg.cy}, cfg.rx, cfg.ry, samples);
  };
  double h_min = schedule.front().second / cfg.h_ratio;
  for (const auto& [N, eps] : schedule) h_min = std::min(h_min, eps / cfg.h_ratio);
  ClosedCurve center = make_center(cfg.curve_samples);
  const int n_dom = std::max(
      cfg.curve_samples, 4 * static_cast<int>(std::ceil(center.length() / h_min)));
  if (n_dom > center.size()) center = make_center(n_dom);
  const TubularDomain dom = TubularDomain::make(std::move(center), cfg.delta);
  const ReferenceBoundary ref =
      cfg.reference == "inner" ? ReferenceBoundary::inner : ReferenceBoundary::outer;
  const DomainDistance dd(dom, ref);

  // Limit energy: grid quadrature of the canonical field at a fixed reference
  // resolution, plus the closed form for circular tubes.
  {
    const double h_ref = cfg.delta / 50.0;
    const Grid gref = rasterize(dom, h_ref);
    const LineField fref = canonical_field(dom, gref, ref);
    res.g0 = limit_energy(fref, &dom).value;
  }
  res.g0_analytic =
      cfg.domain_kind == "circle" ? annulus_limit_energy(cfg.radius, cfg.delta) : 0.0;
  const double g0_best = res.g0_analytic > 0.0 ? res.g0_analytic : res.g0;

  std::vector<std::string> svg_names, svg_contents;  // deferred artifact writes
  std::vector<std::string> pgm_names, pgm_contents;
  std::vector<std::string> json_names, json_contents;

  for (const auto& [N, eps] : schedule) {
    StudyRow row;
    row.N = N;
    row.eps = eps;
    row.h = eps / cfg.h_ratio;
    row.g0_reference = g0_best;
    const auto t0 = std::chrono::steady_clock::now();
    std::string stage = "recovery";
    try {
      RecoveryOptions ropt;
      ropt.ref = ref;
      ropt.curve_samples = 0;  // auto from grid resolution
      ropt.grid_h = row.h;
      ropt.resonance_tol = cfg.resonance_tol;
      const RecoveryResult rec = stripe_recovery(dom, eps, ropt);

      stage = "interfaces";
      const InterfaceSet iset = interfaces_from_family(rec.family);
      const double perim = perimeter(iset);

      stage = "transport-map";
      StripeMapOptions mopt;
      mopt.gauss_points = cfg.gauss_points;
      const StripeMapReport smap = stripe_transport_map(rec.family, mopt);
      const double d_map = smap.cost_closed;

      stage = "transport";
      const TransportAtoms atoms = atoms_from_pattern(rec.pattern);
      const long side = static_cast<long>(atoms.source.size());
      const RasterUpperBound plan = upper_bound_d1(rec.family, atoms);
      row.d_plan = plan.cost;
      row.plan_residual_pairs = plan.residual_pairs;
      const auto t_tr = std::chrono::steady_clock::now();
      std::optional<TransportSolution> exact_sol;
      double d_lo = 0.0, d_up = 0.0;
      if (side <= cfg.exact_cap) {
        ExactOptions eopt;
        eopt.knn = cfg.knn;
        eopt.atom_cap = cfg.exact_cap;
        eopt.max_refine_rounds = 40;  // curved geometries need long-range arcs
        eopt.add_per_node = 8;
        exact_sol = exact_d1(atoms, eopt);
        d_lo = exact_sol->cost_lower;
        d_up = exact_sol->cost_upper;
      } else {
        EntropicOptions aopt;
        aopt.max_iter = 120;  // the bracket stays certified at any budget
        aopt.tol = 1e-8;
        const TransportSolution ent = approx_d1(atoms, aopt);
        const double saw = sawtooth_dual_value(atoms, dd, eps);
        d_lo = std::max(ent.cost_lower, saw);
        d_up = std::min(ent.cost_upper, plan.cost);
        if (d_lo > d_up)
          throw Error("transport bracket inconsistent: lower " + format_double(d_lo) +
                      " above upper " + format_double(d_up));
      }
      row.seconds_transport = seconds_since(t_tr);

      stage = "energy";
      row.energy = assemble_energy(eps, dom.area(), perim, "analytic", d_map, d_map,
                                   "upper-bound-map");
      if (exact_sol)
        row.energy_exact = assemble_energy(eps, dom.area(), perim, "analytic", d_lo, d_up,
                                           "exact");
      else
        row.energy_bracket = assemble_energy(eps, dom.area(), perim, "analytic", d_lo, d_up,
                                             "bracket");

      if (exact_sol) {
        stage = "rays";
        const KantorovichPotential pot(atoms, *exact_sol);
        const StripeMembership member(rec.family, dd);
        RayOptions rayopt;
        rayopt.grid_h = row.h;
        rayopt.max_ray_length = 8.0 * eps;
        const RayField rays = extract_rays(
            pot, iset, [&member](const Vec2& x) { return member(x); }, eps, rayopt);
        row.lower = lower_bound_terms(rays, eps);
        row.lower_present = true;
      }

      stage = "upper-bound";
      const LineField lf = canonical_field(dom, rec.pattern.grid, ref);
      const UpperBoundReport ub = upper_bound_report(rec.family, lf);
      row.upper_bound_total = ub.curvature_route;
      row.upper_bound_div = ub.divergence_route;
      row.upper_c_estimate = (row.energy.G_upper - ub.curvature_route) / eps;

      stage = "gaps";
      const JumpMeasure jm = jump_measure(iset, eps);
      const GapReport gap = pair_convergence_gap(jm, dom, ref);
      row.weak_gap = gap.weak_gap;
      row.strong_gap = gap.strong_gap;

      stage = "defects";
      for (double k : cfg.defect_k) row.defects.push_back(alignment_defect(jm, k).value);

      stage = "artifacts";
      const std::string tag = "N" + std::to_string(N);
      json_names.push_back("row_" + tag + ".json");
      json_contents.push_back(json_energy_report(row.energy));
      if (row.energy_exact || row.energy_bracket) {
        json_names.push_back("raster_" + tag + ".json");
        json_contents.push_back(json_energy_report(
            row.energy_exact ? *row.energy_exact : *row.energy_bracket));
      }
      if (row.lower_present) {
        json_names.push_back("lower_" + tag + ".json");
        json_contents.push_back(json_lower_bound_report(row.lower));
      }
      if (cfg.write_svg) {
        svg_names.push_back("pattern_" + tag + ".svg");
        svg_contents.push_back(svg_pattern(rec.pattern, &iset));
      }
      if (cfg.write_pgm) {
        pgm_names.push_back("pattern_" + tag + ".pgm");
        pgm_contents.push_back(pgm_from_pattern(rec.pattern));
      }
    } catch (const std::exception& e) {
      row.error = stage + ": " + e.what();
    }
    row.seconds_total = seconds_since(t0);
    res.rows.push_back(std::move(row));
  }

  // Study table.  Timings stay out of the file outputs so a re-run of the
  // same config is byte-identical.
  std::vector<std::string> header = {
      "N",       "eps",     "h",        "perimeter",      "d_map",
      "d_plan",  "d_lower", "d_upper",  "d_source",       "F",
      "G",       "raster_G_lower",      "raster_G_upper",
      "lb_t1",   "lb_t2",   "lb_t3",    "lb_total",       "lb_excluded",
      "ub_curvature", "ub_divergence",  "upper_c",        "weak_gap",
      "strong_gap"};
  for (double k : cfg.defect_k) header.push_back("defect_k" + format_double(k, 6));
  header.push_back("error");
  std::vector<std::vector<std::string>> rows_csv;
  for (const StudyRow& r : res.rows) {
    const EnergyReport* raster =
        r.energy_exact ? &*r.energy_exact : (r.energy_bracket ? &*r.energy_bracket : nullptr);
    std::vector<std::string> c;
    c.push_back(std::to_string(r.N));
    c.push_back(format_double(r.eps));
    c.push_back(format_double(r.h));
    c.push_back(format_double(r.energy.perimeter));
    c.push_back(format_double(r.energy.d1_upper));
    c.push_back(format_double(r.d_plan));
    c.push_back(format_double(raster ? raster->d1_lower : 0.0));
    c.push_back(format_double(raster ? raster->d1_upper : 0.0));
    c.push_back(raster ? raster->d_source : "");
    c.push_back(format_double(r.energy.F));
    c.push_back(format_double(r.energy.G));
    c.push_back(format_double(raster ? raster->G_lower : 0.0));
    c.push_back(format_double(raster ? raster->G_upper : 0.0));
    c.push_back(format_double(r.lower_present ? r.lower.t1 : 0.0));
    c.push_back(format_double(r.lower_present ? r.lower.t2 : 0.0));
    c.push_back(format_double(r.lower_present ? r.lower.t3 : 0.0));
    c.push_back(format_double(r.lower_present ? r.lower.total : 0.0));
    c.push_back(format_double(r.lower_present ? r.lower.excluded_fraction : 0.0));
    c.push_back(format_double(r.upper_bound_total));
    c.push_back(format_double(r.upper_bound_div));
    c.push_back(format_double(r.upper_c_estimate));
    c.push_back(format_double(r.weak_gap));
    c.push_back(format_double(r.strong_gap));
    for (std::size_t i = 0; i < cfg.defect_k.size(); ++i)
      c.push_back(format_double(i < r.defects.size() ? r.defects[i] : 0.0));
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    c.push_back(err);
    rows_csv.push_back(std::move(c));
  }
  res.csv = csv_table(header, rows_csv);

  // Convergence plot of the construction's rescaled energy.
  std::string plot;
  if (cfg.write_svg) {
    std::vector<double> xs, ys;
    for (const StudyRow& r : res.rows) {
      if (!r.error.empty()) continue;
      xs.push_back(r.eps);
      ys.push_back(r.energy.G);
    }
    if (!xs.empty())
      plot = svg_convergence_plot(xs, ys, g0_best, "rescaled energy vs. resolution");
  }

  // Manifest: content hashes of every artifact (written or not), plus the
  // recorded seed.
  res.manifest.emplace_back("seed", std::to_string(cfg.seed));
  const std::string cfg_txt = config_echo(cfg);
  res.manifest.emplace_back("config.txt", fnv1a64_hex(cfg_txt));
  res.manifest.emplace_back("study.csv", fnv1a64_hex(res.csv));
  for (std::size_t i = 0; i < json_names.size(); ++i)
    res.manifest.emplace_back(json_names[i], fnv1a64_hex(json_contents[i]));
  if (!plot.empty()) res.manifest.emplace_back("convergence.svg", fnv1a64_hex(plot));
  for (std::size_t i = 0; i < svg_names.size(); ++i)
    res.manifest.emplace_back(svg_names[i], fnv1a64_hex(svg_contents[i]));
  for (std::size_t i = 0; i < pgm_names.size(); ++i)
    res.manifest.emplace_back(pgm_names[i], fnv1a64_hex(pgm_contents[i]));

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const auto put = [&](const std::string& name, const std::string& content) {
      write_text_file((fs::path(cfg.out_dir) / name).string(), content);
    };
    put("config.txt", cfg_txt);
    put("study.csv", res.csv);
    for (std::size_t i = 0; i < json_names.size(); ++i) put(json_names[i], json_contents[i]);
    if (!plot.empty()) put("convergence.svg", plot);
    for (std::size_t i = 0; i < svg_names.size(); ++i) put(svg_names[i], svg_contents[i]);
    for (std::size_t i = 0; i < pgm_names.size(); ++i) put(pgm_names[i], pgm_contents[i]);
    std::string man;
    for (const auto& [name, hash] : res.manifest) man += name + " " + hash + "\n";
    put("manifest.txt", man);
  }
  return res;
}

BaselineRow run_baseline_torus(const BaselineConfig& cfg) {
  BaselineRow row;
  std::string stage = "setup";
  try {
    if (cfg.eps <= 0.0) throw Error("baseline: eps = " + format_double(cfg.eps));
    if (cfg.h_ratio < 4.0)
      throw Error("baseline: h_ratio " + format_double(cfg.h_ratio) + " gives h > eps/4");
    const double h = cfg.eps / cfg.h_ratio;
    const int n = static_cast<int>(std::llround(1.0 / h));
    if (n < 8) throw Error("baseline: grid too coarse (n = " + std::to_string(n) + ")");
    const Grid grid = unit_torus_grid(n);

    const double width = cfg.width_factor * 2.0 * cfg.eps;
    row.period = 2.0 * width;
    Vec2 normal;
    if (cfg.angle_deg == 0.0)
      normal = {1.0, 0.0};
    else if (cfg.angle_deg == 90.0)
      normal = {0.0, 1.0};
    else if (cfg.angle_deg == 45.0)
      normal = normalized({1.0, 1.0});
    else
      throw Error("baseline: angle must be 0, 45 or 90 degrees, got " +
                  format_double(cfg.angle_deg));

    stage = "pattern";
    const BinaryPattern pat = straight_stripes(grid, row.period, cfg.phase, normal, cfg.eps);

    stage = "interfaces";
    const InterfaceSet iset = extract_interfaces(pat);
    const double perim = perimeter(iset);

    stage = "transport";
    const TransportAtoms atoms = atoms_from_pattern(pat);
    ExactOptions eopt;
    eopt.atom_cap = cfg.exact_cap;
    const TransportSolution sol = exact_d1(atoms, eopt);

    stage = "energy";
    row.energy = assemble_energy(cfg.eps, grid.mask_area(), perim, "raster", sol.cost_lower,
                                 sol.cost_upper, "exact");

    if (cfg.angle_deg == 0.0 || cfg.angle_deg == 90.0) {
      stage = "oracle";
      const bool along_x = cfg.angle_deg == 0.0;
      std::vector<double> src, snk;
      src.reserve(atoms.source.size());
      snk.reserve(atoms.sink.size());
      for (const Vec2& p : atoms.source) src.push_back(along_x ? p.x : p.y);
      for (const Vec2& p : atoms.sink) snk.push_back(along_x ? p.x : p.y);
      row.d_oracle = periodic_line_transport(std::move(src), std::move(snk), 1.0,
                                             atoms.cell_mass);
    }

    if (!cfg.out_dir.empty()) {
      stage = "artifacts";
      namespace fs = std::filesystem;
      fs::create_directories(cfg.out_dir);
      write_text_file((fs::path(cfg.out_dir) / "baseline.json").string(),
                      json_energy_report(row.energy));
      write_text_file((fs::path(cfg.out_dir) / "baseline_pattern.svg").string(),
                      svg_pattern(pat, &iset));
    }
  } catch (const std::exception& e) {
    row.error = stage + ": " + e.what();
  }
  return row;
}

}  // namespace stripes
