#include "stripes/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace stripes {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool KeyValueConfig::has(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return true;
  return false;
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const std::string v = get(key);
  if (v.empty()) return fallback;
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw Error("config key '" + key + "': cannot parse number from '" + v + "'");
  }
  if (pos != v.size())
    throw Error("config key '" + key + "': trailing characters in '" + v + "'");
  return out;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const std::string v = get(key);
  if (v.empty()) return fallback;
  std::size_t pos = 0;
  int out = 0;
  try {
    out = std::stoi(v, &pos);
  } catch (const std::exception&) {
    throw Error("config key '" + key + "': cannot parse integer from '" + v + "'");
  }
  if (pos != v.size())
    throw Error("config key '" + key + "': trailing characters in '" + v + "'");
  return out;
}

std::vector<double> KeyValueConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::string v = get(key);
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw Error("config key '" + key + "': empty list entry in '" + v + "'");
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error("config key '" + key + "': cannot parse list entry '" + item + "'");
    }
  }
  return out;
}

KeyValueConfig parse_kv_text(const std::string& text) {
  KeyValueConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                  line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error("config line " + std::to_string(lineno) + ": empty key");
    cfg.entries.emplace_back(key, value);
  }
  return cfg;
}

KeyValueConfig load_kv_file(const std::string& path) {
  return parse_kv_text(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("read error on '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error("write error on '" + path + "'");
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw Error("csv row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                  " fields, header has " + std::to_string(header.size()));
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      if (i) out += ',';
      out += rows[r][i];
    }
    out += '\n';
  }
  return out;
}

std::string pgm_from_pattern(const BinaryPattern& p) {
  std::string out = "P2\n" + std::to_string(p.grid.nx) + " " + std::to_string(p.grid.ny) +
                    "\n255\n";
  for (int j = p.grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < p.grid.nx; ++i) {
      if (i) out += ' ';
      const bool on = p.grid.is_inside(i, j) && p.u[p.grid.index(i, j)];
      out += on ? "255" : "0";
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string svg_coord(double v) { return format_double(v, 8); }

}  // namespace

std::string svg_pattern(const BinaryPattern& p, const InterfaceSet* interfaces) {
  const Grid& g = p.grid;
  const double x0 = g.x0, y1 = g.y0 + g.ny * g.h;
  const double w = g.nx * g.h, h = g.ny * g.h;
  // World (x, y) maps to SVG (x - x0, y1 - y): y flips so north stays up.
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + svg_coord(w) + " " +
         svg_coord(h) + "\" width=\"720\" height=\"" + svg_coord(720.0 * h / w) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + svg_coord(w) + "\" height=\"" + svg_coord(h) +
         "\" fill=\"#f4f1ea\"/>\n";
  // Phase-1 cells as run-length merged rectangles.
  out += "<g fill=\"#30588c\" stroke=\"none\">\n";
  for (int j = 0; j < g.ny; ++j) {
    int run = -1;
    for (int i = 0; i <= g.nx; ++i) {
      const bool on = i < g.nx && g.is_inside(i, j) && p.u[g.index(i, j)];
      if (on && run < 0) run = i;
      if (!on && run >= 0) {
        const double rx = g.x0 + run * g.h;
        const double ry = g.y0 + (j + 1) * g.h;
        out += "<rect x=\"" + svg_coord(rx - x0) + "\" y=\"" + svg_coord(y1 - ry) +
               "\" width=\"" + svg_coord((i - run) * g.h) + "\" height=\"" + svg_coord(g.h) +
               "\"/>\n";
        run = -1;
      }
    }
  }
  out += "</g>\n";
  if (interfaces) {
    out += "<g fill=\"none\" stroke=\"#c23b22\" stroke-width=\"" + svg_coord(0.5 * g.h) +
           "\">\n";
    const double jump2 = 0.25 * std::min(w * w, h * h);
    for (const InterfaceLoop& loop : interfaces->loops) {
      std::string pts;
      Vec2 prev;
      bool open = false;
      for (std::size_t i = 0; i <= loop.pts.size(); ++i) {
        const bool wrap_end = i == loop.pts.size();
        const Vec2 q = wrap_end ? loop.pts[0] : loop.pts[i];
        // Split polylines at seam jumps of periodic loops.
        if (open && (q - prev).norm2() > jump2) {
          out += "<polyline points=\"" + pts + "\"/>\n";
          pts.clear();
          open = false;
        }
        if (wrap_end && !open) break;
        if (!pts.empty()) pts += ' ';
        pts += svg_coord(q.x - x0) + "," + svg_coord(y1 - q.y);
        prev = q;
        open = true;
      }
      if (!pts.empty()) out += "<polyline points=\"" + pts + "\"/>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string svg_convergence_plot(const std::vector<double>& eps,
                                 const std::vector<double>& g_values, double g0,
                                 const std::string& title) {
  if (eps.size() != g_values.size())
    throw Error("convergence plot: " + std::to_string(eps.size()) + " eps vs " +
                std::to_string(g_values.size()) + " values");
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double ymin = g0, ymax = g0;
  for (double v : g_values) {
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  const double pad = std::max(1e-12, 0.1 * (ymax - ymin));
  ymin -= pad;
  ymax += pad;
  // x axis: log2(1/eps), increasing resolution to the right.
  std::vector<double> xs(eps.size());
  double xmin = 1e300, xmax = -1e300;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] <= 0.0) throw Error("convergence plot: eps <= 0");
    xs[i] = std::log2(1.0 / eps[i]);
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  const auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  const auto Y = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + svg_coord(W) + " " +
         svg_coord(H) + "\" width=\"" + svg_coord(W) + "\" height=\"" + svg_coord(H) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + svg_coord(W) + "\" height=\"" + svg_coord(H) +
         "\" fill=\"white\"/>\n";
  out += "<text x=\"" + svg_coord(W / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";
  // Axes.
  out += "<g stroke=\"#333\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + svg_coord(ml) + "\" y1=\"" + svg_coord(H - mb) + "\" x2=\"" +
         svg_coord(W - mr) + "\" y2=\"" + svg_coord(H - mb) + "\"/>\n";
  out += "<line x1=\"" + svg_coord(ml) + "\" y1=\"" + svg_coord(mt) + "\" x2=\"" +
         svg_coord(ml) + "\" y2=\"" + svg_coord(H - mb) + "\"/>\n";
  out += "</g>\n";
  // Reference level.
  out += "<line x1=\"" + svg_coord(ml) + "\" y1=\"" + svg_coord(Y(g0)) + "\" x2=\"" +
         svg_coord(W - mr) + "\" y2=\"" + svg_coord(Y(g0)) +
         "\" stroke=\"#999\" stroke-dasharray=\"6,4\"/>\n";
  out += "<text x=\"" + svg_coord(W - mr) + "\" y=\"" + svg_coord(Y(g0) - 6) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#666\">"
         "limit " + format_double(g0, 6) + "</text>\n";
  // Data.
  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!pts.empty()) pts += ' ';
    pts += svg_coord(X(xs[i])) + "," + svg_coord(Y(g_values[i]));
  }
  out += "<polyline points=\"" + pts +
         "\" fill=\"none\" stroke=\"#30588c\" stroke-width=\"2\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += "<circle cx=\"" + svg_coord(X(xs[i])) + "\" cy=\"" + svg_coord(Y(g_values[i])) +
           "\" r=\"4\" fill=\"#c23b22\"/>\n";
    out += "<text x=\"" + svg_coord(X(xs[i])) + "\" y=\"" + svg_coord(H - mb + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1/" +
           format_double(1.0 / eps[i], 6) + "</text>\n";
  }
  for (double v : {ymin + pad, ymax - pad}) {
    out += "<text x=\"" + svg_coord(ml - 8) + "\" y=\"" + svg_coord(Y(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
           format_double(v, 6) + "</text>\n";
  }
  out += "<text x=\"" + svg_coord((ml + W - mr) / 2) + "\" y=\"" + svg_coord(H - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">1/eps</text>\n";
  out += "</svg>\n";
  return out;
}

std::string json_energy_report(const EnergyReport& r) {
  nlohmann::ordered_json j;
  j["eps"] = r.eps;
  j["area"] = r.area;
  j["perimeter"] = r.perimeter;
  j["perimeter_source"] = r.perimeter_source;
  j["perimeter_term"] = r.perimeter_term;
  j["transport_term"] = r.transport_term;
  j["d1"] = r.d1;
  j["d1_lower"] = r.d1_lower;
  j["d1_upper"] = r.d1_upper;
  j["d_source"] = r.d_source;
  j["F"] = r.F;
  j["G"] = r.G;
  j["G_lower"] = r.G_lower;
  j["G_upper"] = r.G_upper;
  return j.dump(2) + "\n";
}

std::string json_lower_bound_report(const LowerBoundReport& r) {
  nlohmann::ordered_json j;
  j["t1"] = r.t1;
  j["t2"] = r.t2;
  j["t3"] = r.t3;
  j["total"] = r.total;
  j["basic_total"] = r.basic_total;
  j["covered_arc"] = r.covered_arc;
  j["excluded_fraction"] = r.excluded_fraction;
  j["unreliable"] = r.unreliable;
  j["samples"] = r.samples;
  nlohmann::ordered_json curves = nlohmann::ordered_json::array();
  for (const CurveTerms& c : r.per_curve) {
    nlohmann::ordered_json e;
    e["t1"] = c.t1;
    e["t2"] = c.t2;
    e["t3"] = c.t3;
    curves.push_back(e);
  }
  j["per_curve"] = curves;
  return j.dump(2) + "\n";
}

std::string json_k0_report(const K0Report& r) {
  nlohmann::ordered_json j;
  j["sym_max"] = r.sym_max;
  j["idem_max"] = r.idem_max;
  j["trace_max"] = r.trace_max;
  j["div_l2_sq"] = r.div_l2_sq;
  j["div_l2"] = r.div_l2;
  j["excluded_fraction"] = r.excluded_fraction;
  j["pdivp_max"] = r.pdivp_max;
  j["pdivp_l2"] = r.pdivp_l2;
  j["trace_bc_max"] = r.trace_bc_max;
  j["boundary_cells"] = r.boundary_cells;
  j["inside_cells"] = r.inside_cells;
  j["h"] = r.h;
  j["violation"] = r.violation;
  j["pass"] = r.pass();
  return j.dump(2) + "\n";
}

std::string json_error_record(const std::string& stage, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"]["stage"] = stage;
  j["error"]["message"] = message;
  return j.dump(2) + "\n";
}

}  // namespace stripes
