#pragma once

// Persistence: key-value configs, deterministic CSV tables, JSON report
// serialization, SVG plots and pattern renderings, PGM dumps, and content
// hashes for the output manifest.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stripes/common.hpp"
#include "stripes/energy.hpp"
#include "stripes/grid.hpp"
#include "stripes/interface.hpp"
#include "stripes/linefield.hpp"
#include "stripes/pattern.hpp"

namespace stripes {

// Key-value config text: one `key = value` pair per line, `#` comments.
// Unknown keys are the caller's to reject (parse preserves order).
struct KeyValueConfig {
  std::vector<std::pair<std::string, std::string>> entries;

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> get_list(const std::string& key) const;  // comma-separated
};

KeyValueConfig parse_kv_text(const std::string& text);
KeyValueConfig load_kv_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit content hash (hex string); non-cryptographic, used to bind
// manifest entries to file contents.
std::string fnv1a64_hex(const std::string& bytes);

// Fixed-format CSV: %.12g for doubles, deterministic row order is the
// caller's responsibility.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

// Renders a binary pattern as PGM (P2, one cell per pixel, 0/255).
std::string pgm_from_pattern(const BinaryPattern& p);

// Simple SVG renderings.
std::string svg_pattern(const BinaryPattern& p, const InterfaceSet* interfaces);
std::string svg_convergence_plot(const std::vector<double>& eps,
                                 const std::vector<double>& g_values, double g0,
                                 const std::string& title);

// JSON serialization of the report types (implemented with a vendored JSON
// library in the source file; the interface stays plain strings).
std::string json_energy_report(const EnergyReport& r);
std::string json_lower_bound_report(const LowerBoundReport& r);
std::string json_k0_report(const K0Report& r);
std::string json_error_record(const std::string& stage, const std::string& message);

}  // namespace stripes
