// SPDX-License-Identifier: Apache-2.0
#pragma once

// Plain-text formats. Metadata lines start with '#' and hold key=value.
//
//   SOPOT trace:   # N=..  # B_max=..  # scale_exponent=..   index,depth,sign
//   Filter:        # M=..  # K_ov=..   # energy=..           index,value

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sopot_fbmc/errors.hpp"
#include "sopot_fbmc/fbmc.hpp"
#include "sopot_fbmc/sopot.hpp"

namespace sopot::io {

// 12 significant digits; experiment outputs.
inline std::string format_g12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Shortest form that parses back to the same double.
inline std::string format_exact(double x) {
  char buf[64];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw format_error("not a number: '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw format_error("not an integer: '" + s + "'");
  return v;
}

struct CsvDocument {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvDocument read_csv(std::istream& in) {
  CsvDocument doc;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# ") == std::string::npos ? line.size() : line.find_first_not_of("# "));
      if (const auto eq = body.find('='); eq != std::string::npos) doc.meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (doc.header.empty()) {
      doc.header = split(line);
      continue;
    }
    auto fields = split(line);
    if (fields.size() != doc.header.size())
      throw format_error("row has " + std::to_string(fields.size()) + " fields, header has " + std::to_string(doc.header.size()));
    doc.rows.push_back(std::move(fields));
  }
  if (doc.header.empty()) throw format_error("missing CSV header");
  return doc;
}

inline const std::string& require_meta(const CsvDocument& doc, const std::string& key) {
  const auto it = doc.meta.find(key);
  if (it == doc.meta.end()) throw format_error("missing metadata '" + key + "'");
  return it->second;
}

inline void expect_header(const CsvDocument& doc, const std::vector<std::string>& header) {
  if (doc.header != header) throw format_error("unexpected CSV header");
}

// ---------------------------------------------------------------------------
// SOPOT trace

inline void write_trace(std::ostream& out, const SopotApprox& a) {
  out << "# N=" << a.length() << '\n'
      << "# B_max=" << a.depth_limit() << '\n'
      << "# scale_exponent=" << a.scale_exponent() << '\n'
      << "index,depth,sign\n";
  for (const auto& t : a.terms()) out << t.position << ',' << t.depth << ',' << t.sign << '\n';
}

inline SopotApprox read_trace(std::istream& in) {
  const auto doc = read_csv(in);
  expect_header(doc, {"index", "depth", "sign"});
  std::vector<SptTerm> terms;
  terms.reserve(doc.rows.size());
  for (const auto& r : doc.rows) {
    const auto pos = parse_int(r[0]);
    if (pos < 0) throw format_error("negative trace index");
    terms.push_back({static_cast<std::size_t>(pos), static_cast<int>(parse_int(r[1])), static_cast<int>(parse_int(r[2]))});
  }
  const auto n = parse_int(require_meta(doc, "N"));
  if (n < 0) throw format_error("negative vector length");
  return SopotApprox(static_cast<std::size_t>(n), static_cast<int>(parse_int(require_meta(doc, "B_max"))), std::move(terms),
                     static_cast<int>(parse_int(require_meta(doc, "scale_exponent"))));
}

// ---------------------------------------------------------------------------
// Prototype filter

inline void write_filter(std::ostream& out, const fbmc::PrototypeFilter& g) {
  out << "# M=" << g.subcarriers() << '\n'
      << "# K_ov=" << g.overlap() << '\n'
      << "# energy=" << format_exact(g.energy()) << '\n'
      << "index,value\n";
  for (std::size_t m = 0; m < g.length(); ++m) out << m << ',' << format_exact(g[m]) << '\n';
}

inline fbmc::PrototypeFilter read_filter(std::istream& in) {
  const auto doc = read_csv(in);
  expect_header(doc, {"index", "value"});
  std::vector<double> values(doc.rows.size());
  for (std::size_t i = 0; i < doc.rows.size(); ++i) {
    if (parse_int(doc.rows[i][0]) != static_cast<std::int64_t>(i)) throw format_error("filter indices must be 0..L-1 in order");
    values[i] = parse_double(doc.rows[i][1]);
  }
  const auto M = parse_int(require_meta(doc, "M"));
  const auto K = parse_int(require_meta(doc, "K_ov"));
  if (M <= 0 || K <= 0) throw format_error("M and K_ov must be positive");
  return fbmc::PrototypeFilter(std::move(values), static_cast<std::size_t>(M), static_cast<std::size_t>(K));
}

// ---------------------------------------------------------------------------
// File helpers

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot open '" + path + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw format_error("write to '" + path + "' failed");
}

template <typename Fn>
auto read_file(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open '" + path + "' for reading");
  return fn(in);
}

} // namespace sopot::io
