#pragma once

// Positions CSV. Header is one of
//   x,y        x,y,mass        x,y,z        x,y,z,mass
// followed by one row per particle. Numbers are written with 17 significant
// digits so doubles round-trip exactly. A missing mass column means equal masses.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccshape/shape_core.hpp"

namespace ccshape {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string positions_csv_header(int dim, bool with_mass) {
  std::string h = dim == 2 ? "x,y" : "x,y,z";
  if (with_mass) h += ",mass";
  return h;
}

inline void write_positions_csv(std::ostream& os, const MassConfiguration& c, bool with_mass = true) {
  os << positions_csv_header(c.dim(), with_mass) << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int a = 0; a < c.dim(); ++a) {
      if (a) os << ',';
      os << format_double(c.coord(i, a));
    }
    if (with_mass) os << ',' << format_double(c.masses()[i]);
    os << '\n';
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) {
    throw CsvError("line " + std::to_string(line) + ": not a number: '" + std::string(s) + "'");
  }
  if (!std::isfinite(v)) throw CsvError("line " + std::to_string(line) + ": not finite: '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline MassConfiguration read_positions_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  int dim = 0;
  bool with_mass = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    if (t == "x,y") {
      dim = 2;
    } else if (t == "x,y,mass") {
      dim = 2, with_mass = true;
    } else if (t == "x,y,z") {
      dim = 3;
    } else if (t == "x,y,z,mass") {
      dim = 3, with_mass = true;
    } else {
      throw CsvError("line " + std::to_string(lineno) + ": expected header x,y[,z][,mass]");
    }
    break;
  }
  if (dim == 0) throw CsvError("empty positions file");
  const std::size_t cols = static_cast<std::size_t>(dim) + (with_mass ? 1 : 0);
  std::vector<double> pos, mass;
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto f = detail::split_commas(t);
    if (f.size() != cols) {
      throw CsvError("line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " columns, got " +
                     std::to_string(f.size()));
    }
    for (int a = 0; a < dim; ++a) pos.push_back(detail::parse_double(f[static_cast<std::size_t>(a)], lineno));
    if (with_mass) mass.push_back(detail::parse_double(f.back(), lineno));
  }
  const std::size_t n = pos.size() / static_cast<std::size_t>(dim);
  if (!with_mass) mass.assign(n, 1.0 / static_cast<double>(n));
  return MassConfiguration(dim, std::move(mass), std::move(pos));
}

inline MassConfiguration read_positions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path);
  return read_positions_csv(in);
}

}  // namespace ccshape
