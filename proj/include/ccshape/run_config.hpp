#pragma once

// Run configuration file (JSON). Example:
//
//   {
//     "schema_version": 1,
//     "n": 3, "dim": 2, "masses": "equal",
//     "sampling": "uniform_ball", "master_seed": 1,
//     "grad_tol": 1e-10, "max_iterations": 50000, "starts": 100,
//     "mode": "all_critical",
//     "band": {"lo": 1.0, "hi": 1.015, "relative": true},
//     "saddle_sigmas": [0.01, 0.03, 0.1], "saddle_starts": 0,
//     "threads": 1, "dense_limit": 3000,
//     "analysis": {"bins": 10, "gap": 0.15, "inner_fraction": 0.7, "voids": 5},
//     "output_dir": "out"
//   }
//
// Only schema_version and n are required. Unknown keys are errors.

#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "ccshape/cc_solver.hpp"
#include "ccshape/structure_analysis.hpp"

namespace ccshape {

inline constexpr int kRunConfigSchemaVersion = 1;

struct AnalysisOptions {
  int bins = 10;
  double gap = kDefaultTierGap;
  double inner_fraction = 0.7;
  int voids = 5;
};

struct RunConfig {
  SolverConfig solver;
  SearchMode mode = SearchMode::minima;
  std::optional<TargetBand> band;
  AnalysisOptions analysis;
  std::string output_dir;  // empty: not set
};

/// Parse or validation failure; `line` is 0 when no position is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string field, const std::string& what)
      : std::runtime_error(format(line, field, what)), line_(line), field_(std::move(field)) {}

  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field, const std::string& what) {
    std::string s;
    if (line) s += "line " + std::to_string(line) + ": ";
    if (!field.empty()) s += "field '" + field + "': ";
    return s + what;
  }

  std::size_t line_;
  std::string field_;
};

namespace detail {

using nlohmann::json;

// 1-based line of the first `"key"` occurring after `from`; 0 if absent.
inline std::size_t key_line(std::string_view text, std::string_view key, std::size_t from = 0) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted, from);
  if (pos == std::string_view::npos) return 0;
  std::size_t line = 1;
  for (std::size_t k = 0; k < pos; ++k) line += text[k] == '\n';
  return line;
}

class ConfigReader {
 public:
  ConfigReader(std::string_view text, const json& obj, std::string prefix = {})
      : text_(text), obj_(obj), prefix_(std::move(prefix)) {
    if (!prefix_.empty()) from_ = text_.find("\"" + prefix_.substr(0, prefix_.size() - 1) + "\"");
    if (from_ == std::string_view::npos) from_ = 0;
  }

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    throw ConfigError(key_line(text_, key, from_), prefix_ + std::string(key), what);
  }

  [[nodiscard]] const json* get(std::string_view key) const {
    const auto it = obj_.find(std::string(key));
    return it == obj_.end() ? nullptr : &*it;
  }

  void reject_unknown(std::initializer_list<std::string_view> known) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool ok = false;
      for (auto k : known) ok = ok || it.key() == k;
      if (!ok) fail(it.key(), "unknown key");
    }
  }

  template <class T>
  void read_int(std::string_view key, T& out) const {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_number_integer()) fail(key, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
      out = v->get<T>();
    } else {
      const auto i = v->get<std::int64_t>();
      if (i < std::numeric_limits<T>::min() || i > std::numeric_limits<T>::max()) fail(key, "out of range");
      out = static_cast<T>(i);
    }
  }

  void read_double(std::string_view key, double& out) const {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_number()) fail(key, "expected a number");
    out = v->get<double>();
  }

  void read_bool(std::string_view key, bool& out) const {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_boolean()) fail(key, "expected true or false");
    out = v->get<bool>();
  }

  void read_string(std::string_view key, std::string& out) const {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_string()) fail(key, "expected a string");
    out = v->get<std::string>();
  }

  void read_doubles(std::string_view key, std::vector<double>& out) const {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_array()) fail(key, "expected an array of numbers");
    out.clear();
    for (const auto& e : *v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  [[nodiscard]] std::string_view text() const { return text_; }

 private:
  std::string_view text_;
  const json& obj_;
  std::string prefix_;
  std::size_t from_ = 0;
};

}  // namespace detail

/// Parse and validate a run configuration. Throws ConfigError naming the line
/// (when locatable) and the offending field.
inline RunConfig parse_run_config(std::string_view text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t k = 0; k + 1 < upto; ++k) line += text[k] == '\n';
    throw ConfigError(line, "", "malformed JSON");
  }
  if (!doc.is_object()) throw ConfigError(1, "", "top level must be an object");

  const detail::ConfigReader r(text, doc);
  r.reject_unknown({"schema_version", "n", "dim", "masses", "sampling", "master_seed", "grad_tol", "max_iterations",
                    "starts", "mode", "band", "saddle_sigmas", "saddle_starts", "threads", "dense_limit",
                    "analysis", "output_dir"});

  if (!r.get("schema_version")) throw ConfigError(0, "schema_version", "missing");
  int version = 0;
  r.read_int("schema_version", version);
  if (version != kRunConfigSchemaVersion) {
    r.fail("schema_version", "unsupported version " + std::to_string(version));
  }
  if (!r.get("n")) throw ConfigError(0, "n", "missing");

  RunConfig rc;
  auto& s = rc.solver;
  r.read_int("n", s.n);
  r.read_int("dim", s.dim);
  if (const auto* m = r.get("masses")) {
    if (m->is_string()) {
      if (m->get<std::string>() != "equal") r.fail("masses", "expected \"equal\" or an array of numbers");
    } else {
      r.read_doubles("masses", s.masses);
    }
  }
  std::string text_value;
  r.read_string("sampling", text_value);
  if (!text_value.empty()) {
    if (text_value == "uniform_ball") {
      s.sampling = Sampling::uniform_ball;
    } else if (text_value == "jittered_lattice") {
      s.sampling = Sampling::jittered_lattice;
    } else {
      r.fail("sampling", "expected \"uniform_ball\" or \"jittered_lattice\"");
    }
  }
  r.read_int("master_seed", s.master_seed);
  r.read_double("grad_tol", s.grad_tol);
  r.read_int("max_iterations", s.max_iterations);
  r.read_int("starts", s.starts);
  text_value.clear();
  r.read_string("mode", text_value);
  if (!text_value.empty()) {
    if (text_value == "minima") {
      rc.mode = SearchMode::minima;
    } else if (text_value == "all_critical") {
      rc.mode = SearchMode::all_critical;
    } else {
      r.fail("mode", "expected \"minima\" or \"all_critical\"");
    }
  }
  if (const auto* b = r.get("band"); b && !b->is_null()) {
    if (!b->is_object()) r.fail("band", "expected an object or null");
    const detail::ConfigReader br(text, *b, "band.");
    br.reject_unknown({"lo", "hi", "relative"});
    TargetBand band;
    br.read_double("lo", band.lo);
    br.read_double("hi", band.hi);
    br.read_bool("relative", band.relative);
    if (!(band.hi >= band.lo)) br.fail("hi", "must be >= lo");
    rc.band = band;
  }
  r.read_doubles("saddle_sigmas", s.saddle_sigmas);
  r.read_int("saddle_starts", s.saddle_starts);
  r.read_int("threads", s.threads);
  r.read_int("dense_limit", s.dense_limit);
  if (const auto* a = r.get("analysis")) {
    if (!a->is_object()) r.fail("analysis", "expected an object");
    const detail::ConfigReader ar(text, *a, "analysis.");
    ar.reject_unknown({"bins", "gap", "inner_fraction", "voids"});
    ar.read_int("bins", rc.analysis.bins);
    ar.read_double("gap", rc.analysis.gap);
    ar.read_double("inner_fraction", rc.analysis.inner_fraction);
    ar.read_int("voids", rc.analysis.voids);
    if (rc.analysis.bins < 2) ar.fail("bins", "must be >= 2");
    if (!(rc.analysis.gap > 0.0)) ar.fail("gap", "must be > 0");
    if (!(rc.analysis.inner_fraction > 0.0 && rc.analysis.inner_fraction <= 1.0)) {
      ar.fail("inner_fraction", "must be in (0, 1]");
    }
    if (rc.analysis.voids < 0) ar.fail("voids", "must be >= 0");
  }
  r.read_string("output_dir", rc.output_dir);

  try {
    s.validate();
  } catch (const InvalidConfiguration& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    const std::string field = colon == std::string::npos ? "" : msg.substr(0, colon);
    const std::string what = colon == std::string::npos ? msg : msg.substr(colon + 2);
    throw ConfigError(field.empty() ? 0 : detail::key_line(text, field), field, what);
  }
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace ccshape
