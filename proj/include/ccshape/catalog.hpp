#pragma once

// On-disk catalog of critical points.
//
//   <root>/<namespace>/<id>.json            metadata
//   <root>/<namespace>/<id>.positions.csv   positions and masses (see csv_io.hpp)
//   <root>/<namespace>/index.csv            id,complexity,ratio,index,zero_modes,residual sorted by C
//   <root>/<namespace>/.lock                advisory write lock
//
// A namespace groups records with the same N, dimension and masses
// ("N100-d2-equal", or "N3-d2-m<hash>" for explicit masses); ids are
// "<namespace>-<16 hex digits>". Writers hold an exclusive flock on the
// namespace lock file; readers take no lock.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccshape/cc_solver.hpp"
#include "ccshape/csv_io.hpp"
#include "ccshape/fingerprint.hpp"

namespace ccshape {

namespace fs = std::filesystem;

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CatalogRecord {
  std::string id;
  std::string space;  // namespace
  MassConfiguration config;
  ShapeFingerprint fingerprint;  // recomputed from the stored positions
  double complexity = 0.0;
  double residual = 0.0;
  int index = -1;
  int zero_modes = 0;
  bool degenerate = false;
  std::uint64_t fingerprint_hash = 0;
  std::string timestamp;
  nlohmann::json solver;  // settings of the run that found it
  Provenance provenance;
};

struct CatalogAddResult {
  std::vector<std::string> added;
  int duplicates = 0;
};

namespace detail {

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CatalogError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw CatalogError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw CatalogError("cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw CatalogError("cannot lock " + path.string());
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

 private:
  int fd_ = -1;
};

inline const char* sampling_name(Sampling s) {
  return s == Sampling::uniform_ball ? "uniform_ball" : "jittered_lattice";
}

}  // namespace detail

/// Namespace for a given particle count, dimension and mass list (empty: equal).
inline std::string catalog_namespace(int n, int dim, const std::vector<double>& masses) {
  std::string ns = "N" + std::to_string(n) + "-d" + std::to_string(dim) + "-";
  bool equal = masses.empty();
  if (!equal) {
    equal = std::all_of(masses.begin(), masses.end(), [&](double m) { return m == masses.front(); });
  }
  if (equal) return ns + "equal";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double m : masses) {
    for (char ch : format_double(m)) {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
    h ^= ',';
    h *= 0x100000001b3ULL;
  }
  return ns + "m" + detail::hex16(h).substr(0, 8);
}

inline std::string catalog_namespace(const SolverConfig& cfg) { return catalog_namespace(cfg.n, cfg.dim, cfg.masses); }

class Catalog {
 public:
  explicit Catalog(fs::path root) : root_(std::move(root)) {}

  [[nodiscard]] const fs::path& root() const { return root_; }

  [[nodiscard]] std::vector<std::string> namespaces() const {
    std::vector<std::string> out;
    if (!fs::is_directory(root_)) return out;
    for (const auto& e : fs::directory_iterator(root_)) {
      if (e.is_directory()) out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Records of one namespace, ascending by (C, id).
  [[nodiscard]] std::vector<CatalogRecord> records(const std::string& space) const {
    std::vector<CatalogRecord> out;
    const fs::path dir = root_ / space;
    if (!fs::is_directory(dir)) return out;
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      constexpr std::string_view suffix = ".json";
      if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
        ids.push_back(name.substr(0, name.size() - suffix.size()));
      }
    }
    for (const auto& id : ids) out.push_back(load(space, id));
    sort_records(out);
    return out;
  }

  /// All records, grouped by namespace (sorted) and ascending by C within each.
  [[nodiscard]] std::vector<CatalogRecord> all_records() const {
    std::vector<CatalogRecord> out;
    for (const auto& ns : namespaces()) {
      auto r = records(ns);
      out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return out;
  }

  [[nodiscard]] std::optional<CatalogRecord> find(const std::string& id) const {
    const auto dash = id.rfind('-');
    if (dash == std::string::npos || dash == 0) return std::nullopt;
    const std::string space = id.substr(0, dash);
    if (!fs::exists(root_ / space / (id + ".json"))) return std::nullopt;
    return load(space, id);
  }

  /// Lowest C stored in a namespace.
  [[nodiscard]] double c_min(const std::string& space) const {
    const auto r = records(space);
    return r.empty() ? INFINITY : r.front().complexity;
  }

  /// Adds every point whose fingerprint does not match a stored record of the
  /// same namespace. Non-converged points are skipped.
  CatalogAddResult add(const SolverConfig& cfg, const std::vector<CriticalPoint>& points) {
    CatalogAddResult result;
    const std::string space = catalog_namespace(cfg);
    const fs::path dir = root_ / space;
    fs::create_directories(dir);
    detail::FileLock lock(dir / ".lock");

    auto existing = records(space);
    const std::string stamp = detail::utc_timestamp();
    for (const auto& p : points) {
      if (!p.converged) continue;
      const bool dup = std::any_of(existing.begin(), existing.end(),
                                   [&](const CatalogRecord& r) { return r.fingerprint.matches(p.fingerprint); });
      if (dup) {
        ++result.duplicates;
        continue;
      }
      CatalogRecord rec;
      rec.space = space;
      rec.config = p.shape.config;
      rec.fingerprint = p.fingerprint;
      rec.complexity = p.complexity;
      rec.residual = p.residual;
      rec.index = p.index;
      rec.zero_modes = p.zero_modes;
      rec.degenerate = p.degenerate;
      rec.fingerprint_hash = p.fingerprint.hash();
      rec.timestamp = stamp;
      rec.solver = solver_settings(cfg);
      rec.provenance = p.provenance;
      rec.id = unique_id(space, rec.fingerprint_hash);
      store(rec);
      result.added.push_back(rec.id);
      existing.push_back(std::move(rec));
    }
    sort_records(existing);
    write_index(space, existing);
    return result;
  }

  static nlohmann::json solver_settings(const SolverConfig& cfg) {
    return {{"n", cfg.n},
            {"dim", cfg.dim},
            {"masses", cfg.masses.empty() ? nlohmann::json("equal") : nlohmann::json(cfg.masses)},
            {"sampling", detail::sampling_name(cfg.sampling)},
            {"master_seed", cfg.master_seed},
            {"grad_tol", cfg.grad_tol},
            {"max_iterations", cfg.max_iterations},
            {"starts", cfg.starts},
            {"saddle_sigmas", cfg.saddle_sigmas},
            {"saddle_starts", cfg.saddle_starts}};
  }

 private:
  static void sort_records(std::vector<CatalogRecord>& r) {
    std::sort(r.begin(), r.end(), [](const CatalogRecord& a, const CatalogRecord& b) {
      if (a.complexity != b.complexity) return a.complexity < b.complexity;
      return a.id < b.id;
    });
  }

  [[nodiscard]] std::string unique_id(const std::string& space, std::uint64_t hash) const {
    std::string id = space + "-" + detail::hex16(hash);
    // distinct shapes with equal quantized hashes: probe successive values
    while (fs::exists(root_ / space / (id + ".json"))) id = space + "-" + detail::hex16(++hash);
    return id;
  }

  void store(const CatalogRecord& r) const {
    const fs::path dir = root_ / r.space;
    std::ostringstream csv;
    write_positions_csv(csv, r.config, true);
    detail::write_file_atomic(dir / (r.id + ".positions.csv"), csv.str());

    nlohmann::json meta = {
        {"id", r.id},
        {"namespace", r.space},
        {"n", r.config.size()},
        {"dim", r.config.dim()},
        {"masses", std::vector<double>(r.config.masses().begin(), r.config.masses().end())},
        {"complexity", r.complexity},
        {"residual", r.residual},
        {"index", r.index},
        {"zero_modes", r.zero_modes},
        {"degenerate", r.degenerate},
        {"fingerprint_hash", detail::hex16(r.fingerprint_hash)},
        {"timestamp", r.timestamp},
        {"solver", r.solver},
        {"provenance",
         {{"seed", r.provenance.seed},
          {"start_index", r.provenance.start_index},
          {"iterations", r.provenance.iterations},
          {"wall_seconds", r.provenance.wall_seconds},
          {"method", r.provenance.method},
          {"sigma", r.provenance.sigma}}}};
    detail::write_file_atomic(dir / (r.id + ".json"), meta.dump(2) + "\n");
  }

  [[nodiscard]] CatalogRecord load(const std::string& space, const std::string& id) const {
    const fs::path dir = root_ / space;
    std::ifstream in(dir / (id + ".json"));
    if (!in) throw CatalogError("cannot read record " + id);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw CatalogError("record " + id + ": " + e.what());
    }
    CatalogRecord r;
    r.id = id;
    r.space = space;
    r.config = read_positions_csv((dir / (id + ".positions.csv")).string());
    r.fingerprint = fingerprint(r.config);
    r.complexity = meta.at("complexity").get<double>();
    r.residual = meta.at("residual").get<double>();
    r.index = meta.at("index").get<int>();
    r.zero_modes = meta.at("zero_modes").get<int>();
    r.degenerate = meta.value("degenerate", false);
    r.fingerprint_hash = std::stoull(meta.at("fingerprint_hash").get<std::string>(), nullptr, 16);
    r.timestamp = meta.value("timestamp", "");
    r.solver = meta.value("solver", nlohmann::json::object());
    if (const auto it = meta.find("provenance"); it != meta.end()) {
      r.provenance.seed = it->value("seed", std::uint64_t{0});
      r.provenance.start_index = it->value("start_index", -1);
      r.provenance.iterations = it->value("iterations", 0);
      r.provenance.wall_seconds = it->value("wall_seconds", 0.0);
      r.provenance.method = it->value("method", "");
      r.provenance.sigma = it->value("sigma", 0.0);
    }
    return r;
  }

  void write_index(const std::string& space, const std::vector<CatalogRecord>& sorted) const {
    std::ostringstream os;
    os << "id,complexity,ratio,index,zero_modes,residual\n";
    const double cmin = sorted.empty() ? 1.0 : sorted.front().complexity;
    for (const auto& r : sorted) {
      os << r.id << ',' << format_double(r.complexity) << ',' << format_double(r.complexity / cmin) << ','
         << r.index << ',' << r.zero_modes << ',' << format_double(r.residual) << '\n';
    }
    detail::write_file_atomic(root_ / space / "index.csv", os.str());
  }

  fs::path root_;
};

}  // namespace ccshape
