// ccshape: solve for central configurations, keep them in a catalog, analyze
// and render them.
//
//   ccshape [--dir DIR] solve <config.json>
//   ccshape [--dir DIR] analyze <id|positions.csv> [--config run.json] [--bins B] [--gap G]
//                       [--inner-fraction F] [--voids K]
//   ccshape [--dir DIR] render <id|positions.csv> -o <file.svg> [--tiers|--no-tiers] [--point-radius R]
//   ccshape [--dir DIR] catalog list | show <id> | export <id> [-o file.csv]
//
// Output directory: --dir, else $CCSHAPE_OUTPUT_DIR, else the config's
// output_dir (solve only), else ./ccshape-out.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccshape/ccshape.hpp"

namespace fs = std::filesystem;
using namespace ccshape;

namespace {

std::string output_dir(const std::string& flag, const std::string& from_config = {}) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CCSHAPE_OUTPUT_DIR"); env && *env) return env;
  if (!from_config.empty()) return from_config;
  return "ccshape-out";
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const char* mode_name(SearchMode m) { return m == SearchMode::minima ? "minima" : "all_critical"; }

int cmd_solve(const std::string& dir_flag, const std::string& path) {
  RunConfig rc;
  try {
    rc = load_run_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << path << ": " << e.what() << "\n";
    return 1;
  }
  const auto& cfg = rc.solver;
  const SearchSummary s = multi_start_search(cfg, rc.mode, rc.band);

  std::ostringstream out;
  out << "N=" << cfg.n << " d=" << cfg.dim << " masses=" << (cfg.masses.empty() ? "equal" : "explicit")
      << " mode=" << mode_name(rc.mode) << " starts=" << cfg.starts << " seed=" << cfg.master_seed << "\n";
  if (rc.band) {
    out << "band=[" << format_double(rc.band->lo) << ", " << format_double(rc.band->hi) << "]"
        << (rc.band->relative ? " x C_min" : "") << "\n";
  }
  out << "attempted " << s.attempted << "  converged " << s.converged << "  failed " << s.failed << "  duplicates "
      << s.duplicates << "  out_of_band " << s.out_of_band << "\n";
  out << "C_min_hat " << (s.points.empty() ? std::string("none") : format_double(s.c_min_hat)) << "\n";
  out << "rank  C                     C/C_min      index  zero_modes  residual\n";
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const auto& p = s.points[k];
    char line[160];
    std::snprintf(line, sizeof line, "%4zu  %.17f  %.9f  %5d  %10d  %.3e%s\n", k + 1, p.complexity,
                  p.complexity / s.c_min_hat, p.index, p.zero_modes, p.residual, p.degenerate ? "  degenerate" : "");
    out << line;
  }
  std::cout << out.str() << std::flush;

  const fs::path root = fs::path(output_dir(dir_flag, rc.output_dir)) / "catalog";
  try {
    Catalog cat(root);
    const auto added = cat.add(cfg, s.points);
    std::cerr << "catalog " << root.string() << ": " << added.added.size() << " new, " << added.duplicates
              << " already present\n";
  } catch (const std::exception& e) {
    std::cerr << "catalog error: " << e.what() << "\n";
    return 1;
  }
  return s.converged > 0 ? 0 : 2;
}

struct Loaded {
  MassConfiguration config;
  std::string name;
};

// A record id, or else a positions CSV file.
std::optional<Loaded> load_target(const std::string& dir_flag, const std::string& target) {
  Catalog cat(fs::path(output_dir(dir_flag)) / "catalog");
  if (auto rec = cat.find(target)) return Loaded{rec->config, rec->id};
  if (fs::is_regular_file(target)) {
    try {
      return Loaded{read_positions_csv(target), fs::path(target).stem().string()};
    } catch (const std::exception& e) {
      std::cerr << "cannot read " << target << ": " << e.what() << "\n";
      return std::nullopt;
    }
  }
  std::cerr << "no record or file named '" << target << "'\n";
  return std::nullopt;
}

bool write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out.flush());
}

int cmd_analyze(const std::string& dir_flag, const std::string& target, const AnalysisOptions& opt) {
  if (opt.bins < 2) {
    std::cerr << "--bins must be >= 2\n";
    return 1;
  }
  if (!(opt.gap > 0.0)) {
    std::cerr << "--gap must be > 0\n";
    return 1;
  }
  if (!(opt.inner_fraction > 0.0 && opt.inner_fraction <= 1.0)) {
    std::cerr << "--inner-fraction must lie in (0, 1]\n";
    return 1;
  }
  const auto loaded = load_target(dir_flag, target);
  if (!loaded) return 1;
  // lengths below are in units of l_rms about the center of mass
  const auto rep = gauge_fix(loaded->config);
  const auto& c = rep.config;
  const fs::path dir = fs::path(output_dir(dir_flag)) / "analysis" / loaded->name;
  fs::create_directories(dir);

  using nlohmann::json;
  json report;
  report["source"] = target;
  report["n"] = c.size();
  report["dim"] = c.dim();
  report["complexity"] = complexity(c).complexity;
  report["residual"] = cc_residual(c);

  const auto radial = radial_density_profile(c, opt.bins);
  {
    std::ostringstream os;
    os << "bin,r_lo,r_hi,count,density\n";
    for (std::size_t k = 0; k < radial.counts.size(); ++k) {
      os << k << ',' << format_double(radial.edges[k]) << ',' << format_double(radial.edges[k + 1]) << ','
         << radial.counts[k] << ',' << format_double(radial.densities[k]) << '\n';
    }
    write_text(dir / "radial.csv", os.str());
    std::vector<double> mid;
    for (std::size_t k = 0; k < radial.counts.size(); ++k) mid.push_back(0.5 * (radial.edges[k] + radial.edges[k + 1]));
    report["radial"] = {{"bins", opt.bins}, {"spearman_rho", spearman_rank_correlation(mid, radial.densities)}};
  }

  const auto nn = nearest_neighbor_stats(c, opt.inner_fraction);
  report["nearest_neighbor"] = {{"inner_fraction", opt.inner_fraction},
                                {"sampled", nn.sampled},
                                {"mean", nn.sampled ? json(nn.mean) : json(nullptr)},
                                {"cv", nn.sampled ? json(nn.cv) : json(nullptr)}};

  const auto mst = euclidean_mst(c);
  const auto ladder = edge_tier_ladder(mst, opt.gap);
  {
    std::ostringstream os;
    os << "i,j,length,tier\n";
    for (const auto& e : mst.edges) {
      os << e.i << ',' << e.j << ',' << format_double(e.length) << ',' << ladder.tier_of(e.length) + 1 << '\n';
    }
    write_text(dir / "mst.csv", os.str());
  }
  json tiers = json::array();
  for (const auto& t : ladder.tiers) {
    tiers.push_back({{"edges", t.lengths.size()}, {"mean", t.mean}, {"cv", t.cv},
                     {"min", t.lengths.front()}, {"max", t.lengths.back()}});
  }
  report["tier_ladder"] = {{"gap", opt.gap},
                           {"tiers", tiers},
                           {"step_ratios", ladder.step_ratios},
                           {"step_differences", ladder.step_differences},
                           {"median_cv", ladder.median_cv},
                           {"no_ladder", ladder.no_ladder},
                           {"total_weight", mst.total_weight()}};

  if (opt.voids > 0) {
    try {
      const auto vr = void_census(c, opt.voids);
      json voids = json::array();
      for (const auto& v : vr.voids) voids.push_back({{"center", v.center}, {"radius", v.radius}});
      report["voids"] = voids;
    } catch (const DegenerateGeometry& e) {
      report["voids"] = {{"error", e.what()}};
    }
  }
  const auto counting = counting_report(static_cast<long long>(c.size()), c.dim());
  report["counting"] = {{"pairs", counting.pairs}, {"coordinates", counting.coordinates}, {"excess", counting.excess}};

  write_text(dir / "report.json", report.dump(2) + "\n");

  std::cout << "analysis written to " << dir.string() << "\n";
  std::cout << "C " << format_double(report["complexity"].get<double>()) << "  residual "
            << fmt("%.3e", report["residual"].get<double>()) << "\n";
  std::cout << "MST: " << mst.edges.size() << " edges, " << ladder.tiers.size() << " tier(s)"
            << (ladder.no_ladder ? ", no ladder" : "") << "\n";
  for (std::size_t k = 0; k < ladder.tiers.size(); ++k) {
    std::cout << "  tier " << k + 1 << ": " << ladder.tiers[k].lengths.size() << " edges, mean "
              << fmt("%.6f", ladder.tiers[k].mean) << ", cv " << fmt("%.4f", ladder.tiers[k].cv) << "\n";
  }
  std::cout << "counting: " << counting.pairs << " separations, " << counting.coordinates << " coordinates\n";
  return 0;
}

int cmd_render(const std::string& dir_flag, const std::string& target, const std::string& path, bool tiers,
               double radius, double gap) {
  const auto loaded = load_target(dir_flag, target);
  if (!loaded) return 1;
  if (loaded->config.dim() == 3) std::cerr << "warning: 3D configuration drawn as its x-y projection\n";
  SvgOptions opt;
  opt.tiers = tiers;
  opt.point_radius = radius;
  opt.gap = gap;
  const auto result = render_svg(gauge_fix(loaded->config).config, opt);
  if (!write_text(path, result.svg)) {
    std::cerr << "cannot write " << path << "\n";
    return 1;
  }
  return 0;
}

int cmd_catalog_list(const std::string& dir_flag) {
  Catalog cat(fs::path(output_dir(dir_flag)) / "catalog");
  bool any = false;
  for (const auto& ns : cat.namespaces()) {
    const auto recs = cat.records(ns);
    if (recs.empty()) continue;
    any = true;
    std::cout << ns << "\n";
    std::cout << "  id                                    C                     C/C_min   index  zero_modes\n";
    for (const auto& r : recs) {
      char line[256];
      std::snprintf(line, sizeof line, "  %-36s  %.17f  %.6f  %5d  %10d\n", r.id.c_str(), r.complexity,
                    r.complexity / recs.front().complexity, r.index, r.zero_modes);
      std::cout << line;
    }
  }
  if (!any) std::cout << "catalog is empty\n";
  return 0;
}

int cmd_catalog_show(const std::string& dir_flag, const std::string& id) {
  Catalog cat(fs::path(output_dir(dir_flag)) / "catalog");
  const auto rec = cat.find(id);
  if (!rec) {
    std::cerr << "no record '" << id << "'\n";
    return 1;
  }
  const double cmin = cat.c_min(rec->space);
  std::cout << "id          " << rec->id << "\n"
            << "namespace   " << rec->space << "\n"
            << "N           " << rec->config.size() << "\n"
            << "dim         " << rec->config.dim() << "\n"
            << "C           " << format_double(rec->complexity) << "\n"
            << "C/C_min     " << fmt("%.6f", rec->complexity / cmin) << "\n"
            << "residual    " << fmt("%.3e", rec->residual) << "\n"
            << "index       " << rec->index << "\n"
            << "zero_modes  " << rec->zero_modes << (rec->degenerate ? " (degenerate)" : "") << "\n"
            << "fingerprint " << detail::hex16(rec->fingerprint_hash) << "\n"
            << "found       " << rec->timestamp << " (" << rec->provenance.method << ", start "
            << rec->provenance.start_index << ", " << rec->provenance.iterations << " iterations)\n"
            << "solver      " << rec->solver.dump() << "\n";
  return 0;
}

int cmd_catalog_export(const std::string& dir_flag, const std::string& id, std::string path) {
  Catalog cat(fs::path(output_dir(dir_flag)) / "catalog");
  const auto rec = cat.find(id);
  if (!rec) {
    std::cerr << "no record '" << id << "'\n";
    return 1;
  }
  if (path.empty()) {
    const fs::path dir = fs::path(output_dir(dir_flag)) / "exports";
    fs::create_directories(dir);
    path = (dir / (id + ".csv")).string();
  }
  std::ostringstream os;
  write_positions_csv(os, rec->config, true);
  if (!write_text(path, os.str())) {
    std::cerr << "cannot write " << path << "\n";
    return 1;
  }
  std::cout << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"central configurations of the shape complexity"};
  app.require_subcommand(1);
  std::string dir;
  app.add_option("--dir", dir, "output directory (overrides $CCSHAPE_OUTPUT_DIR)");

  std::string config_path;
  auto* solve = app.add_subcommand("solve", "run a multi-start search and update the catalog");
  solve->add_option("config", config_path, "run configuration (JSON)")->required();

  std::string target;
  AnalysisOptions aopt;
  auto* analyze = app.add_subcommand("analyze", "structure analysis of a record or positions file");
  analyze->add_option("target", target, "record id or positions CSV")->required();
  auto* o_bins = analyze->add_option("--bins", aopt.bins, "radial bins (>= 2)")->capture_default_str();
  auto* o_gap = analyze->add_option("--gap", aopt.gap, "relative gap separating MST edge tiers")->capture_default_str();
  auto* o_inner = analyze->add_option("--inner-fraction", aopt.inner_fraction, "radius fraction for nearest-neighbour stats")
      ->capture_default_str();
  auto* o_voids = analyze->add_option("--voids", aopt.voids, "number of voids to report (0: skip)")->capture_default_str();
  std::string analysis_config;
  analyze->add_option("--config", analysis_config, "take defaults from the analysis block of a run config");

  std::string svg_path;
  bool tiers = true;
  double radius = 3.0;
  double gap = kDefaultTierGap;
  auto* render = app.add_subcommand("render", "draw a record as SVG");
  render->add_option("target", target, "record id or positions CSV")->required();
  render->add_option("-o,--output", svg_path, "SVG path")->required();
  render->add_flag("--tiers,!--no-tiers", tiers, "colour MST edges by tier (default on)");
  render->add_option("--point-radius", radius, "particle radius in pixels")->capture_default_str();
  render->add_option("--gap", gap, "relative gap separating MST edge tiers")->capture_default_str();

  auto* catalog = app.add_subcommand("catalog", "inspect the catalog");
  catalog->require_subcommand(1);
  auto* list = catalog->add_subcommand("list", "records sorted by C per namespace");
  std::string id;
  auto* show = catalog->add_subcommand("show", "metadata of one record");
  show->add_option("id", id)->required();
  std::string export_path;
  auto* exp = catalog->add_subcommand("export", "write a record's positions CSV");
  exp->add_option("id", id)->required();
  exp->add_option("-o,--output", export_path, "CSV path (default <dir>/exports/<id>.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(dir, config_path);
    if (analyze->parsed()) {
      if (!analysis_config.empty()) {
        AnalysisOptions from;
        try {
          from = load_run_config(analysis_config).analysis;
        } catch (const ConfigError& e) {
          std::cerr << "config error: " << analysis_config << ": " << e.what() << "\n";
          return 1;
        }
        if (!o_bins->count()) aopt.bins = from.bins;
        if (!o_gap->count()) aopt.gap = from.gap;
        if (!o_inner->count()) aopt.inner_fraction = from.inner_fraction;
        if (!o_voids->count()) aopt.voids = from.voids;
      }
      return cmd_analyze(dir, target, aopt);
    }
    if (render->parsed()) return cmd_render(dir, target, svg_path, tiers, radius, gap);
    if (list->parsed()) return cmd_catalog_list(dir);
    if (show->parsed()) return cmd_catalog_show(dir, id);
    if (exp->parsed()) return cmd_catalog_export(dir, id, export_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
