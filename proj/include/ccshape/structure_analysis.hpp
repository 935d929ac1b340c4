#pragma once

// Structural measurements on a configuration: minimum spanning tree "filaments",
// near-equal edge tiers, radial density, nearest-neighbour regularity, voids,
// and the pair/coordinate counting bookkeeping.
//
// Lengths are reported in the units of the input configuration; gauge-fix the
// configuration first to obtain l_rms units.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "ccshape/delaunay.hpp"
#include "ccshape/shape_core.hpp"

namespace ccshape {

struct MstEdge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double length = 0.0;
};

/// Strict total order used for tie-breaking: (length, i, j).
inline bool edge_less(const MstEdge& a, const MstEdge& b) {
  return std::tie(a.length, a.i, a.j) < std::tie(b.length, b.i, b.j);
}

struct MstEdges {
  std::vector<MstEdge> edges;  // N - 1 edges, ascending by (length, i, j)

  [[nodiscard]] double total_weight() const {
    CompensatedSum s;
    for (const auto& e : edges) s.add(e.length);
    return s.value();
  }
  [[nodiscard]] std::vector<double> lengths() const {
    std::vector<double> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.push_back(e.length);
    return out;
  }
};

namespace detail {

inline double distance(std::span<const double> x, int dim, std::size_t i, std::size_t j) {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double d = x[i * dim + a] - x[j * dim + a];
    r2 += d * d;
  }
  return std::sqrt(r2);
}

}  // namespace detail

/// Exact Euclidean MST by dense Prim, O(N^2) time and O(N) memory. Every
/// comparison uses the (length, i, j) order, so the tree is the unique minimum
/// under that order.
inline MstEdges euclidean_mst(int dim, std::span<const double> x) {
  const std::size_t n = x.size() / static_cast<std::size_t>(dim);
  MstEdges out;
  if (n < 2) return out;
  std::vector<bool> in_tree(n, false);
  std::vector<MstEdge> best(n, MstEdge{0, 0, std::numeric_limits<double>::infinity()});
  in_tree[0] = true;
  std::size_t last = 0;
  for (std::size_t added = 1; added < n; ++added) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const MstEdge cand{std::min(last, v), std::max(last, v), detail::distance(x, dim, last, v)};
      if (edge_less(cand, best[v])) best[v] = cand;
      if (pick == n || edge_less(best[v], best[pick])) pick = v;
    }
    in_tree[pick] = true;
    out.edges.push_back(best[pick]);
    last = pick;
  }
  std::sort(out.edges.begin(), out.edges.end(), edge_less);
  return out;
}

inline MstEdges euclidean_mst(const MassConfiguration& c) { return euclidean_mst(c.dim(), c.positions()); }

struct EdgeTier {
  std::vector<double> lengths;  // ascending
  double mean = 0.0;
  double cv = 0.0;  // population standard deviation / mean
};

struct EdgeTierLadder {
  std::vector<EdgeTier> tiers;
  std::vector<double> step_ratios;       // mean_{k+1} / mean_k
  std::vector<double> step_differences;  // mean_{k+1} - mean_k
  double gap_threshold = 0.15;
  double median_cv = 0.0;  // of the tier cv seen by each edge
  bool no_ladder = false;  // a single tier, or median_cv above 0.25

  /// Tier (0-based) of a length, by position in the ascending sorted list.
  [[nodiscard]] std::size_t tier_of(double length) const {
    for (std::size_t k = 0; k < tiers.size(); ++k) {
      if (length <= tiers[k].lengths.back()) return k;
    }
    return tiers.empty() ? 0 : tiers.size() - 1;
  }
};

inline constexpr double kDefaultTierGap = 0.15;
inline constexpr double kNoLadderMedianCv = 0.25;

/// Sorts the lengths and starts a new tier wherever (l_{k+1} - l_k) / l_k > gap.
inline EdgeTierLadder edge_tier_ladder(std::vector<double> lengths, double gap = kDefaultTierGap) {
  if (lengths.empty()) throw std::invalid_argument("edge_tier_ladder: need at least one edge");
  if (!(gap > 0.0)) throw std::invalid_argument("edge_tier_ladder: gap threshold must be > 0");
  std::sort(lengths.begin(), lengths.end());
  EdgeTierLadder ladder;
  ladder.gap_threshold = gap;
  ladder.tiers.emplace_back();
  ladder.tiers.back().lengths.push_back(lengths.front());
  for (std::size_t k = 1; k < lengths.size(); ++k) {
    const double prev = lengths[k - 1];
    if ((lengths[k] - prev) / prev > gap) ladder.tiers.emplace_back();
    ladder.tiers.back().lengths.push_back(lengths[k]);
  }
  std::vector<double> cvs;
  for (auto& t : ladder.tiers) {
    CompensatedSum s;
    for (double v : t.lengths) s.add(v);
    t.mean = s.value() / static_cast<double>(t.lengths.size());
    CompensatedSum q;
    for (double v : t.lengths) q.add((v - t.mean) * (v - t.mean));
    t.cv = std::sqrt(q.value() / static_cast<double>(t.lengths.size())) / t.mean;
    cvs.insert(cvs.end(), t.lengths.size(), t.cv);  // median over edges, not tiers
  }
  for (std::size_t k = 0; k + 1 < ladder.tiers.size(); ++k) {
    ladder.step_ratios.push_back(ladder.tiers[k + 1].mean / ladder.tiers[k].mean);
    ladder.step_differences.push_back(ladder.tiers[k + 1].mean - ladder.tiers[k].mean);
  }
  std::sort(cvs.begin(), cvs.end());
  const std::size_t m = cvs.size();
  ladder.median_cv = m % 2 == 1 ? cvs[m / 2] : 0.5 * (cvs[m / 2 - 1] + cvs[m / 2]);
  ladder.no_ladder = ladder.tiers.size() == 1 || ladder.median_cv > kNoLadderMedianCv;
  return ladder;
}

inline EdgeTierLadder edge_tier_ladder(const MstEdges& mst, double gap = kDefaultTierGap) {
  return edge_tier_ladder(mst.lengths(), gap);
}

struct RadialProfile {
  std::vector<double> edges;  // bins + 1 radii, strictly increasing, from 0 to the max radius
  std::vector<std::size_t> counts;
  std::vector<double> densities;  // count / annulus area (2D) or shell volume (3D)
};

/// Equal-width radial bins about the center of mass.
inline RadialProfile radial_density_profile(const MassConfiguration& c, int bins) {
  if (bins < 2) throw std::invalid_argument("radial_density_profile: bins must be >= 2");
  const int dim = c.dim();
  const auto cm = detail::center_of_mass(dim, c.masses(), c.positions());
  std::vector<double> radii(c.size());
  double rmax = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double d = c.coord(i, a) - cm[a];
      r2 += d * d;
    }
    radii[i] = std::sqrt(r2);
    rmax = std::max(rmax, radii[i]);
  }
  RadialProfile p;
  const auto nb = static_cast<std::size_t>(bins);
  p.edges.resize(nb + 1);
  for (std::size_t k = 0; k <= nb; ++k) p.edges[k] = rmax * static_cast<double>(k) / static_cast<double>(nb);
  p.counts.assign(nb, 0);
  for (double r : radii) {
    auto k = rmax > 0.0 ? static_cast<std::size_t>(r / rmax * static_cast<double>(nb)) : 0;
    p.counts[std::min(k, nb - 1)] += 1;
  }
  p.densities.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const double r0 = p.edges[k];
    const double r1 = p.edges[k + 1];
    const double measure = dim == 2 ? std::numbers::pi * (r1 * r1 - r0 * r0)
                                    : 4.0 / 3.0 * std::numbers::pi * (r1 * r1 * r1 - r0 * r0 * r0);
    p.densities[k] = measure > 0.0 ? static_cast<double>(p.counts[k]) / measure : 0.0;
  }
  return p;
}

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

struct NearestNeighborStats {
  std::size_t sampled = 0;  // particles inside the inner fraction
  double mean = 0.0;
  double cv = 0.0;
  Histogram histogram;
};

/// Nearest-neighbour distance (to any particle) for particles within
/// `inner_fraction` of the maximum radius about the center of mass.
inline NearestNeighborStats nearest_neighbor_stats(const MassConfiguration& c, double inner_fraction,
                                                   int histogram_bins = 20) {
  if (!(inner_fraction > 0.0 && inner_fraction <= 1.0)) {
    throw std::invalid_argument("nearest_neighbor_stats: inner fraction must lie in (0, 1]");
  }
  const int dim = c.dim();
  const auto x = c.positions();
  const std::size_t n = c.size();
  const auto cm = detail::center_of_mass(dim, c.masses(), x);
  std::vector<double> radii(n);
  double rmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[i * dim + a] - cm[a]) * (x[i * dim + a] - cm[a]);
    radii[i] = std::sqrt(r2);
    rmax = std::max(rmax, radii[i]);
  }
  // a relative slack keeps particles sitting exactly on the cut radius
  const double cut = inner_fraction * rmax * (1.0 + 1e-12);
  std::vector<double> nn;
  for (std::size_t i = 0; i < n; ++i) {
    if (radii[i] > cut) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) best = std::min(best, detail::distance(x, dim, i, j));
    }
    nn.push_back(best);
  }
  NearestNeighborStats s;
  s.sampled = nn.size();
  if (nn.empty()) {
    s.mean = s.cv = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  CompensatedSum sum;
  for (double v : nn) sum.add(v);
  s.mean = sum.value() / static_cast<double>(nn.size());
  CompensatedSum var;
  for (double v : nn) var.add((v - s.mean) * (v - s.mean));
  s.cv = std::sqrt(var.value() / static_cast<double>(nn.size())) / s.mean;

  const auto [lo_it, hi_it] = std::minmax_element(nn.begin(), nn.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const auto hb = static_cast<std::size_t>(std::max(histogram_bins, 1));
  s.histogram.edges.resize(hb + 1);
  for (std::size_t k = 0; k <= hb; ++k) {
    s.histogram.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(hb);
  }
  s.histogram.counts.assign(hb, 0);
  for (double v : nn) {
    auto k = hi > lo ? static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(hb)) : 0;
    s.histogram.counts[std::min(k, hb - 1)] += 1;
  }
  return s;
}

struct Void {
  std::vector<double> center;
  double radius = 0.0;
};

struct VoidReport {
  std::vector<Void> voids;  // radii descending
};

/// Largest empty balls centred at Voronoi vertices (Delaunay circumcentres)
/// that fall inside the convex hull. A candidate whose centre lies inside an
/// already reported ball is suppressed.
inline VoidReport void_census(const MassConfiguration& c, int k) {
  const int dim = c.dim();
  const auto x = c.positions();
  const std::size_t n = c.size();
  if (n < static_cast<std::size_t>(dim + 1)) throw DegenerateGeometry("void_census: need at least dim + 1 points");
  const auto tri = delaunay(dim, x);  // throws DegenerateGeometry for affinely dependent input

  std::vector<Void> candidates;
  for (const auto& simplex : tri.simplices) {
    auto centre = circumcenter(dim, x, simplex);
    if (!centre) continue;
    if (!tri.contains(x, *centre)) continue;
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) r2 += ((*centre)[a] - x[i * dim + a]) * ((*centre)[a] - x[i * dim + a]);
      r = std::min(r, std::sqrt(r2));
    }
    candidates.push_back({std::move(*centre), r});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Void& a, const Void& b) {
    if (a.radius != b.radius) return a.radius > b.radius;
    return std::lexicographical_compare(a.center.begin(), a.center.end(), b.center.begin(), b.center.end());
  });
  VoidReport out;
  for (auto& cand : candidates) {
    if (static_cast<int>(out.voids.size()) >= k) break;
    bool covered = false;
    for (const auto& v : out.voids) {
      double d2 = 0.0;
      for (int a = 0; a < dim; ++a) d2 += (cand.center[a] - v.center[a]) * (cand.center[a] - v.center[a]);
      if (std::sqrt(d2) < v.radius) {
        covered = true;
        break;
      }
    }
    if (!covered) out.voids.push_back(std::move(cand));
  }
  return out;
}

struct CountingReport {
  long long pairs = 0;
  long long coordinates = 0;  // shape coordinates: dN - d - d(d-1)/2
  long long excess = 0;       // pairs - coordinates
};

inline CountingReport counting_report(long long n, int dim) {
  if (n < 2) throw std::invalid_argument("counting_report: N must be >= 2");
  if (dim != 2 && dim != 3) throw std::invalid_argument("counting_report: dimension must be 2 or 3");
  CountingReport r;
  r.pairs = n * (n - 1) / 2;
  r.coordinates = dim * n - dim - dim * (dim - 1) / 2;
  r.excess = r.pairs - r.coordinates;
  return r;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman_rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size();) {
      std::size_t e = k;
      while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[k]]) ++e;
      const double avg = 0.5 * static_cast<double>(k + e) + 1.0;
      for (std::size_t t = k; t <= e; ++t) r[idx[t]] = avg;
      k = e + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    sab += (ra[k] - mean) * (rb[k] - mean);
    saa += (ra[k] - mean) * (ra[k] - mean);
    sbb += (rb[k] - mean) * (rb[k] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace ccshape
