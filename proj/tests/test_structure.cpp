#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ccshape/cc_solver.hpp"
#include "ccshape/structure_analysis.hpp"
#include "oracles/reference_oracles.hpp"
#include "support.hpp"

using namespace ccshape;
using namespace testing_support;

namespace {

std::vector<double> uniform_disk(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x;
  while (x.size() < 2 * n) {
    const double a = u(rng), b = u(rng);
    if (a * a + b * b <= 1.0) x.insert(x.end(), {a, b});
  }
  return x;
}

std::vector<double> triangular_patch(int rings) {
  std::vector<double> x;
  for (int i = -rings; i <= rings; ++i) {
    for (int j = -rings; j <= rings; ++j) {
      const double px = i + 0.5 * j, py = 0.5 * std::sqrt(3.0) * j;
      if (std::hypot(px, py) <= rings + 1e-9) x.insert(x.end(), {px, py});
    }
  }
  return x;
}

}  // namespace

TEST(Mst, ThreePointExample) {
  // distances 1, 1, 1.5
  const double h = std::sqrt(1.0 - 0.75 * 0.75);
  const std::vector<double> x{0, 0, 0.75, h, 1.5, 0};
  const auto mst = euclidean_mst(2, x);
  ASSERT_EQ(mst.edges.size(), 2u);
  EXPECT_NEAR(mst.total_weight(), 2.0, 1e-15);
  EXPECT_NEAR(oracle::brute_force_mst(2, x).weight, 2.0, 1e-15);
  for (const auto& e : mst.edges) EXPECT_NEAR(e.length, 1.0, 1e-15);
}

TEST(Mst, CollinearChain) {
  const std::vector<double> x{0, 0, 2, 0, 1, 0, 3, 0};
  const auto mst = euclidean_mst(2, x);
  ASSERT_EQ(mst.edges.size(), 3u);
  EXPECT_EQ(mst.total_weight(), 3.0);
  EXPECT_EQ(oracle::brute_force_mst(2, x).weight, 3.0);
  // consecutive pairs only: (0,2), (1,2), (1,3)
  std::vector<std::pair<std::size_t, std::size_t>> got;
  for (const auto& e : mst.edges) got.emplace_back(e.i, e.j);
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}, {1, 2}, {1, 3}}));
}

TEST(Mst, MatchesBruteForceSmallN) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 7);
    const int dim = 2 + t % 2;
    const auto x = random_positions(rng, n, dim);
    auto mine = euclidean_mst(dim, x).edges;
    auto ref = oracle::brute_force_mst(dim, x).edges;
    ASSERT_EQ(mine.size(), ref.size());
    std::sort(mine.begin(), mine.end(), [](const MstEdge& p, const MstEdge& q) { return std::tie(p.i, p.j) < std::tie(q.i, q.j); });
    std::sort(ref.begin(), ref.end(),
              [](const oracle::BruteEdge& p, const oracle::BruteEdge& q) { return std::tie(p.i, p.j) < std::tie(q.i, q.j); });
    double wm = 0.0, wr = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      EXPECT_EQ(mine[k].i, ref[k].i);
      EXPECT_EQ(mine[k].j, ref[k].j);
      wm += mine[k].length;
      wr += ref[k].length;
    }
    EXPECT_EQ(wm, wr);
  }
  EXPECT_THROW(oracle::brute_force_mst(2, random_positions(rng, 9, 2)), oracle::TooLarge);
}

TEST(Mst, SameEdgesAsKruskal) {
  std::mt19937_64 rng(11);
  for (int dim : {2, 3}) {
    const auto x = random_positions(rng, 50, dim);
    const auto mst = euclidean_mst(dim, x);
    const auto ref = oracle::kruskal_mst(dim, x);
    ASSERT_EQ(mst.edges.size(), ref.edges.size());
    for (std::size_t k = 0; k < ref.edges.size(); ++k) {
      EXPECT_EQ(mst.edges[k].i, ref.edges[k].i);
      EXPECT_EQ(mst.edges[k].j, ref.edges[k].j);
      EXPECT_EQ(mst.edges[k].length, ref.edges[k].length);
    }
    double w = 0.0;
    for (const auto& e : mst.edges) w += e.length;
    EXPECT_EQ(w, ref.weight);
  }
}

TEST(Mst, TiesBrokenByIndexPair) {
  const auto mst = euclidean_mst(2, std::vector<double>{0, 0, 1, 0, 0, 1, 1, 1});
  ASSERT_EQ(mst.edges.size(), 3u);
  EXPECT_EQ(mst.edges[0].i, 0u);
  EXPECT_EQ(mst.edges[0].j, 1u);
  EXPECT_EQ(mst.edges[1].i, 0u);
  EXPECT_EQ(mst.edges[1].j, 2u);
  EXPECT_EQ(mst.edges[2].i, 1u);
  EXPECT_EQ(mst.edges[2].j, 3u);
}

TEST(TierLadder, TwoTierExample) {
  const std::vector<double> v{0.99, 1.00, 1.01, 2.00, 2.02};
  const auto l = edge_tier_ladder(v, 0.15);
  const auto ref = oracle::gap_split(v, 0.15);
  ASSERT_EQ(l.tiers.size(), 2u);
  ASSERT_EQ(ref.size(), 2u);
  EXPECT_NEAR(l.tiers[0].mean, 1.0, 1e-12);
  EXPECT_NEAR(l.tiers[1].mean, 2.01, 1e-12);
  EXPECT_EQ(l.tiers[0].lengths, ref[0]);
  EXPECT_EQ(l.tiers[1].lengths, ref[1]);
  ASSERT_EQ(l.step_ratios.size(), 1u);
  EXPECT_NEAR(l.step_ratios[0], 2.01, 1e-12);
  EXPECT_NEAR(l.step_differences[0], 1.01, 1e-12);
  EXPECT_FALSE(l.no_ladder);
}

TEST(TierLadder, AllEqual) {
  const auto l = edge_tier_ladder(std::vector<double>(7, 0.3), 0.15);
  ASSERT_EQ(l.tiers.size(), 1u);
  EXPECT_EQ(l.tiers[0].cv, 0.0);
  EXPECT_TRUE(l.no_ladder);
}

TEST(TierLadder, UniformLengthsUsuallyNoLadder) {
  int flagged = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(200);
    for (double& e : v) e = u(rng);
    flagged += edge_tier_ladder(v, 0.15).no_ladder;
  }
  EXPECT_GE(flagged, 18);
}

TEST(TierLadder, PartitionProperty) {
  std::mt19937_64 rng(13);
  std::lognormal_distribution<double> ln(0.0, 0.6);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(5 + t * 3);
    for (double& e : v) e = ln(rng);
    const auto l = edge_tier_ladder(v, 0.05 + 0.01 * (t % 10));
    std::vector<double> concat;
    for (std::size_t k = 0; k < l.tiers.size(); ++k) {
      concat.insert(concat.end(), l.tiers[k].lengths.begin(), l.tiers[k].lengths.end());
      if (k) {
        EXPECT_GT(l.tiers[k].mean, l.tiers[k - 1].mean);
      }
      for (double e : l.tiers[k].lengths) EXPECT_EQ(l.tier_of(e), k);
    }
    std::sort(v.begin(), v.end());
    EXPECT_EQ(concat, v);
    EXPECT_EQ(l.step_ratios.size() + 1, l.tiers.size());
  }
}

TEST(RadialProfile, UniformDiskIsFlat) {
  std::mt19937_64 rng(17);
  const auto x = uniform_disk(rng, 10000);
  const auto c = MassConfiguration::equal_masses(2, x);
  const auto p = radial_density_profile(c, 10);
  std::size_t total = 0;
  for (auto k : p.counts) total += k;
  EXPECT_EQ(total, 10000u);
  const double rmax = p.edges.back();
  const double expected = 10000.0 / (std::numbers::pi * rmax * rmax);
  for (std::size_t k = 0; k < p.counts.size(); ++k) {
    const double area = std::numbers::pi * (p.edges[k + 1] * p.edges[k + 1] - p.edges[k] * p.edges[k]);
    const double sigma = std::sqrt(expected * area) / area;
    EXPECT_LE(std::abs(p.densities[k] - expected), 3.0 * sigma) << "bin " << k;
    if (k) {
      EXPECT_GT(p.edges[k], p.edges[k - 1]);
    }
  }
}

TEST(RadialProfile, RingAndValidation) {
  std::vector<double> x;
  for (int k = 0; k < 12; ++k) x.insert(x.end(), {std::cos(k * std::numbers::pi / 6), std::sin(k * std::numbers::pi / 6)});
  const auto p = radial_density_profile(MassConfiguration::equal_masses(2, x), 5);
  int nonzero = 0;
  for (auto k : p.counts) nonzero += k > 0;
  EXPECT_EQ(nonzero, 1);
  EXPECT_THROW(radial_density_profile(MassConfiguration::equal_masses(2, x), 1), std::invalid_argument);
}

TEST(NearestNeighbor, TriangularLatticeIsRegular) {
  const auto c = MassConfiguration::equal_masses(2, triangular_patch(6));
  const auto s = nearest_neighbor_stats(c, 0.7);
  EXPECT_GT(s.sampled, 10u);
  EXPECT_LE(s.cv, 0.02);
  EXPECT_NEAR(s.mean, 1.0, 1e-12);
}

TEST(NearestNeighbor, PoissonBaseline) {
  const auto mc = oracle::poisson_nn_cv(1000, 20, 5);
  EXPECT_NEAR(mc.value, 0.52, 0.1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto s = nearest_neighbor_stats(MassConfiguration::equal_masses(2, uniform_disk(rng, 1000)), 0.7);
    EXPECT_NEAR(s.cv, 0.52, 0.1);
  }
}

TEST(NearestNeighbor, TwoBodies) {
  const auto s = nearest_neighbor_stats(MassConfiguration::equal_masses(2, {0, 0, 3, 4}), 1.0);
  EXPECT_EQ(s.sampled, 2u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_EQ(s.cv, 0.0);
}

TEST(Voids, EmptySquareInterior) {
  std::vector<double> x;
  for (int k = 0; k < 10; ++k) {
    const double t = 0.1 * k;
    x.insert(x.end(), {t, 0.0, 1.0, t, 1.0 - t, 1.0, 0.0, 1.0 - t});
  }
  const auto r = void_census(MassConfiguration::equal_masses(2, x), 3);
  ASSERT_FALSE(r.voids.empty());
  EXPECT_NEAR(r.voids[0].radius, 0.5, 1e-9);
  EXPECT_NEAR(r.voids[0].center[0], 0.5, 1e-9);
  EXPECT_NEAR(r.voids[0].center[1], 0.5, 1e-9);
}

TEST(Voids, GridSpacing) {
  const double h = 0.25;
  std::vector<double> x;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) x.insert(x.end(), {h * i, h * j});
  }
  const auto r = void_census(MassConfiguration::equal_masses(2, x), 4);
  ASSERT_EQ(r.voids.size(), 4u);
  EXPECT_NEAR(r.voids[0].radius, h / std::sqrt(2.0), 1e-12);
}

TEST(Voids, BallsAreEmptyAndSorted) {
  std::mt19937_64 rng(19);
  for (int dim : {2, 3}) {
    const auto c = random_config(rng, 80, dim, true);
    const auto r = void_census(c, 10);
    ASSERT_FALSE(r.voids.empty());
    for (std::size_t k = 0; k < r.voids.size(); ++k) {
      if (k) {
        EXPECT_LE(r.voids[k].radius, r.voids[k - 1].radius);
      }
      for (std::size_t i = 0; i < c.size(); ++i) {
        double d2 = 0.0;
        for (int a = 0; a < dim; ++a) d2 += (c.coord(i, a) - r.voids[k].center[a]) * (c.coord(i, a) - r.voids[k].center[a]);
        EXPECT_GE(std::sqrt(d2), r.voids[k].radius * (1.0 - 1e-12));
      }
    }
  }
}

TEST(Voids, CollinearThrows) {
  EXPECT_THROW(void_census(MassConfiguration::equal_masses(2, {0, 0, 1, 0, 2, 0}), 1), DegenerateGeometry);
}

TEST(Counting, Examples) {
  auto r = counting_report(100, 3);
  EXPECT_EQ(r.pairs, 4950);
  EXPECT_EQ(r.coordinates, 294);
  r = counting_report(100, 2);
  EXPECT_EQ(r.pairs, 4950);
  EXPECT_EQ(r.coordinates, 197);
  r = counting_report(3, 2);
  EXPECT_EQ(r.pairs, 3);
  EXPECT_EQ(r.coordinates, 3);
  EXPECT_EQ(r.excess, 0);
  r = counting_report(4, 2);
  EXPECT_EQ(r.pairs, 6);
  EXPECT_EQ(r.coordinates, 5);
}

TEST(Spearman, Basics) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{5, 4, 3, 2, 1};
  const std::vector<double> c{1, 4, 9, 16, 25};
  EXPECT_NEAR(spearman_rank_correlation(a, b), -1.0, 1e-15);
  EXPECT_NEAR(spearman_rank_correlation(a, c), 1.0, 1e-15);
}

TEST(Analysis, SimilarityInvariantAfterGaugeFix) {
  SolverConfig cfg;
  cfg.n = 40;
  const auto p = minimize_complexity(random_start(cfg, 3), cfg);
  const auto& base = p.shape.config;
  std::mt19937_64 rng(23);
  const auto rot = random_rotation(rng, 2);
  const auto y = similarity({base.positions().begin(), base.positions().end()}, 2, rot, 3.7, {1.5, -2.0});
  const auto moved = gauge_fix(base.with_positions(y)).config;

  const auto la = edge_tier_ladder(euclidean_mst(base));
  const auto lb = edge_tier_ladder(euclidean_mst(moved));
  ASSERT_EQ(la.tiers.size(), lb.tiers.size());
  for (std::size_t k = 0; k < la.tiers.size(); ++k) {
    EXPECT_NEAR(la.tiers[k].mean, lb.tiers[k].mean, 1e-12);
    EXPECT_NEAR(la.tiers[k].cv, lb.tiers[k].cv, 1e-10);
  }
  const auto ra = radial_density_profile(base, 8);
  const auto rb = radial_density_profile(moved, 8);
  EXPECT_EQ(ra.counts, rb.counts);
  EXPECT_NEAR(nearest_neighbor_stats(base, 0.7).cv, nearest_neighbor_stats(moved, 0.7).cv, 1e-10);
  const auto va = void_census(base, 3);
  const auto vb = void_census(moved, 3);
  ASSERT_EQ(va.voids.size(), vb.voids.size());
  for (std::size_t k = 0; k < va.voids.size(); ++k) EXPECT_NEAR(va.voids[k].radius, vb.voids[k].radius, 1e-12);
}
