#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ccshape/shape_core.hpp"

namespace ccshape {

/// Similarity- and relabeling-invariant shape signature: the sorted separation
/// spectrum in units of l_rms, plus C.
struct ShapeFingerprint {
  std::vector<double> spectrum;
  double complexity = 0.0;

  static constexpr double kSpectrumTol = 1e-6;
  static constexpr double kComplexityTol = 1e-9;

  [[nodiscard]] double spectrum_distance(const ShapeFingerprint& o) const {
    if (spectrum.size() != o.spectrum.size()) return INFINITY;
    double s = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double d = spectrum[k] - o.spectrum[k];
      s += d * d;
    }
    return std::sqrt(s);
  }

  [[nodiscard]] bool matches(const ShapeFingerprint& o) const {
    if (spectrum.size() != o.spectrum.size()) return false;
    if (std::abs(complexity - o.complexity) > kComplexityTol) return false;
    return spectrum_distance(o) <= kSpectrumTol * std::sqrt(static_cast<double>(spectrum.size()));
  }

  /// FNV-1a over the spectrum quantized to 1e-6 and C quantized to 1e-9. Informational;
  /// equality of shapes is decided by matches().
  [[nodiscard]] std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::int64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= static_cast<std::uint64_t>((v >> (8 * b)) & 0xff);
        h *= 0x100000001b3ULL;
      }
    };
    for (double v : spectrum) mix(std::llround(v * 1e6));
    mix(std::llround(complexity * 1e9));
    return h;
  }
};

/// Lexicographic order on (C, spectrum); used to make aggregation order-independent.
inline bool fingerprint_less(const ShapeFingerprint& a, const ShapeFingerprint& b) {
  if (a.complexity != b.complexity) return a.complexity < b.complexity;
  return std::lexicographical_compare(a.spectrum.begin(), a.spectrum.end(), b.spectrum.begin(), b.spectrum.end());
}

inline ShapeFingerprint fingerprint(const MassConfiguration& c) {
  const auto rep = complexity(c);
  const std::size_t n = c.size();
  const int dim = c.dim();
  ShapeFingerprint f;
  f.complexity = rep.complexity;
  f.spectrum.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double d = c.coord(i, a) - c.coord(j, a);
        r2 += d * d;
      }
      f.spectrum.push_back(std::sqrt(r2) / rep.rms_length);
    }
  }
  std::sort(f.spectrum.begin(), f.spectrum.end());
  return f;
}

}  // namespace ccshape
