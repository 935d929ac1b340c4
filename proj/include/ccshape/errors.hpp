#pragma once

#include <stdexcept>
#include <string>

namespace ccshape {

/// Two particles closer than the collision guard (or coincident).
class CollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a structural precondition (N < 2, bad dimension, non-positive mass, ...).
class InvalidConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gradient-norm descent stalled at a non-critical local minimum of |grad C|^2.
class SpuriousMinimum : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classification was requested for a point whose residual exceeds the tolerance.
class NotCritical : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All points affinely dependent; no Voronoi structure exists.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccshape
