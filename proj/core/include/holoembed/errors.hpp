#pragma once

#include <stdexcept>
#include <string>

namespace holoembed {

/// Evaluation requested too close to a pole of the map or series.
class PoleProximityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A point sits on (or next to) an excluded fiber of a rational shear.
class PoleFiberError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Map contains a leaf with no symbolic inverse.
class NonInvertibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// 2(p-q) lies in the lattice; the generic embedding does not apply.
class DegeneratePairError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A parameter search ran out of budget; the message names the failing stage.
class SearchExhaustedError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Root refinement stalled; the message reports the offending cells.
class NonConvergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Sampling constraints left no admissible points.
class EmptyGridError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace holoembed
