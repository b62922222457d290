#pragma once

#include <stdexcept>
#include <string>

namespace polymerlab {

// Moment generating function is infinite at the requested argument.
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Query outside the window / time range of a realized field.
class OutOfWindowError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A computation needs a larger environment window than the one supplied.
class WindowTooSmallError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Endpoint unreachable: n and y - x have opposite parity (or q = 0).
class ParityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A kernel slice failed its normalization check or a weight overflowed.
class NumericalGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A Brownian tube left the spatial box of a Poisson environment.
class BoxOverflowError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Hypothesis gate: parameters outside the L2 region (or failed feasibility).
class RegionRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration does not validate against the experiment schema.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Predicted resource usage exceeds the configured cap.
class ResourceRefusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Run directory is missing files or has inconsistent checksums.
class CorruptRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polymerlab
