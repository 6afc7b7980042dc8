#ifndef CORRSIFT_ERRORS_HPP
#define CORRSIFT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace corrsift {

// Bad argument values (thresholds out of range, shape mismatches, ...).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Matrix shape / sample-size preconditions.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A variable with zero (or negative) variance where a correlation is needed.
class DegenerateVariableError : public std::runtime_error {
 public:
  DegenerateVariableError(const std::string& msg, int index)
      : std::runtime_error(msg), index(index) {}
  int index;
};

// Numerically singular symmetric matrix; carries the min/max eigenvalue ratio.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& msg, double eigenvalue_ratio)
      : std::runtime_error(msg), eigenvalue_ratio(eigenvalue_ratio) {}
  double eigenvalue_ratio;
};

// The supplied group is not a member of the selection at the given threshold.
class SelectionMismatchError : public std::runtime_error {
 public:
  explicit SelectionMismatchError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// Monte Carlo acceptance stayed below the floor after escalating the budget.
class InsufficientAcceptanceError : public std::runtime_error {
 public:
  InsufficientAcceptanceError(const std::string& msg, double acceptance_rate)
      : std::runtime_error(msg), acceptance_rate(acceptance_rate) {}
  double acceptance_rate;
};

// Vertex set spans less than the ambient dimension; caller falls back to MC.
class DegenerateGeometryError : public std::runtime_error {
 public:
  explicit DegenerateGeometryError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// No feasible point in an H-polytope that should contain the observed point.
class EmptyFeasibleRegionError : public std::runtime_error {
 public:
  explicit EmptyFeasibleRegionError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// The r = 1 truncation point collapsed to zero (measure-zero conditioning set).
class DegenerateTruncationError : public std::runtime_error {
 public:
  explicit DegenerateTruncationError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace corrsift

#endif  // CORRSIFT_ERRORS_HPP
