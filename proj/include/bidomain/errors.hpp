#pragma once

#include <stdexcept>
#include <string>

namespace bidomain {

/// Cell index outside the dyadic index set, or a tree operation past the root/finest level.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Invalid physical or numerical parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two cells that were expected to share an edge do not.
class AdjacencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Broken structural invariant of the adaptive tree (grading, orphan nodes).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Explicit update left the stable regime: CFL bound violated or non-finite values.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, int level, double time)
      : std::runtime_error(what), level_(level), time_(time) {}
  int level() const { return level_; }
  double time() const { return time_; }

 private:
  int level_;
  double time_;
};

/// Krylov iteration hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Configuration file could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Snapshot/run directories cannot be compared (missing files, incompatible levels).
class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bidomain
