#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tiers {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (alpha outside (0,1), too few draws, bad regime, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent array shapes. `axis` names the offending dimension.
class DimensionError : public Error {
 public:
  DimensionError(std::string axis, const std::string& what)
      : Error(what), axis_(std::move(axis)) {}
  const std::string& axis() const noexcept { return axis_; }

 private:
  std::string axis_;
};

/// A matrix that was required to be symmetric positive definite was not.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// The LP engine gave up (iteration limit, lost numerical stability).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, long iterations)
      : Error(what), iterations_(iterations) {}
  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

struct ScaleProbe {
  double sigma;
  bool feasible;
};

/// The scale search found no admissible sigma, or the fitted scale is zero
/// where a positive one is required.
class DegenerateFitError : public Error {
 public:
  DegenerateFitError(const std::string& what, std::vector<ScaleProbe> trace = {})
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<ScaleProbe>& trace() const noexcept { return trace_; }

 private:
  std::vector<ScaleProbe> trace_;
};

/// Statistic cannot be formed (zero residual scale).
class DegenerateStatisticError : public Error {
 public:
  using Error::Error;
};

class CsvError : public Error {
 public:
  CsvError(const std::string& what, long line, long column)
      : Error(what), line_(line), column_(column) {}
  long line() const noexcept { return line_; }
  long column() const noexcept { return column_; }

 private:
  long line_;
  long column_;
};

}  // namespace tiers
