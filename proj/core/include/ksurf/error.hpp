#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ksurf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// alpha(0) != beta(0), or malformed initial data.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// A loop lost unitarity at a sampled lambda beyond the abort threshold.
class UnitarityError : public Error {
 public:
  UnitarityError(const std::string& what, double defect) : Error(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

// The highest retained Laurent coefficient is too large for the truncation degree.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double tail_norm) : Error(what), tail_norm_(tail_norm) {}
  double tail_norm() const noexcept { return tail_norm_; }

 private:
  double tail_norm_;
};

// The loop lies outside (or too close to the boundary of) the Birkhoff big cell.
class BigCellViolation : public Error {
 public:
  BigCellViolation(const std::string& what, double condition, double residual)
      : Error(what), condition_(condition), residual_(residual) {}
  double condition_estimate() const noexcept { return condition_; }
  double residual() const noexcept { return residual_; }

 private:
  double condition_;
  double residual_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace ksurf
