#pragma once

#include <string>
#include <vector>

#include "ksurf/loop_algebra.hpp"
#include "ksurf/potentials.hpp"

namespace ksurf {

enum class FactorSign { plus, minus };

struct OdeOptions {
  std::vector<double> lambda_samples = default_lambda_samples();
  double unitarity_warn = 1e-6;
  double unitarity_abort = 1e-3;
  double tail_tolerance = 1e-8;
};

// Loop-valued solution along one coordinate axis, one TwistedLoop per grid node.
struct FrameFactorPath {
  Axis direction = Axis::x;
  FactorSign sign = FactorSign::plus;
  double step = 0.0;
  std::vector<TwistedLoop> values;

  double max_unitarity_defect = 0.0;
  double max_tail_norm = 0.0;
  std::vector<std::string> warnings;

  int truncation() const { return values.empty() ? 0 : values.front().truncation(); }
};

// Y' = -lambda Y xi^x(x), Y(0) = I. Degrees stay >= 0.
FrameFactorPath integrate_plus(const PotentialForm& xi_x, int truncation, const OdeOptions& options = {});
// Y' = -lambda^{-1} Y xi^y(y), Y(0) = I. Degrees stay <= 0.
FrameFactorPath integrate_minus(const PotentialForm& xi_y, int truncation, const OdeOptions& options = {});

}  // namespace ksurf
