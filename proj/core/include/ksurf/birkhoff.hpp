#pragma once

#include "ksurf/loop_algebra.hpp"

namespace ksurf {

struct BirkhoffOptions {
  double max_condition = 1e8;
  double max_residual = 1e-6;
};

struct BirkhoffSplit {
  TwistedLoop plus_factor;
  TwistedLoop minus_factor;
  double residual = 0.0;
  double condition_estimate = 1.0;
};

// g = plus * minus^{-1}, plus with degrees >= 0, minus with degrees <= 0 and
// constant term exactly I. Solved as a block-Toeplitz system for the negative
// coefficients of minus. Throws BigCellViolation when the condition estimate
// exceeds max_condition (infinite for a singular system) or when the leftover
// negative part of g * minus exceeds max_residual.
BirkhoffSplit split(const TwistedLoop& g, const BirkhoffOptions& options = {});

// g = plus * minus with plus(0) = I and minus of degrees <= 0 (no normalization
// on minus). Same failure policy as split.
BirkhoffSplit split_opposite(const TwistedLoop& g, const BirkhoffOptions& options = {});

}  // namespace ksurf
