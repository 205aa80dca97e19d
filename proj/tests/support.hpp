#pragma once

#include <cmath>
#include <random>

#include "ksurf/loop_algebra.hpp"
#include "ksurf/potentials.hpp"

namespace ksurf::testing {

inline Complex random_complex(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng)};
}

// Twisted loop with random coefficients in degrees [lo, hi].
inline TwistedLoop random_twisted(std::mt19937_64& rng, int truncation, int lo, int hi, double scale) {
  TwistedLoop a(truncation);
  for (int k = lo; k <= hi; ++k) {
    Mat2 c = Mat2::Zero();
    if (k % 2 == 0) {
      c(0, 0) = random_complex(rng, scale);
      c(1, 1) = random_complex(rng, scale);
    } else {
      c(0, 1) = random_complex(rng, scale);
      c(1, 0) = random_complex(rng, scale);
    }
    a[k] = c;
  }
  return a;
}

// I + random twisted terms of degrees 1..degree (plus) or -degree..-1 (minus).
inline TwistedLoop random_normalized(std::mt19937_64& rng, int truncation, int degree, double scale, bool plus) {
  TwistedLoop a = plus ? random_twisted(rng, truncation, 1, degree, scale)
                       : random_twisted(rng, truncation, -degree, -1, scale);
  a[0] += Mat2::Identity();
  return a;
}

inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

inline double max_coefficient_gap(const TwistedLoop& a, const TwistedLoop& b) {
  const int n = std::min(a.truncation(), b.truncation());
  double worst = 0.0;
  for (int k = -n; k <= n; ++k) worst = std::max(worst, max_abs(a[k] - b[k]));
  return worst;
}

// exp(t X) for a 2x2 matrix with X^2 = c I (true for every su(2) off-diagonal element).
inline Mat2 expm_square_scalar(const Mat2& x, Complex t) {
  const Complex c = (x * x)(0, 0);
  const Complex w = std::sqrt(c);
  if (std::abs(w) < 1e-300) return Mat2::Identity() + t * x;
  return std::cosh(t * w) * Mat2::Identity() + (std::sinh(t * w) / w) * x;
}

// alpha = beta = 0: the commuting degenerate data.
inline AngleData zero_angle_data(const GridSpec& grid) {
  return AngleData(grid, SampledFunction(std::vector<double>(grid.nx, 0.0), grid.hx, [](double) { return 0.0; }),
                   SampledFunction(std::vector<double>(grid.ny, 0.0), grid.hy, [](double) { return 0.0; }));
}

}  // namespace ksurf::testing
