#include <gtest/gtest.h>

#include <cmath>

#include "ksurf/error.hpp"
#include "ksurf/loop_ode.hpp"
#include "support.hpp"

using namespace ksurf;
using ksurf::testing::max_abs;

namespace {

// Coefficient k of exp(-lambda^p s X) is (-s X)^k / k! placed at degree p k.
TwistedLoop exp_series(const Mat2& x, double s, int p, int truncation) {
  TwistedLoop out(truncation);
  Mat2 term = Mat2::Identity();
  for (int k = 0; k <= truncation; ++k) {
    out[p * k] = term;
    term = term * (-s * x) / static_cast<double>(k + 1);
  }
  return out;
}

double path_error_at_end(const AngleData& data, int truncation) {
  const auto path = integrate_plus(build_symmetric_x(data), truncation);
  const Mat2 xi = build_symmetric_x(data).at_node(0);
  return ksurf::testing::max_coefficient_gap(path.values.back(), exp_series(xi, data.grid().x0(), 1, truncation));
}

TEST(LoopOde, StartsAtIdentity) {
  const auto data = soliton_preset(1.0, 0.0, GridSpec::from_domain(2, 2, 0.05));
  EXPECT_EQ(integrate_plus(build_symmetric_x(data), 16).values.front(), TwistedLoop::identity(16));
  EXPECT_EQ(integrate_minus(build_symmetric_y(data), 16).values.front(), TwistedLoop::identity(16));
}

TEST(LoopOde, ConstantPotentialMatchesMatrixExponential) {
  for (double phi0 : {0.0, 1.2}) {
    const auto g = GridSpec::from_domain(1, 1, 0.01);
    const auto data = phi0 == 0.0 ? ksurf::testing::zero_angle_data(g) : amsler_preset(phi0, g);
    const auto xi_x = build_symmetric_x(data), xi_y = build_symmetric_y(data);
    const auto plus = integrate_plus(xi_x, 16);
    const auto minus = integrate_minus(xi_y, 16);
    EXPECT_LT(ksurf::testing::max_coefficient_gap(plus.values.back(), exp_series(xi_x.at_node(0), 1.0, 1, 16)), 1e-9);
    EXPECT_LT(ksurf::testing::max_coefficient_gap(minus.values.back(), exp_series(xi_y.at_node(0), 1.0, -1, 16)), 1e-9);
    // Pointwise too, against the closed-form exponential.
    for (double l : default_lambda_samples()) {
      EXPECT_LT(max_abs(evaluate(plus.values.back(), l) - ksurf::testing::expm_square_scalar(xi_x.at_node(0), -l)),
                1e-9);
    }
  }
}

TEST(LoopOde, FourthOrderConvergence) {
  const double e1 = path_error_at_end(amsler_preset(1.0, GridSpec::from_domain(2, 2, 0.2)), 20);
  const double e2 = path_error_at_end(amsler_preset(1.0, GridSpec::from_domain(2, 2, 0.1)), 20);
  const double order = std::log2(e1 / e2);
  EXPECT_GE(order, 3.8) << "errors " << e1 << " " << e2;
}

TEST(LoopOde, DegreeStructureAndTwist) {
  const auto data = soliton_preset(1.0, 0.0, GridSpec::from_domain(2, 2, 0.05));
  const auto plus = integrate_plus(build_symmetric_x(data), 16);
  const auto minus = integrate_minus(build_symmetric_y(data), 16);
  for (const auto& v : plus.values) {
    EXPECT_GE(v.lowest_degree(), 0);
    EXPECT_EQ(v[0], Mat2::Identity());
    EXPECT_LE(v.twist_defect(), 1e-12);
  }
  for (const auto& v : minus.values) {
    EXPECT_LE(v.highest_degree(), 0);
    EXPECT_EQ(v[0], Mat2::Identity());
    EXPECT_LE(v.twist_defect(), 1e-12);
  }
  EXPECT_EQ(plus.sign, FactorSign::plus);
  EXPECT_EQ(minus.direction, Axis::y);
}

TEST(LoopOde, UnitarityAlongSolitonPath) {
  const auto data = soliton_preset(1.0, 0.0, GridSpec::from_domain(2, 2, 0.05));
  const auto plus = integrate_plus(build_symmetric_x(data), 16);
  const auto minus = integrate_minus(build_symmetric_y(data), 16);
  for (const auto* path : {&plus, &minus}) {
    EXPECT_LT(path->max_unitarity_defect, 1e-8);
    EXPECT_TRUE(path->warnings.empty());
    for (const auto& v : path->values) {
      for (double l : default_lambda_samples()) {
        const Mat2 m = evaluate(v, l);
        EXPECT_LT(std::abs(m.determinant() - 1.0), 1e-8);
      }
      const std::vector<double> one{1.0};
      const Mat2 inv = unitary_inverse(v, one).front();
      EXPECT_LT(max_abs(evaluate(v, 1.0) * inv - Mat2::Identity()), 1e-8);
    }
  }
}

TEST(LoopOde, CoefficientDecayBound) {
  const auto g = GridSpec::from_domain(2, 2, 0.01);
  const auto path = integrate_plus(build_symmetric_x(amsler_preset(0.9, g)), 16);
  for (std::size_t i = 0; i < path.values.size(); i += 20) {
    const double x = g.x(static_cast<int>(i));
    double bound = 1.0;
    for (int k = 0; k <= 16; ++k) {
      EXPECT_LE(column_sum_norm(path.values[i][k]), bound * (1.0 + 1e-6) + 1e-15) << "x = " << x << ", k = " << k;
      bound *= (x / 2.0) / (k + 1);
    }
  }
}

TEST(LoopOde, TruncationTooLowIsSignalled) {
  const auto data = amsler_preset(1.0, GridSpec::from_domain(6, 1, 0.05));
  try {
    integrate_plus(build_symmetric_x(data), 4);
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_GT(e.tail_norm(), 1e-8);
  }
}

TEST(LoopOde, RejectsWrongPotential) {
  const auto data = amsler_preset(1.0, GridSpec::from_domain(1, 1, 0.1));
  EXPECT_THROW(integrate_plus(build_symmetric_y(data), 8), std::invalid_argument);
  EXPECT_THROW(integrate_minus(build_symmetric_x(data), 8), std::invalid_argument);
}

TEST(LoopOde, MinusPathIgnoresXData) {
  const auto g = GridSpec::from_domain(2, 2, 0.05);
  const auto a = soliton_preset(1.0, 0.0, g);
  // Same beta, different alpha.
  std::vector<double> alpha = a.alpha().samples();
  for (std::size_t i = 1; i < alpha.size(); ++i) alpha[i] += 0.1 * std::sin(static_cast<double>(i));
  const AngleData b(g, SampledFunction(alpha, g.hx), a.beta());
  const auto ma = integrate_minus(build_symmetric_y(a), 16);
  const auto mb = integrate_minus(build_symmetric_y(b), 16);
  for (std::size_t j = 0; j < ma.values.size(); ++j) EXPECT_EQ(ma.values[j], mb.values[j]);
}

}  // namespace
