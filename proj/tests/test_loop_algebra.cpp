#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ksurf/error.hpp"
#include "ksurf/loop_algebra.hpp"
#include "support.hpp"

using namespace ksurf;
using ksurf::testing::max_abs;
using ksurf::testing::random_twisted;

namespace {

const Complex I1(0.0, 1.0);

TEST(LoopAlgebra, PauliProductGivesMinusIdentity) {
  const auto a = TwistedLoop::monomial(4, 1, I1 * pauli::sigma1());
  const auto b = TwistedLoop::monomial(4, -1, I1 * pauli::sigma1());
  const auto p = multiply_with_loss(a, b);
  EXPECT_EQ(p.value, -1.0 * TwistedLoop::identity(4));
  EXPECT_EQ(p.truncation_loss, 0.0);
}

TEST(LoopAlgebra, IdentityIsNeutral) {
  std::mt19937_64 rng(7);
  const auto g = random_twisted(rng, 8, -8, 8, 1.0);
  EXPECT_EQ(TwistedLoop::identity(8) * g, g);
  EXPECT_EQ(g * TwistedLoop::identity(8), g);
}

TEST(LoopAlgebra, EvaluationIsMultiplicativeWithoutLoss) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_twisted(rng, 8, -4, 4, 0.7);
    const auto b = random_twisted(rng, 8, -4, 4, 0.7);
    const auto p = multiply_with_loss(a, b);
    ASSERT_EQ(p.truncation_loss, 0.0);
    for (double l : default_lambda_samples()) {
      EXPECT_LT(max_abs(evaluate(p.value, l) - evaluate(a, l) * evaluate(b, l)), 1e-10);
    }
  }
}

TEST(LoopAlgebra, TruncationLossIsReported) {
  const auto a = TwistedLoop::monomial(4, 3, I1 * pauli::sigma1());
  const auto b = TwistedLoop::monomial(4, 3, pauli::sigma1());
  const auto p = multiply_with_loss(a, b);
  EXPECT_TRUE(p.value.is_zero());
  EXPECT_DOUBLE_EQ(p.truncation_loss, 1.0);

  // deg a + deg b <= N means nothing is dropped.
  std::mt19937_64 rng(3);
  const auto c = random_twisted(rng, 6, 0, 3, 1.0);
  const auto d = random_twisted(rng, 6, -3, 3, 1.0);
  EXPECT_EQ(multiply_with_loss(c, d).truncation_loss, 0.0);
}

TEST(LoopAlgebra, ResultUsesLargerTruncation) {
  const auto a = TwistedLoop::identity(3);
  const auto b = TwistedLoop::monomial(6, 5, pauli::sigma1());
  EXPECT_EQ(multiply(a, b).truncation(), 6);
  EXPECT_EQ(multiply(a, b)[5], pauli::sigma1());
}

TEST(LoopAlgebra, EvaluateBasics) {
  for (double l : {0.5, 1.0, 2.0, -3.0}) EXPECT_EQ(evaluate(TwistedLoop::identity(5), l), Mat2::Identity());
  EXPECT_LT(max_abs(evaluate(TwistedLoop::monomial(4, 1, pauli::sigma1()), 2.0) - 2.0 * pauli::sigma1()), 1e-15);
  EXPECT_THROW(evaluate(TwistedLoop::identity(2), 0.0), std::invalid_argument);
}

TEST(LoopAlgebra, HornerMatchesNaiveSummation) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_twisted(rng, 16, -16, 16, 0.3);
    for (double l : {0.5, 0.9, 1.0, 1.3, 2.0}) {
      Mat2 naive = Mat2::Zero();
      for (int k = -16; k <= 16; ++k) naive += a[k] * std::pow(l, k);
      EXPECT_LT(max_abs(evaluate(a, l) - naive), 1e-12 * std::max(1.0, max_abs(naive)));
    }
  }
}

TEST(LoopAlgebra, LambdaScaledDerivative) {
  EXPECT_TRUE(lambda_scaled_derivative(TwistedLoop::identity(4)).is_zero());
  const Mat2 x = pauli::sigma3();
  const auto d = lambda_scaled_derivative(TwistedLoop::monomial(4, -2, x));
  EXPECT_EQ(d[-2], -2.0 * x);

  std::mt19937_64 rng(9);
  const auto a = random_twisted(rng, 8, -8, 8, 1.0);
  const auto b = random_twisted(rng, 8, -8, 8, 1.0);
  const Complex s(0.3, -1.7);
  const auto lhs = lambda_scaled_derivative(a + s * b);
  const auto rhs = lambda_scaled_derivative(a) + s * lambda_scaled_derivative(b);
  EXPECT_LT(ksurf::testing::max_coefficient_gap(lhs, rhs), 1e-14 * 8 * 8);
}

TEST(LoopAlgebra, UnitaryInverse) {
  const std::vector<double> lambdas{0.5, 1.0, 2.0};
  for (const auto& inv : unitary_inverse(TwistedLoop::identity(3), lambdas)) EXPECT_EQ(inv, Mat2::Identity());

  // exp((i/2) sigma1) = cos(1/2) I + i sin(1/2) sigma1 as a constant loop.
  const Mat2 e = std::cos(0.5) * Mat2::Identity() + I1 * std::sin(0.5) * pauli::sigma1();
  const Mat2 e_inv = std::cos(0.5) * Mat2::Identity() - I1 * std::sin(0.5) * pauli::sigma1();
  for (const auto& inv : unitary_inverse(TwistedLoop::monomial(3, 0, e), lambdas)) EXPECT_LT(max_abs(inv - e_inv), 1e-15);

  EXPECT_THROW(unitary_inverse(TwistedLoop::monomial(3, 0, 1.1 * Mat2::Identity()), lambdas), UnitarityError);
}

TEST(LoopAlgebra, WienerNorm) {
  EXPECT_EQ(wiener_norm(TwistedLoop::identity(6)), 1.0);
  EXPECT_EQ(wiener_norm(TwistedLoop(6)), 0.0);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_twisted(rng, 8, -4, 4, 1.0);
    const auto b = random_twisted(rng, 8, -4, 4, 1.0);
    EXPECT_LE(wiener_norm(a * b), wiener_norm(a) * wiener_norm(b) * (1.0 + 1e-14));
  }
}

TEST(LoopAlgebra, TwistIsPreserved) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_twisted(rng, 10, -10, 10, 0.5);
    const auto b = random_twisted(rng, 10, -10, 10, 0.5);
    ASSERT_TRUE(a.is_twisted());
    EXPECT_TRUE((a * b).is_twisted());
    EXPECT_TRUE(lambda_scaled_derivative(a).is_twisted());
    EXPECT_TRUE(a.retruncated(4).is_twisted());
    EXPECT_TRUE(adjoint(a).is_twisted());
    auto plus = ksurf::testing::random_normalized(rng, 10, 5, 0.3, true);
    EXPECT_TRUE(one_sided_inverse(plus).is_twisted());
  }
  auto bad = TwistedLoop::monomial(3, 1, Mat2::Identity());
  EXPECT_FALSE(bad.is_twisted());
  EXPECT_EQ(bad.twist_defect(), 1.0);
}

TEST(LoopAlgebra, DegreeFilters) {
  std::mt19937_64 rng(19);
  const auto a = random_twisted(rng, 5, -5, 5, 1.0);
  EXPECT_EQ(a.negative_part() + a.nonnegative_part(), a);
  EXPECT_EQ(a.positive_part() + a.nonpositive_part(), a);
  EXPECT_GE(a.nonnegative_part().lowest_degree(), 0);
  EXPECT_LE(a.nonpositive_part().highest_degree(), 0);
}

TEST(LoopAlgebra, OneSidedAndNeumannInversesAgreePointwise) {
  std::mt19937_64 rng(23);
  for (bool plus : {true, false}) {
    // Small degree-2 terms keep the inverse series well resolved at N = 16 on [0.8, 1.25].
    const auto a = ksurf::testing::random_normalized(rng, 16, 2, 0.01, plus);
    const auto inv = one_sided_inverse(a);
    const auto neu = neumann_inverse(a);
    // a * inv == I up to truncation order, coefficient-wise
    const auto prod = a * inv;
    EXPECT_LT(ksurf::testing::max_coefficient_gap(prod, TwistedLoop::identity(16)), 1e-14);
    for (double l : {0.8, 1.0, 1.25}) {
      const Mat2 expect = evaluate(a, l).inverse();
      EXPECT_LT(max_abs(evaluate(inv, l) - expect), 1e-10);
      EXPECT_LT(max_abs(evaluate(neu, l) - expect), 1e-10);
    }
  }
}

TEST(LoopAlgebra, JsonRoundTripIsExact) {
  std::mt19937_64 rng(29);
  const auto a = random_twisted(rng, 7, -7, 7, 1.0);
  const auto j = to_json(a);
  EXPECT_EQ(j.at("truncation").get<int>(), 7);
  EXPECT_EQ(loop_from_json(nlohmann::json::parse(j.dump())), a);
  EXPECT_EQ(to_json(TwistedLoop(3)).at("coefficients").size(), 0u);
}

TEST(LoopAlgebra, SuTwoVectorCorrespondence) {
  const Vec3 v(0.3, -1.2, 2.5);
  const Mat2 x = vector_to_su2(v);
  EXPECT_LT((x + x.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(std::abs(x.trace()), 1e-15);
  EXPECT_LT((su2_to_vector(x) - v).norm(), 1e-15);
  EXPECT_LT((su2_to_vector(Complex(0, -0.5) * pauli::sigma1()) - Vec3::UnitX()).norm(), 1e-15);
}

}  // namespace
