#pragma once

// Truncated twisted Laurent series in a real loop parameter lambda with
// 2x2 complex matrix coefficients. A loop X(lambda) = sum_k X_k lambda^k is
// twisted when X(-lambda) = sigma3 X(lambda) sigma3, i.e. diagonal entries
// live in even degrees and off-diagonal entries in odd degrees.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ksurf {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;

namespace pauli {
Mat2 identity();
Mat2 sigma1();
Mat2 sigma2();
Mat2 sigma3();
}  // namespace pauli

// Induced l1 norm max_j sum_i |m_ij|; the per-coefficient piece of the Wiener norm.
double column_sum_norm(const Mat2& m);

// su(2) <-> R^3 with X = -(i/2) sum_k x_k sigma_k.
Vec3 su2_to_vector(const Mat2& x);
Mat2 vector_to_su2(const Vec3& v);

// Default real lambda samples at which loops are evaluated and checked.
inline const std::vector<double>& default_lambda_samples() {
  static const std::vector<double> samples{0.5, 1.0, 2.0};
  return samples;
}

class TwistedLoop {
 public:
  explicit TwistedLoop(int truncation = 16);

  static TwistedLoop identity(int truncation);
  static TwistedLoop monomial(int truncation, int degree, const Mat2& coefficient);

  int truncation() const noexcept { return truncation_; }

  // Coefficient access for degree in [-N, N].
  const Mat2& operator[](int degree) const { return coeffs_[index(degree)]; }
  Mat2& operator[](int degree) { return coeffs_[index(degree)]; }

  // Smallest / largest degree with a nonzero coefficient. For the zero loop
  // lowest_degree() > highest_degree().
  int lowest_degree() const;
  int highest_degree() const;
  bool is_zero() const { return lowest_degree() > highest_degree(); }

  // Largest entry of a coefficient that violates the twist parity.
  double twist_defect() const;
  bool is_twisted(double tol = 1e-12) const { return twist_defect() <= tol; }

  // Degree filters: k >= 0, k < 0, k <= 0, k > 0.
  TwistedLoop nonnegative_part() const;
  TwistedLoop negative_part() const;
  TwistedLoop nonpositive_part() const;
  TwistedLoop positive_part() const;

  // Same series at a different truncation degree (drops or zero-pads).
  TwistedLoop retruncated(int truncation) const;

  TwistedLoop& operator+=(const TwistedLoop& other);
  TwistedLoop& operator-=(const TwistedLoop& other);
  TwistedLoop& operator*=(Complex s);

  friend TwistedLoop operator+(TwistedLoop a, const TwistedLoop& b) { return a += b; }
  friend TwistedLoop operator-(TwistedLoop a, const TwistedLoop& b) { return a -= b; }
  friend TwistedLoop operator*(TwistedLoop a, Complex s) { return a *= s; }
  friend TwistedLoop operator*(Complex s, TwistedLoop a) { return a *= s; }
  friend TwistedLoop operator*(TwistedLoop a, double s) { return a *= Complex(s); }
  friend TwistedLoop operator*(double s, TwistedLoop a) { return a *= Complex(s); }

  // Exact equality of every stored coefficient.
  friend bool operator==(const TwistedLoop& a, const TwistedLoop& b);

 private:
  std::size_t index(int degree) const;

  int truncation_;
  std::vector<Mat2> coeffs_;
};

struct LoopProduct {
  TwistedLoop value;
  // Wiener norm of the Cauchy-product terms that fell outside [-N, N].
  double truncation_loss = 0.0;
};

// Cauchy product truncated to N = max(a.N, b.N).
LoopProduct multiply_with_loss(const TwistedLoop& a, const TwistedLoop& b);
TwistedLoop multiply(const TwistedLoop& a, const TwistedLoop& b);
inline TwistedLoop operator*(const TwistedLoop& a, const TwistedLoop& b) { return multiply(a, b); }

// Left / right multiplication by a lambda-independent matrix.
TwistedLoop left_multiply(const Mat2& m, const TwistedLoop& a);
TwistedLoop right_multiply(const TwistedLoop& a, const Mat2& m);
// r * a * r^{-1}
TwistedLoop conjugate(const TwistedLoop& a, const Mat2& r);

// sum_k a_k lambda0^k; throws std::invalid_argument for lambda0 == 0.
Mat2 evaluate(const TwistedLoop& a, double lambda0);

// lambda d/dlambda, i.e. d/dt with lambda = e^t: coefficient k -> k a_k.
TwistedLoop lambda_scaled_derivative(const TwistedLoop& a);

// Coefficient-wise conjugate transpose. For loops that are unitary at every
// real lambda this is the inverse loop.
TwistedLoop adjoint(const TwistedLoop& a);

// Pointwise inverses at real samples, using unitarity. Throws UnitarityError
// when |det - 1| exceeds det_tolerance at any sample.
std::vector<Mat2> unitary_inverse(const TwistedLoop& g, std::span<const double> sample_lambdas,
                                  double det_tolerance = 1e-6);

// Max deviation of g(lambda) from SU(2) over the samples: max of |g g^* - I| and |det g - 1|.
double unitarity_defect(const TwistedLoop& g, std::span<const double> sample_lambdas);

// Wiener norm: max over columns j of sum_i sum_k |(a_k)_ij|. Satisfies |I| = 1 and
// |ab| <= |a| |b|.
double wiener_norm(const TwistedLoop& a);

// Inverse of a one-sided loop (only degrees >= 0, or only degrees <= 0) with an
// invertible constant term, by triangular recursion. Exact at truncation order.
TwistedLoop one_sided_inverse(const TwistedLoop& a);

// Inverse by the truncated Neumann series sum_n (I - a)^n; requires |a - I| < 1.
TwistedLoop neumann_inverse(const TwistedLoop& a);

// Structured text form: {"truncation": N, "coefficients": [[k, re00, im00, re01,
// im01, re10, im10, re11, im11], ...]} listing nonzero coefficients by degree.
nlohmann::json to_json(const TwistedLoop& a);
TwistedLoop loop_from_json(const nlohmann::json& j);

}  // namespace ksurf
