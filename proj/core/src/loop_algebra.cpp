#include "ksurf/loop_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ksurf/error.hpp"

namespace ksurf {

namespace pauli {
Mat2 identity() { return Mat2::Identity(); }
Mat2 sigma1() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
Mat2 sigma2() {
  Mat2 m;
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}
Mat2 sigma3() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

double column_sum_norm(const Mat2& m) {
  return std::max(std::abs(m(0, 0)) + std::abs(m(1, 0)), std::abs(m(0, 1)) + std::abs(m(1, 1)));
}

Vec3 su2_to_vector(const Mat2& x) {
  // x_k = i tr(X sigma_k)
  const Complex i(0.0, 1.0);
  return Vec3((i * (x * pauli::sigma1()).trace()).real(), (i * (x * pauli::sigma2()).trace()).real(),
              (i * (x * pauli::sigma3()).trace()).real());
}

Mat2 vector_to_su2(const Vec3& v) {
  const Complex half_i(0.0, -0.5);
  return half_i * (v[0] * pauli::sigma1() + v[1] * pauli::sigma2() + v[2] * pauli::sigma3());
}

TwistedLoop::TwistedLoop(int truncation)
    : truncation_(truncation), coeffs_(static_cast<std::size_t>(2 * truncation + 1), Mat2::Zero()) {
  if (truncation < 0) throw std::invalid_argument("TwistedLoop: negative truncation degree");
}

TwistedLoop TwistedLoop::identity(int truncation) {
  TwistedLoop l(truncation);
  l[0] = Mat2::Identity();
  return l;
}

TwistedLoop TwistedLoop::monomial(int truncation, int degree, const Mat2& coefficient) {
  TwistedLoop l(truncation);
  l[degree] = coefficient;
  return l;
}

std::size_t TwistedLoop::index(int degree) const {
  if (degree < -truncation_ || degree > truncation_) {
    throw std::out_of_range("TwistedLoop: degree " + std::to_string(degree) + " outside [-" +
                            std::to_string(truncation_) + ", " + std::to_string(truncation_) + "]");
  }
  return static_cast<std::size_t>(degree + truncation_);
}

int TwistedLoop::lowest_degree() const {
  for (int k = -truncation_; k <= truncation_; ++k) {
    if (!coeffs_[static_cast<std::size_t>(k + truncation_)].isZero(0.0)) return k;
  }
  return truncation_ + 1;
}

int TwistedLoop::highest_degree() const {
  for (int k = truncation_; k >= -truncation_; --k) {
    if (!coeffs_[static_cast<std::size_t>(k + truncation_)].isZero(0.0)) return k;
  }
  return -truncation_ - 1;
}

double TwistedLoop::twist_defect() const {
  double worst = 0.0;
  for (int k = -truncation_; k <= truncation_; ++k) {
    const Mat2& c = (*this)[k];
    if (k % 2 == 0) {
      worst = std::max({worst, std::abs(c(0, 1)), std::abs(c(1, 0))});
    } else {
      worst = std::max({worst, std::abs(c(0, 0)), std::abs(c(1, 1))});
    }
  }
  return worst;
}

namespace {
template <typename Pred>
TwistedLoop filter_degrees(const TwistedLoop& a, Pred keep) {
  TwistedLoop out(a.truncation());
  for (int k = -a.truncation(); k <= a.truncation(); ++k) {
    if (keep(k)) out[k] = a[k];
  }
  return out;
}
}  // namespace

TwistedLoop TwistedLoop::nonnegative_part() const {
  return filter_degrees(*this, [](int k) { return k >= 0; });
}
TwistedLoop TwistedLoop::negative_part() const {
  return filter_degrees(*this, [](int k) { return k < 0; });
}
TwistedLoop TwistedLoop::nonpositive_part() const {
  return filter_degrees(*this, [](int k) { return k <= 0; });
}
TwistedLoop TwistedLoop::positive_part() const {
  return filter_degrees(*this, [](int k) { return k > 0; });
}

TwistedLoop TwistedLoop::retruncated(int truncation) const {
  TwistedLoop out(truncation);
  const int n = std::min(truncation, truncation_);
  for (int k = -n; k <= n; ++k) out[k] = (*this)[k];
  return out;
}

TwistedLoop& TwistedLoop::operator+=(const TwistedLoop& other) {
  if (other.truncation_ > truncation_) *this = retruncated(other.truncation_);
  for (int k = -other.truncation_; k <= other.truncation_; ++k) (*this)[k] += other[k];
  return *this;
}

TwistedLoop& TwistedLoop::operator-=(const TwistedLoop& other) {
  if (other.truncation_ > truncation_) *this = retruncated(other.truncation_);
  for (int k = -other.truncation_; k <= other.truncation_; ++k) (*this)[k] -= other[k];
  return *this;
}

TwistedLoop& TwistedLoop::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

bool operator==(const TwistedLoop& a, const TwistedLoop& b) {
  return a.truncation_ == b.truncation_ && a.coeffs_ == b.coeffs_;
}

LoopProduct multiply_with_loss(const TwistedLoop& a, const TwistedLoop& b) {
  const int n = std::max(a.truncation(), b.truncation());
  LoopProduct out{TwistedLoop(n), 0.0};
  const int alo = a.lowest_degree(), ahi = a.highest_degree();
  const int blo = b.lowest_degree(), bhi = b.highest_degree();
  if (alo > ahi || blo > bhi) return out;

  // Dropped terms are collected per degree so the loss is a true Wiener norm.
  std::vector<Mat2> dropped;
  const int lo = alo + blo, hi = ahi + bhi;
  if (lo < -n || hi > n) dropped.assign(static_cast<std::size_t>(hi - lo + 1), Mat2::Zero());

  for (int i = alo; i <= ahi; ++i) {
    const Mat2& ai = a[i];
    if (ai.isZero(0.0)) continue;
    for (int j = blo; j <= bhi; ++j) {
      const int k = i + j;
      if (k >= -n && k <= n) {
        out.value[k].noalias() += ai * b[j];
      } else {
        dropped[static_cast<std::size_t>(k - lo)].noalias() += ai * b[j];
      }
    }
  }
  if (!dropped.empty()) {
    double col0 = 0.0, col1 = 0.0;
    for (const auto& d : dropped) {
      col0 += std::abs(d(0, 0)) + std::abs(d(1, 0));
      col1 += std::abs(d(0, 1)) + std::abs(d(1, 1));
    }
    out.truncation_loss = std::max(col0, col1);
  }
  return out;
}

TwistedLoop multiply(const TwistedLoop& a, const TwistedLoop& b) {
  return multiply_with_loss(a, b).value;
}

TwistedLoop left_multiply(const Mat2& m, const TwistedLoop& a) {
  TwistedLoop out(a.truncation());
  for (int k = -a.truncation(); k <= a.truncation(); ++k) out[k].noalias() = m * a[k];
  return out;
}

TwistedLoop right_multiply(const TwistedLoop& a, const Mat2& m) {
  TwistedLoop out(a.truncation());
  for (int k = -a.truncation(); k <= a.truncation(); ++k) out[k].noalias() = a[k] * m;
  return out;
}

TwistedLoop conjugate(const TwistedLoop& a, const Mat2& r) {
  const Mat2 rinv = r.inverse();
  TwistedLoop out(a.truncation());
  for (int k = -a.truncation(); k <= a.truncation(); ++k) out[k] = r * a[k] * rinv;
  return out;
}

Mat2 evaluate(const TwistedLoop& a, double lambda0) {
  if (lambda0 == 0.0) throw std::invalid_argument("evaluate: lambda0 must be nonzero");
  const int lo = a.lowest_degree(), hi = a.highest_degree();
  if (lo > hi) return Mat2::Zero();
  // Horner in lambda over [lo, hi], then shift by lambda^lo.
  Mat2 acc = a[hi];
  for (int k = hi - 1; k >= lo; --k) acc = acc * lambda0 + a[k];
  return acc * std::pow(lambda0, lo);
}

TwistedLoop lambda_scaled_derivative(const TwistedLoop& a) {
  TwistedLoop out(a.truncation());
  for (int k = -a.truncation(); k <= a.truncation(); ++k) out[k] = static_cast<double>(k) * a[k];
  return out;
}

TwistedLoop adjoint(const TwistedLoop& a) {
  TwistedLoop out(a.truncation());
  for (int k = -a.truncation(); k <= a.truncation(); ++k) out[k] = a[k].adjoint();
  return out;
}

std::vector<Mat2> unitary_inverse(const TwistedLoop& g, std::span<const double> sample_lambdas,
                                  double det_tolerance) {
  std::vector<Mat2> out;
  out.reserve(sample_lambdas.size());
  for (double l : sample_lambdas) {
    const Mat2 v = evaluate(g, l);
    const double det_err = std::abs(v.determinant() - 1.0);
    if (!(det_err <= det_tolerance)) {
      throw UnitarityError("unitary_inverse: |det - 1| = " + std::to_string(det_err) + " at lambda = " +
                               std::to_string(l) + " (truncation degree too low?)",
                           det_err);
    }
    out.push_back(v.adjoint());
  }
  return out;
}

double unitarity_defect(const TwistedLoop& g, std::span<const double> sample_lambdas) {
  double worst = 0.0;
  for (double l : sample_lambdas) {
    const Mat2 v = evaluate(g, l);
    worst = std::max(worst, (v * v.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(v.determinant() - 1.0));
  }
  return worst;
}

double wiener_norm(const TwistedLoop& a) {
  double col0 = 0.0, col1 = 0.0;
  for (int k = -a.truncation(); k <= a.truncation(); ++k) {
    const Mat2& c = a[k];
    col0 += std::abs(c(0, 0)) + std::abs(c(1, 0));
    col1 += std::abs(c(0, 1)) + std::abs(c(1, 1));
  }
  return std::max(col0, col1);
}

TwistedLoop one_sided_inverse(const TwistedLoop& a) {
  const int n = a.truncation();
  const int lo = a.lowest_degree(), hi = a.highest_degree();
  if (lo > hi) throw std::invalid_argument("one_sided_inverse: zero loop");
  int dir = 0;  // +1 for power series in lambda, -1 for series in 1/lambda
  if (lo >= 0) {
    dir = 1;
  } else if (hi <= 0) {
    dir = -1;
  } else {
    throw std::invalid_argument("one_sided_inverse: loop has both positive and negative degrees");
  }
  const Mat2& c0 = a[0];
  if (std::abs(c0.determinant()) < 1e-300) {
    throw std::invalid_argument("one_sided_inverse: constant term is singular");
  }
  const Mat2 c0inv = c0.inverse();
  TwistedLoop out(n);
  out[0] = c0inv;
  for (int m = 1; m <= n; ++m) {
    Mat2 s = Mat2::Zero();
    for (int j = 1; j <= m; ++j) s.noalias() += a[dir * j] * out[dir * (m - j)];
    out[dir * m] = -c0inv * s;
  }
  return out;
}

TwistedLoop neumann_inverse(const TwistedLoop& a) {
  const int n = a.truncation();
  const TwistedLoop d = TwistedLoop::identity(n) - a;
  const double q = wiener_norm(d);
  if (!(q < 1.0)) throw std::invalid_argument("neumann_inverse: |a - I| must be < 1");
  TwistedLoop sum = TwistedLoop::identity(n);
  TwistedLoop term = TwistedLoop::identity(n);
  double bound = 1.0;
  // Stop once the geometric tail bound q^m / (1 - q) is below roundoff.
  for (int m = 1; m < 4096; ++m) {
    term = multiply(term, d);
    sum += term;
    bound *= q;
    if (bound / (1.0 - q) < 1e-17 || term.is_zero()) break;
  }
  return sum;
}

nlohmann::json to_json(const TwistedLoop& a) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (int k = -a.truncation(); k <= a.truncation(); ++k) {
    const Mat2& c = a[k];
    if (c.isZero(0.0)) continue;
    coeffs.push_back({k, c(0, 0).real(), c(0, 0).imag(), c(0, 1).real(), c(0, 1).imag(), c(1, 0).real(),
                      c(1, 0).imag(), c(1, 1).real(), c(1, 1).imag()});
  }
  return {{"truncation", a.truncation()}, {"coefficients", coeffs}};
}

TwistedLoop loop_from_json(const nlohmann::json& j) {
  TwistedLoop out(j.at("truncation").get<int>());
  for (const auto& rec : j.at("coefficients")) {
    if (!rec.is_array() || rec.size() != 9) {
      throw std::invalid_argument("loop_from_json: each record needs a degree and 8 reals");
    }
    const int k = rec[0].get<int>();
    Mat2& c = out[k];
    c(0, 0) = Complex(rec[1].get<double>(), rec[2].get<double>());
    c(0, 1) = Complex(rec[3].get<double>(), rec[4].get<double>());
    c(1, 0) = Complex(rec[5].get<double>(), rec[6].get<double>());
    c(1, 1) = Complex(rec[7].get<double>(), rec[8].get<double>());
  }
  return out;
}

}  // namespace ksurf
