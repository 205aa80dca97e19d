#include "ksurf/birkhoff.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "ksurf/error.hpp"

namespace ksurf {

namespace {

using DenseMatrix = Eigen::MatrixXcd;

void check_and_throw(const char* who, double condition, double residual, const BirkhoffOptions& options) {
  if (condition > options.max_condition || !(residual <= options.max_residual)) {
    std::ostringstream os;
    os << who << ": outside the big cell (condition estimate " << condition << ", residual " << residual << ")";
    throw BigCellViolation(os.str(), condition, residual);
  }
}

// Shared solve; on singular systems throws with an infinite condition estimate.
DenseMatrix solve_toeplitz(const char* who, const DenseMatrix& a, const DenseMatrix& rhs, double& condition) {
  Eigen::FullPivLU<DenseMatrix> lu(a);
  if (!lu.isInvertible()) {
    const double inf = std::numeric_limits<double>::infinity();
    throw BigCellViolation(std::string(who) + ": factorization system is singular", inf, inf);
  }
  const double rc = lu.rcond();
  condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  return lu.solve(rhs);
}

}  // namespace

BirkhoffSplit split(const TwistedLoop& g, const BirkhoffOptions& options) {
  const int n = g.truncation();
  BirkhoffSplit out;
  TwistedLoop m = TwistedLoop::identity(n);

  if (g.lowest_degree() < 0) {
    // Unknown block m_j, j in [-n, -1], row index (j, s); equation (k, r) for k in [-n, -1].
    const int dim = 2 * n;
    DenseMatrix a = DenseMatrix::Zero(dim, dim);
    DenseMatrix rhs(dim, 2);
    auto row = [n](int k, int r) { return 2 * (k + n) + r; };
    for (int k = -n; k <= -1; ++k) {
      for (int j = -n; j <= -1; ++j) {
        const Mat2& c = g[k - j];
        for (int r = 0; r < 2; ++r)
          for (int s = 0; s < 2; ++s) a(row(k, r), row(j, s)) = c(r, s);
      }
      for (int r = 0; r < 2; ++r)
        for (int col = 0; col < 2; ++col) rhs(row(k, r), col) = -g[k](r, col);
    }
    const DenseMatrix x = solve_toeplitz("split", a, rhs, out.condition_estimate);
    for (int j = -n; j <= -1; ++j)
      for (int s = 0; s < 2; ++s)
        for (int col = 0; col < 2; ++col) m[j](s, col) = x(row(j, s), col);
  }

  const TwistedLoop gm = multiply(g, m);
  out.residual = wiener_norm(gm.negative_part());
  out.plus_factor = gm.nonnegative_part();
  out.minus_factor = std::move(m);
  out.minus_factor[0] = Mat2::Identity();
  check_and_throw("split", out.condition_estimate, out.residual, options);
  return out;
}

BirkhoffSplit split_opposite(const TwistedLoop& g, const BirkhoffOptions& options) {
  const int n = g.truncation();
  BirkhoffSplit out;
  TwistedLoop q = TwistedLoop::identity(n);

  if (g.highest_degree() > 0) {
    // Q = I + sum_{j=1}^{n} q_j lambda^j with (Q g)_k = 0 for k in [1, n]. Unknowns are
    // the rows of q_j: index (j, s), one right-hand side per row r of Q.
    const int dim = 2 * n;
    DenseMatrix a = DenseMatrix::Zero(dim, dim);
    DenseMatrix rhs(dim, 2);
    auto idx = [](int k, int c) { return 2 * (k - 1) + c; };
    for (int k = 1; k <= n; ++k) {
      for (int j = 1; j <= n; ++j) {
        const Mat2& c = g[k - j];
        for (int col = 0; col < 2; ++col)
          for (int s = 0; s < 2; ++s) a(idx(k, col), idx(j, s)) = c(s, col);
      }
      for (int col = 0; col < 2; ++col)
        for (int r = 0; r < 2; ++r) rhs(idx(k, col), r) = -g[k](r, col);
    }
    const DenseMatrix x = solve_toeplitz("split_opposite", a, rhs, out.condition_estimate);
    for (int j = 1; j <= n; ++j)
      for (int s = 0; s < 2; ++s)
        for (int r = 0; r < 2; ++r) q[j](r, s) = x(idx(j, s), r);
  }

  const TwistedLoop qg = multiply(q, g);
  out.residual = wiener_norm(qg.positive_part());
  out.minus_factor = qg.nonpositive_part();
  out.plus_factor = one_sided_inverse(q);
  out.plus_factor[0] = Mat2::Identity();
  check_and_throw("split_opposite", out.condition_estimate, out.residual, options);
  return out;
}

}  // namespace ksurf
