#include "ksurf/loop_ode.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "ksurf/error.hpp"

namespace ksurf {

namespace {

// Y * (-lambda^p * m), dropping degrees that leave [-N, N].
TwistedLoop shifted_right_product(const TwistedLoop& y, const Mat2& m, int p) {
  const int n = y.truncation();
  TwistedLoop out(n);
  if (y.is_zero()) return out;
  const int lo = std::max(y.lowest_degree(), -n - p);
  const int hi = std::min(y.highest_degree(), n - p);
  for (int k = lo; k <= hi; ++k) out[k + p] = -(y[k] * m);
  return out;
}

FrameFactorPath integrate(const PotentialForm& xi, int truncation, const OdeOptions& options, FactorSign sign) {
  const int p = sign == FactorSign::plus ? 1 : -1;
  if (xi.lambda_power != p) {
    throw std::invalid_argument(sign == FactorSign::plus ? "integrate_plus expects an x-potential (lambda power +1)"
                                                         : "integrate_minus expects a y-potential (lambda power -1)");
  }
  if (truncation < 1) throw std::invalid_argument("truncation degree must be positive");
  if (xi.samples.empty() || xi.samples.size() % 2 == 0) {
    throw std::invalid_argument("potential must be sampled at nodes and half-steps");
  }

  FrameFactorPath path;
  path.direction = xi.direction;
  path.sign = sign;
  path.step = xi.step;
  const std::size_t nodes = xi.node_count();
  path.values.reserve(nodes);
  path.values.push_back(TwistedLoop::identity(truncation));

  const double h = xi.step;
  bool warned = false;
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    const TwistedLoop& y = path.values.back();
    const Mat2& m0 = xi.samples[2 * i];
    const Mat2& mh = xi.samples[2 * i + 1];
    const Mat2& m1 = xi.samples[2 * i + 2];

    const TwistedLoop k1 = shifted_right_product(y, m0, p);
    const TwistedLoop k2 = shifted_right_product(y + (0.5 * h) * k1, mh, p);
    const TwistedLoop k3 = shifted_right_product(y + (0.5 * h) * k2, mh, p);
    const TwistedLoop k4 = shifted_right_product(y + h * k3, m1, p);
    TwistedLoop next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double tail = column_sum_norm(next[p * truncation]);
    path.max_tail_norm = std::max(path.max_tail_norm, tail);
    if (tail > options.tail_tolerance) {
      std::ostringstream os;
      os << "loop ODE: degree-" << p * truncation << " coefficient reached " << tail << " at node " << i + 1
         << "; increase the truncation degree";
      throw TruncationError(os.str(), tail);
    }

    const double defect = unitarity_defect(next, options.lambda_samples);
    path.max_unitarity_defect = std::max(path.max_unitarity_defect, defect);
    if (defect > options.unitarity_abort) {
      std::ostringstream os;
      os << "loop ODE: unitarity defect " << defect << " at node " << i + 1;
      throw UnitarityError(os.str(), defect);
    }
    if (defect > options.unitarity_warn && !warned) {
      std::ostringstream os;
      os << "unitarity defect " << defect << " exceeds " << options.unitarity_warn << " at node " << i + 1;
      path.warnings.push_back(os.str());
      warned = true;
    }
    path.values.push_back(std::move(next));
  }
  return path;
}

}  // namespace

FrameFactorPath integrate_plus(const PotentialForm& xi_x, int truncation, const OdeOptions& options) {
  return integrate(xi_x, truncation, options, FactorSign::plus);
}

FrameFactorPath integrate_minus(const PotentialForm& xi_y, int truncation, const OdeOptions& options) {
  return integrate(xi_y, truncation, options, FactorSign::minus);
}

}  // namespace ksurf
