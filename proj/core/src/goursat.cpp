#include "ksurf/goursat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ksurf/error.hpp"
#include "ksurf/parallel.hpp"
#include "ksurf/stencil.hpp"

namespace ksurf {

namespace {

struct PicardResult {
  Grid2<double> u;
  int iterations = 0;
  std::vector<double> trace;
  double residual = 0.0;
};

// Trapezoidal Picard iteration with refinement factor `refine` relative to the data grid.
PicardResult picard(const AngleData& data, int refine, const GoursatOptions& options) {
  const GridSpec& g = data.grid();
  const int nx = (g.nx - 1) * refine + 1;
  const int ny = (g.ny - 1) * refine + 1;
  const double hx = g.hx / refine, hy = g.hy / refine;
  std::vector<double> alpha(static_cast<std::size_t>(nx)), beta(static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i)
    alpha[i] = (i % refine == 0) ? data.alpha().at_node(static_cast<std::size_t>(i / refine)) : data.alpha()(i * hx);
  for (int j = 0; j < ny; ++j)
    beta[j] = (j % refine == 0) ? data.beta().at_node(static_cast<std::size_t>(j / refine)) : data.beta()(j * hy);
  const double a0 = alpha[0];
  const double w = 0.25 * hx * hy;

  PicardResult r;
  r.u = Grid2<double>(nx, ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) r.u(i, j) = alpha[i] + beta[j] - a0;

  Grid2<double> f(nx, ny), s(nx, ny, 0.0);
  for (int it = 1; it <= options.max_iterations; ++it) {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) f(i, j) = std::sin(r.u(i, j));
    for (int i = 1; i < nx; ++i)
      for (int j = 1; j < ny; ++j)
        s(i, j) = s(i - 1, j) + s(i, j - 1) - s(i - 1, j - 1) +
                  w * (f(i - 1, j - 1) + f(i - 1, j) + f(i, j - 1) + f(i, j));
    double change = 0.0;
    for (int i = 1; i < nx; ++i) {
      for (int j = 1; j < ny; ++j) {
        const double next = alpha[i] + beta[j] - a0 + s(i, j);
        change = std::max(change, std::abs(next - r.u(i, j)));
        r.u(i, j) = next;
      }
    }
    r.trace.push_back(change);
    r.iterations = it;
    if (change < options.tolerance) break;
    if (it == options.max_iterations) {
      std::ostringstream os;
      os << "Goursat Picard iteration did not reach " << options.tolerance << " in " << it
         << " sweeps (last change " << change << ")";
      throw ConvergenceError(os.str(), r.trace);
    }
  }

  for (int i = 1; i < nx; ++i) {
    for (int j = 1; j < ny; ++j) {
      const double lhs = r.u(i, j) - r.u(i - 1, j) - r.u(i, j - 1) + r.u(i - 1, j - 1);
      const double rhs = w * (std::sin(r.u(i - 1, j - 1)) + std::sin(r.u(i - 1, j)) + std::sin(r.u(i, j - 1)) +
                              std::sin(r.u(i, j)));
      r.residual = std::max(r.residual, std::abs(lhs - rhs));
    }
  }
  return r;
}

}  // namespace

GoursatField solve_goursat(const AngleData& data, const GoursatOptions& options) {
  if (options.richardson_levels < 0) throw std::invalid_argument("richardson_levels must be >= 0");
  const GridSpec& g = data.grid();
  GoursatField out;
  out.grid = g;

  // Richardson tableau on the data grid nodes: T[l][k] uses step h / 2^l and k eliminations.
  std::vector<std::vector<Grid2<double>>> table;
  for (int l = 0; l <= options.richardson_levels; ++l) {
    const int refine = 1 << l;
    PicardResult p = picard(data, refine, options);
    if (l == 0) {
      out.iterations = p.iterations;
      out.trace = p.trace;
      out.discrete_residual = p.residual;
    }
    Grid2<double> coarse(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) coarse(i, j) = p.u(i * refine, j * refine);
    std::vector<Grid2<double>> row{std::move(coarse)};
    for (int k = 1; k <= l; ++k) {
      const double factor = std::pow(4.0, k) - 1.0;
      Grid2<double> next(g.nx, g.ny);
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
          next(i, j) = row[k - 1](i, j) + (row[k - 1](i, j) - table[l - 1][k - 1](i, j)) / factor;
      row.push_back(std::move(next));
    }
    table.push_back(std::move(row));
  }
  out.values = std::move(table.back().back());
  // Extrapolation leaves rounding noise on the data rows; they are known exactly.
  for (int i = 0; i < g.nx; ++i) out.values(i, 0) = data.alpha().at_node(i);
  for (int j = 0; j < g.ny; ++j) out.values(0, j) = data.beta().at_node(j);
  return out;
}

AngleField as_angle_field(const GoursatField& field, double singular_tol) {
  AngleField a;
  a.grid = field.grid;
  a.source = AngleSource::goursat;
  a.values = field.values;
  a.flags = Grid2<NodeFlag>(field.grid.nx, field.grid.ny, NodeFlag::regular);
  for (int i = 0; i < field.grid.nx; ++i)
    for (int j = 0; j < field.grid.ny; ++j)
      if (std::abs(std::sin(field.values(i, j))) < singular_tol) a.flags(i, j) = NodeFlag::angle_singular;
  return a;
}

namespace {

// Cubic (4-point Lagrange) interpolation of line values at k + u, u in [0, 1].
template <typename Value>
double cubic_at(int k, double u, int n, Value&& v) {
  if (u == 0.0) return v(k);
  if (n < 4) return (1.0 - u) * v(k) + u * v(k + 1);
  const int w = std::clamp(k - 1, 0, n - 4);
  const double t = static_cast<double>(k - w) + u;
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (t - b) / static_cast<double>(a - b);
    acc += l * v(w + a);
  }
  return acc;
}

Mat2 lax_a(double phi_x, double lambda) {
  const Complex h(0.0, 0.5);
  Mat2 m;
  m << h * phi_x, -h * lambda, -h * lambda, -h * phi_x;
  return m;
}

Mat2 lax_b(double phi, double lambda) {
  const Complex h(0.0, 0.5 / lambda);
  Mat2 m;
  m << 0.0, h * std::polar(1.0, -phi), h * std::polar(1.0, phi), 0.0;
  return m;
}

// d/dlambda of A and B.
Mat2 lax_a_lambda() { return Complex(0.0, -0.5) * pauli::sigma1(); }
Mat2 lax_b_lambda(double phi, double lambda) { return lax_b(phi, lambda) * (-1.0 / lambda); }

struct Coefficients {
  Mat2 m, m_lambda;
};

PointFrame rk4_step(const PointFrame& y, double h, const Coefficients& c0, const Coefficients& ch,
                    const Coefficients& c1) {
  auto f = [](const PointFrame& s, const Coefficients& c) {
    return PointFrame{s.matrix * c.m, s.lambda_sensitivity * c.m + s.matrix * c.m_lambda};
  };
  auto axpy = [](const PointFrame& s, double a, const PointFrame& k) {
    return PointFrame{s.matrix + a * k.matrix, s.lambda_sensitivity + a * k.lambda_sensitivity};
  };
  const PointFrame k1 = f(y, c0);
  const PointFrame k2 = f(axpy(y, 0.5 * h, k1), ch);
  const PointFrame k3 = f(axpy(y, 0.5 * h, k2), ch);
  const PointFrame k4 = f(axpy(y, h, k3), c1);
  return PointFrame{y.matrix + (h / 6.0) * (k1.matrix + 2.0 * k2.matrix + 2.0 * k3.matrix + k4.matrix),
                    y.lambda_sensitivity + (h / 6.0) * (k1.lambda_sensitivity + 2.0 * k2.lambda_sensitivity +
                                                        2.0 * k3.lambda_sensitivity + k4.lambda_sensitivity)};
}

}  // namespace

LaxFrames integrate_lax(const GoursatField& phi, double lambda0) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("integrate_lax: lambda0 must be positive");
  const GridSpec& g = phi.grid;
  const int nx = g.nx, ny = g.ny;
  if (nx < 2 || ny < 2) throw std::invalid_argument("integrate_lax: need at least 2x2 nodes");

  Grid2<double> phi_x(nx, ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      auto s = pick_stencil(i, nx, [](int) { return true; });
      phi_x(i, j) = apply_stencil<double>(*s, i, g.hx, [&](int k) { return phi.values(k, j); });
    }
  }

  auto x_coeffs = [&](double px) { return Coefficients{lax_a(px, lambda0), lax_a_lambda()}; };
  auto y_coeffs = [&](double p) { return Coefficients{lax_b(p, lambda0), lax_b_lambda(p, lambda0)}; };

  // Each grid cell is crossed in kSubsteps RK4 steps. RK4 does not preserve
  // unitarity exactly; the substeps keep its drift well under 1e-8.
  constexpr int kSubsteps = 2;
  auto cell = [&](PointFrame y, double h, int k, int n, auto&& value, auto&& coeffs) {
    const double dh = h / kSubsteps;
    for (int s = 0; s < kSubsteps; ++s) {
      const double u0 = static_cast<double>(s) / kSubsteps;
      const double du = 1.0 / kSubsteps;
      y = rk4_step(y, dh, coeffs(cubic_at(k, u0, n, value)), coeffs(cubic_at(k, u0 + 0.5 * du, n, value)),
                   coeffs(s + 1 == kSubsteps ? value(k + 1) : cubic_at(k, u0 + du, n, value)));
    }
    return y;
  };
  auto step_x = [&](const PointFrame& y, int i, int j) {
    return cell(y, g.hx, i, nx, [&](int k) { return phi_x(k, j); }, x_coeffs);
  };
  auto step_y = [&](const PointFrame& y, int i, int j) {
    return cell(y, g.hy, j, ny, [&](int k) { return phi.values(i, k); }, y_coeffs);
  };

  LaxFrames out;
  out.grid = g;
  out.lambda0 = lambda0;
  out.frames = Grid2<PointFrame>(nx, ny);
  for (int i = 0; i + 1 < nx; ++i) out.frames(i + 1, 0) = step_x(out.frames(i, 0), i, 0);
  parallel_for(nx, [&](int i) {
    for (int j = 0; j + 1 < ny; ++j) out.frames(i, j + 1) = step_y(out.frames(i, j), i, j);
  });

  // Opposite order for the flatness diagnostic.
  Grid2<PointFrame> other(nx, ny);
  for (int j = 0; j + 1 < ny; ++j) other(0, j + 1) = step_y(other(0, j), 0, j);
  parallel_for(ny, [&](int j) {
    for (int i = 0; i + 1 < nx; ++i) other(i + 1, j) = step_x(other(i, j), i, j);
  });

  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Mat2& u = out.frames(i, j).matrix;
      out.path_defect = std::max(out.path_defect, (u - other(i, j).matrix).cwiseAbs().maxCoeff());
      const double defect = std::max((u * u.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff(),
                                     std::abs(u.determinant() - 1.0));
      out.max_unitarity_defect = std::max(out.max_unitarity_defect, defect);
    }
  }
  return out;
}

SurfaceGrid reference_immersion(const LaxFrames& frames) {
  const GridSpec& g = frames.grid;
  Grid2<Vec3> points(g.nx, g.ny, Vec3::Zero()), normal(g.nx, g.ny, Vec3::Zero());
  const Mat2 e3 = vector_to_su2(Vec3::UnitZ());
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const PointFrame& f = frames.frames(i, j);
      const Mat2 inv = f.matrix.inverse();
      points(i, j) = su2_to_vector(frames.lambda0 * f.lambda_sensitivity * inv);
      normal(i, j) = su2_to_vector(f.matrix * e3 * inv).normalized();
    }
  }
  return build_surface(g, frames.lambda0, std::move(points), std::move(normal),
                       Grid2<NodeFlag>(g.nx, g.ny, NodeFlag::regular));
}

RadialProfile::RadialProfile(double phi0, double step, std::vector<double> h, std::vector<double> dh)
    : phi0_(phi0), step_(step), h_(std::move(h)), dh_(std::move(dh)) {}

namespace {

// Cubic Hermite on [t_k, t_k + step].
double hermite(double u, double h0, double h1, double d0, double d1, double step, bool derivative) {
  const double u2 = u * u, u3 = u2 * u;
  if (!derivative) {
    return (2 * u3 - 3 * u2 + 1) * h0 + (u3 - 2 * u2 + u) * step * d0 + (-2 * u3 + 3 * u2) * h1 +
           (u3 - u2) * step * d1;
  }
  return ((6 * u2 - 6 * u) * h0 + (-6 * u2 + 6 * u) * h1) / step + (3 * u2 - 4 * u + 1) * d0 + (3 * u2 - 2 * u) * d1;
}

}  // namespace

double RadialProfile::operator()(double t) const {
  if (t < 0.0 || t > t_max() * (1.0 + 1e-12)) throw std::out_of_range("RadialProfile: t outside the sampled range");
  const auto k = std::min(static_cast<std::size_t>(t / step_), h_.size() - 2);
  const double u = t / step_ - static_cast<double>(k);
  return hermite(u, h_[k], h_[k + 1], dh_[k], dh_[k + 1], step_, false);
}

double RadialProfile::derivative(double t) const {
  if (t < 0.0 || t > t_max() * (1.0 + 1e-12)) throw std::out_of_range("RadialProfile: t outside the sampled range");
  const auto k = std::min(static_cast<std::size_t>(t / step_), h_.size() - 2);
  const double u = t / step_ - static_cast<double>(k);
  return hermite(u, h_[k], h_[k + 1], dh_[k], dh_[k + 1], step_, true);
}

RadialProfile solve_amsler_radial(double phi0, double t_max, double step) {
  if (!(phi0 > 0.0 && phi0 < std::numbers::pi)) {
    throw std::invalid_argument("solve_amsler_radial: phi0 must lie in (0, pi)");
  }
  if (!(t_max > 0.0 && step > 0.0)) throw std::invalid_argument("solve_amsler_radial: t_max and step must be positive");
  const auto count = static_cast<std::size_t>(std::ceil(t_max / step - 1e-9)) + 1;
  const double s = std::sin(phi0), c = std::cos(phi0);
  const double c1 = s, c2 = s * c / 4.0, c3 = (s * c * c / 4.0 - s * s * s / 2.0) / 9.0;

  std::vector<double> h(count), dh(count);
  h[0] = phi0;
  dh[0] = c1;
  if (count > 1) {
    const double t = step;
    h[1] = phi0 + t * (c1 + t * (c2 + t * c3));
    dh[1] = c1 + t * (2 * c2 + 3 * c3 * t);
  }
  auto rhs = [](double t, double hv, double p) { return (std::sin(hv) - p) / t; };
  std::vector<double> trace;
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const double t = step * static_cast<double>(k);
    const double hv = h[k], p = dh[k];
    const double k1h = p, k1p = rhs(t, hv, p);
    const double k2h = p + 0.5 * step * k1p, k2p = rhs(t + 0.5 * step, hv + 0.5 * step * k1h, k2h);
    const double k3h = p + 0.5 * step * k2p, k3p = rhs(t + 0.5 * step, hv + 0.5 * step * k2h, k3h);
    const double k4h = p + step * k3p, k4p = rhs(t + step, hv + step * k3h, k4h);
    h[k + 1] = hv + step / 6.0 * (k1h + 2 * k2h + 2 * k3h + k4h);
    dh[k + 1] = p + step / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    if (!std::isfinite(h[k + 1]) || !std::isfinite(dh[k + 1])) {
      std::ostringstream os;
      os << "Amsler radial ODE: solution stopped being finite at t = " << t + step;
      trace.assign(h.begin(), h.begin() + static_cast<long>(k) + 2);
      throw ConvergenceError(os.str(), trace);
    }
  }
  return RadialProfile(phi0, step, std::move(h), std::move(dh));
}

}  // namespace ksurf
