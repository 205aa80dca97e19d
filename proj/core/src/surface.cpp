#include "ksurf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ksurf/error.hpp"
#include "ksurf/parallel.hpp"
#include "ksurf/stencil.hpp"

namespace ksurf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 nan_vec() { return Vec3::Constant(kNaN); }

bool not_big_cell(NodeFlag f) { return f != NodeFlag::big_cell_violation; }

// Derivative of a vector field along one axis at (i, j); NaN when no stencil fits.
template <typename T, typename Field, typename Usable>
std::optional<T> axis_derivative(Axis axis, int i, int j, int nx, int ny, double h, Field&& field, Usable&& usable) {
  if (axis == Axis::x) {
    auto s = pick_stencil(i, nx, [&](int k) { return usable(k, j); });
    if (!s) return std::nullopt;
    return apply_stencil<T>(*s, i, h, [&](int k) { return field(k, j); });
  }
  auto s = pick_stencil(j, ny, [&](int k) { return usable(i, k); });
  if (!s) return std::nullopt;
  return apply_stencil<T>(*s, j, h, [&](int k) { return field(i, k); });
}

Grid2<Vec3> differentiate(const Grid2<Vec3>& f, const Grid2<NodeFlag>& flags, Axis axis, double h, double scale) {
  Grid2<Vec3> out(f.nx(), f.ny(), nan_vec());
  auto usable = [&](int i, int j) { return not_big_cell(flags(i, j)); };
  auto field = [&](int i, int j) -> const Vec3& { return f(i, j); };
  for (int i = 0; i < f.nx(); ++i) {
    for (int j = 0; j < f.ny(); ++j) {
      if (!usable(i, j)) continue;
      if (auto d = axis_derivative<Vec3>(axis, i, j, f.nx(), f.ny(), h, field, usable)) out(i, j) = *d * scale;
    }
  }
  return out;
}

}  // namespace

FrameGrid assemble_frame(const FrameFactorPath& plus_path, const FrameFactorPath& minus_path, const GaugeRotation& r0,
                         const FrameOptions& options) {
  if (plus_path.sign != FactorSign::plus || minus_path.sign != FactorSign::minus) {
    throw std::invalid_argument("assemble_frame: expected a plus path and a minus path");
  }
  if (plus_path.values.empty() || minus_path.values.empty()) {
    throw std::invalid_argument("assemble_frame: empty path");
  }
  const int n = plus_path.truncation();
  if (minus_path.truncation() != n) throw std::invalid_argument("assemble_frame: truncation degrees differ");

  FrameGrid frame;
  frame.grid = GridSpec{static_cast<int>(plus_path.values.size()), static_cast<int>(minus_path.values.size()),
                        plus_path.step, minus_path.step};
  frame.truncation = n;
  frame.lambda_samples = options.lambda_samples;
  const int nx = frame.grid.nx, ny = frame.grid.ny;
  frame.nodes = Grid2<TwistedLoop>(nx, ny, TwistedLoop(n));
  frame.flags = Grid2<NodeFlag>(nx, ny, NodeFlag::regular);
  frame.condition = Grid2<double>(nx, ny, 1.0);

  std::vector<TwistedLoop> u_plus(static_cast<std::size_t>(nx)), u_minus(static_cast<std::size_t>(ny)),
      u_minus_inv(static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i) u_plus[i] = conjugate(plus_path.values[i], r0.matrix);
  for (int j = 0; j < ny; ++j) {
    u_minus[j] = conjugate(minus_path.values[j], r0.matrix);
    u_minus_inv[j] = one_sided_inverse(u_minus[j]);
  }

  Grid2<double> residual(nx, ny, 0.0), loss(nx, ny, 0.0), defect(nx, ny, 0.0);
  parallel_for(
      nx * ny,
      [&](int k) {
        const int i = k / ny, j = k % ny;
        try {
          const BirkhoffSplit s = split(multiply(u_minus_inv[j], u_plus[i]), options.birkhoff);
          LoopProduct u = multiply_with_loss(u_minus[j], s.plus_factor);
          frame.condition(i, j) = s.condition_estimate;
          residual(i, j) = s.residual;
          loss(i, j) = u.truncation_loss;
          defect(i, j) = unitarity_defect(u.value, options.lambda_samples);
          frame.nodes(i, j) = std::move(u.value);
        } catch (const BigCellViolation& e) {
          frame.flags(i, j) = NodeFlag::big_cell_violation;
          frame.condition(i, j) = e.condition_estimate();
        }
      },
      options.threads);

  // Sequential reduction keeps the statistics independent of thread scheduling.
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (frame.flags(i, j) == NodeFlag::big_cell_violation) {
        ++frame.big_cell_violations;
        continue;
      }
      frame.max_condition = std::max(frame.max_condition, frame.condition(i, j));
      frame.max_split_residual = std::max(frame.max_split_residual, residual(i, j));
      frame.max_truncation_loss = std::max(frame.max_truncation_loss, loss(i, j));
      frame.max_unitarity_defect = std::max(frame.max_unitarity_defect, defect(i, j));
      if (defect(i, j) > options.unitarity_warn) ++frame.unitarity_warnings;
      if (defect(i, j) > options.unitarity_abort) {
        std::ostringstream os;
        os << "frame lost unitarity at node (" << i << ", " << j << "): defect " << defect(i, j);
        throw UnitarityError(os.str(), defect(i, j));
      }
    }
  }
  return frame;
}

SurfaceGrid build_surface(const GridSpec& grid, double lambda0, Grid2<Vec3> points, Grid2<Vec3> normal,
                          Grid2<NodeFlag> flags) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive");
  SurfaceGrid s;
  s.grid = grid;
  s.lambda0 = lambda0;
  s.flags = std::move(flags);
  s.normal = std::move(normal);

  if (not_big_cell(s.flags(0, 0))) {
    const Vec3 origin = points(0, 0);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j)
        if (not_big_cell(s.flags(i, j))) points(i, j) -= origin;
  }
  s.points = std::move(points);

  // Unit-speed coordinates x* = lambda0 x, y* = y / lambda0.
  s.tangents_x = differentiate(s.points, s.flags, Axis::x, grid.hx, 1.0 / lambda0);
  s.tangents_y = differentiate(s.points, s.flags, Axis::y, grid.hy, lambda0);
  s.second_xx = differentiate(s.tangents_x, s.flags, Axis::x, grid.hx, 1.0 / lambda0);
  s.second_xy = differentiate(s.tangents_x, s.flags, Axis::y, grid.hy, lambda0);
  s.second_yy = differentiate(s.tangents_y, s.flags, Axis::y, grid.hy, lambda0);
  return s;
}

SurfaceGrid sym_immersion(const FrameGrid& frame, double lambda0) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("sym_immersion: lambda0 must be positive");
  const int nx = frame.grid.nx, ny = frame.grid.ny;
  Grid2<Vec3> points(nx, ny, nan_vec()), normal(nx, ny, nan_vec());
  const Mat2 e3 = vector_to_su2(Vec3::UnitZ());
  const double lambdas[1] = {lambda0};

  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (!not_big_cell(frame.flags(i, j))) continue;
      const TwistedLoop& u = frame.nodes(i, j);
      const Mat2 value = evaluate(u, lambda0);
      const Mat2 scaled = evaluate(lambda_scaled_derivative(u), lambda0);
      const Mat2 inv = unitary_inverse(u, lambdas, 1e-3).front();
      points(i, j) = su2_to_vector(scaled * inv);
      normal(i, j) = su2_to_vector(value * e3 * inv).normalized();
    }
  }
  return build_surface(frame.grid, lambda0, std::move(points), std::move(normal), frame.flags);
}

std::vector<SurfaceGrid> associated_family_sweep(const FrameGrid& frame, const std::vector<double>& lambdas) {
  std::vector<SurfaceGrid> out;
  out.reserve(lambdas.size());
  for (double l : lambdas) out.push_back(sym_immersion(frame, l));
  return out;
}

Grid2<double> unwrap_angle(const Grid2<double>& raw, const Grid2<bool>& usable, double phi0) {
  const int nx = raw.nx(), ny = raw.ny();
  Grid2<double> out(nx, ny, kNaN);
  Grid2<bool> seen(nx, ny, false);
  auto nearest_branch = [](double value, double reference) {
    return value + kTwoPi * std::round((reference - value) / kTwoPi);
  };

  auto fill_from = [&](int si, int sj, double reference) {
    std::deque<std::pair<int, int>> queue;
    out(si, sj) = nearest_branch(raw(si, sj), reference);
    seen(si, sj) = true;
    queue.emplace_back(si, sj);
    constexpr int di[4] = {1, 0, -1, 0};
    constexpr int dj[4] = {0, 1, 0, -1};
    while (!queue.empty()) {
      const auto [i, j] = queue.front();
      queue.pop_front();
      for (int d = 0; d < 4; ++d) {
        const int a = i + di[d], b = j + dj[d];
        if (!raw.contains(a, b) || seen(a, b) || !usable(a, b)) continue;
        seen(a, b) = true;
        out(a, b) = nearest_branch(raw(a, b), out(i, j));
        queue.emplace_back(a, b);
      }
    }
  };

  if (usable(0, 0)) fill_from(0, 0, phi0);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (usable(i, j) && !seen(i, j)) fill_from(i, j, phi0);
  return out;
}

namespace {

AngleField finish_angle(const GridSpec& grid, const Grid2<double>& raw, const Grid2<NodeFlag>& flags, double phi0,
                        double singular_tol, AngleSource source) {
  AngleField a;
  a.grid = grid;
  a.source = source;
  a.flags = flags;
  Grid2<bool> usable(grid.nx, grid.ny, false);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) usable(i, j) = not_big_cell(flags(i, j)) && std::isfinite(raw(i, j));
  a.values = unwrap_angle(raw, usable, phi0);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      if (!usable(i, j)) {
        if (a.flags(i, j) == NodeFlag::regular) a.flags(i, j) = NodeFlag::big_cell_violation;
        continue;
      }
      if (a.flags(i, j) == NodeFlag::regular && std::abs(std::sin(a.values(i, j))) < singular_tol) {
        a.flags(i, j) = NodeFlag::angle_singular;
      }
    }
  }
  return a;
}

}  // namespace

AngleField recover_angle(const SurfaceGrid& surface, double phi0, double singular_tol) {
  const GridSpec& g = surface.grid;
  Grid2<double> raw(g.nx, g.ny, kNaN);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (!not_big_cell(surface.flags(i, j))) continue;
      const Vec3& tx = surface.tangents_x(i, j);
      const Vec3& ty = surface.tangents_y(i, j);
      raw(i, j) = std::atan2(tx.cross(ty).dot(surface.normal(i, j)), tx.dot(ty));
    }
  }
  return finish_angle(g, raw, surface.flags, phi0, singular_tol, AngleSource::from_geometry);
}

AngleField recover_angle_from_connection(const FrameGrid& frame, double phi0, double singular_tol) {
  const GridSpec& g = frame.grid;
  const int nx = g.nx, ny = g.ny;
  if (ny < 2 || nx < 2) throw std::invalid_argument("recover_angle_from_connection: need at least 2x2 nodes");
  auto usable = [&](int i, int j) { return not_big_cell(frame.flags(i, j)); };
  auto field = [&](int i, int j) -> const TwistedLoop& { return frame.nodes(i, j); };

  // lambda^d coefficient of adj(U) * D.
  auto coefficient = [n = frame.truncation](const TwistedLoop& adj, const TwistedLoop& d, int degree) {
    Mat2 acc = Mat2::Zero();
    for (int j = -n; j <= n; ++j) {
      const int k = degree - j;
      if (k < -n || k > n) continue;
      acc += adj[k] * d[j];
    }
    return acc;
  };

  Grid2<double> raw(nx, ny, kNaN);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (!usable(i, j)) continue;
      const auto dx = axis_derivative<TwistedLoop>(Axis::x, i, j, nx, ny, g.hx, field, usable);
      const auto dy = axis_derivative<TwistedLoop>(Axis::y, i, j, nx, ny, g.hy, field, usable);
      if (!dx || !dy) continue;
      const TwistedLoop adj = adjoint(frame.nodes(i, j));
      const Complex x12 = coefficient(adj, *dx, 1)(0, 1);
      const Complex y12 = coefficient(adj, *dy, -1)(0, 1);
      raw(i, j) = std::arg(-x12 * std::conj(y12));
    }
  }
  return finish_angle(g, raw, frame.flags, phi0, singular_tol, AngleSource::from_connection);
}

void merge_angle_flags(SurfaceGrid& surface, const AngleField& angle) {
  for (int i = 0; i < surface.grid.nx; ++i)
    for (int j = 0; j < surface.grid.ny; ++j)
      if (surface.flags(i, j) == NodeFlag::regular && angle.flags(i, j) != NodeFlag::regular)
        surface.flags(i, j) = angle.flags(i, j);
}

Grid2<FormReport> fundamental_forms(const SurfaceGrid& surface, const AngleField& angle) {
  const GridSpec& g = surface.grid;
  const FormReport blank{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  Grid2<FormReport> out(g.nx, g.ny, blank);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (!surface.is_regular(i, j) || !angle.is_regular(i, j)) continue;
      const Vec3& tx = surface.tangents_x(i, j);
      const Vec3& ty = surface.tangents_y(i, j);
      const Vec3& n = surface.normal(i, j);
      FormReport f{};
      f.E = tx.dot(tx);
      f.F = tx.dot(ty);
      f.G = ty.dot(ty);
      f.L = surface.second_xx(i, j).dot(n);
      f.M = surface.second_xy(i, j).dot(n);
      f.N = surface.second_yy(i, j).dot(n);
      f.K = (f.L * f.N - f.M * f.M) / (f.E * f.G - f.F * f.F);
      out(i, j) = f;
    }
  }
  return out;
}

double sine_gordon_residual(const AngleField& angle) {
  const GridSpec& g = angle.grid;
  const int nx = g.nx, ny = g.ny;
  auto usable = [&](int i, int j) { return not_big_cell(angle.flags(i, j)) && std::isfinite(angle.values(i, j)); };
  Grid2<double> phi_x(nx, ny, kNaN);
  auto phi = [&](int i, int j) { return angle.values(i, j); };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (usable(i, j))
        if (auto d = axis_derivative<double>(Axis::x, i, j, nx, ny, g.hx, phi, usable)) phi_x(i, j) = *d;

  auto usable_x = [&](int i, int j) { return std::isfinite(phi_x(i, j)); };
  auto px = [&](int i, int j) { return phi_x(i, j); };
  double worst = 0.0;
  for (int i = 1; i + 1 < nx; ++i) {
    for (int j = 1; j + 1 < ny; ++j) {
      if (!angle.is_regular(i, j) || !usable_x(i, j)) continue;
      if (auto d = axis_derivative<double>(Axis::y, i, j, nx, ny, g.hy, px, usable_x)) {
        worst = std::max(worst, std::abs(*d - std::sin(angle.values(i, j))));
      }
    }
  }
  return worst;
}

double line_residual(const std::vector<Vec3>& points) {
  if (points.size() < 3) return 0.0;
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Vec3 dir = eig.eigenvectors().col(2);
  double worst = 0.0;
  for (const auto& p : points) {
    const Vec3 d = p - centroid;
    worst = std::max(worst, (d - d.dot(dir) * dir).norm());
  }
  return worst;
}

}  // namespace ksurf
