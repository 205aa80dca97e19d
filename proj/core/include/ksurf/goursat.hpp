#pragma once

#include <vector>

#include "ksurf/grid.hpp"
#include "ksurf/loop_algebra.hpp"
#include "ksurf/potentials.hpp"
#include "ksurf/surface.hpp"

namespace ksurf {

struct GoursatOptions {
  double tolerance = 1e-12;  // max-norm change between Picard sweeps
  int max_iterations = 200;
  // Each level adds one Richardson extrapolation from a grid with half the step.
  // 0 gives the plain second-order trapezoidal solution.
  int richardson_levels = 1;
};

// u(x, y) = alpha(x) + beta(y) - alpha(0) + int_0^x int_0^y sin u, solved by
// Picard iteration on the trapezoidal rule.
struct GoursatField {
  GridSpec grid;
  Grid2<double> values;
  int iterations = 0;            // Picard sweeps on the base grid
  std::vector<double> trace;     // per-sweep max change on the base grid
  double discrete_residual = 0;  // trapezoidal equation residual on the base grid
};

GoursatField solve_goursat(const AngleData& data, const GoursatOptions& options = {});

// View of a Goursat solution as an angle field (all nodes regular except |sin u| < singular_tol).
AngleField as_angle_field(const GoursatField& field, double singular_tol = 1e-3);

// SU(2) frame at a fixed lambda together with its lambda-derivative.
struct PointFrame {
  Mat2 matrix = Mat2::Identity();
  Mat2 lambda_sensitivity = Mat2::Zero();
};

struct LaxFrames {
  GridSpec grid;
  double lambda0 = 1.0;
  Grid2<PointFrame> frames;      // x along y = 0 first, then up each column
  double path_defect = 0.0;      // max |U_xfirst - U_yfirst| over the grid
  double max_unitarity_defect = 0.0;
};

// RK4 integration of U_x = U A, U_y = U B with U(0, 0) = I, where
//   A = (i/2) [[phi_x, -lambda], [-lambda, -phi_x]],
//   B = (i/2) lambda^{-1} [[0, e^{-i phi}], [e^{i phi}, 0]],
// plus the variational equation for dU/dlambda. phi_x is a fourth-order
// difference of the field; off-node values use cubic interpolation and each
// cell is crossed in two RK4 substeps.
LaxFrames integrate_lax(const GoursatField& phi, double lambda0);

// psi = lambda0 (dU/dlambda) U^{-1}, same R^3 convention and normal as sym_immersion.
SurfaceGrid reference_immersion(const LaxFrames& frames);

// t h'' + h' = sin h, h(0) = phi0, regular at t = 0. Sampled on [0, t_max].
class RadialProfile {
 public:
  RadialProfile(double phi0, double step, std::vector<double> h, std::vector<double> dh);
  double operator()(double t) const;
  double derivative(double t) const;
  double phi0() const noexcept { return phi0_; }
  double t_max() const noexcept { return step_ * static_cast<double>(h_.size() - 1); }
  const std::vector<double>& samples() const noexcept { return h_; }

 private:
  double phi0_;
  double step_;
  std::vector<double> h_;
  std::vector<double> dh_;
};

// Series start h = phi0 + sin(phi0) t + ... at t = step, then RK4. The profile
// may cross pi: that is a cuspidal edge of the surface, not a failure of the
// ODE. Throws std::invalid_argument for phi0 outside (0, pi) and
// ConvergenceError when the solution stops being finite.
RadialProfile solve_amsler_radial(double phi0, double t_max, double step = 1e-3);

}  // namespace ksurf
