#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ksurf/grid.hpp"
#include "ksurf/loop_algebra.hpp"

namespace ksurf {

enum class Axis { x, y };

// Uniform samples f(i * step), i = 0..n-1, with local cubic (4-point Lagrange)
// interpolation. An exact closed form may be attached; it then takes precedence
// for off-node evaluation.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(std::vector<double> samples, double step,
                  std::function<double(double)> exact = {});

  double operator()(double t) const;
  double at_node(std::size_t i) const { return samples_.at(i); }
  std::size_t size() const noexcept { return samples_.size(); }
  double step() const noexcept { return step_; }
  double length() const noexcept { return step_ * static_cast<double>(samples_.size() - 1); }
  const std::vector<double>& samples() const noexcept { return samples_; }
  bool has_closed_form() const noexcept { return static_cast<bool>(exact_); }

 private:
  std::vector<double> samples_;
  double step_ = 0.0;
  std::function<double(double)> exact_;
};

// Initial angle data: alpha(x) = phi(x, 0) on [0, x0], beta(y) = phi(0, y) on [0, y0].
class AngleData {
 public:
  // Throws CompatibilityError when |alpha(0) - beta(0)| >= 1e-12 or the sample
  // counts do not match the grid.
  AngleData(GridSpec grid, SampledFunction alpha, SampledFunction beta);

  const GridSpec& grid() const noexcept { return grid_; }
  const SampledFunction& alpha() const noexcept { return alpha_; }
  const SampledFunction& beta() const noexcept { return beta_; }
  double phi0() const noexcept { return alpha_.at_node(0); }

  // Exact closed-form angle field when the data came from a preset that has one.
  const std::function<double(double, double)>& closed_form() const noexcept { return closed_form_; }
  void set_closed_form(std::function<double(double, double)> f) { closed_form_ = std::move(f); }

 private:
  GridSpec grid_;
  SampledFunction alpha_;
  SampledFunction beta_;
  std::function<double(double, double)> closed_form_;
};

// One-variable su(2)-valued potential sampled at half-steps of its axis:
// sample m sits at coordinate m * step / 2, so even samples are grid nodes and
// odd samples are the RK4 midpoints.
struct PotentialForm {
  Axis direction = Axis::x;
  double step = 0.0;
  int lambda_power = 1;  // +1 for x-potentials, -1 for y-potentials
  std::vector<Mat2> samples;

  std::size_t node_count() const { return (samples.size() + 1) / 2; }
  const Mat2& at_node(std::size_t i) const { return samples.at(2 * i); }
  const Mat2& at_midpoint(std::size_t i) const { return samples.at(2 * i + 1); }
};

// Rotation about e3 in the spinor picture: R(theta) = exp(i theta sigma3 / 2).
struct GaugeRotation {
  double theta = 0.0;
  Mat2 matrix = Mat2::Identity();

  static GaugeRotation about_e3(double theta);
  // R0 = R(-phi0 / 2), which takes normalized potentials to symmetric ones.
  static GaugeRotation base_point(double phi0) { return about_e3(-0.5 * phi0); }
  GaugeRotation inverse() const { return about_e3(-theta); }
};

// Symmetric potentials
//   xi^x = (i/2) offdiag(e^{ i(alpha(x) - phi0/2)}, e^{-i(alpha(x) - phi0/2)}) dx
//   xi^y = -(i/2) offdiag(e^{-i(beta(y) - phi0/2)}, e^{ i(beta(y) - phi0/2)}) dy
PotentialForm build_symmetric_x(const AngleData& data);
PotentialForm build_symmetric_y(const AngleData& data);

// Normalized potentials of the frame with U(0,0) = I:
//   eta^x = (i/2) offdiag(e^{ i(alpha(x) - phi0)}, e^{-i(alpha(x) - phi0)}) dx
//   eta^y = -(i/2) offdiag(e^{-i beta(y)}, e^{ i beta(y)}) dy
PotentialForm build_normalized_x(const AngleData& data);
PotentialForm build_normalized_y(const AngleData& data);

// Sample-wise X -> R^{-1} X R.
PotentialForm gauge_conjugate(const PotentialForm& p, const GaugeRotation& r);

// Off-diagonal, modulus-1/2, anti-Hermitian traceless check; returns the worst deviation.
double potential_form_defect(const PotentialForm& p);

enum class PresetKind { amsler, soliton, tabulated, random };

struct PresetSpec {
  PresetKind kind = PresetKind::soliton;
  double phi0 = 1.5707963267948966;  // amsler
  double soliton_a = 1.0;            // soliton: alpha = 4 atan(e^{a x + c}), beta = 4 atan(e^{y/a + c})
  double soliton_shift = 0.0;        // c
  std::string alpha_csv;             // tabulated
  std::string beta_csv;
  std::uint64_t seed = 1;  // random
};

// Constant angle phi0 on both axes. Rejects phi0 outside (0, pi).
AngleData amsler_preset(double phi0, const GridSpec& grid);
// Light-cone one-soliton phi = 4 atan(exp(a x + y / a + c)).
AngleData soliton_preset(double a, double shift, const GridSpec& grid);
// Smooth trigonometric alpha, beta with a shared phi0 drawn from a seeded generator.
AngleData random_smooth_preset(std::uint64_t seed, const GridSpec& grid);
// Resamples arbitrary (coordinate, angle) tables onto the grid.
AngleData tabulated_preset(const std::vector<std::pair<double, double>>& alpha,
                           const std::vector<std::pair<double, double>>& beta, const GridSpec& grid);
AngleData make_preset(const PresetSpec& spec, const GridSpec& grid);

// Two-column CSV (coordinate, angle in radians). Lines starting with '#' and a
// non-numeric header row are skipped.
std::vector<std::pair<double, double>> read_angle_csv(std::istream& in);
std::vector<std::pair<double, double>> read_angle_csv_file(const std::string& path);

}  // namespace ksurf
