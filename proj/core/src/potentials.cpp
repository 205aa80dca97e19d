#include "ksurf/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ksurf/error.hpp"

namespace ksurf {

namespace {

// 4-point Lagrange interpolation on arbitrary sorted abscissae.
double lagrange4(const double* xs, const double* ys, double t) {
  double sum = 0.0;
  for (int a = 0; a < 4; ++a) {
    double w = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (b != a) w *= (t - xs[b]) / (xs[a] - xs[b]);
    }
    sum += w * ys[a];
  }
  return sum;
}

Mat2 offdiag_phase(double phase, Complex prefactor) {
  Mat2 m;
  m << 0.0, prefactor * std::polar(1.0, phase), prefactor * std::polar(1.0, -phase), 0.0;
  return m;
}

// Half-step resampling of a function on [0, length].
template <typename F>
PotentialForm sample_potential(Axis axis, double step, std::size_t nodes, int lambda_power, F sample_at) {
  PotentialForm p;
  p.direction = axis;
  p.step = step;
  p.lambda_power = lambda_power;
  const std::size_t count = 2 * nodes - 1;
  p.samples.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    p.samples.push_back(sample_at(0.5 * step * static_cast<double>(m), m));
  }
  return p;
}

// Value at half-step sample m: exact grid value for even m.
double half_step_value(const SampledFunction& f, std::size_t m) {
  if (m % 2 == 0) return f.at_node(m / 2);
  return f(0.5 * f.step() * static_cast<double>(m));
}

}  // namespace

SampledFunction::SampledFunction(std::vector<double> samples, double step, std::function<double(double)> exact)
    : samples_(std::move(samples)), step_(step), exact_(std::move(exact)) {
  if (samples_.size() < 2) throw std::invalid_argument("SampledFunction: need at least two samples");
  if (!(step_ > 0.0)) throw std::invalid_argument("SampledFunction: step must be positive");
}

double SampledFunction::operator()(double t) const {
  if (exact_) return exact_(t);
  const auto n = static_cast<long>(samples_.size());
  const double u = t / step_;
  long i = static_cast<long>(std::floor(u));
  if (std::abs(u - std::round(u)) < 1e-12) {
    const long k = std::lround(u);
    if (k >= 0 && k < n) return samples_[static_cast<std::size_t>(k)];
  }
  if (n < 4) {
    // Linear fallback for very short tables.
    i = std::clamp(i, 0L, n - 2);
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * samples_[static_cast<std::size_t>(i)] + w * samples_[static_cast<std::size_t>(i + 1)];
  }
  const long first = std::clamp(i - 1, 0L, n - 4);
  double xs[4], ys[4];
  for (int a = 0; a < 4; ++a) {
    xs[a] = static_cast<double>(first + a) * step_;
    ys[a] = samples_[static_cast<std::size_t>(first + a)];
  }
  return lagrange4(xs, ys, t);
}

AngleData::AngleData(GridSpec grid, SampledFunction alpha, SampledFunction beta)
    : grid_(grid), alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (alpha_.size() != static_cast<std::size_t>(grid_.nx) || beta_.size() != static_cast<std::size_t>(grid_.ny)) {
    throw CompatibilityError("AngleData: sample counts do not match the grid");
  }
  if (std::abs(alpha_.step() - grid_.hx) > 1e-12 || std::abs(beta_.step() - grid_.hy) > 1e-12) {
    throw CompatibilityError("AngleData: sample steps do not match the grid");
  }
  const double gap = std::abs(alpha_.at_node(0) - beta_.at_node(0));
  if (!(gap < 1e-12)) {
    std::ostringstream os;
    os << "incompatible initial data: alpha(0) = " << alpha_.at_node(0) << " but beta(0) = " << beta_.at_node(0)
       << "; the two angle functions must agree at the origin";
    throw CompatibilityError(os.str());
  }
}

GaugeRotation GaugeRotation::about_e3(double theta) {
  GaugeRotation r;
  r.theta = theta;
  r.matrix << std::polar(1.0, 0.5 * theta), 0.0, 0.0, std::polar(1.0, -0.5 * theta);
  return r;
}

PotentialForm build_symmetric_x(const AngleData& data) {
  const double shift = 0.5 * data.phi0();
  const auto& a = data.alpha();
  return sample_potential(Axis::x, a.step(), a.size(), 1, [&](double, std::size_t m) {
    return offdiag_phase(half_step_value(a, m) - shift, Complex(0.0, 0.5));
  });
}

PotentialForm build_symmetric_y(const AngleData& data) {
  const double shift = 0.5 * data.phi0();
  const auto& b = data.beta();
  return sample_potential(Axis::y, b.step(), b.size(), -1, [&](double, std::size_t m) {
    return offdiag_phase(-(half_step_value(b, m) - shift), Complex(0.0, -0.5));
  });
}

PotentialForm build_normalized_x(const AngleData& data) {
  const double phi0 = data.phi0();
  const auto& a = data.alpha();
  return sample_potential(Axis::x, a.step(), a.size(), 1, [&](double, std::size_t m) {
    return offdiag_phase(half_step_value(a, m) - phi0, Complex(0.0, 0.5));
  });
}

PotentialForm build_normalized_y(const AngleData& data) {
  const auto& b = data.beta();
  return sample_potential(Axis::y, b.step(), b.size(), -1, [&](double, std::size_t m) {
    return offdiag_phase(-half_step_value(b, m), Complex(0.0, -0.5));
  });
}

PotentialForm gauge_conjugate(const PotentialForm& p, const GaugeRotation& r) {
  PotentialForm out = p;
  const Mat2 rinv = r.matrix.inverse();
  for (auto& s : out.samples) s = rinv * s * r.matrix;
  return out;
}

double potential_form_defect(const PotentialForm& p) {
  double worst = 0.0;
  for (const auto& s : p.samples) {
    worst = std::max({worst, std::abs(s(0, 0)), std::abs(s(1, 1)), std::abs(std::abs(s(0, 1)) - 0.5),
                      std::abs(std::abs(s(1, 0)) - 0.5), (s + s.adjoint()).cwiseAbs().maxCoeff()});
  }
  return worst;
}

namespace {

template <typename F>
SampledFunction sample_closed_form(int n, double step, F f) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = f(i * step);
  return SampledFunction(std::move(v), step, f);
}

}  // namespace

AngleData amsler_preset(double phi0, const GridSpec& grid) {
  if (!(phi0 > 0.0 && phi0 < std::numbers::pi)) {
    std::ostringstream os;
    os << "amsler preset: phi0 = " << phi0
       << " is outside (0, pi); phi = 0 or pi makes the asymptotic directions coincide (not weakly regular)";
    throw std::invalid_argument(os.str());
  }
  auto c = [phi0](double) { return phi0; };
  AngleData d(grid, sample_closed_form(grid.nx, grid.hx, c), sample_closed_form(grid.ny, grid.hy, c));
  return d;
}

AngleData soliton_preset(double a, double shift, const GridSpec& grid) {
  if (!(a > 0.0)) throw std::invalid_argument("soliton preset: a must be positive");
  auto alpha = [a, shift](double x) { return 4.0 * std::atan(std::exp(a * x + shift)); };
  auto beta = [a, shift](double y) { return 4.0 * std::atan(std::exp(y / a + shift)); };
  AngleData d(grid, sample_closed_form(grid.nx, grid.hx, alpha), sample_closed_form(grid.ny, grid.hy, beta));
  d.set_closed_form([a, shift](double x, double y) { return 4.0 * std::atan(std::exp(a * x + y / a + shift)); });
  return d;
}

AngleData random_smooth_preset(std::uint64_t seed, const GridSpec& grid) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> base(0.6, 2.5);
  std::uniform_real_distribution<double> amp(-0.5, 0.5);
  std::uniform_real_distribution<double> freq(0.3, 1.5);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  const double phi0 = base(rng);
  struct Mode {
    double a, w, p;
  };
  auto draw = [&] {
    std::vector<Mode> modes(2);
    for (auto& m : modes) m = {amp(rng), freq(rng), ph(rng)};
    return modes;
  };
  const auto ma = draw();
  const auto mb = draw();
  auto make = [phi0](std::vector<Mode> modes) {
    return [phi0, modes](double t) {
      double v = phi0;
      for (const auto& m : modes) v += m.a * (std::sin(m.w * t + m.p) - std::sin(m.p));
      return v;
    };
  };
  return AngleData(grid, sample_closed_form(grid.nx, grid.hx, make(ma)), sample_closed_form(grid.ny, grid.hy, make(mb)));
}

namespace {

std::vector<double> resample_table(std::vector<std::pair<double, double>> table, int n, double step,
                                   const char* name) {
  std::sort(table.begin(), table.end());
  if (table.size() < 2) throw CompatibilityError(std::string(name) + ": need at least two rows");
  const double length = (n - 1) * step;
  const double tol = 1e-9 * std::max(1.0, length);
  if (table.front().first > tol || table.back().first < length - tol) {
    std::ostringstream os;
    os << name << ": table covers [" << table.front().first << ", " << table.back().first
       << "] but the domain is [0, " << length << "]";
    throw CompatibilityError(os.str());
  }
  std::vector<double> xs, ys;
  for (const auto& [x, v] : table) {
    if (!xs.empty() && x == xs.back()) throw CompatibilityError(std::string(name) + ": duplicate coordinate");
    xs.push_back(x);
    ys.push_back(v);
  }
  const auto m = static_cast<long>(xs.size());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = i * step;
    auto it = std::lower_bound(xs.begin(), xs.end(), t - tol);
    const long k = it - xs.begin();
    if (k < m && std::abs(xs[static_cast<std::size_t>(k)] - t) <= tol) {
      out[static_cast<std::size_t>(i)] = ys[static_cast<std::size_t>(k)];
      continue;
    }
    if (m < 4) {
      const long r = std::clamp(k, 1L, m - 1);
      const double w = (t - xs[static_cast<std::size_t>(r - 1)]) / (xs[static_cast<std::size_t>(r)] - xs[static_cast<std::size_t>(r - 1)]);
      out[static_cast<std::size_t>(i)] = (1.0 - w) * ys[static_cast<std::size_t>(r - 1)] + w * ys[static_cast<std::size_t>(r)];
      continue;
    }
    const long first = std::clamp(k - 2, 0L, m - 4);
    out[static_cast<std::size_t>(i)] =
        lagrange4(xs.data() + first, ys.data() + first, t);
  }
  return out;
}

}  // namespace

AngleData tabulated_preset(const std::vector<std::pair<double, double>>& alpha,
                           const std::vector<std::pair<double, double>>& beta, const GridSpec& grid) {
  auto a = resample_table(alpha, grid.nx, grid.hx, "alpha table");
  auto b = resample_table(beta, grid.ny, grid.hy, "beta table");
  return AngleData(grid, SampledFunction(std::move(a), grid.hx), SampledFunction(std::move(b), grid.hy));
}

AngleData make_preset(const PresetSpec& spec, const GridSpec& grid) {
  switch (spec.kind) {
    case PresetKind::amsler:
      return amsler_preset(spec.phi0, grid);
    case PresetKind::soliton:
      return soliton_preset(spec.soliton_a, spec.soliton_shift, grid);
    case PresetKind::random:
      return random_smooth_preset(spec.seed, grid);
    case PresetKind::tabulated:
      if (spec.alpha_csv.empty() || spec.beta_csv.empty()) {
        throw std::invalid_argument("tabulated preset needs both alpha and beta CSV paths");
      }
      return tabulated_preset(read_angle_csv_file(spec.alpha_csv), read_angle_csv_file(spec.beta_csv), grid);
  }
  throw std::invalid_argument("unknown preset");
}

std::vector<std::pair<double, double>> read_angle_csv(std::istream& in) {
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double c = 0.0, v = 0.0;
    if (!(ls >> c >> v)) {
      if (rows.empty()) continue;  // header
      throw CompatibilityError("angle CSV: malformed row " + std::to_string(lineno));
    }
    rows.emplace_back(c, v);
  }
  return rows;
}

std::vector<std::pair<double, double>> read_angle_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open angle CSV '" + path + "'");
  return read_angle_csv(in);
}

}  // namespace ksurf
