#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ksurf/error.hpp"
#include "ksurf/goursat.hpp"
#include "support.hpp"

using namespace ksurf;
using ksurf::testing::max_abs;

namespace {

double closed_form_error(const GoursatField& u, const AngleData& data) {
  double worst = 0.0;
  for (int i = 0; i < u.grid.nx; ++i) {
    for (int j = 0; j < u.grid.ny; ++j) {
      worst = std::max(worst, std::abs(u.values(i, j) - data.closed_form()(u.grid.x(i), u.grid.y(j))));
    }
  }
  return worst;
}

TEST(Goursat, ZeroDataGivesZero) {
  const auto u = solve_goursat(ksurf::testing::zero_angle_data(GridSpec::from_domain(2, 2, 0.1)));
  for (double v : u.values) EXPECT_EQ(v, 0.0);
  EXPECT_LE(u.iterations, 2);
}

TEST(Goursat, BoundaryRowsAreTheData) {
  const auto data = random_smooth_preset(11, GridSpec::from_domain(2, 2, 0.05));
  const auto u = solve_goursat(data);
  for (int i = 0; i < u.grid.nx; ++i) EXPECT_EQ(u.values(i, 0), data.alpha().at_node(i));
  for (int j = 0; j < u.grid.ny; ++j) EXPECT_EQ(u.values(0, j), data.beta().at_node(j));
}

TEST(Goursat, SolitonClosedForm) {
  for (double shift : {0.0, -2.0}) {
    const auto data = soliton_preset(1.0, shift, GridSpec::from_domain(2, 2, 0.05));
    const auto u = solve_goursat(data);
    EXPECT_LT(closed_form_error(u, data), 1e-6) << "shift " << shift;
    EXPECT_LT(u.trace.back(), 1e-12);
    EXPECT_EQ(static_cast<int>(u.trace.size()), u.iterations);
  }
}

TEST(Goursat, PlainTrapezoidIsSecondOrder) {
  GoursatOptions plain;
  plain.richardson_levels = 0;
  const auto coarse = soliton_preset(1.0, -1.0, GridSpec::from_domain(2, 2, 0.1));
  const auto fine = soliton_preset(1.0, -1.0, GridSpec::from_domain(2, 2, 0.05));
  const double e1 = closed_form_error(solve_goursat(coarse, plain), coarse);
  const double e2 = closed_form_error(solve_goursat(fine, plain), fine);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5) << e1 << " " << e2;
}

TEST(Goursat, SineGordonResidualOnRandomData) {
  // The fourth-order difference operator itself contributes O(h^4); the grid is
  // fine enough for that to stay well under the target.
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto u = solve_goursat(random_smooth_preset(seed, GridSpec::from_domain(2, 2, 0.025)));
    EXPECT_LT(u.discrete_residual, 1e-10);
    EXPECT_LT(sine_gordon_residual(as_angle_field(u)), 1e-6) << "seed " << seed;
  }
}

TEST(Goursat, NonConvergenceCarriesTrace) {
  GoursatOptions tight;
  tight.max_iterations = 2;
  try {
    solve_goursat(soliton_preset(1.0, 0.0, GridSpec::from_domain(2, 2, 0.05)), tight);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.trace().size(), 2u);
  }
}

TEST(Lax, ZeroFieldMatchesCommutingExponential) {
  const auto u = solve_goursat(ksurf::testing::zero_angle_data(GridSpec::from_domain(2, 2, 0.05)));
  const auto lax = integrate_lax(u, 1.0);
  const Complex half_i(0.0, 0.5);
  EXPECT_EQ(lax.frames(0, 0).matrix, Mat2::Identity());
  for (int i = 0; i < u.grid.nx; ++i) {
    for (int j = 0; j < u.grid.ny; ++j) {
      const Mat2 exact = ksurf::testing::expm_square_scalar(half_i * pauli::sigma1(), u.grid.y(j) - u.grid.x(i));
      EXPECT_LT(max_abs(lax.frames(i, j).matrix - exact), 1e-8);
    }
  }
  EXPECT_LT(lax.path_defect, 1e-12);
}

TEST(Lax, SolitonFramesAreUnitaryAndPathIndependent) {
  const auto u = solve_goursat(soliton_preset(1.0, 0.0, GridSpec::from_domain(2, 2, 0.05)));
  for (double l : default_lambda_samples()) {
    const auto lax = integrate_lax(u, l);
    EXPECT_EQ(lax.frames(0, 0).matrix, Mat2::Identity());
    EXPECT_LT(lax.max_unitarity_defect, 1e-8);
    for (const auto& f : lax.frames) {
      EXPECT_LT(max_abs(f.matrix * f.matrix.adjoint() - Mat2::Identity()), 1e-8);
      EXPECT_LT(std::abs(f.matrix.determinant() - 1.0), 1e-8);
    }
    EXPECT_LT(lax.path_defect, 1e-6) << "lambda " << l;
  }
}

TEST(Lax, SensitivityMatchesLambdaDifference) {
  const auto u = solve_goursat(soliton_preset(1.0, -1.0, GridSpec::from_domain(1, 1, 0.05)));
  const double l = 1.3, d = 1e-5;
  const auto a = integrate_lax(u, l), up = integrate_lax(u, l + d), dn = integrate_lax(u, l - d);
  for (int i = 0; i < u.grid.nx; i += 5) {
    for (int j = 0; j < u.grid.ny; j += 5) {
      const Mat2 fd = (up.frames(i, j).matrix - dn.frames(i, j).matrix) / (2 * d);
      EXPECT_LT(max_abs(fd - a.frames(i, j).lambda_sensitivity), 1e-7);
    }
  }
}

TEST(Lax, ReferenceImmersionIsPseudospherical) {
  const auto u = solve_goursat(soliton_preset(1.0, 0.0, GridSpec::from_domain(2, 2, 0.05)));
  for (double l : default_lambda_samples()) {
    auto surf = reference_immersion(integrate_lax(u, l));
    EXPECT_EQ(surf.points(0, 0), Vec3::Zero());
    EXPECT_EQ(surf.lambda0, l);
    const auto angle = recover_angle(surf, u.values(0, 0));
    merge_angle_flags(surf, angle);
    const auto forms = fundamental_forms(surf, angle);
    for (int i = 0; i < u.grid.nx; ++i) {
      for (int j = 0; j < u.grid.ny; ++j) {
        if (!surf.is_regular(i, j)) continue;
        EXPECT_LT(std::abs(forms(i, j).K + 1.0), 2e-2);
        EXPECT_LT(std::abs(surf.tangents_x(i, j).norm() - 1.0), 1e-3);
        EXPECT_LT(std::abs(angle.values(i, j) - u.values(i, j)), 5e-3);
      }
    }
  }
}

TEST(Amsler, RadialProfileStart) {
  for (double phi0 : {0.4, std::numbers::pi / 2, 2.7}) {
    const auto h = solve_amsler_radial(phi0, 4.0);
    EXPECT_EQ(h(0.0), phi0);
    EXPECT_NEAR(h.derivative(0.0), std::sin(phi0), 1e-15);
    EXPECT_NEAR(h.t_max(), 4.0, 1e-12);
    // t h'' + h' = sin h, checked with differences of the sampled derivative.
    for (double t : {0.5, 1.5, 3.0}) {
      const double e = 1e-4;
      const double hpp = (h.derivative(t + e) - h.derivative(t - e)) / (2 * e);
      EXPECT_NEAR(t * hpp + h.derivative(t), std::sin(h(t)), 1e-5) << "phi0 " << phi0 << ", t " << t;
    }
  }
  EXPECT_THROW(solve_amsler_radial(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(solve_amsler_radial(std::numbers::pi, 1.0), std::invalid_argument);
}

TEST(Amsler, RadialProfileMatchesGoursatField) {
  const double phi0 = 1.0;
  const auto grid = GridSpec::from_domain(2, 2, 0.05);
  const auto u = solve_goursat(amsler_preset(phi0, grid));
  const auto h = solve_amsler_radial(phi0, 4.0);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) EXPECT_NEAR(u.values(i, j), h(grid.x(i) * grid.y(j)), 1e-6);
  }
}

}  // namespace
