#pragma once

#include <vector>

#include "ksurf/birkhoff.hpp"
#include "ksurf/grid.hpp"
#include "ksurf/loop_ode.hpp"
#include "ksurf/potentials.hpp"

namespace ksurf {

struct FrameOptions {
  BirkhoffOptions birkhoff;
  std::vector<double> lambda_samples = default_lambda_samples();
  double unitarity_warn = 1e-6;
  double unitarity_abort = 1e-3;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Extended frame U(x_i, y_j, lambda) on the grid.
struct FrameGrid {
  GridSpec grid;
  int truncation = 0;
  std::vector<double> lambda_samples;
  Grid2<TwistedLoop> nodes;
  Grid2<NodeFlag> flags;
  Grid2<double> condition;  // Birkhoff condition estimate per node (inf when singular)

  int big_cell_violations = 0;
  double max_condition = 0.0;
  double max_split_residual = 0.0;
  double max_unitarity_defect = 0.0;
  double max_truncation_loss = 0.0;
  int unitarity_warnings = 0;
};

// U = U_-(y) V_+ with U_-^{-1}(y) U_+(x) = V_+ V_-^{-1} and U_pm = R0 hatU_pm R0^{-1}.
// Nodes outside the big cell are flagged and left as zero loops; the sweep
// never stops on them. Throws UnitarityError only past the abort threshold.
FrameGrid assemble_frame(const FrameFactorPath& plus_path, const FrameFactorPath& minus_path, const GaugeRotation& r0,
                         const FrameOptions& options = {});

// Surface at one member lambda0 of the associated family. Tangents and second
// derivatives are taken with respect to the unit-speed coordinates
// (lambda0 x, y / lambda0), so |tangent_x| = |tangent_y| = 1 for every lambda0.
struct SurfaceGrid {
  GridSpec grid;
  double lambda0 = 1.0;
  Grid2<Vec3> points;
  Grid2<Vec3> tangents_x;
  Grid2<Vec3> tangents_y;
  Grid2<Vec3> normal;
  Grid2<Vec3> second_xx;
  Grid2<Vec3> second_xy;
  Grid2<Vec3> second_yy;
  Grid2<NodeFlag> flags;

  bool is_regular(int i, int j) const { return flags(i, j) == NodeFlag::regular; }
};

// Shifts raw points so the origin maps to 0 and takes finite-difference
// derivatives of them. Stencils skip big-cell nodes only.
SurfaceGrid build_surface(const GridSpec& grid, double lambda0, Grid2<Vec3> points, Grid2<Vec3> normal,
                          Grid2<NodeFlag> flags);

// psi = (lambda d/dlambda U) U^{-1} at lambda0, mapped to R^3 by X = -(i/2) sum x_k sigma_k.
// Normal is the e3 axis carried by the frame: U (-(i/2) sigma3) U^{-1}.
SurfaceGrid sym_immersion(const FrameGrid& frame, double lambda0);

std::vector<SurfaceGrid> associated_family_sweep(const FrameGrid& frame, const std::vector<double>& lambdas);

enum class AngleSource { from_geometry, from_connection, goursat };

struct AngleField {
  GridSpec grid;
  AngleSource source = AngleSource::from_geometry;
  Grid2<double> values;
  Grid2<NodeFlag> flags;

  bool is_regular(int i, int j) const { return flags(i, j) == NodeFlag::regular; }
};

// Raw angle in (-pi, pi] is made continuous by a flood fill from the origin,
// seeded at phi0. Components cut off from the origin take the branch closest
// to phi0 at their first node.
Grid2<double> unwrap_angle(const Grid2<double>& raw, const Grid2<bool>& usable, double phi0);

// cos phi = t_x . t_y, sin phi = (t_x x t_y) . n. Marks |sin phi| < singular_tol.
AngleField recover_angle(const SurfaceGrid& surface, double phi0, double singular_tol = 1e-3);

// Reads e^{i phi} from the lambda^{+1} coefficient of U^{-1} U_x and the
// lambda^{-1} coefficient of U^{-1} U_y. The product used is invariant under
// the diagonal right gauge left over by the Birkhoff normalization.
AngleField recover_angle_from_connection(const FrameGrid& frame, double phi0, double singular_tol = 1e-3);

// Copies angle_singular marks onto the surface flags.
void merge_angle_flags(SurfaceGrid& surface, const AngleField& angle);

struct FormReport {
  double E, F, G;
  double L, M, N;
  double K;
};

// First and second fundamental form coefficients in unit-speed coordinates and
// K = (LN - M^2) / (EG - F^2). All entries NaN at nodes flagged in either input.
Grid2<FormReport> fundamental_forms(const SurfaceGrid& surface, const AngleField& angle);

// Max |phi_xy - sin phi| over interior regular nodes, fourth-order differences.
double sine_gordon_residual(const AngleField& angle);

// Max distance of the points from their least-squares line.
double line_residual(const std::vector<Vec3>& points);

}  // namespace ksurf
