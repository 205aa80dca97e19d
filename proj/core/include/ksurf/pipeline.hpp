#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ksurf/goursat.hpp"
#include "ksurf/potentials.hpp"
#include "ksurf/surface.hpp"

namespace ksurf {

struct Tolerances {
  double unit_speed = 1e-3;
  double first_form = 5e-3;
  double curvature = 2e-2;
  double sine_gordon = 1e-3;
  double angle = 5e-3;       // recovered angle vs axis data and closed forms
  double connection = 1e-2;  // geometric vs connection angle
  double oracle = 5e-3;
  double family = 1e-2;
  double line = 1e-4;
  double radial = 1e-3;
  double unitarity_warn = 1e-6;
  double unitarity_abort = 1e-3;
  double tail = 1e-8;
  double big_cell_condition = 1e8;
  double big_cell_residual = 1e-6;
  double singular_angle = 1e-3;
};

struct RunConfig {
  double x0 = 2.0;
  double y0 = 2.0;
  double hx = 0.05;
  double hy = 0.05;
  int truncation = 16;
  std::vector<double> lambdas{0.5, 1.0, 2.0};
  PresetSpec preset;
  std::string output_dir = "ksurf-out";
  bool oracle = true;
  unsigned threads = 0;
  Tolerances tolerances;

  GridSpec grid() const { return GridSpec::from_domain(x0, y0, hx, hy); }
  // Throws std::invalid_argument on a degenerate grid, N < 4 or a non-positive lambda.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
// Keys absent from j keep the values of `base`; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

const char* preset_name(PresetKind kind);
PresetKind preset_from_name(const std::string& name);

// Named scalar metrics plus per-lambda sections. NaN is written as null.
struct Report {
  std::map<std::string, double> scalars;
  std::vector<std::map<std::string, double>> per_lambda;
  nlohmann::json config;  // resolved configuration echo; null when absent
  std::vector<std::string> breaches;
  std::vector<std::string> warnings;

  bool empty() const {
    return scalars.empty() && per_lambda.empty() && config.is_null() && breaches.empty() && warnings.empty();
  }
};

// Documented key sets. A pipeline report contains exactly these keys.
const std::vector<std::string>& report_scalar_keys();
const std::vector<std::string>& report_lambda_keys();

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);
void export_report(const Report& report, const std::string& path);

// Triangle mesh over the regular nodes of a surface. Each grid quad
// (i, j)-(i+1, j)-(i+1, j+1)-(i, j+1) becomes a lower triangle (00, 10, 11)
// and an upper triangle (00, 11, 01); triangles touching a flagged node are dropped.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> lower;
  std::vector<std::array<int, 3>> upper;

  std::size_t face_count() const { return lower.size() + upper.size(); }
};

TriMesh build_mesh(const SurfaceGrid& surface);
// OBJ text: "v x y z" with %.17g, faces 1-based in groups "g lower" / "g upper".
void write_obj(const TriMesh& mesh, std::ostream& out);
void export_mesh(const SurfaceGrid& surface, const std::string& path);
TriMesh read_obj(std::istream& in);
TriMesh import_obj(const std::string& path);

struct EdgeSpeedStats {
  double mean = 0.0;       // mean edge length divided by its coordinate step
  double max_error = 0.0;  // max |speed - 1|
  std::size_t edges = 0;
};
// Coordinate edges measured in unit-speed coordinates: an x edge spans lambda0 hx.
EdgeSpeedStats edge_speed(const TriMesh& mesh, double lambda0, double hx, double hy);

// Grid CSV: first cell "x/y", header row of y values, one row per x value.
void write_angle_csv(const AngleField& angle, std::ostream& out);
void write_flags_csv(const Grid2<NodeFlag>& flags, const GridSpec& grid, std::ostream& out);

struct PipelineResult {
  RunConfig config;
  std::optional<AngleData> data;
  FrameGrid frame;
  std::vector<SurfaceGrid> surfaces;  // one per lambda, angle flags merged
  std::vector<AngleField> angles;     // geometry-recovered angle per lambda
  std::vector<TriMesh> meshes;
  AngleField connection_angle;
  std::optional<GoursatField> goursat;
  std::vector<SurfaceGrid> reference;  // oracle immersion per lambda when enabled
  Report report;

  bool ok() const { return report.breaches.empty(); }
};

// Full construction from the initial data to the surfaces and their metrics,
// with the oracle comparison when config.oracle is set. Abort-level failures propagate as exceptions; invariant breaches are listed
// in report.breaches.
PipelineResult run_pipeline(const RunConfig& config);
// Same, with initial data supplied directly (config.preset is ignored).
PipelineResult run_pipeline(const RunConfig& config, const AngleData& data);

// Writes the per-lambda mesh and grid files plus report.json into config.output_dir.
void write_artifacts(const PipelineResult& result);

std::string lambda_tag(double lambda0);

}  // namespace ksurf
