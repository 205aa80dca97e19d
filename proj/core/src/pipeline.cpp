#include "ksurf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ksurf/error.hpp"

namespace ksurf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double max_or_nan(double acc, double v) { return std::isnan(acc) ? v : std::max(acc, v); }

// JSON number or null for non-finite values.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double read_number(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

void RunConfig::validate() const {
  if (!(x0 > 0.0 && y0 > 0.0)) throw std::invalid_argument("domain bounds x0, y0 must be positive");
  if (!(hx > 0.0 && hy > 0.0)) throw std::invalid_argument("grid steps must be positive");
  if (truncation < 4) throw std::invalid_argument("truncation degree must be at least 4");
  if (lambdas.empty()) throw std::invalid_argument("at least one lambda sample is required");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("lambda samples must be positive reals");
  const GridSpec g = grid();
  if (g.nx < 2 || g.ny < 2) throw std::invalid_argument("grid needs at least two nodes per axis");
}

const char* preset_name(PresetKind kind) {
  switch (kind) {
    case PresetKind::amsler:
      return "amsler";
    case PresetKind::soliton:
      return "soliton";
    case PresetKind::tabulated:
      return "tabulated";
    case PresetKind::random:
      return "random";
  }
  return "unknown";
}

PresetKind preset_from_name(const std::string& name) {
  for (auto k : {PresetKind::amsler, PresetKind::soliton, PresetKind::tabulated, PresetKind::random})
    if (name == preset_name(k)) return k;
  throw std::invalid_argument("unknown preset '" + name + "' (expected amsler, soliton, tabulated or random)");
}

nlohmann::json to_json(const RunConfig& c) {
  const Tolerances& t = c.tolerances;
  return {
      {"x0", c.x0},
      {"y0", c.y0},
      {"hx", c.hx},
      {"hy", c.hy},
      {"truncation", c.truncation},
      {"lambdas", c.lambdas},
      {"preset",
       {{"kind", preset_name(c.preset.kind)},
        {"phi0", c.preset.phi0},
        {"soliton_a", c.preset.soliton_a},
        {"soliton_shift", c.preset.soliton_shift},
        {"alpha_csv", c.preset.alpha_csv},
        {"beta_csv", c.preset.beta_csv},
        {"seed", c.preset.seed}}},
      {"output_dir", c.output_dir},
      {"oracle", c.oracle},
      {"threads", c.threads},
      {"tolerances",
       {{"unit_speed", t.unit_speed},
        {"first_form", t.first_form},
        {"curvature", t.curvature},
        {"sine_gordon", t.sine_gordon},
        {"angle", t.angle},
        {"connection", t.connection},
        {"oracle", t.oracle},
        {"family", t.family},
        {"line", t.line},
        {"radial", t.radial},
        {"unitarity_warn", t.unitarity_warn},
        {"unitarity_abort", t.unitarity_abort},
        {"tail", t.tail},
        {"big_cell_condition", t.big_cell_condition},
        {"big_cell_residual", t.big_cell_residual},
        {"singular_angle", t.singular_angle}}},
  };
}

namespace {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw std::invalid_argument("unknown config key '" + where + key + "'");
    }
  }
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j,
                 {"x0", "y0", "h", "hx", "hy", "truncation", "lambdas", "preset", "output_dir", "oracle", "threads",
                  "tolerances"},
                 "");
  take(j, "x0", c.x0);
  take(j, "y0", c.y0);
  if (j.contains("h")) c.hx = c.hy = j.at("h").get<double>();
  take(j, "hx", c.hx);
  take(j, "hy", c.hy);
  take(j, "truncation", c.truncation);
  take(j, "lambdas", c.lambdas);
  take(j, "output_dir", c.output_dir);
  take(j, "oracle", c.oracle);
  take(j, "threads", c.threads);
  if (j.contains("preset")) {
    const auto& p = j.at("preset");
    if (p.is_string()) {
      c.preset.kind = preset_from_name(p.get<std::string>());
    } else {
      reject_unknown(p, {"kind", "phi0", "soliton_a", "soliton_shift", "alpha_csv", "beta_csv", "seed"}, "preset.");
      if (p.contains("kind")) c.preset.kind = preset_from_name(p.at("kind").get<std::string>());
      take(p, "phi0", c.preset.phi0);
      take(p, "soliton_a", c.preset.soliton_a);
      take(p, "soliton_shift", c.preset.soliton_shift);
      take(p, "alpha_csv", c.preset.alpha_csv);
      take(p, "beta_csv", c.preset.beta_csv);
      take(p, "seed", c.preset.seed);
    }
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    Tolerances& o = c.tolerances;
    reject_unknown(t,
                   {"unit_speed", "first_form", "curvature", "sine_gordon", "angle", "connection", "oracle", "family",
                    "line", "radial", "unitarity_warn", "unitarity_abort", "tail", "big_cell_condition",
                    "big_cell_residual", "singular_angle"},
                   "tolerances.");
    take(t, "unit_speed", o.unit_speed);
    take(t, "first_form", o.first_form);
    take(t, "curvature", o.curvature);
    take(t, "sine_gordon", o.sine_gordon);
    take(t, "angle", o.angle);
    take(t, "connection", o.connection);
    take(t, "oracle", o.oracle);
    take(t, "family", o.family);
    take(t, "line", o.line);
    take(t, "radial", o.radial);
    take(t, "unitarity_warn", o.unitarity_warn);
    take(t, "unitarity_abort", o.unitarity_abort);
    take(t, "tail", o.tail);
    take(t, "big_cell_condition", o.big_cell_condition);
    take(t, "big_cell_residual", o.big_cell_residual);
    take(t, "singular_angle", o.singular_angle);
  }
  return c;
}

const std::vector<std::string>& report_scalar_keys() {
  static const std::vector<std::string> keys{
      "nodes",
      "phi0",
      "regular_nodes",
      "big_cell_violations",
      "max_condition_estimate",
      "max_split_residual",
      "max_truncation_loss",
      "max_tail_norm",
      "max_path_unitarity_defect",
      "max_frame_unitarity_defect",
      "connection_angle_disagreement",
      "family_angle_spread",
      "family_second_form_spread",
      "goursat_iterations",
      "goursat_discrete_residual",
      "goursat_closed_form_error",
      "lax_path_defect",
      "amsler_radial_error",
  };
  return keys;
}

const std::vector<std::string>& report_lambda_keys() {
  static const std::vector<std::string> keys{
      "lambda0",
      "flagged_nodes",
      "unit_speed_error",
      "first_form_error",
      "curvature_error",
      "second_form_error",
      "asymptotic_form_error",
      "sine_gordon_residual",
      "axis_angle_error",
      "closed_form_angle_error",
      "oracle_disagreement",
      "line_residual_x",
      "line_residual_y",
      "mesh_vertices",
      "mesh_faces",
      "edge_speed_mean",
      "edge_speed_max_error",
  };
  return keys;
}

nlohmann::json to_json(const Report& r) {
  nlohmann::json j = nlohmann::json::object();
  if (r.empty()) return j;
  for (const auto& [k, v] : r.scalars) j[k] = number(v);
  if (!r.per_lambda.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& section : r.per_lambda) {
      nlohmann::json s = nlohmann::json::object();
      for (const auto& [k, v] : section) s[k] = number(v);
      arr.push_back(std::move(s));
    }
    j["per_lambda"] = std::move(arr);
  }
  if (!r.config.is_null()) j["config"] = r.config;
  j["breaches"] = r.breaches;
  j["warnings"] = r.warnings;
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  Report r;
  for (const auto& [key, value] : j.items()) {
    if (key == "per_lambda") {
      for (const auto& s : value) {
        std::map<std::string, double> section;
        for (const auto& [k, v] : s.items()) section[k] = read_number(v);
        r.per_lambda.push_back(std::move(section));
      }
    } else if (key == "config") {
      r.config = value;
    } else if (key == "breaches") {
      r.breaches = value.get<std::vector<std::string>>();
    } else if (key == "warnings") {
      r.warnings = value.get<std::vector<std::string>>();
    } else {
      r.scalars[key] = read_number(value);
    }
  }
  return r;
}

void export_report(const Report& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report '" + path + "'");
  out << to_json(report).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing report '" + path + "'");
}

TriMesh build_mesh(const SurfaceGrid& s) {
  const int nx = s.grid.nx, ny = s.grid.ny;
  TriMesh mesh;
  Grid2<int> index(nx, ny, -1);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (!s.is_regular(i, j)) continue;
      index(i, j) = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(s.points(i, j));
    }
  }
  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      const int v00 = index(i, j), v10 = index(i + 1, j), v11 = index(i + 1, j + 1), v01 = index(i, j + 1);
      if (v00 >= 0 && v10 >= 0 && v11 >= 0) mesh.lower.push_back({v00, v10, v11});
      if (v00 >= 0 && v11 >= 0 && v01 >= 0) mesh.upper.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

void write_obj(const TriMesh& mesh, std::ostream& out) {
  out << "# pseudospherical surface: " << mesh.vertices.size() << " vertices, " << mesh.face_count() << " faces\n";
  char buf[96];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  auto faces = [&](const char* group, const std::vector<std::array<int, 3>>& list) {
    out << "g " << group << '\n';
    for (const auto& f : list) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  };
  faces("lower", mesh.lower);
  faces("upper", mesh.upper);
}

void export_mesh(const SurfaceGrid& surface, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh '" + path + "'");
  write_obj(build_mesh(surface), out);
  if (!out) throw std::runtime_error("failed writing mesh '" + path + "'");
}

TriMesh read_obj(std::istream& in) {
  TriMesh mesh;
  std::vector<std::array<int, 3>>* group = &mesh.lower;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw std::runtime_error("OBJ: bad vertex on line " + std::to_string(lineno));
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "g") {
      std::string name;
      ls >> name;
      group = name == "upper" ? &mesh.upper : &mesh.lower;
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (auto& idx : f) {
        std::string tok;
        if (!(ls >> tok)) throw std::runtime_error("OBJ: bad face on line " + std::to_string(lineno));
        idx = std::stoi(tok.substr(0, tok.find('/'))) - 1;
        if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
          throw std::runtime_error("OBJ: face index out of range on line " + std::to_string(lineno));
      }
      group->push_back(f);
    }
  }
  return mesh;
}

TriMesh import_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh '" + path + "'");
  return read_obj(in);
}

EdgeSpeedStats edge_speed(const TriMesh& mesh, double lambda0, double hx, double hy) {
  EdgeSpeedStats st;
  double sum = 0.0;
  auto add = [&](int a, int b, double span) {
    const double speed = (mesh.vertices[b] - mesh.vertices[a]).norm() / span;
    sum += speed;
    st.max_error = std::max(st.max_error, std::abs(speed - 1.0));
    ++st.edges;
  };
  const double sx = lambda0 * hx, sy = hy / lambda0;
  for (const auto& f : mesh.lower) {
    add(f[0], f[1], sx);
    add(f[1], f[2], sy);
  }
  for (const auto& f : mesh.upper) {
    add(f[2], f[1], sx);
    add(f[0], f[2], sy);
  }
  if (st.edges > 0) st.mean = sum / static_cast<double>(st.edges);
  return st;
}

namespace {

template <typename Cell>
void write_grid_csv(const GridSpec& g, std::ostream& out, Cell&& cell) {
  out << "x/y";
  for (int j = 0; j < g.ny; ++j) out << ',' << format_double(g.y(j));
  out << '\n';
  for (int i = 0; i < g.nx; ++i) {
    out << format_double(g.x(i));
    for (int j = 0; j < g.ny; ++j) out << ',' << cell(i, j);
    out << '\n';
  }
}

}  // namespace

void write_angle_csv(const AngleField& angle, std::ostream& out) {
  write_grid_csv(angle.grid, out, [&](int i, int j) {
    return angle.is_regular(i, j) ? format_double(angle.values(i, j)) : std::string("nan");
  });
}

void write_flags_csv(const Grid2<NodeFlag>& flags, const GridSpec& grid, std::ostream& out) {
  write_grid_csv(grid, out, [&](int i, int j) { return std::to_string(static_cast<int>(flags(i, j))); });
}

std::string lambda_tag(double lambda0) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda0);
  return buf;
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();
  return run_pipeline(config, make_preset(config.preset, config.grid()));
}

PipelineResult run_pipeline(const RunConfig& config, const AngleData& data) {
  config.validate();
  const Tolerances& tol = config.tolerances;
  const GridSpec grid = data.grid();
  const int nx = grid.nx, ny = grid.ny;

  PipelineResult res;
  res.config = config;
  res.data = data;
  Report& rep = res.report;
  rep.config = to_json(config);

  // Loop ODEs along both axes run independently.
  OdeOptions ode;
  ode.lambda_samples = config.lambdas;
  ode.unitarity_warn = tol.unitarity_warn;
  ode.unitarity_abort = tol.unitarity_abort;
  ode.tail_tolerance = tol.tail;
  auto plus_job = std::async(std::launch::async, [&] { return integrate_plus(build_symmetric_x(data), config.truncation, ode); });
  const FrameFactorPath minus_path = integrate_minus(build_symmetric_y(data), config.truncation, ode);
  const FrameFactorPath plus_path = plus_job.get();
  for (const auto* p : {&plus_path, &minus_path})
    for (const auto& w : p->warnings) rep.warnings.push_back((p == &plus_path ? "x path: " : "y path: ") + w);

  FrameOptions fo;
  fo.birkhoff = {tol.big_cell_condition, tol.big_cell_residual};
  fo.lambda_samples = config.lambdas;
  fo.unitarity_warn = tol.unitarity_warn;
  fo.unitarity_abort = tol.unitarity_abort;
  fo.threads = config.threads;
  res.frame = assemble_frame(plus_path, minus_path, GaugeRotation::base_point(data.phi0()), fo);
  if (res.frame.unitarity_warnings > 0) {
    rep.warnings.push_back(std::to_string(res.frame.unitarity_warnings) + " frame nodes exceed the unitarity warning level");
  }

  res.connection_angle = recover_angle_from_connection(res.frame, data.phi0(), tol.singular_angle);
  if (config.oracle) res.goursat = solve_goursat(data);

  std::optional<RadialProfile> radial;
  if (config.preset.kind == PresetKind::amsler && data.alpha().has_closed_form()) {
    try {
      radial = solve_amsler_radial(data.phi0(), grid.x0() * grid.y0(), 1e-3);
    } catch (const ConvergenceError& e) {
      rep.warnings.push_back(e.what());
    }
  }
  const auto& closed = data.closed_form();

  auto& sc = rep.scalars;
  for (const auto& k : report_scalar_keys()) sc[k] = kNaN;
  sc["nodes"] = static_cast<double>(nx * ny);
  sc["phi0"] = data.phi0();
  sc["big_cell_violations"] = res.frame.big_cell_violations;
  sc["max_condition_estimate"] = res.frame.max_condition;
  sc["max_split_residual"] = res.frame.max_split_residual;
  sc["max_truncation_loss"] = res.frame.max_truncation_loss;
  sc["max_tail_norm"] = std::max(plus_path.max_tail_norm, minus_path.max_tail_norm);
  sc["max_path_unitarity_defect"] = std::max(plus_path.max_unitarity_defect, minus_path.max_unitarity_defect);
  sc["max_frame_unitarity_defect"] = res.frame.max_unitarity_defect;
  if (res.goursat) {
    sc["goursat_iterations"] = res.goursat->iterations;
    sc["goursat_discrete_residual"] = res.goursat->discrete_residual;
    if (closed) {
      double e = 0.0;
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) e = std::max(e, std::abs(res.goursat->values(i, j) - closed(grid.x(i), grid.y(j))));
      sc["goursat_closed_form_error"] = e;
    }
  }

  auto breach = [&](const std::string& what, double value, double limit) {
    if (std::isnan(value) || value <= limit) return;
    std::ostringstream os;
    os << what << " = " << value << " exceeds " << limit;
    rep.breaches.push_back(os.str());
  };

  double lax_defect = kNaN, radial_err = kNaN, connection_err = kNaN;
  Grid2<bool> regular_all(nx, ny, true);
  for (double lambda0 : config.lambdas) {
    SurfaceGrid surface = sym_immersion(res.frame, lambda0);
    AngleField angle = recover_angle(surface, data.phi0(), tol.singular_angle);
    merge_angle_flags(surface, angle);
    const auto forms = fundamental_forms(surface, angle);

    std::map<std::string, double> m;
    for (const auto& k : report_lambda_keys()) m[k] = kNaN;
    m["lambda0"] = lambda0;
    double speed = 0, first = 0, curv = 0, second = 0, asym = 0, axis = 0;
    double closed_err = closed ? 0.0 : kNaN;
    int flagged = 0;
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        if (!surface.is_regular(i, j)) {
          ++flagged;
          regular_all(i, j) = false;
          continue;
        }
        const FormReport& f = forms(i, j);
        const double phi = angle.values(i, j);
        speed = std::max({speed, std::abs(std::sqrt(f.E) - 1.0), std::abs(std::sqrt(f.G) - 1.0)});
        first = std::max(first, std::abs(f.F - std::cos(phi)));
        curv = std::max(curv, std::abs(f.K + 1.0));
        second = std::max(second, std::abs(f.M - std::sin(phi)));
        asym = std::max({asym, std::abs(f.L), std::abs(f.N)});
        if (j == 0) axis = std::max(axis, std::abs(phi - data.alpha().at_node(static_cast<std::size_t>(i))));
        if (i == 0) axis = std::max(axis, std::abs(phi - data.beta().at_node(static_cast<std::size_t>(j))));
        if (closed) closed_err = std::max(closed_err, std::abs(phi - closed(grid.x(i), grid.y(j))));
        if (radial) radial_err = max_or_nan(radial_err, std::abs(phi - (*radial)(grid.x(i) * grid.y(j))));
        if (res.connection_angle.is_regular(i, j))
          connection_err = max_or_nan(connection_err, std::abs(phi - res.connection_angle.values(i, j)));
      }
    }
    m["flagged_nodes"] = flagged;
    m["unit_speed_error"] = speed;
    m["first_form_error"] = first;
    m["curvature_error"] = curv;
    m["second_form_error"] = second;
    m["asymptotic_form_error"] = asym;
    m["sine_gordon_residual"] = sine_gordon_residual(angle);
    m["axis_angle_error"] = axis;
    m["closed_form_angle_error"] = closed_err;

    if (config.preset.kind == PresetKind::amsler) {
      std::vector<Vec3> row, col;
      for (int i = 0; i < nx; ++i)
        if (surface.is_regular(i, 0)) row.push_back(surface.points(i, 0));
      for (int j = 0; j < ny; ++j)
        if (surface.is_regular(0, j)) col.push_back(surface.points(0, j));
      m["line_residual_x"] = line_residual(row);
      m["line_residual_y"] = line_residual(col);
      breach("line_residual_x at lambda " + lambda_tag(lambda0), m["line_residual_x"], tol.line);
      breach("line_residual_y at lambda " + lambda_tag(lambda0), m["line_residual_y"], tol.line);
    }

    if (res.goursat) {
      const LaxFrames lax = integrate_lax(*res.goursat, lambda0);
      lax_defect = max_or_nan(lax_defect, lax.path_defect);
      SurfaceGrid ref = reference_immersion(lax);
      double d = 0.0;
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
          if (surface.is_regular(i, j)) d = std::max(d, (surface.points(i, j) - ref.points(i, j)).norm());
      m["oracle_disagreement"] = d;
      breach("oracle_disagreement at lambda " + lambda_tag(lambda0), d, tol.oracle);
      res.reference.push_back(std::move(ref));
    }

    TriMesh mesh = build_mesh(surface);
    const EdgeSpeedStats es = edge_speed(mesh, lambda0, grid.hx, grid.hy);
    m["mesh_vertices"] = static_cast<double>(mesh.vertices.size());
    m["mesh_faces"] = static_cast<double>(mesh.face_count());
    m["edge_speed_mean"] = es.edges ? es.mean : kNaN;
    m["edge_speed_max_error"] = es.edges ? es.max_error : kNaN;

    const std::string at = " at lambda " + lambda_tag(lambda0);
    breach("unit_speed_error" + at, speed, tol.unit_speed);
    breach("first_form_error" + at, first, tol.first_form);
    breach("curvature_error" + at, curv, tol.curvature);
    breach("sine_gordon_residual" + at, m["sine_gordon_residual"], tol.sine_gordon);
    breach("axis_angle_error" + at, axis, tol.angle);
    breach("closed_form_angle_error" + at, closed_err, tol.angle);

    rep.per_lambda.push_back(std::move(m));
    res.surfaces.push_back(std::move(surface));
    res.angles.push_back(std::move(angle));
    res.meshes.push_back(std::move(mesh));
  }

  // Associated-family spread of the angle and of M = II(d/dx, d/dy) on nodes regular for every lambda.
  double angle_spread = 0.0, form_spread = 0.0;
  std::vector<Grid2<FormReport>> forms;
  for (std::size_t k = 0; k < res.surfaces.size(); ++k) forms.push_back(fundamental_forms(res.surfaces[k], res.angles[k]));
  int regular = 0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (!regular_all(i, j)) continue;
      ++regular;
      for (std::size_t k = 1; k < res.surfaces.size(); ++k) {
        angle_spread = std::max(angle_spread, std::abs(res.angles[k].values(i, j) - res.angles[0].values(i, j)));
        form_spread = std::max(form_spread, std::abs(forms[k](i, j).M - forms[0](i, j).M));
        form_spread = std::max({form_spread, std::abs(forms[k](i, j).L - forms[0](i, j).L),
                                std::abs(forms[k](i, j).N - forms[0](i, j).N)});
      }
    }
  }
  sc["regular_nodes"] = regular;
  sc["family_angle_spread"] = angle_spread;
  sc["family_second_form_spread"] = form_spread;
  sc["lax_path_defect"] = lax_defect;
  sc["amsler_radial_error"] = radial_err;
  sc["connection_angle_disagreement"] = connection_err;
  breach("family_angle_spread", angle_spread, tol.family);
  breach("family_second_form_spread", form_spread, tol.family);
  breach("amsler_radial_error", radial_err, tol.radial);
  breach("connection_angle_disagreement", connection_err, tol.connection);
  return res;
}

void write_artifacts(const PipelineResult& res) {
  namespace fs = std::filesystem;
  const fs::path dir(res.config.output_dir);
  fs::create_directories(dir);
  auto open = [](const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    return out;
  };
  for (std::size_t k = 0; k < res.surfaces.size(); ++k) {
    const std::string tag = lambda_tag(res.surfaces[k].lambda0);
    {
      auto out = open(dir / ("surface_lambda_" + tag + ".obj"));
      write_obj(res.meshes[k], out);
    }
    {
      auto out = open(dir / ("angle_lambda_" + tag + ".csv"));
      write_angle_csv(res.angles[k], out);
    }
    {
      auto out = open(dir / ("flags_lambda_" + tag + ".csv"));
      write_flags_csv(res.surfaces[k].flags, res.surfaces[k].grid, out);
    }
  }
  export_report(res.report, (dir / "report.json").string());
}

}  // namespace ksurf
