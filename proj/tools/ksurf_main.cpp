// Command line driver: builds the surfaces for one set of initial data and
// writes them out together with a JSON report.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ksurf/error.hpp"
#include "ksurf/pipeline.hpp"

namespace {

enum Exit { ok = 0, usage = 1, incompatible = 2, numerical = 3, breached = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospherical surfaces from two angle functions via loop-group factorization"};
  app.set_help_flag("--help", "print this help and exit");  // frees -h for the grid step

  std::string config_path, preset, alpha_csv, beta_csv, out_dir, oracle;
  double phi0 = 0, soliton_a = 0, soliton_shift = 0, x0 = 0, y0 = 0, h = 0;
  int trunc = 0;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::vector<double> lambdas;
  bool quiet = false;

  app.add_option("--config", config_path, "JSON run configuration; command line flags override it")
      ->check(CLI::ExistingFile);
  auto* o_preset = app.add_option("--preset", preset, "initial data preset")
                       ->check(CLI::IsMember({"amsler", "soliton", "random", "tabulated"}));
  auto* o_phi0 = app.add_option("--phi0", phi0, "constant angle for the amsler preset (radians, in (0, pi))");
  auto* o_sa = app.add_option("--soliton-a", soliton_a, "soliton rapidity a > 0");
  auto* o_ss = app.add_option("--soliton-shift", soliton_shift, "soliton phase c in 4 atan(exp(a x + y / a + c))");
  auto* o_alpha = app.add_option("--alpha", alpha_csv, "CSV of (x, alpha(x)) rows")->check(CLI::ExistingFile);
  auto* o_beta = app.add_option("--beta", beta_csv, "CSV of (y, beta(y)) rows")->check(CLI::ExistingFile);
  auto* o_x0 = app.add_option("--x0", x0, "domain length along x");
  auto* o_y0 = app.add_option("--y0", y0, "domain length along y");
  auto* o_h = app.add_option("--h", h, "grid step on both axes");
  auto* o_trunc = app.add_option("--trunc", trunc, "Laurent truncation degree N (>= 4)");
  auto* o_lambdas = app.add_option("--lambdas", lambdas, "associated-family parameters")->delimiter(',');
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_oracle = app.add_option("--oracle", oracle, "run the Goursat/Lax reference")
                       ->check(CLI::IsMember({"on", "off"}));
  auto* o_seed = app.add_option("--seed", seed, "seed for the random preset");
  auto* o_threads = app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_flag("-q,--quiet", quiet, "only print errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  ksurf::RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      cfg = ksurf::config_from_json(nlohmann::json::parse(in));
    }
    if (o_preset->count()) cfg.preset.kind = ksurf::preset_from_name(preset);
    if (o_phi0->count()) cfg.preset.phi0 = phi0;
    if (o_sa->count()) cfg.preset.soliton_a = soliton_a;
    if (o_ss->count()) cfg.preset.soliton_shift = soliton_shift;
    if (o_alpha->count()) cfg.preset.alpha_csv = alpha_csv;
    if (o_beta->count()) cfg.preset.beta_csv = beta_csv;
    if (o_alpha->count() || o_beta->count()) cfg.preset.kind = ksurf::PresetKind::tabulated;
    if (o_x0->count()) cfg.x0 = x0;
    if (o_y0->count()) cfg.y0 = y0;
    if (o_h->count()) cfg.hx = cfg.hy = h;
    if (o_trunc->count()) cfg.truncation = trunc;
    if (o_lambdas->count()) cfg.lambdas = lambdas;
    if (o_out->count()) cfg.output_dir = out_dir;
    if (o_oracle->count()) cfg.oracle = oracle == "on";
    if (o_seed->count()) cfg.preset.seed = seed;
    if (o_threads->count()) cfg.threads = threads;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "ksurf: configuration error: " << e.what() << '\n';
    return usage;
  }

  try {
    const ksurf::PipelineResult res = ksurf::run_pipeline(cfg);
    ksurf::write_artifacts(res);
    if (!quiet) {
      const auto& s = res.report.scalars;
      std::printf("grid %dx%d, N = %d, big-cell violations %g, regular nodes %g\n", res.frame.grid.nx,
                  res.frame.grid.ny, cfg.truncation, s.at("big_cell_violations"), s.at("regular_nodes"));
      for (const auto& m : res.report.per_lambda) {
        std::printf("lambda %-4g speed %.2e  F %.2e  K %.2e  sG %.2e  oracle %.2e  flagged %g\n", m.at("lambda0"),
                    m.at("unit_speed_error"), m.at("first_form_error"), m.at("curvature_error"),
                    m.at("sine_gordon_residual"), m.at("oracle_disagreement"), m.at("flagged_nodes"));
      }
      for (const auto& w : res.report.warnings) std::printf("warning: %s\n", w.c_str());
      std::printf("artifacts written to %s\n", cfg.output_dir.c_str());
    }
    if (!res.ok()) {
      for (const auto& b : res.report.breaches) std::cerr << "ksurf: tolerance breach: " << b << '\n';
      return breached;
    }
  } catch (const ksurf::CompatibilityError& e) {
    std::cerr << "ksurf: " << e.what() << '\n';
    return incompatible;
  } catch (const ksurf::Error& e) {
    std::cerr << "ksurf: aborted: " << e.what() << '\n';
    return numerical;
  } catch (const std::exception& e) {
    std::cerr << "ksurf: " << e.what() << '\n';
    return usage;
  }
  return ok;
}
