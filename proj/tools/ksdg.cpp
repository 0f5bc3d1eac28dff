// Command-line front end: run a configured simulation, check mesh geometry,
// list the built-in experiment presets.

#include "ksdg/config.hpp"
#include "ksdg/errors.hpp"
#include "ksdg/mesh.hpp"
#include "ksdg/output.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int run_command(const std::string& config_path, bool quiet) {
  const ksdg::RunConfig config = ksdg::load_config_file(config_path);
  std::function<void(const ksdg::DiagnosticsRow&)> progress;
  if (!quiet) {
    progress = [](const ksdg::DiagnosticsRow& r) {
      std::cerr << "step " << r.step << "  t=" << r.time << "  max_u=" << r.max_u << "  E_eps=" << r.energy_eps
                << "  newton=" << r.newton_iters << '\n';
    };
  }
  const ksdg::RunResult result = ksdg::run(config, progress);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : result.written_files) std::cout << "wrote " << f << '\n';
  return 0;
}

int verify_mesh_command(const std::string& pattern_name, int n) {
  const ksdg::TriMesh mesh = ksdg::build_structured_mesh(ksdg::parse_mesh_pattern(pattern_name), n);
  const ksdg::HypothesisReport report = ksdg::verify_hypotheses(mesh);
  std::cout << ksdg::to_string(*mesh.pattern()) << " n=" << n << ": " << mesh.num_cells() << " triangles, "
            << mesh.num_vertices() << " vertices, " << mesh.interior_edges().size() << " interior edges, h="
            << mesh.size() << '\n'
            << "orthogonality: " << (report.orthogonality_ok ? "ok" : "FAILED")
            << " (max violation " << report.orthogonality_violation << ")\n"
            << "acute angles:  " << (report.acute_ok ? "ok" : "FAILED")
            << " (max violation " << report.acuteness_violation << ")\n";
  return report.orthogonality_ok && report.acute_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Upwind DG solver for the Keller-Segel chemotaxis system"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run a simulation from a config file");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_flag("-q,--quiet", quiet, "no per-step progress on stderr");

  std::string pattern;
  int n = 0;
  auto* verify = app.add_subcommand("verify-mesh", "build a structured mesh and check its geometry");
  verify->add_option("pattern", pattern, "Mesh1 or Mesh2")->required();
  verify->add_option("n", n, "squares per side")->required();

  auto* presets = app.add_subcommand("presets", "list the built-in initial-condition presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return run_command(config_path, quiet);
    if (*verify) return verify_mesh_command(pattern, n);
    if (*presets) {
      for (const auto& name : ksdg::preset_names()) std::cout << name << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
