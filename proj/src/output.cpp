#include "ksdg/output.hpp"

#include "ksdg/errors.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ksdg {

namespace {

std::string fmt17(double x) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::ofstream open_for_writing(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

double parse_real(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("bad number in CSV: " + std::string(s));
  return v;
}

long long parse_integer(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("bad integer in CSV: " + std::string(s));
  return v;
}

} // namespace

void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, std::ostream& out) {
  out << kDiagnosticsHeader << '\n';
  for (const auto& r : rows) {
    out << r.step << ',' << fmt17(r.time) << ',' << fmt17(r.mass) << ',' << fmt17(r.min_u) << ',' << fmt17(r.max_u)
        << ',' << fmt17(r.min_v) << ',' << fmt17(r.max_v) << ',' << fmt17(r.energy) << ',' << fmt17(r.energy_eps)
        << ',' << fmt17(r.energy_law_lhs) << ',' << r.newton_iters << ',' << fmt17(r.newton_residual) << '\n';
  }
}

void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path) {
  auto out = open_for_writing(path);
  write_diagnostics_csv(rows, out);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<DiagnosticsRow> read_diagnostics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kDiagnosticsHeader) throw std::runtime_error("unexpected CSV header");
  std::vector<DiagnosticsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view view(line);
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      f.push_back(view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 12) throw std::runtime_error("CSV row has " + std::to_string(f.size()) + " fields");
    DiagnosticsRow r;
    r.step = static_cast<Index>(parse_integer(f[0]));
    r.time = parse_real(f[1]);
    r.mass = parse_real(f[2]);
    r.min_u = parse_real(f[3]);
    r.max_u = parse_real(f[4]);
    r.min_v = parse_real(f[5]);
    r.max_v = parse_real(f[6]);
    r.energy = parse_real(f[7]);
    r.energy_eps = parse_real(f[8]);
    r.energy_law_lhs = parse_real(f[9]);
    r.newton_iters = static_cast<int>(parse_integer(f[10]));
    r.newton_residual = parse_real(f[11]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<DiagnosticsRow> read_diagnostics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_diagnostics_csv(in);
}

void write_vtk_snapshot(const TriMesh& mesh, const CellField& u, const NodeField& v, std::ostream& out) {
  check_compatible(mesh, u);
  check_compatible(mesh, v);
  const NodeField u_p1 = project_p0_to_p1_lumped(mesh, u);
  const Index nv = mesh.num_vertices();
  const Index nc = mesh.num_cells();

  out << "# vtk DataFile Version 3.0\n"
      << "ksdg snapshot\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << nv << " double\n";
  for (Index i = 0; i < nv; ++i)
    out << fmt17(mesh.vertices()(i, 0)) << ' ' << fmt17(mesh.vertices()(i, 1)) << " 0\n";
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (Index k = 0; k < nc; ++k)
    out << "3 " << mesh.triangles()(k, 0) << ' ' << mesh.triangles()(k, 1) << ' ' << mesh.triangles()(k, 2) << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (Index k = 0; k < nc; ++k) out << "5\n";

  out << "POINT_DATA " << nv << '\n';
  out << "SCALARS u_p1 double 1\nLOOKUP_TABLE default\n";
  for (Index i = 0; i < nv; ++i) out << fmt17(u_p1[i]) << '\n';
  out << "SCALARS v double 1\nLOOKUP_TABLE default\n";
  for (Index i = 0; i < nv; ++i) out << fmt17(v[i]) << '\n';
  out << "CELL_DATA " << nc << '\n';
  out << "SCALARS u_p0 double 1\nLOOKUP_TABLE default\n";
  for (Index k = 0; k < nc; ++k) out << fmt17(u[k]) << '\n';
}

void write_vtk_snapshot(const TriMesh& mesh, const CellField& u, const NodeField& v, const std::string& path) {
  auto out = open_for_writing(path);
  write_vtk_snapshot(mesh, u, v, out);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

RunResult run(const RunConfig& config, const std::function<void(const DiagnosticsRow&)>& on_row) {
  const TriMesh mesh = build_structured_mesh(config.pattern, config.n, config.domain);
  InitialData init = initial_conditions(config, mesh);

  RunResult result;
  result.warnings = std::move(init.warnings);

  if (!config.vtk_dir.empty()) std::filesystem::create_directories(config.vtk_dir);
  if (!config.csv_path.empty()) {
    // Fail before a long run rather than after it.
    const auto parent = std::filesystem::path(config.csv_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    open_for_writing(config.csv_path);
  }

  SimulateOptions options;
  options.newton = config.newton;
  options.mode = config.flux;
  options.on_row = on_row;
  options.keep_snapshots = false;
  if (!config.vtk_dir.empty()) {
    options.snapshot_times = config.snapshot_times;
    options.on_snapshot = [&](const Snapshot& s) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%06lld.vtk", static_cast<long long>(s.step));
      const std::string path = (std::filesystem::path(config.vtk_dir) / name).string();
      write_vtk_snapshot(mesh, s.u, s.v, path);
      result.written_files.push_back(path);
    };
  }

  try {
    result.trajectory = simulate(mesh, config.params, init.u0, init.v0, options);
  } catch (const RunFailure& failure) {
    if (!config.csv_path.empty()) write_diagnostics_csv(failure.partial().rows, config.csv_path);
    throw;
  }
  if (!config.csv_path.empty()) {
    write_diagnostics_csv(result.trajectory.rows, config.csv_path);
    result.written_files.push_back(config.csv_path);
  }
  return result;
}

} // namespace ksdg
