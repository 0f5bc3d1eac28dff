#pragma once

#include "ksdg/config.hpp"
#include "ksdg/fields.hpp"
#include "ksdg/mesh.hpp"
#include "ksdg/simulation.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ksdg {

inline constexpr std::string_view kDiagnosticsHeader =
    "step,time,mass,min_u,max_u,min_v,max_v,E,E_eps,energy_law_lhs,newton_iters,newton_residual";

/// One header line plus one line per row; reals use 17 significant digits.
void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, std::ostream& out);
void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path);

/// Inverse of write_diagnostics_csv (clamp_magnitude is not stored and reads as 0).
std::vector<DiagnosticsRow> read_diagnostics_csv(std::istream& in);
std::vector<DiagnosticsRow> read_diagnostics_csv(const std::string& path);

/// Legacy ASCII VTK unstructured grid: point data `u_p1` (lumped projection of u)
/// and `v`, cell data `u_p0`.
void write_vtk_snapshot(const TriMesh& mesh, const CellField& u, const NodeField& v, std::ostream& out);
void write_vtk_snapshot(const TriMesh& mesh, const CellField& u, const NodeField& v, const std::string& path);

struct RunResult {
  Trajectory trajectory;
  std::vector<std::string> warnings;
  std::vector<std::string> written_files;
};

/// Builds the mesh and initial data from `config`, runs the scheme and writes
/// the configured CSV and VTK outputs. On a failed step the partial CSV is
/// written before RunFailure propagates.
RunResult run(const RunConfig& config, const std::function<void(const DiagnosticsRow&)>& on_row = {});

} // namespace ksdg
