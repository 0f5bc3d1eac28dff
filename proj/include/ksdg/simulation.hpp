#pragma once

#include "ksdg/fields.hpp"
#include "ksdg/mesh.hpp"
#include "ksdg/u_step.hpp"
#include "ksdg/v_step.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace ksdg {

/// Quadrature for the v^2 term of the energies. Lumped is the vertex rule
/// behind the discrete inner product of the v-step; the energy law holds for it.
enum class MassQuadrature { Lumped, Exact };

/// E(u, v) = int k0 u log u - k1 u v + k1 k2/(2 k4) |grad v|^2 + k1 k3/(2 k4) v^2,
/// with 0 log 0 = 0. The coupling term is sum_K |K| u_K (P0 v)_K.
/// Throws DomainError if u has a negative entry.
double energy(const TriMesh& mesh, const CellField& u, const NodeField& v, const ModelParams& params,
              MassQuadrature quadrature = MassQuadrature::Lumped);

/// Same as energy() with the entropy (u + eps) log(u + eps).
/// Throws DomainError if u + eps <= 0 somewhere.
double energy_eps(const TriMesh& mesh, const CellField& u, const NodeField& v, const ModelParams& params,
                  MassQuadrature quadrature = MassQuadrature::Lumped);

struct SimState {
  Index step = 0;
  double time = 0.0;
  CellField u;
  NodeField v;
  CellField mu;
};

/// Left-hand side of the discrete energy law for one accepted step:
///
///   (E_eps(new) - E_eps(old)) / dt + dt k1 k3/(2 k4) |dv|^2 + dt k1 k2/(2 k4) |grad dv|^2
///     + tau k1/k4 |dv|^2 + a(mu_new; (u_new)_+, mu_new)
///
/// where dv = (v_new - v_old)/dt and the v norms use the lumped mass.
/// Nonpositive up to round-off for any solution of the scheme.
double energy_law_lhs(const TriMesh& mesh, const SimState& old_state, const SimState& new_state,
                      const ModelParams& params);

struct DiagnosticsRow {
  Index step = 0;
  double time = 0.0;
  double mass = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double min_v = 0.0;
  double max_v = 0.0;
  double energy = 0.0;
  double energy_eps = 0.0;
  double energy_law_lhs = 0.0;
  int newton_iters = 0;
  double newton_residual = 0.0;
  /// Not part of the CSV schema.
  double clamp_magnitude = 0.0;

  bool operator==(const DiagnosticsRow&) const = default;
};

struct Snapshot {
  Index step;
  double time;
  CellField u;
  NodeField v;
};

struct Trajectory {
  std::vector<DiagnosticsRow> rows;
  std::vector<Snapshot> snapshots;
};

/// Drives the two-step scheme on a fixed mesh.
class Simulation {
public:
  Simulation(const TriMesh& mesh, const ModelParams& params, const NewtonSettings& settings = {},
             FluxMode mode = FluxMode::Truncated);

  /// Initial state from (u0, v0). For tau = 0, v0 is ignored and v is the
  /// elliptic solve with u0, so the trajectory only depends on u0.
  SimState initial_state(const CellField& u0, const NodeField& v0) const;

  /// One step: v-step with u^m, then Newton for (u^{m+1}, mu^{m+1}).
  SimState advance(const SimState& state, NewtonStats* stats = nullptr);

  DiagnosticsRow diagnostics(const SimState& state) const;
  DiagnosticsRow diagnostics(const SimState& old_state, const SimState& new_state, const NewtonStats& stats) const;

  Index num_steps() const;
  const TriMesh& mesh() const { return *mesh_; }
  const ModelParams& params() const { return params_; }

private:
  const TriMesh* mesh_;
  ModelParams params_;
  VStepSystem v_system_;
  UStepSolver u_solver_;
};

/// Thrown by simulate() when a step fails; holds everything computed before the failure.
class RunFailure : public std::runtime_error {
public:
  RunFailure(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}

  const Trajectory& partial() const { return partial_; }

private:
  Trajectory partial_;
};

struct SimulateOptions {
  NewtonSettings newton;
  FluxMode mode = FluxMode::Truncated;
  /// Snapshots are taken at the first step whose time is within dt/2 of each entry.
  std::vector<double> snapshot_times;
  /// Called after every row, including the initial one.
  std::function<void(const DiagnosticsRow&)> on_row;
  /// Called for every snapshot as soon as it is taken.
  std::function<void(const Snapshot&)> on_snapshot;
  /// Keep snapshots in the returned trajectory.
  bool keep_snapshots = true;
};

/// Runs from t = 0 to t_end = round(t_end/dt) * dt. Throws RunFailure on a failed step.
Trajectory simulate(const TriMesh& mesh, const ModelParams& params, const CellField& u0, const NodeField& v0,
                    const SimulateOptions& options = {});

} // namespace ksdg
