#include "ksdg/simulation.hpp"

#include "ksdg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ksdg {

namespace {

// sum_K |K| |grad v|^2
double gradient_norm_sq(const TriMesh& mesh, const Eigen::VectorXd& v) {
  const auto& tri = mesh.triangles();
  const auto& p = mesh.vertices();
  double sum = 0.0;
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) {
      const int a = tri(k, (i + 1) % 3);
      const int b = tri(k, (i + 2) % 3);
      g += v(tri(k, i)) * Eigen::Vector2d(p(a, 1) - p(b, 1), p(b, 0) - p(a, 0));
    }
    const double area = mesh.areas()(k);
    sum += g.squaredNorm() / (4.0 * area);
  }
  return sum;
}

double mass_norm_sq(const TriMesh& mesh, const Eigen::VectorXd& v, MassQuadrature quadrature) {
  const auto& tri = mesh.triangles();
  double sum = 0.0;
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const double a = v(tri(k, 0));
    const double b = v(tri(k, 1));
    const double c = v(tri(k, 2));
    const double squares = a * a + b * b + c * c;
    if (quadrature == MassQuadrature::Lumped)
      sum += mesh.areas()(k) / 3.0 * squares;
    else
      sum += mesh.areas()(k) / 6.0 * (squares + a * b + b * c + c * a);
  }
  return sum;
}

double v_energy(const TriMesh& mesh, const CellField& u, const NodeField& v, const ModelParams& p,
                MassQuadrature quadrature) {
  const double coupling = mesh.areas().dot(u.values.cwiseProduct(project_p1_to_p0(mesh, v).values));
  return -p.k1 * coupling + p.k1 * p.k2 / (2.0 * p.k4) * gradient_norm_sq(mesh, v.values) +
         p.k1 * p.k3 / (2.0 * p.k4) * mass_norm_sq(mesh, v.values, quadrature);
}

double entropy(double s) { return s > 0.0 ? s * std::log(s) : 0.0; }

} // namespace

double energy(const TriMesh& mesh, const CellField& u, const NodeField& v, const ModelParams& params,
              MassQuadrature quadrature) {
  check_compatible(mesh, u);
  check_compatible(mesh, v);
  if ((u.values.array() < 0.0).any()) throw DomainError("energy needs a nonnegative density");
  double e = 0.0;
  for (Index k = 0; k < mesh.num_cells(); ++k) e += mesh.areas()(k) * entropy(u[k]);
  return params.k0 * e + v_energy(mesh, u, v, params, quadrature);
}

double energy_eps(const TriMesh& mesh, const CellField& u, const NodeField& v, const ModelParams& params,
                  MassQuadrature quadrature) {
  check_compatible(mesh, u);
  check_compatible(mesh, v);
  if (!((u.values.array() + params.eps) > 0.0).all()) throw DomainError("energy_eps needs u + eps > 0");
  double e = 0.0;
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const double s = u[k] + params.eps;
    e += mesh.areas()(k) * s * std::log(s);
  }
  return params.k0 * e + v_energy(mesh, u, v, params, quadrature);
}

double energy_law_lhs(const TriMesh& mesh, const SimState& old_state, const SimState& new_state,
                      const ModelParams& p) {
  const double dt = p.dt;
  const Eigen::VectorXd dv = (new_state.v.values - old_state.v.values) / dt;
  const double rate = (energy_eps(mesh, new_state.u, new_state.v, p) - energy_eps(mesh, old_state.u, old_state.v, p)) / dt;
  const double dv_sq = mass_norm_sq(mesh, dv, MassQuadrature::Lumped);
  const double grad_dv_sq = gradient_norm_sq(mesh, dv);
  const CellField u_pos(new_state.u.values.cwiseMax(0.0));
  const double dissipation = UpwindForm(mesh).apply(new_state.mu, u_pos, new_state.mu);
  return rate + dt * p.k1 * p.k3 / (2.0 * p.k4) * dv_sq + dt * p.k1 * p.k2 / (2.0 * p.k4) * grad_dv_sq +
         p.tau * p.k1 / p.k4 * dv_sq + dissipation;
}

Simulation::Simulation(const TriMesh& mesh, const ModelParams& params, const NewtonSettings& settings,
                       FluxMode mode)
    : mesh_(&mesh), params_(params), v_system_(assemble_v_system(mesh, params)), u_solver_(mesh, settings, mode) {}

SimState Simulation::initial_state(const CellField& u0, const NodeField& v0) const {
  check_compatible(*mesh_, u0);
  if ((u0.values.array() < 0.0).any()) throw DomainError("initial density must be nonnegative");
  SimState s;
  s.u = u0;
  if (params_.tau == 0) {
    s.v = solve_v_step(v_system_, NodeField{}, u0);
  } else {
    check_compatible(*mesh_, v0);
    if ((v0.values.array() < 0.0).any()) throw DomainError("initial chemoattractant must be nonnegative");
    s.v = v0;
  }
  s.mu = CellField(params_.k0 * (u0.values.array() + params_.eps).log() -
                   params_.k1 * project_p1_to_p0(*mesh_, s.v).values.array());
  return s;
}

SimState Simulation::advance(const SimState& state, NewtonStats* stats) {
  NodeField v_new = solve_v_step(v_system_, state.v, state.u);
  UStepResult result = u_solver_.solve(state.u, v_new, params_);
  if (stats) *stats = result.stats;
  SimState next;
  next.step = state.step + 1;
  next.time = static_cast<double>(next.step) * params_.dt;
  next.u = std::move(result.u);
  next.v = std::move(v_new);
  next.mu = std::move(result.mu);
  return next;
}

DiagnosticsRow Simulation::diagnostics(const SimState& s) const {
  DiagnosticsRow row;
  row.step = s.step;
  row.time = s.time;
  row.mass = integrate(*mesh_, s.u);
  row.min_u = s.u.values.minCoeff();
  row.max_u = s.u.values.maxCoeff();
  row.min_v = s.v.values.minCoeff();
  row.max_v = s.v.values.maxCoeff();
  row.energy = energy(*mesh_, s.u, s.v, params_);
  row.energy_eps = energy_eps(*mesh_, s.u, s.v, params_);
  return row;
}

DiagnosticsRow Simulation::diagnostics(const SimState& old_state, const SimState& new_state,
                                       const NewtonStats& stats) const {
  DiagnosticsRow row = diagnostics(new_state);
  row.energy_law_lhs = energy_law_lhs(*mesh_, old_state, new_state, params_);
  row.newton_iters = stats.iterations;
  row.newton_residual = stats.residual;
  row.clamp_magnitude = stats.clamp_magnitude;
  return row;
}

Index Simulation::num_steps() const { return static_cast<Index>(std::llround(params_.t_end / params_.dt)); }

Trajectory simulate(const TriMesh& mesh, const ModelParams& params, const CellField& u0, const NodeField& v0,
                    const SimulateOptions& options) {
  Simulation sim(mesh, params, options.newton, options.mode);
  Trajectory traj;

  std::vector<double> pending = options.snapshot_times;
  std::sort(pending.begin(), pending.end(), std::greater<>());
  auto maybe_snapshot = [&](const SimState& s) {
    bool due = false;
    while (!pending.empty() && s.time >= pending.back() - 0.5 * params.dt) {
      pending.pop_back();
      due = true;
    }
    if (!due) return;
    Snapshot snap{s.step, s.time, s.u, s.v};
    if (options.on_snapshot) options.on_snapshot(snap);
    if (options.keep_snapshots) traj.snapshots.push_back(std::move(snap));
  };
  auto record = [&](DiagnosticsRow row) {
    if (options.on_row) options.on_row(row);
    traj.rows.push_back(row);
  };

  SimState state = sim.initial_state(u0, v0);
  record(sim.diagnostics(state));
  maybe_snapshot(state);

  const Index steps = sim.num_steps();
  for (Index m = 0; m < steps; ++m) {
    NewtonStats stats;
    SimState next;
    try {
      next = sim.advance(state, &stats);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "step " << state.step + 1 << " (t = " << (state.step + 1) * params.dt << ") failed: " << e.what();
      throw RunFailure(msg.str(), std::move(traj));
    }
    record(sim.diagnostics(state, next, stats));
    state = std::move(next);
    maybe_snapshot(state);
  }
  return traj;
}

} // namespace ksdg
