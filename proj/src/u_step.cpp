#include "ksdg/u_step.hpp"

#include "ksdg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ksdg {

namespace {

double heaviside(double x) { return x > 0.0 ? 1.0 : 0.0; }

double transported(double u, FluxMode mode) { return mode == FluxMode::Truncated ? pos_part(u) : u; }

double transported_slope(double u, FluxMode mode) {
  return mode == FluxMode::Truncated ? heaviside(u) : 1.0;
}

Eigen::VectorXd transported(const Eigen::VectorXd& u, FluxMode mode) {
  if (mode == FluxMode::NonTruncated) return u;
  return u.cwiseMax(0.0);
}

bool admissible(const Eigen::VectorXd& u, double eps) { return ((u.array() + eps) > 0.0).all(); }

// Max-norm with the cell-balance rows taken in mass units (times dt). Rows
// are only rescaled, so Newton directions are unchanged.
double newton_norm(const Eigen::VectorXd& r, double dt) {
  const Index n = r.size() / 2;
  return std::max(dt * r.head(n).lpNorm<Eigen::Infinity>(), r.tail(n).lpNorm<Eigen::Infinity>());
}

// Evaluates the residual for stacked unknowns x = [u; mu].
struct ResidualContext {
  const UpwindForm& form;
  const Eigen::VectorXd& areas;
  const Eigen::VectorXd& u_old;
  Eigen::VectorXd projected_v;
  const ModelParams& params;
  FluxMode mode;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    const Index n = areas.size();
    const auto u = x.head(n);
    const CellField mu(x.tail(n));
    if (!admissible(u, params.eps)) throw DomainError("u + eps <= 0 in the logarithm of the chemical potential");
    Eigen::VectorXd r(2 * n);
    r.head(n) = areas.cwiseProduct(u - u_old) / params.dt;
    Eigen::VectorXd divergence = Eigen::VectorXd::Zero(n);
    form.accumulate_divergence(mu, transported(Eigen::VectorXd(u), mode), divergence);
    r.head(n) += divergence;
    r.tail(n) = areas.array() *
                (mu.values.array() - params.k0 * (u.array() + params.eps).log() + params.k1 * projected_v.array());
    return r;
  }

  SparseMatrix jacobian(const Eigen::VectorXd& x) const {
    const Index n = areas.size();
    const auto& left = form.left();
    const auto& right = form.right();
    const auto& w = form.weights();

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(3 * n + 8 * form.num_edges()));
    for (Index k = 0; k < n; ++k) {
      entries.emplace_back(k, k, areas(k) / params.dt);
      entries.emplace_back(n + k, n + k, areas(k));
      entries.emplace_back(n + k, k, -params.k0 * areas(k) / (x(k) + params.eps));
    }
    for (Index e = 0; e < form.num_edges(); ++e) {
      const int K = left[static_cast<std::size_t>(e)];
      const int L = right[static_cast<std::size_t>(e)];
      const double j = x(n + K) - x(n + L);
      const double d_uk = w(e) * pos_part(j) * transported_slope(x(K), mode);
      const double d_ul = -w(e) * neg_part(j) * transported_slope(x(L), mode);
      const double d_mu =
          w(e) * (heaviside(j) * transported(x(K), mode) + heaviside(-j) * transported(x(L), mode));
      // All eight entries are always inserted so the sparsity pattern never changes.
      entries.emplace_back(K, K, d_uk);
      entries.emplace_back(K, L, d_ul);
      entries.emplace_back(L, K, -d_uk);
      entries.emplace_back(L, L, -d_ul);
      entries.emplace_back(K, n + K, d_mu);
      entries.emplace_back(K, n + L, -d_mu);
      entries.emplace_back(L, n + K, -d_mu);
      entries.emplace_back(L, n + L, d_mu);
    }
    SparseMatrix jac(2 * n, 2 * n);
    jac.setFromTriplets(entries.begin(), entries.end());
    jac.makeCompressed();
    return jac;
  }
};

void check_inputs(const TriMesh& mesh, const CellField& u_new, const CellField& mu_new, const CellField& u_old,
                  const NodeField& v_new) {
  check_compatible(mesh, u_new);
  check_compatible(mesh, mu_new);
  check_compatible(mesh, u_old);
  check_compatible(mesh, v_new);
}

Eigen::VectorXd stack(const CellField& u, const CellField& mu) {
  Eigen::VectorXd x(u.size() + mu.size());
  x << u.values, mu.values;
  return x;
}

} // namespace

UpwindForm::UpwindForm(const TriMesh& mesh) : num_cells_(mesh.num_cells()) {
  const auto& edges = mesh.interior_edges();
  left_.reserve(edges.size());
  right_.reserve(edges.size());
  weight_.resize(static_cast<Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    left_.push_back(edges[e].left);
    right_.push_back(edges[e].right);
    weight_(static_cast<Index>(e)) = edges[e].length / edges[e].distance;
  }
}

Eigen::VectorXd UpwindForm::edge_fluxes(const CellField& mu, const Eigen::VectorXd& u) const {
  Eigen::VectorXd flux(num_edges());
  for (Index e = 0; e < num_edges(); ++e) {
    const int K = left_[static_cast<std::size_t>(e)];
    const int L = right_[static_cast<std::size_t>(e)];
    const double j = mu[K] - mu[L];
    flux(e) = weight_(e) * (pos_part(j) * u(K) - neg_part(j) * u(L));
  }
  return flux;
}

void UpwindForm::accumulate_divergence(const CellField& mu, const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
  for (Index e = 0; e < num_edges(); ++e) {
    const int K = left_[static_cast<std::size_t>(e)];
    const int L = right_[static_cast<std::size_t>(e)];
    const double j = mu[K] - mu[L];
    const double flux = weight_(e) * (pos_part(j) * u(K) - neg_part(j) * u(L));
    out(K) += flux;
    out(L) -= flux;
  }
}

double UpwindForm::apply(const CellField& mu, const CellField& u, const CellField& ubar) const {
  const Eigen::VectorXd flux = edge_fluxes(mu, u.values);
  double sum = 0.0;
  for (Index e = 0; e < num_edges(); ++e)
    sum += flux(e) * (ubar[left_[static_cast<std::size_t>(e)]] - ubar[right_[static_cast<std::size_t>(e)]]);
  return sum;
}

double aupw_apply(const TriMesh& mesh, const CellField& mu, const CellField& u, const CellField& ubar) {
  check_compatible(mesh, mu);
  check_compatible(mesh, u);
  check_compatible(mesh, ubar);
  return UpwindForm(mesh).apply(mu, u, ubar);
}

void NewtonSettings::validate() const {
  if (!(tol_residual > 0.0)) throw ValidationError("Newton tolerance must be positive");
  if (max_iters < 1) throw ValidationError("Newton needs at least one iteration");
  if (max_halvings < 0) throw ValidationError("max_halvings must be nonnegative");
}

Eigen::VectorXd u_step_residual(const TriMesh& mesh, const CellField& u_new, const CellField& mu_new,
                                const CellField& u_old, const NodeField& v_new, const ModelParams& params,
                                FluxMode mode) {
  check_inputs(mesh, u_new, mu_new, u_old, v_new);
  const UpwindForm form(mesh);
  const ResidualContext ctx{form, mesh.areas(), u_old.values, project_p1_to_p0(mesh, v_new).values, params, mode};
  return ctx(stack(u_new, mu_new));
}

SparseMatrix u_step_jacobian(const TriMesh& mesh, const CellField& u_new, const CellField& mu_new,
                             const CellField& u_old, const NodeField& v_new, const ModelParams& params,
                             FluxMode mode) {
  check_inputs(mesh, u_new, mu_new, u_old, v_new);
  if (!admissible(u_new.values, params.eps))
    throw DomainError("u + eps <= 0 in the logarithm of the chemical potential");
  const UpwindForm form(mesh);
  const ResidualContext ctx{form, mesh.areas(), u_old.values, project_p1_to_p0(mesh, v_new).values, params, mode};
  return ctx.jacobian(stack(u_new, mu_new));
}

UStepSolver::UStepSolver(const TriMesh& mesh, NewtonSettings settings, FluxMode mode)
    : mesh_(&mesh), settings_(settings), mode_(mode), form_(mesh) {
  settings_.validate();
}

UStepResult UStepSolver::solve(const CellField& u_old, const NodeField& v_new, const ModelParams& params) {
  const TriMesh& mesh = *mesh_;
  check_compatible(mesh, u_old);
  check_compatible(mesh, v_new);
  params.validate();
  if ((u_old.values.array() < 0.0).any()) throw DomainError("u_old must be nonnegative");

  const Index n = mesh.num_cells();
  const ResidualContext ctx{form_, mesh.areas(), u_old.values, project_p1_to_p0(mesh, v_new).values, params, mode_};

  Eigen::VectorXd x(2 * n);
  x.head(n) = u_old.values;
  x.tail(n) = params.k0 * (u_old.values.array() + params.eps).log() - params.k1 * ctx.projected_v.array();

  NewtonStats stats;
  Eigen::VectorXd r = ctx(x);
  double rnorm = newton_norm(r, params.dt);

  auto fail = [&](const std::string& why) -> StepFailure {
    stats.residual = rnorm;
    std::ostringstream msg;
    msg << "Newton failed after " << stats.iterations << " iterations (residual " << rnorm << "): " << why;
    return StepFailure(msg.str(), CellField(x.head(n)), CellField(x.tail(n)), stats);
  };

  while (rnorm > settings_.tol_residual) {
    if (stats.iterations >= settings_.max_iters) throw fail("iteration limit reached");
    ++stats.iterations;

    const SparseMatrix jac = ctx.jacobian(x);
    if (!analyzed_) {
      lu_.analyzePattern(jac);
      analyzed_ = true;
    }
    lu_.factorize(jac);
    if (lu_.info() != Eigen::Success) throw fail("singular Jacobian");
    const Eigen::VectorXd dx = lu_.solve(-r);
    if (lu_.info() != Eigen::Success || !dx.allFinite()) throw fail("linear solve failed");

    double alpha = 1.0;
    bool accepted = false;
    const int halvings = settings_.damping == Damping::Backtracking ? settings_.max_halvings : 0;
    for (int h = 0; h <= halvings; ++h, alpha *= 0.5) {
      Eigen::VectorXd trial = x + alpha * dx;
      if (!admissible(trial.head(n), params.eps)) {
        stats.halvings += h < halvings ? 1 : 0;
        continue;
      }
      Eigen::VectorXd r_trial = ctx(trial);
      const double trial_norm = newton_norm(r_trial, params.dt);
      if (settings_.damping == Damping::None || trial_norm < rnorm) {
        x = std::move(trial);
        r = std::move(r_trial);
        rnorm = trial_norm;
        accepted = true;
        break;
      }
      stats.halvings += h < halvings ? 1 : 0;
    }
    if (!accepted) throw fail("no admissible step decreased the residual");
  }
  stats.residual = rnorm;

  Eigen::VectorXd u = x.head(n);
  const double threshold = kClampTolerance * std::max(1.0, u.maxCoeff());
  const double most_negative = std::min(0.0, u.minCoeff());
  if (most_negative < -threshold) {
    std::ostringstream msg;
    msg << "converged density has a negative value " << most_negative << " beyond round-off";
    throw fail(msg.str());
  }
  stats.clamp_magnitude = -most_negative;
  u = u.cwiseMax(0.0);
  return UStepResult{CellField(std::move(u)), CellField(x.tail(n)), stats};
}

UStepResult solve_u_step(const TriMesh& mesh, const CellField& u_old, const NodeField& v_new,
                         const ModelParams& params, const NewtonSettings& settings, FluxMode mode) {
  UStepSolver solver(mesh, settings, mode);
  return solver.solve(u_old, v_new, params);
}

} // namespace ksdg
