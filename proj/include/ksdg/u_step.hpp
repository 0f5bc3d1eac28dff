#pragma once

#include "ksdg/fields.hpp"
#include "ksdg/mesh.hpp"
#include "ksdg/v_step.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <stdexcept>
#include <string>
#include <vector>

namespace ksdg {

/// Whether the transported density in the upwind flux is truncated to (u)_+.
enum class FluxMode { Truncated, NonTruncated };

/// Upwind form for P0 trial and test functions:
///
///   a(mu; u, ubar) = sum_e |e|/D_e ( [mu]_+ u_K - [mu]_- u_L ) [ubar]
///
/// The volume term (grad mu . grad ubar) u of the general form vanishes
/// identically on P0, so only the interior-edge sum remains.
class UpwindForm {
public:
  explicit UpwindForm(const TriMesh& mesh);

  Index num_cells() const { return num_cells_; }
  Index num_edges() const { return static_cast<Index>(left_.size()); }

  /// Upwind flux leaving K through each interior edge (already scaled by |e|/D_e).
  /// `u` is used as given; truncate beforehand if needed.
  Eigen::VectorXd edge_fluxes(const CellField& mu, const Eigen::VectorXd& u) const;

  /// a(mu; u, ubar).
  double apply(const CellField& mu, const CellField& u, const CellField& ubar) const;

  /// out_K += sum of fluxes leaving K; i.e. a(mu; u, 1_K) for every K.
  void accumulate_divergence(const CellField& mu, const Eigen::VectorXd& u, Eigen::VectorXd& out) const;

  const std::vector<int>& left() const { return left_; }
  const std::vector<int>& right() const { return right_; }
  /// |e| / D_e
  const Eigen::VectorXd& weights() const { return weight_; }

private:
  Index num_cells_;
  std::vector<int> left_;
  std::vector<int> right_;
  Eigen::VectorXd weight_;
};

/// a(mu; u, ubar) on `mesh`. Throws DomainError when a field does not match the mesh.
double aupw_apply(const TriMesh& mesh, const CellField& mu, const CellField& u, const CellField& ubar);

enum class Damping { None, Backtracking };

struct NewtonSettings {
  /// Absolute tolerance on the max-norm of the residual, with the cell-balance
  /// rows multiplied by dt (both blocks then scale like |K| times a density).
  double tol_residual = 1e-10;
  int max_iters = 30;
  Damping damping = Damping::Backtracking;
  int max_halvings = 10;

  void validate() const;
  bool operator==(const NewtonSettings&) const = default;
};

/// Residual of the coupled (u, mu) system, unknowns ordered [u; mu]:
///
///   R_K       = |K| (u_K - u_old_K) / dt + a(mu; T(u), 1_K)
///   R_{N + K} = |K| (mu_K - k0 log(u_K + eps) + k1 (P0 v)_K)
///
/// with T(u) = (u)_+ for the truncated scheme. Throws DomainError if u + eps <= 0.
Eigen::VectorXd u_step_residual(const TriMesh& mesh, const CellField& u_new, const CellField& mu_new,
                                const CellField& u_old, const NodeField& v_new, const ModelParams& params,
                                FluxMode mode = FluxMode::Truncated);

/// Exact Jacobian of u_step_residual. Derivatives at kinks are taken as 0:
/// d(u)_+/du at u = 0 and d[mu]_+/d[mu] at [mu] = 0.
SparseMatrix u_step_jacobian(const TriMesh& mesh, const CellField& u_new, const CellField& mu_new,
                             const CellField& u_old, const NodeField& v_new, const ModelParams& params,
                             FluxMode mode = FluxMode::Truncated);

struct NewtonStats {
  int iterations = 0;
  double residual = 0.0;
  int halvings = 0;
  /// Largest negative round-off set to zero after convergence.
  double clamp_magnitude = 0.0;
};

struct UStepResult {
  CellField u;
  CellField mu;
  NewtonStats stats;
};

/// Newton failed; carries the last iterate so the caller can inspect or retry.
class StepFailure : public std::runtime_error {
public:
  StepFailure(const std::string& what, CellField u, CellField mu, NewtonStats stats)
      : std::runtime_error(what), u_(std::move(u)), mu_(std::move(mu)), stats_(stats) {}

  const CellField& last_u() const { return u_; }
  const CellField& last_mu() const { return mu_; }
  const NewtonStats& stats() const { return stats_; }

private:
  CellField u_;
  CellField mu_;
  NewtonStats stats_;
};

/// Negative values of u above -kClampTolerance * max(1, max u) are round-off
/// and get set to zero after Newton converges; anything below rejects the step.
inline constexpr double kClampTolerance = 1e-13;

/// Reusable Newton solver for one mesh; keeps the sparsity analysis of the Jacobian.
class UStepSolver {
public:
  UStepSolver(const TriMesh& mesh, NewtonSettings settings = {}, FluxMode mode = FluxMode::Truncated);

  /// Solves for (u^{m+1}, mu^{m+1}) starting from (u_old, mu(u_old)).
  /// Throws StepFailure when Newton does not converge.
  UStepResult solve(const CellField& u_old, const NodeField& v_new, const ModelParams& params);

  const NewtonSettings& settings() const { return settings_; }
  FluxMode mode() const { return mode_; }

private:
  const TriMesh* mesh_;
  NewtonSettings settings_;
  FluxMode mode_;
  UpwindForm form_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

UStepResult solve_u_step(const TriMesh& mesh, const CellField& u_old, const NodeField& v_new,
                         const ModelParams& params, const NewtonSettings& settings = {},
                         FluxMode mode = FluxMode::Truncated);

} // namespace ksdg
