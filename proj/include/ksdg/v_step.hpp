#pragma once

#include "ksdg/fields.hpp"
#include "ksdg/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ksdg {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Linear system for the chemoattractant update
///
///   (tau/dt + k3) M_L v^{m+1} + k2 S v^{m+1} = (tau/dt) M_L v^m + k4 B u^m
///
/// with M_L the lumped P1 mass matrix, S the P1 stiffness matrix and B the
/// exact P1 x P0 pairing (B_iK = |K|/3 for every vertex i of K).
struct VStepSystem {
  Eigen::VectorXd lumped_mass;
  SparseMatrix stiffness;
  /// vertices x cells
  SparseMatrix load;
  SparseMatrix matrix;
  ModelParams params;

  /// sum_K u_K int_K phi_i
  Eigen::VectorXd mixed_load(const CellField& u) const { return load * u.values; }
};

/// Element stiffness of the three P1 hat functions on a triangle (rows are corners).
Eigen::Matrix3d local_p1_stiffness(const Eigen::Matrix<double, 3, 2>& corners);

VStepSystem assemble_v_system(const TriMesh& mesh, const ModelParams& params);

enum class LinearSolver {
  /// Diagonally preconditioned CG to a relative residual of 1e-12.
  ConjugateGradient,
  /// Dense LDLT; meant for small meshes.
  DenseDirect,
};

inline constexpr double kVStepRelativeResidual = 1e-12;

/// Solves for v^{m+1}. With tau = 0 `v_prev` is not read and may be empty.
/// Throws SolverError if the residual target is missed.
NodeField solve_v_step(const VStepSystem& system, const NodeField& v_prev, const CellField& u_prev,
                       LinearSolver solver = LinearSolver::ConjugateGradient);

/// Right-hand side of the v-step for the given data.
Eigen::VectorXd v_step_rhs(const VStepSystem& system, const NodeField& v_prev, const CellField& u_prev);

} // namespace ksdg
