#include "ksdg/v_step.hpp"

#include "ksdg/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include <sstream>
#include <vector>

namespace ksdg {

Eigen::Matrix3d local_p1_stiffness(const Eigen::Matrix<double, 3, 2>& corners) {
  Eigen::Matrix<double, 3, 2> grads;
  for (int i = 0; i < 3; ++i) {
    const auto& p = corners.row((i + 1) % 3);
    const auto& q = corners.row((i + 2) % 3);
    grads.row(i) << p.y() - q.y(), q.x() - p.x();
  }
  const double twice_area = (corners(1, 0) - corners(0, 0)) * (corners(2, 1) - corners(0, 1)) -
                            (corners(2, 0) - corners(0, 0)) * (corners(1, 1) - corners(0, 1));
  // grad lambda_i = grads.row(i) / twice_area, integrated over |K| = twice_area / 2.
  return grads * grads.transpose() / (2.0 * std::abs(twice_area));
}

VStepSystem assemble_v_system(const TriMesh& mesh, const ModelParams& params) {
  params.validate();
  const Index nv = mesh.num_vertices();
  const Index nc = mesh.num_cells();
  const auto& tri = mesh.triangles();

  VStepSystem sys;
  sys.params = params;
  sys.lumped_mass = Eigen::VectorXd::Zero(nv);

  std::vector<Eigen::Triplet<double>> stiff;
  std::vector<Eigen::Triplet<double>> load;
  stiff.reserve(static_cast<std::size_t>(9 * nc));
  load.reserve(static_cast<std::size_t>(3 * nc));
  for (Index k = 0; k < nc; ++k) {
    Eigen::Matrix<double, 3, 2> corners;
    for (int j = 0; j < 3; ++j) corners.row(j) = mesh.vertices().row(tri(k, j));
    const Eigen::Matrix3d local = local_p1_stiffness(corners);
    const double third = mesh.areas()(k) / 3.0;
    for (int a = 0; a < 3; ++a) {
      sys.lumped_mass(tri(k, a)) += third;
      load.emplace_back(tri(k, a), k, third);
      for (int b = 0; b < 3; ++b) stiff.emplace_back(tri(k, a), tri(k, b), local(a, b));
    }
  }
  sys.stiffness.resize(nv, nv);
  sys.stiffness.setFromTriplets(stiff.begin(), stiff.end());
  sys.load.resize(nv, nc);
  sys.load.setFromTriplets(load.begin(), load.end());

  const double mass_coeff = params.tau / params.dt + params.k3;
  SparseMatrix mass(nv, nv);
  mass.reserve(Eigen::VectorXi::Constant(nv, 1));
  for (Index i = 0; i < nv; ++i) mass.insert(i, i) = mass_coeff * sys.lumped_mass(i);
  sys.matrix = params.k2 * sys.stiffness + mass;
  sys.matrix.makeCompressed();
  return sys;
}

Eigen::VectorXd v_step_rhs(const VStepSystem& system, const NodeField& v_prev, const CellField& u_prev) {
  const auto& p = system.params;
  if (u_prev.size() != system.load.cols()) throw DomainError("u_prev does not match the v-step system");
  Eigen::VectorXd rhs = p.k4 * system.mixed_load(u_prev);
  if (p.tau != 0) {
    if (v_prev.size() != system.lumped_mass.size())
      throw DomainError("v_prev does not match the v-step system");
    rhs += (p.tau / p.dt) * system.lumped_mass.cwiseProduct(v_prev.values);
  }
  return rhs;
}

NodeField solve_v_step(const VStepSystem& system, const NodeField& v_prev, const CellField& u_prev,
                       LinearSolver solver) {
  const Eigen::VectorXd rhs = v_step_rhs(system, v_prev, u_prev);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return NodeField(Eigen::VectorXd::Zero(rhs.size()));

  Eigen::VectorXd v;
  if (solver == LinearSolver::DenseDirect) {
    v = Eigen::MatrixXd(system.matrix).ldlt().solve(rhs);
  } else {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg(system.matrix);
    cg.setTolerance(kVStepRelativeResidual);
    if (system.params.tau != 0)
      v = cg.solveWithGuess(rhs, v_prev.values);
    else
      v = cg.solve(rhs);
    // The recurrence residual drifts from the true one; restart from the iterate.
    for (int restart = 0; restart < 3; ++restart) {
      if ((rhs - system.matrix * v).norm() <= kVStepRelativeResidual * rhs_norm) break;
      v = cg.solveWithGuess(rhs, v);
    }
  }

  const double residual = (rhs - system.matrix * v).norm() / rhs_norm;
  if (!(residual <= kVStepRelativeResidual)) {
    std::ostringstream msg;
    msg << "v-step solve did not converge: relative residual " << residual;
    throw SolverError(msg.str(), residual);
  }
  return NodeField(std::move(v));
}

} // namespace ksdg
