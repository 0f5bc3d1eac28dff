#pragma once

#include "ksdg/mesh.hpp"

#include <Eigen/Core>

namespace ksdg {

/// Piecewise-constant (P0) field: one value per triangle.
struct CellField {
  Eigen::VectorXd values;

  CellField() = default;
  explicit CellField(Eigen::VectorXd v) : values(std::move(v)) {}
  static CellField constant(const TriMesh& mesh, double c) {
    return CellField(Eigen::VectorXd::Constant(mesh.num_cells(), c));
  }

  Index size() const { return values.size(); }
  double operator[](Index k) const { return values(k); }
  double& operator[](Index k) { return values(k); }
  bool operator==(const CellField& other) const {
    return values.size() == other.values.size() && values == other.values;
  }
};

/// Continuous piecewise-linear (P1) field: one value per vertex.
struct NodeField {
  Eigen::VectorXd values;

  NodeField() = default;
  explicit NodeField(Eigen::VectorXd v) : values(std::move(v)) {}
  static NodeField constant(const TriMesh& mesh, double c) {
    return NodeField(Eigen::VectorXd::Constant(mesh.num_vertices(), c));
  }

  Index size() const { return values.size(); }
  double operator[](Index i) const { return values(i); }
  double& operator[](Index i) { return values(i); }
  bool operator==(const NodeField& other) const {
    return values.size() == other.values.size() && values == other.values;
  }
};

/// Coefficients of the Keller-Segel system
///   u_t = div(k0 grad u - k1 u grad v),  tau v_t = k2 lap v - k3 v + k4 u
/// together with the regularization and time-step controls.
struct ModelParams {
  double k0 = 1.0;
  double k1 = 1.0;
  double k2 = 1.0;
  double k3 = 1.0;
  double k4 = 1.0;
  int tau = 1;
  double eps = 1e-10;
  double dt = 1e-6;
  double t_end = 1e-4;

  /// Throws ValidationError unless every k_i > 0, tau in {0,1}, eps > 0, dt > 0, t_end > 0.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// Jump u_K - u_L across an interior edge. Throws DomainError on boundary edges.
double jump(const TriMesh& mesh, const CellField& field, EdgeHandle edge);
inline double jump(const CellField& field, const InteriorEdge& edge) {
  return field[edge.left] - field[edge.right];
}

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

/// Cell averages of a P1 field (the barycenter value).
CellField project_p1_to_p0(const TriMesh& mesh, const NodeField& v);

/// Area-weighted vertex averaging of a P0 field. Preserves constants and signs.
NodeField project_p0_to_p1_lumped(const TriMesh& mesh, const CellField& u);

/// Integral of a P0 field, sum_K |K| u_K.
double integrate(const TriMesh& mesh, const CellField& u);

/// Exact integral of a P1 field.
double integrate(const TriMesh& mesh, const NodeField& v);

void check_compatible(const TriMesh& mesh, const CellField& u);
void check_compatible(const TriMesh& mesh, const NodeField& v);

} // namespace ksdg
