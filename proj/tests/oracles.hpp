#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code path it is used to check.

#include "ksdg/mesh.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace ksdg::oracle {

/// Barycenter distance of the structured families: 2 l^2 / (3|e|) on Mesh1,
/// l^2 / (3|e|) on Mesh2.
inline double closed_form_distance(const TriMesh& mesh, const InteriorEdge& e) {
  const double l = mesh.square_side();
  const double factor = *mesh.pattern() == MeshPattern::Mesh1 ? 2.0 : 1.0;
  return factor * l * l / (3.0 * e.length);
}

/// Element stiffness by the cotangent formula: S_ij = -(cot theta_k)/2 for the
/// angle theta_k opposite edge ij; diagonal from zero row sums.
inline Eigen::Matrix3d cotangent_stiffness(const Eigen::Matrix<double, 3, 2>& p) {
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3;
    const int j = (k + 2) % 3;
    const Eigen::Vector2d a = (p.row(i) - p.row(k)).transpose();
    const Eigen::Vector2d b = (p.row(j) - p.row(k)).transpose();
    const double cot = a.dot(b) / std::abs(a.x() * b.y() - a.y() * b.x());
    s(i, j) = s(j, i) = -0.5 * cot;
  }
  for (int i = 0; i < 3; ++i) s(i, i) = -(s.row(i).sum() - s(i, i));
  return s;
}

/// Dense assembly of the v-step matrix and right-hand side, then LU.
inline Eigen::VectorXd dense_v_step(const TriMesh& mesh, const Eigen::VectorXd& v_prev,
                                    const Eigen::VectorXd& u_prev, double k2, double k3, double k4, int tau,
                                    double dt) {
  const Index nv = mesh.num_vertices();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nv, nv);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv);
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    Eigen::Matrix<double, 3, 2> p;
    for (int j = 0; j < 3; ++j) p.row(j) = mesh.vertices().row(mesh.triangles()(k, j));
    const Eigen::Matrix3d s = cotangent_stiffness(p);
    const double area = 0.5 * std::abs((p(1, 0) - p(0, 0)) * (p(2, 1) - p(0, 1)) -
                                       (p(2, 0) - p(0, 0)) * (p(1, 1) - p(0, 1)));
    for (int i = 0; i < 3; ++i) {
      const Index gi = mesh.triangles()(k, i);
      for (int j = 0; j < 3; ++j) a(gi, mesh.triangles()(k, j)) += k2 * s(i, j);
      a(gi, gi) += (tau / dt + k3) * area / 3.0;
      rhs(gi) += k4 * u_prev(k) * area / 3.0 + (tau / dt) * area / 3.0 * (tau ? v_prev(gi) : 0.0);
    }
  }
  return a.partialPivLu().solve(rhs);
}

/// Integral of f over a triangle with the edge-midpoint rule (exact for quadratics).
template <class F>
double midpoint_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c, F&& f) {
  const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (c - a).x() * (b - a).y());
  const Eigen::Vector2d m1 = 0.5 * (a + b), m2 = 0.5 * (b + c), m3 = 0.5 * (c + a);
  return area / 3.0 * (f(m1) + f(m2) + f(m3));
}

/// Unit square split by its (0,0)-(1,1) diagonal: two cells sharing one edge
/// with |e| = sqrt(2) and D_e = sqrt(2)/3.
inline TriMesh two_cell_mesh() {
  TriMesh::Points v(4, 2);
  v << 0, 0, 1, 0, 1, 1, 0, 1;
  TriMesh::Triangles t(2, 3);
  t << 0, 1, 2, 0, 2, 3;
  return TriMesh::from_triangles(v, t);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Index n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) x(i) = dist(rng);
  return x;
}

} // namespace ksdg::oracle
