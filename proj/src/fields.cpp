#include "ksdg/fields.hpp"

#include "ksdg/errors.hpp"

#include <string>

namespace ksdg {

void ModelParams::validate() const {
  const double ks[] = {k0, k1, k2, k3, k4};
  for (int i = 0; i < 5; ++i) {
    if (!(ks[i] > 0.0)) throw ValidationError("k" + std::to_string(i) + " must be positive");
  }
  if (tau != 0 && tau != 1) throw ValidationError("tau must be 0 or 1");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(t_end > 0.0)) throw ValidationError("t_end must be positive");
}

void check_compatible(const TriMesh& mesh, const CellField& u) {
  if (u.size() != mesh.num_cells())
    throw DomainError("cell field has " + std::to_string(u.size()) + " values, mesh has " +
                      std::to_string(mesh.num_cells()) + " cells");
}

void check_compatible(const TriMesh& mesh, const NodeField& v) {
  if (v.size() != mesh.num_vertices())
    throw DomainError("node field has " + std::to_string(v.size()) + " values, mesh has " +
                      std::to_string(mesh.num_vertices()) + " vertices");
}

double jump(const TriMesh& mesh, const CellField& field, EdgeHandle edge) {
  if (edge.kind != EdgeKind::Interior) throw DomainError("jump is only taken across interior edges");
  check_compatible(mesh, field);
  return jump(field, mesh.interior_edges().at(static_cast<std::size_t>(edge.index)));
}

CellField project_p1_to_p0(const TriMesh& mesh, const NodeField& v) {
  check_compatible(mesh, v);
  const auto& tri = mesh.triangles();
  Eigen::VectorXd out(mesh.num_cells());
  for (Index k = 0; k < mesh.num_cells(); ++k)
    out(k) = (v[tri(k, 0)] + v[tri(k, 1)] + v[tri(k, 2)]) / 3.0;
  return CellField(std::move(out));
}

NodeField project_p0_to_p1_lumped(const TriMesh& mesh, const CellField& u) {
  check_compatible(mesh, u);
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(mesh.num_vertices());
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(mesh.num_vertices());
  const auto& tri = mesh.triangles();
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const double w = mesh.areas()(k) / 3.0;
    for (int j = 0; j < 3; ++j) {
      weighted(tri(k, j)) += w * u[k];
      weight(tri(k, j)) += w;
    }
  }
  return NodeField(weighted.cwiseQuotient(weight));
}

double integrate(const TriMesh& mesh, const CellField& u) {
  check_compatible(mesh, u);
  return mesh.areas().dot(u.values);
}

double integrate(const TriMesh& mesh, const NodeField& v) {
  return integrate(mesh, project_p1_to_p0(mesh, v));
}

} // namespace ksdg
