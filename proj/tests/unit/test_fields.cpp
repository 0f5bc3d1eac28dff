#include "ksdg/errors.hpp"
#include "ksdg/fields.hpp"

#include "../oracles.hpp"

#include <doctest.h>

using namespace ksdg;

namespace {
const Rectangle kUnitSquare{{0.0, 0.0}, {1.0, 1.0}};
}

TEST_CASE("jump on the two-cell mesh") {
  const TriMesh mesh = oracle::two_cell_mesh();
  const auto edge = mesh.find_edge(0, 2);
  REQUIRE(edge);
  REQUIRE(edge->kind == EdgeKind::Interior);
  const InteriorEdge& e = mesh.interior_edges()[static_cast<std::size_t>(edge->index)];

  auto field = [&](double k, double l) {
    CellField f = CellField::constant(mesh, 0.0);
    f[e.left] = k;
    f[e.right] = l;
    return f;
  };
  CHECK(jump(mesh, field(2.0, 0.5), *edge) == 1.5);
  CHECK(jump(mesh, field(3.0, 3.0), *edge) == 0.0);
  CHECK(jump(mesh, field(0.0, 1.25), *edge) == -1.25);
  CHECK(jump(field(0.0, 1.25), e) == -1.25);
  // Antisymmetric under swapping the cells.
  CHECK(jump(mesh, field(0.5, 2.0), *edge) == -jump(mesh, field(2.0, 0.5), *edge));

  const auto boundary = mesh.find_edge(0, 1);
  REQUIRE(boundary);
  CHECK_THROWS_AS(jump(mesh, field(1, 1), *boundary), DomainError);
}

TEST_CASE("positive and negative parts") {
  CHECK(pos_part(-2.0) == 0.0);
  CHECK(neg_part(-2.0) == 2.0);
  CHECK(pos_part(3.0) == 3.0);
  CHECK(neg_part(3.0) == 0.0);
  CHECK(pos_part(0.0) == 0.0);
  CHECK(neg_part(0.0) == 0.0);
  std::mt19937_64 rng(11);
  for (double x : oracle::random_vector(rng, 100, -5, 5)) CHECK(pos_part(x) - neg_part(x) == x);
}

TEST_CASE("P1 to P0 projection") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh2, 2, kUnitSquare);
  CHECK(project_p1_to_p0(mesh, NodeField::constant(mesh, 2.5)) == CellField::constant(mesh, 2.5));

  TriMesh::Points v(3, 2);
  v << 0, 0, 1, 0, 0, 1;
  TriMesh::Triangles t(1, 3);
  t << 0, 1, 2;
  const TriMesh single = TriMesh::from_triangles(v, t);
  CHECK(project_p1_to_p0(single, NodeField(Eigen::Vector3d(0, 1, 0)))[0] == doctest::Approx(1.0 / 3.0));

  // Cell average of a random P1 field by the vertex rule.
  std::mt19937_64 rng(5);
  const NodeField f(oracle::random_vector(rng, mesh.num_vertices(), -1, 1));
  const CellField avg = project_p1_to_p0(mesh, f);
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    Eigen::Vector2d p[3];
    double vals[3];
    for (int j = 0; j < 3; ++j) {
      p[j] = mesh.vertices().row(mesh.triangles()(k, j)).transpose();
      vals[j] = f[mesh.triangles()(k, j)];
    }
    // Midpoint rule on the linear interpolant, divided by the area.
    const double integral = mesh.areas()(k) / 3.0 *
                            (0.5 * (vals[0] + vals[1]) + 0.5 * (vals[1] + vals[2]) + 0.5 * (vals[2] + vals[0]));
    CHECK(avg[k] == doctest::Approx(integral / mesh.areas()(k)).epsilon(1e-14));
  }
}

TEST_CASE("P0 to P1 lumped projection") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh2, 1, kUnitSquare);
  CHECK(project_p0_to_p1_lumped(mesh, CellField::constant(mesh, 4.0)).values.isApproxToConstant(4.0, 1e-15));

  CellField u(Eigen::Vector4d(1, 2, 3, 4));
  const NodeField p = project_p0_to_p1_lumped(mesh, u);
  Index center = -1;
  for (Index i = 0; i < mesh.num_vertices(); ++i)
    if (mesh.vertices().row(i).isApprox(Eigen::RowVector2d(0.5, 0.5))) center = i;
  REQUIRE(center >= 0);
  CHECK(p[center] == doctest::Approx(2.5).epsilon(1e-15));

  const TriMesh fine = build_structured_mesh(MeshPattern::Mesh1, 4);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const CellField w(oracle::random_vector(rng, fine.num_cells(), 0, 10));
    const NodeField q = project_p0_to_p1_lumped(fine, w);
    CHECK(q.values.minCoeff() >= 0.0);
    CHECK(q.values.maxCoeff() <= w.values.maxCoeff() * (1 + 1e-15));
  }
}

TEST_CASE("integrals") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 4, kUnitSquare);
  CHECK(integrate(mesh, CellField::constant(mesh, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(integrate(mesh, CellField::constant(mesh, 0.0)) == 0.0);
  CellField indicator = CellField::constant(mesh, 0.0);
  indicator[5] = 1.0;
  CHECK(integrate(mesh, indicator) == mesh.areas()(5));

  std::mt19937_64 rng(3);
  const CellField a(oracle::random_vector(rng, mesh.num_cells(), -1, 1));
  const CellField b(oracle::random_vector(rng, mesh.num_cells(), -1, 1));
  CHECK(integrate(mesh, CellField(2.0 * a.values - 3.0 * b.values)) ==
        doctest::Approx(2.0 * integrate(mesh, a) - 3.0 * integrate(mesh, b)).epsilon(1e-13));

  // P1 integral against the edge-midpoint rule.
  const NodeField f(oracle::random_vector(rng, mesh.num_vertices(), 0, 1));
  double reference = 0.0;
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    Eigen::Vector2d p[3];
    for (int j = 0; j < 3; ++j) p[j] = mesh.vertices().row(mesh.triangles()(k, j)).transpose();
    const Eigen::Matrix2d edges = (Eigen::Matrix2d() << p[1] - p[0], p[2] - p[0]).finished();
    const Eigen::Vector3d vals(f[mesh.triangles()(k, 0)], f[mesh.triangles()(k, 1)], f[mesh.triangles()(k, 2)]);
    reference += oracle::midpoint_rule(p[0], p[1], p[2], [&](const Eigen::Vector2d& x) {
      const Eigen::Vector2d lambda = edges.partialPivLu().solve(x - p[0]);
      return vals(0) * (1 - lambda.sum()) + vals(1) * lambda(0) + vals(2) * lambda(1);
    });
  }
  CHECK(integrate(mesh, f) == doctest::Approx(reference).epsilon(1e-13));
  CHECK(integrate(mesh, f) == doctest::Approx(integrate(mesh, project_p1_to_p0(mesh, f))).epsilon(1e-13));
}

TEST_CASE("size mismatches are domain errors") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 2);
  CHECK_THROWS_AS(integrate(mesh, CellField(Eigen::VectorXd::Ones(3))), DomainError);
  CHECK_THROWS_AS(project_p1_to_p0(mesh, NodeField(Eigen::VectorXd::Ones(3))), DomainError);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.tau = 2;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.k3 = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.eps = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.dt = -1e-6;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}
