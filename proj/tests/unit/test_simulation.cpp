#include "ksdg/config.hpp"
#include "ksdg/errors.hpp"
#include "ksdg/simulation.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ksdg;

namespace {

const Rectangle kUnitSquare{{0.0, 0.0}, {1.0, 1.0}};

struct Element {
  Eigen::Vector2d p[3];
  Eigen::Vector3d v;
  Eigen::Vector2d grad;
  double area;
};

Element element(const TriMesh& mesh, const NodeField& v, Index k) {
  Element e;
  for (int j = 0; j < 3; ++j) {
    e.p[j] = mesh.vertices().row(mesh.triangles()(k, j)).transpose();
    e.v(j) = v[mesh.triangles()(k, j)];
  }
  Eigen::Matrix2d m;
  m << (e.p[1] - e.p[0]).transpose(), (e.p[2] - e.p[0]).transpose();
  e.grad = m.partialPivLu().solve(Eigen::Vector2d(e.v(1) - e.v(0), e.v(2) - e.v(0)));
  e.area = 0.5 * std::abs(m.determinant());
  return e;
}

/// Energy from its definition: per-cell entropy, coupling with the exact
/// cell integral of v, constant gradient, and v^2 either by the midpoint rule
/// (exact for quadratics) or by the vertex rule.
double energy_oracle(const TriMesh& mesh, const CellField& u, const NodeField& v, const ModelParams& p, double shift,
                     bool lumped) {
  double total = 0.0;
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    const Element e = element(mesh, v, k);
    const double w = u[k] + shift;
    const double entropy = w > 0 ? w * std::log(w) : 0.0;
    const double v_integral = e.area * e.v.mean();
    double v_squared = 0.0;
    if (lumped) {
      v_squared = e.area / 3.0 * e.v.squaredNorm();
    } else {
      v_squared = oracle::midpoint_rule(e.p[0], e.p[1], e.p[2], [&](const Eigen::Vector2d& x) {
        Eigen::Matrix2d m;
        m << e.p[1] - e.p[0], e.p[2] - e.p[0];
        const Eigen::Vector2d l = m.partialPivLu().solve(x - e.p[0]);
        const double val = e.v(0) * (1 - l.sum()) + e.v(1) * l(0) + e.v(2) * l(1);
        return val * val;
      });
    }
    total += p.k0 * e.area * entropy - p.k1 * u[k] * v_integral +
             p.k1 * p.k2 / (2 * p.k4) * e.area * e.grad.squaredNorm() + p.k1 * p.k3 / (2 * p.k4) * v_squared;
  }
  return total;
}

ModelParams random_params(std::mt19937_64& rng) {
  const Eigen::VectorXd r = oracle::random_vector(rng, 5, 0.5, 2.0);
  ModelParams p;
  p.k0 = r(0);
  p.k1 = r(1);
  p.k2 = r(2);
  p.k3 = r(3);
  p.k4 = r(4);
  return p;
}

} // namespace

TEST_CASE("energy of trivial states") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 4, kUnitSquare);
  const ModelParams p;
  CHECK(energy(mesh, CellField::constant(mesh, 0), NodeField::constant(mesh, 0), p) == 0.0);
  CHECK(energy(mesh, CellField::constant(mesh, 1), NodeField::constant(mesh, 0), p) == doctest::Approx(0.0));
  CHECK(energy_eps(mesh, CellField::constant(mesh, 0), NodeField::constant(mesh, 0), p) ==
        doctest::Approx(p.eps * std::log(p.eps)).epsilon(1e-12));
  CellField negative = CellField::constant(mesh, 1);
  negative[3] = -1e-3;
  CHECK_THROWS_AS(energy(mesh, negative, NodeField::constant(mesh, 0), p), DomainError);
  negative[3] = -1.0;
  CHECK_THROWS_AS(energy_eps(mesh, negative, NodeField::constant(mesh, 0), p), DomainError);
}

TEST_CASE("energy matches a direct evaluation") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 4);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelParams p = random_params(rng);
    CellField u(oracle::random_vector(rng, mesh.num_cells(), 0, 5));
    u[0] = 0.0;
    const NodeField v(oracle::random_vector(rng, mesh.num_vertices(), 0, 5));
    for (bool lumped : {true, false}) {
      const auto q = lumped ? MassQuadrature::Lumped : MassQuadrature::Exact;
      const double ref = energy_oracle(mesh, u, v, p, 0.0, lumped);
      CHECK(energy(mesh, u, v, p, q) == doctest::Approx(ref).epsilon(1e-12));
      const double ref_eps = energy_oracle(mesh, u, v, p, p.eps, lumped);
      CHECK(energy_eps(mesh, u, v, p, q) == doctest::Approx(ref_eps).epsilon(1e-12));
    }
  }
}

TEST_CASE("regularized energy approaches the energy") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh2, 4);
  std::mt19937_64 rng(6);
  const ModelParams p;
  const CellField u(oracle::random_vector(rng, mesh.num_cells(), 0.1, 3));
  const NodeField v(oracle::random_vector(rng, mesh.num_vertices(), 0, 3));
  const double e = energy(mesh, u, v, p);
  CHECK(std::abs(energy_eps(mesh, u, v, p) - e) <= 1e-8 * std::abs(e));
}

TEST_CASE("energy law terms recomputed one by one") {
  for (int tau : {1, 0}) {
    CAPTURE(tau);
    const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 4);
    std::mt19937_64 rng(40 + tau);
    ModelParams p = random_params(rng);
    p.tau = tau;
    p.dt = 1e-3;
    Simulation sim(mesh, p);
    const CellField u0(oracle::random_vector(rng, mesh.num_cells(), 0, 4));
    const NodeField v0(oracle::random_vector(rng, mesh.num_vertices(), 0, 4));
    const SimState s0 = sim.initial_state(u0, v0);
    const SimState s1 = sim.advance(s0);

    const Eigen::VectorXd dv = (s1.v.values - s0.v.values) / p.dt;
    double mass_norm = 0.0, grad_norm = 0.0;
    for (Index k = 0; k < mesh.num_cells(); ++k) {
      const Element e = element(mesh, NodeField(dv), k);
      mass_norm += e.area / 3.0 * e.v.squaredNorm();
      Eigen::Matrix<double, 3, 2> corners;
      for (int j = 0; j < 3; ++j) corners.row(j) = e.p[j].transpose();
      grad_norm += e.v.dot(oracle::cotangent_stiffness(corners) * e.v);
    }
    const CellField up(s1.u.values.cwiseMax(0.0));
    const double expected = (energy_oracle(mesh, s1.u, s1.v, p, p.eps, true) -
                             energy_oracle(mesh, s0.u, s0.v, p, p.eps, true)) /
                                p.dt +
                            p.dt * p.k1 * p.k3 / (2 * p.k4) * mass_norm +
                            p.dt * p.k1 * p.k2 / (2 * p.k4) * grad_norm + tau * p.k1 / p.k4 * mass_norm +
                            aupw_apply(mesh, s1.mu, up, s1.mu);
    const double lhs = energy_law_lhs(mesh, s0, s1, p);
    const double scale = std::abs(energy_eps(mesh, s1.u, s1.v, p)) / p.dt;
    CHECK(std::abs(lhs - expected) <= 1e-10 * scale);
    CHECK(lhs <= 1e-8 * (1 + std::abs(energy_eps(mesh, s1.u, s1.v, p))));
  }
}

TEST_CASE("homogeneous steady state has zero energy law") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh2, 2);
  const ModelParams p;
  Simulation sim(mesh, p);
  // v = (k4/k3) u is steady for the v-step.
  const SimState s0 = sim.initial_state(CellField::constant(mesh, 2.0), NodeField::constant(mesh, 2.0));
  const SimState s1 = sim.advance(s0);
  CHECK(s1.u.values.isApproxToConstant(2.0, 1e-13));
  CHECK(s1.v.values.isApproxToConstant(2.0, 1e-13));
  CHECK(std::abs(energy_law_lhs(mesh, s0, s1, p)) <= 1e-6);
}

TEST_CASE("zero data give a constant trajectory") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 4, kUnitSquare);
  ModelParams p;
  p.t_end = 10 * p.dt;
  const Trajectory traj = simulate(mesh, p, CellField::constant(mesh, 0), NodeField::constant(mesh, 0));
  REQUIRE(traj.rows.size() == 11);
  for (const auto& row : traj.rows) {
    CHECK(row.mass == 0.0);
    CHECK(row.max_u == 0.0);
    CHECK(row.max_v == 0.0);
    CHECK(row.energy == 0.0);
    CHECK(row.energy_eps == doctest::Approx(p.eps * std::log(p.eps)).epsilon(1e-12));
    CHECK(row.energy_law_lhs == doctest::Approx(0.0));
  }
  CHECK(traj.rows.back().step == 10);
  CHECK(traj.rows.back().time == doctest::Approx(p.t_end));
}

TEST_CASE("short blow-up run keeps the structural invariants") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 16);
  const InitialData data = preset_initial_conditions("one_bulge", mesh);
  ModelParams p;
  p.t_end = 10 * p.dt;
  SimulateOptions opts;
  opts.snapshot_times = {0.0, 5e-6, 1e-5};
  int seen = 0;
  opts.on_row = [&](const DiagnosticsRow&) { ++seen; };
  const Trajectory traj = simulate(mesh, p, data.u0, data.v0, opts);
  CHECK(seen == 11);
  REQUIRE(traj.snapshots.size() == 3);
  CHECK(traj.snapshots[1].step == 5);
  CHECK(traj.snapshots[2].step == 10);

  const double m0 = traj.rows.front().mass;
  for (std::size_t i = 1; i < traj.rows.size(); ++i) {
    const auto& row = traj.rows[i];
    CHECK(std::abs(row.mass - m0) <= 1e-10 * m0);
    CHECK(row.min_u >= 0.0);
    CHECK(row.min_v >= 0.0);
    CHECK(row.energy_eps <= traj.rows[i - 1].energy_eps + 1e-8 * (1 + std::abs(row.energy_eps)));
    CHECK(row.energy_law_lhs <= 1e-8 * (1 + std::abs(row.energy_eps)));
    CHECK(row.newton_iters >= 1);
    CHECK(row.newton_iters <= 30);
  }
}

TEST_CASE("the parabolic-elliptic path ignores v0") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 8);
  const InitialData data = preset_initial_conditions("three_bulges", mesh);
  ModelParams p;
  p.tau = 0;
  p.dt = 1e-5;
  p.t_end = 5e-5;
  std::mt19937_64 rng(9);
  const Trajectory a = simulate(mesh, p, data.u0, data.v0);
  const Trajectory b = simulate(mesh, p, data.u0, NodeField(oracle::random_vector(rng, mesh.num_vertices(), 0, 9)));
  CHECK(a.rows == b.rows);
}

TEST_CASE("a failed step keeps the partial trajectory") {
  const TriMesh mesh = build_structured_mesh(MeshPattern::Mesh1, 8);
  const InitialData data = preset_initial_conditions("one_bulge", mesh);
  ModelParams p;
  p.dt = 1e-2;
  p.t_end = 5e-2;
  SimulateOptions opts;
  opts.newton.max_iters = 1;
  try {
    simulate(mesh, p, data.u0, data.v0, opts);
    FAIL("expected RunFailure");
  } catch (const RunFailure& f) {
    CHECK(f.partial().rows.size() == 1);
    CHECK(std::string(f.what()).find("step 1") != std::string::npos);
  }
}
