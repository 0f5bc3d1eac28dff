#include "ksdg/mesh.hpp"

#include "ksdg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <tuple>

namespace ksdg {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

Eigen::Vector2d vertex(const TriMesh::Points& v, int i) { return v.row(i).transpose(); }

} // namespace

std::string_view to_string(MeshPattern pattern) {
  return pattern == MeshPattern::Mesh1 ? "Mesh1" : "Mesh2";
}

MeshPattern parse_mesh_pattern(std::string_view text) {
  if (text == "Mesh1" || text == "mesh1" || text == "1") return MeshPattern::Mesh1;
  if (text == "Mesh2" || text == "mesh2" || text == "2") return MeshPattern::Mesh2;
  throw ValidationError("unknown mesh pattern '" + std::string(text) + "' (expected Mesh1 or Mesh2)");
}

TriMesh TriMesh::from_triangles(Points vertices, Triangles triangles,
                                std::optional<MeshPattern> pattern, double square_side) {
  TriMesh mesh;
  const Index nc = triangles.rows();
  const Index nv = vertices.rows();
  if (nc == 0) throw ValidationError("mesh has no triangles");

  mesh.barycenters_.resize(nc, 2);
  mesh.areas_.resize(nc);
  for (Index k = 0; k < nc; ++k) {
    for (int j = 0; j < 3; ++j) {
      if (triangles(k, j) < 0 || triangles(k, j) >= nv)
        throw ValidationError("triangle " + std::to_string(k) + " references a missing vertex");
    }
    Eigen::Vector2d a = vertex(vertices, triangles(k, 0));
    Eigen::Vector2d b = vertex(vertices, triangles(k, 1));
    Eigen::Vector2d c = vertex(vertices, triangles(k, 2));
    double twice_area = cross(b - a, c - a);
    if (twice_area < 0) {
      std::swap(triangles(k, 1), triangles(k, 2));
      std::swap(b, c);
      twice_area = -twice_area;
    }
    if (!(twice_area > 0))
      throw ValidationError("triangle " + std::to_string(k) + " is degenerate");
    mesh.areas_(k) = 0.5 * twice_area;
    mesh.barycenters_.row(k) = ((a + b + c) / 3.0).transpose();
  }

  // (min vertex, max vertex, cell, local vertex opposite the edge)
  std::vector<std::tuple<int, int, int, int>> half_edges;
  half_edges.reserve(static_cast<std::size_t>(3 * nc));
  for (Index k = 0; k < nc; ++k) {
    for (int j = 0; j < 3; ++j) {
      const int a = triangles(k, (j + 1) % 3);
      const int b = triangles(k, (j + 2) % 3);
      half_edges.emplace_back(std::min(a, b), std::max(a, b), static_cast<int>(k), j);
    }
  }
  std::sort(half_edges.begin(), half_edges.end());

  for (std::size_t i = 0; i < half_edges.size();) {
    const auto [a, b, cell, local] = half_edges[i];
    const Eigen::Vector2d pa = vertex(vertices, a);
    const Eigen::Vector2d pb = vertex(vertices, b);
    const Eigen::Vector2d tangent = pb - pa;
    const double length = tangent.norm();
    Eigen::Vector2d normal(tangent.y() / length, -tangent.x() / length);

    std::size_t j = i + 1;
    while (j < half_edges.size() && std::get<0>(half_edges[j]) == a && std::get<1>(half_edges[j]) == b) ++j;
    const std::size_t count = j - i;
    if (count > 2) throw ValidationError("edge shared by more than two triangles");

    if (count == 1) {
      const Eigen::Vector2d opposite = vertex(vertices, triangles(cell, local));
      if (normal.dot(pa - opposite) < 0) normal = -normal;
      mesh.boundary_.push_back(BoundaryEdge{{a, b}, cell, length, normal});
    } else {
      // K is the cell with the smaller index; the normal leaves K.
      const int k = std::min(cell, std::get<2>(half_edges[i + 1]));
      const int l = std::max(cell, std::get<2>(half_edges[i + 1]));
      const int local_k = k == cell ? local : std::get<3>(half_edges[i + 1]);
      const Eigen::Vector2d opposite = vertex(vertices, triangles(k, local_k));
      if (normal.dot(pa - opposite) < 0) normal = -normal;
      const double distance = (mesh.barycenters_.row(l) - mesh.barycenters_.row(k)).norm();
      mesh.interior_.push_back(InteriorEdge{{a, b}, k, l, length, normal, distance});
    }
    i = j;
  }

  mesh.vertices_ = std::move(vertices);
  mesh.triangles_ = std::move(triangles);
  mesh.pattern_ = pattern;
  mesh.square_side_ = square_side;
  return mesh;
}

double TriMesh::size() const {
  double h = 0.0;
  for (const auto& e : interior_) h = std::max(h, e.length);
  for (const auto& e : boundary_) h = std::max(h, e.length);
  return h;
}

std::optional<EdgeHandle> TriMesh::find_edge(int a, int b) const {
  const auto key = std::array<int, 2>{std::min(a, b), std::max(a, b)};
  // Both lists are sorted by vertex pair.
  auto by_vertices = [](const auto& e, const std::array<int, 2>& k) { return e.vertices < k; };
  auto it = std::lower_bound(interior_.begin(), interior_.end(), key, by_vertices);
  if (it != interior_.end() && it->vertices == key)
    return EdgeHandle{EdgeKind::Interior, it - interior_.begin()};
  auto jt = std::lower_bound(boundary_.begin(), boundary_.end(), key, by_vertices);
  if (jt != boundary_.end() && jt->vertices == key)
    return EdgeHandle{EdgeKind::Boundary, jt - boundary_.begin()};
  return std::nullopt;
}

TriMesh build_structured_mesh(MeshPattern pattern, int n, const Rectangle& domain) {
  if (!(domain.width() > 0) || !(domain.height() > 0))
    throw ValidationError("domain must have positive area");
  if (pattern == MeshPattern::Mesh1 && (n < 2 || n % 2 != 0))
    throw ValidationError("Mesh1 tiles 2x2 blocks of squares: n must be even and >= 2, got " +
                          std::to_string(n));
  if (n < 1) throw ValidationError("n must be positive");

  const int nx = n;
  const double l = domain.width() / nx;
  const int ny = static_cast<int>(std::lround(domain.height() / l));
  if (ny < 1 || std::abs(ny * l - domain.height()) > 1e-12 * domain.height())
    throw ValidationError("domain height is not a whole number of squares of side width/n");
  if (pattern == MeshPattern::Mesh1 && ny % 2 != 0)
    throw ValidationError("Mesh1 needs an even number of squares along y");

  const int grid_vertices = (nx + 1) * (ny + 1);
  const int centers = pattern == MeshPattern::Mesh2 ? nx * ny : 0;
  TriMesh::Points vertices(grid_vertices + centers, 2);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      vertices.row(i + j * (nx + 1)) << domain.lower.x() + i * l, domain.lower.y() + j * l;
    }
  }

  const int per_square = pattern == MeshPattern::Mesh1 ? 2 : 4;
  TriMesh::Triangles triangles(static_cast<Index>(nx) * ny * per_square, 3);
  int t = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = i + j * (nx + 1);
      const int b = a + 1;
      const int c = b + nx + 1;
      const int d = a + nx + 1;
      if (pattern == MeshPattern::Mesh1) {
        if ((i + j) % 2 == 0) {
          triangles.row(t++) << a, b, c;
          triangles.row(t++) << a, c, d;
        } else {
          triangles.row(t++) << a, b, d;
          triangles.row(t++) << b, c, d;
        }
      } else {
        const int m = grid_vertices + i + j * nx;
        vertices.row(m) << domain.lower.x() + (i + 0.5) * l, domain.lower.y() + (j + 0.5) * l;
        triangles.row(t++) << a, b, m;
        triangles.row(t++) << b, c, m;
        triangles.row(t++) << c, d, m;
        triangles.row(t++) << d, a, m;
      }
    }
  }
  return TriMesh::from_triangles(std::move(vertices), std::move(triangles), pattern, l);
}

double edge_distance(const TriMesh& mesh, EdgeHandle edge) {
  if (edge.kind != EdgeKind::Interior)
    throw DomainError("barycenter distance is only defined for interior edges");
  return mesh.interior_edges().at(static_cast<std::size_t>(edge.index)).distance;
}

HypothesisReport verify_hypotheses(const TriMesh& mesh) {
  HypothesisReport report{true, true, 0.0, 0.0, 0.0};
  const auto& bc = mesh.barycenters();
  for (const auto& e : mesh.interior_edges()) {
    const Eigen::Vector2d tangent =
        (vertex(mesh.vertices(), e.vertices[1]) - vertex(mesh.vertices(), e.vertices[0])) / e.length;
    const Eigen::Vector2d link = (bc.row(e.right) - bc.row(e.left)).transpose();
    const double violation = std::abs(link.dot(tangent)) / link.norm();
    report.orthogonality_violation = std::max(report.orthogonality_violation, violation);
  }
  const auto& tri = mesh.triangles();
  for (Index k = 0; k < mesh.num_cells(); ++k) {
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector2d p = vertex(mesh.vertices(), tri(k, j));
      const Eigen::Vector2d q = vertex(mesh.vertices(), tri(k, (j + 1) % 3));
      const Eigen::Vector2d r = vertex(mesh.vertices(), tri(k, (j + 2) % 3));
      const double angle = std::atan2(std::abs(cross(q - p, r - p)), (q - p).dot(r - p));
      report.acuteness_violation =
          std::max(report.acuteness_violation, angle - std::numbers::pi / 2);
    }
  }
  report.orthogonality_ok = report.orthogonality_violation <= kHypothesisTolerance;
  report.acute_ok = report.acuteness_violation <= kHypothesisTolerance;
  report.max_violation = std::max(report.orthogonality_violation, report.acuteness_violation);
  return report;
}

void write_mesh_dump(const TriMesh& mesh, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "vertices " << mesh.num_vertices() << '\n';
  for (Index i = 0; i < mesh.num_vertices(); ++i)
    out << mesh.vertices()(i, 0) << ' ' << mesh.vertices()(i, 1) << '\n';
  out << "triangles " << mesh.num_cells() << '\n';
  for (Index k = 0; k < mesh.num_cells(); ++k)
    out << mesh.triangles()(k, 0) << ' ' << mesh.triangles()(k, 1) << ' ' << mesh.triangles()(k, 2) << '\n';
  out << "interior_edges " << mesh.interior_edges().size() << '\n';
  for (const auto& e : mesh.interior_edges())
    out << e.vertices[0] << ' ' << e.vertices[1] << ' ' << e.left << ' ' << e.right << ' ' << e.length
        << ' ' << e.distance << '\n';
  out << "boundary_edges " << mesh.boundary_edges().size() << '\n';
  for (const auto& e : mesh.boundary_edges())
    out << e.vertices[0] << ' ' << e.vertices[1] << ' ' << e.cell << ' ' << e.length << '\n';
  out.precision(old_precision);
}

} // namespace ksdg
