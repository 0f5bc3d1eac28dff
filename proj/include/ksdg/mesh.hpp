#pragma once

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace ksdg {

using Index = Eigen::Index;

/// The two structured families of right-triangle meshes.
///
/// Mesh1 splits every square of side l by one diagonal, alternating the
/// diagonal direction so that the diagonals of each 2x2 block of squares meet
/// at the block center. Mesh2 adds the center of every square and splits it
/// into four triangles (crisscross).
enum class MeshPattern { Mesh1, Mesh2 };

std::string_view to_string(MeshPattern pattern);
MeshPattern parse_mesh_pattern(std::string_view text);

struct Rectangle {
  Eigen::Vector2d lower{-0.5, -0.5};
  Eigen::Vector2d upper{0.5, 0.5};

  double width() const { return upper.x() - lower.x(); }
  double height() const { return upper.y() - lower.y(); }
  double area() const { return width() * height(); }
};

/// Edge shared by cells `left` (K) and `right` (L). `normal` points from K to L.
struct InteriorEdge {
  std::array<int, 2> vertices;
  int left;
  int right;
  double length;
  Eigen::Vector2d normal;
  /// Distance between the barycenters of K and L.
  double distance;
};

struct BoundaryEdge {
  std::array<int, 2> vertices;
  int cell;
  double length;
  /// Outward unit normal.
  Eigen::Vector2d normal;
};

enum class EdgeKind { Interior, Boundary };

struct EdgeHandle {
  EdgeKind kind;
  Index index;
};

/// Conforming triangulation with the edge data the upwind scheme needs.
/// Immutable once built.
class TriMesh {
public:
  using Points = Eigen::Matrix<double, Eigen::Dynamic, 2>;
  using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3>;

  /// Builds connectivity and geometry from raw vertices and triangles.
  /// Clockwise triangles are reoriented; degenerate ones are rejected.
  static TriMesh from_triangles(Points vertices, Triangles triangles,
                                std::optional<MeshPattern> pattern = std::nullopt,
                                double square_side = 0.0);

  Index num_vertices() const { return vertices_.rows(); }
  Index num_cells() const { return triangles_.rows(); }

  const Points& vertices() const { return vertices_; }
  const Triangles& triangles() const { return triangles_; }
  const Points& barycenters() const { return barycenters_; }
  const Eigen::VectorXd& areas() const { return areas_; }
  const std::vector<InteriorEdge>& interior_edges() const { return interior_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

  std::optional<MeshPattern> pattern() const { return pattern_; }
  /// Side length l of the generating squares (0 for hand-built meshes).
  double square_side() const { return square_side_; }

  /// Longest edge length.
  double size() const;
  double total_area() const { return areas_.sum(); }

  std::optional<EdgeHandle> find_edge(int a, int b) const;

private:
  TriMesh() = default;

  Points vertices_;
  Triangles triangles_;
  Points barycenters_;
  Eigen::VectorXd areas_;
  std::vector<InteriorEdge> interior_;
  std::vector<BoundaryEdge> boundary_;
  std::optional<MeshPattern> pattern_;
  double square_side_ = 0.0;
};

/// Tiles `domain` with squares of side width/n and triangulates them.
/// Mesh1 needs an even number of squares in both directions.
TriMesh build_structured_mesh(MeshPattern pattern, int n, const Rectangle& domain = {});

/// Barycenter distance of an interior edge. Throws DomainError for boundary edges.
double edge_distance(const TriMesh& mesh, EdgeHandle edge);

struct HypothesisReport {
  bool orthogonality_ok;
  bool acute_ok;
  /// max |cos| between barycenter segment and edge tangent.
  double orthogonality_violation;
  /// max(angle - pi/2, 0) over all triangle angles.
  double acuteness_violation;
  double max_violation;
};

inline constexpr double kHypothesisTolerance = 1e-12;

/// Checks that barycenter segments cross interior edges orthogonally and that
/// no triangle angle exceeds a right angle.
HypothesisReport verify_hypotheses(const TriMesh& mesh);

/// Plain-text dump: counts, vertices, triangles, interior edges with distances.
void write_mesh_dump(const TriMesh& mesh, std::ostream& out);

} // namespace ksdg
