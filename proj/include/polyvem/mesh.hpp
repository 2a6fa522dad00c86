#pragma once

#include "polyvem/geometry.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace polyvem {

/// Topological/structural defect in a mesh (non-ccw cycle, non-manifold edge, ...).
struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed mesh file; carries the 1-based line number of the offending line.
struct ParseError : MeshError {
  int line;
  ParseError(const std::string& msg, int line_)
      : MeshError("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct GenerationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DistortionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RefinementFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Undirected mesh edge. Identity is the vertex-index pair (a,b) with a < b,
/// never coordinates.
struct MeshEdge {
  int a = -1, b = -1;
  std::array<int, 2> elems{-1, -1};  ///< adjacent elements; elems[1] < 0 on the boundary
  bool boundary() const { return elems[1] < 0; }
};

/// Immutable polygonal mesh: vertices plus ccw simple element cycles.
/// Construction derives the unique edge set and validates:
///   - every cycle has >= 3 distinct vertex indices and positive signed area,
///   - no cycle self-intersects,
///   - every edge borders one or two elements,
///   - element areas sum to the area enclosed by the boundary loop (tiling check).
class PolygonalMesh {
 public:
  PolygonalMesh(std::vector<Point2> vertices, std::vector<std::vector<int>> elements);

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_elements() const { return static_cast<int>(elements_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const Point2& vertex(int v) const { return vertices_[v]; }
  const std::vector<int>& element(int e) const { return elements_[e]; }
  const MeshEdge& edge(int e) const { return edges_[e]; }
  /// Edge ids of element `e`; entry i is the edge from local vertex i to i+1.
  const std::vector<int>& element_edges(int e) const { return element_edges_[e]; }
  /// Edge id for the vertex pair (a,b) in either order, or -1 if absent.
  int find_edge(int a, int b) const;

  std::vector<Point2> polygon(int e) const;
  ElementGeometry geometry(int e) const { return element_geometry_from_polygon(polygon(e)); }
  double total_area() const { return total_area_; }

  void save(const std::string& path) const;
  static PolygonalMesh load(const std::string& path);

 private:
  std::vector<Point2> vertices_;
  std::vector<std::vector<int>> elements_;
  std::vector<MeshEdge> edges_;
  std::vector<std::vector<int>> element_edges_;
  std::unordered_map<std::uint64_t, int> edge_index_;
  double total_area_ = 0;

  void build_edges();
  void validate() const;
};

enum class RefineType { Type1 = 1, Type2 = 2, Type3 = 3 };

/// Two-level mesh pair produced by `refine`: the coarse mesh carries the
/// projected rot/div of the reduced-integration scheme, the fine mesh carries
/// the degrees of freedom.
struct MeshHierarchy {
  PolygonalMesh coarse;
  PolygonalMesh fine;
  RefineType refine_type;
  std::vector<int> parent_of;                         ///< fine element -> coarse element
  std::vector<std::vector<int>> children_of;          ///< coarse element -> fine elements
  std::vector<std::array<int, 2>> coarse_edge_children;  ///< coarse edge -> 2 fine edges
};

/// 2 n^2 right triangles on the unit square, all split along the same diagonal.
PolygonalMesh generate_uniform_triangulation(int n);
/// n x n axis-aligned squares on the unit square.
PolygonalMesh generate_structured_quads(int n);
/// Voronoi diagram of the given seeds clipped to the unit square (one convex
/// cell per seed, by successive half-plane clipping).
PolygonalMesh voronoi_mesh(const std::vector<Point2>& seeds);
/// Centroidal Voronoi mesh: uniform random seeds (deterministic in rng_seed)
/// relaxed by `lloyd_iters` Lloyd iterations.
PolygonalMesh generate_voronoi(int n_seeds, int lloyd_iters, std::uint64_t rng_seed);

/// Smooth interior distortion x = xi + t_c sin(2 pi xi) sin(2 pi eta) applied to
/// both coordinates; boundary vertices are fixed. Throws DistortionFailure if
/// some element inverts.
PolygonalMesh distort(const PolygonalMesh& mesh, double t_c);

/// Refine every element:
///   Type1 - connect the centroid to all edge midpoints (n-gon -> n quads);
///   Type2 - midpoint subdivision (triangle -> 4 congruent triangles; a general
///           n-gon -> n corner triangles + the midpoint n-gon);
///   Type3 - insert edge midpoints only (element count unchanged, dofs doubled).
MeshHierarchy refine(const PolygonalMesh& coarse, RefineType type);

/// Per-element shape-regularity report for the mesh assumption (C0):
/// star_ratio  = rho / h_K with rho the radius of the largest disc centered at
///               the centroid and inscribed in K (lower bound for the
///               star-shapedness radius);
/// vertex_ratio = min pairwise vertex distance / h_K.
struct QualityReport {
  std::vector<double> star_ratio;
  std::vector<double> vertex_ratio;
  double min_star_ratio = 0;
  double min_vertex_ratio = 0;
  double gamma1 = 0, gamma2 = 0;
  bool pass = false;
};
QualityReport check_c0(const PolygonalMesh& mesh, double gamma1, double gamma2);

}  // namespace polyvem
