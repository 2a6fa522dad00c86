#include "polyvem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace polyvem {

namespace {

inline double cross(const Point2& u, const Point2& v) { return u.x() * v.y() - u.y() * v.x(); }

inline int orient_sign(const Point2& a, const Point2& b, const Point2& c) {
  const double d = cross(b - a, c - a);
  return (d > 0) - (d < 0);
}

inline bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

// Proper or improper intersection of closed segments [p1,q1] and [p2,q2].
bool segments_intersect(const Point2& p1, const Point2& q1, const Point2& p2, const Point2& q2) {
  const int o1 = orient_sign(p1, q1, p2);
  const int o2 = orient_sign(p1, q1, q2);
  const int o3 = orient_sign(p2, q2, p1);
  const int o4 = orient_sign(p2, q2, q1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, q1, p2)) return true;
  if (o2 == 0 && on_segment(p1, q1, q2)) return true;
  if (o3 == 0 && on_segment(p2, q2, p1)) return true;
  if (o4 == 0 && on_segment(p2, q2, q1)) return true;
  return false;
}

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

PolygonalMesh::PolygonalMesh(std::vector<Point2> vertices, std::vector<std::vector<int>> elements)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
  validate();
  build_edges();

  // Tiling check: the directed boundary edges must close into a single ccw
  // loop (the domains here are simply connected) whose enclosed area equals
  // the element-area sum; overlaps and inversions break that cancellation.
  double area_sum = 0;
  double boundary_area2 = 0;
  std::unordered_map<int, std::array<int, 2>> boundary_next;  // start vertex -> end vertex, count
  for (int e = 0; e < n_elements(); e++) {
    const std::vector<int>& cyc = elements_[e];
    const int k = static_cast<int>(cyc.size());
    double a2 = 0;
    for (int i = 0; i < k; i++) {
      const Point2& p = vertices_[cyc[i]];
      const Point2& q = vertices_[cyc[(i + 1) % k]];
      a2 += cross(p, q);
      if (edges_[element_edges_[e][i]].boundary()) {
        boundary_area2 += cross(p, q);
        auto [it, inserted] = boundary_next.try_emplace(cyc[i], std::array<int, 2>{cyc[(i + 1) % k], 1});
        if (!inserted) it->second[1]++;
      }
    }
    area_sum += 0.5 * a2;
  }
  total_area_ = area_sum;
  if (!boundary_next.empty()) {
    for (const auto& [v, succ] : boundary_next)
      if (succ[1] != 1)
        throw MeshError("boundary vertex " + std::to_string(v) + " is a pinch point");
    const int start = boundary_next.begin()->first;
    int walk = start;
    size_t steps = 0;
    do {
      walk = boundary_next.at(walk)[0];
      steps++;
    } while (walk != start && steps <= boundary_next.size());
    if (steps != boundary_next.size())
      throw MeshError("mesh boundary is not a single closed loop");
  }
  if (std::abs(area_sum - 0.5 * boundary_area2) > 1e-10 * area_sum)
    throw MeshError("mesh does not tile its boundary loop: element areas sum to " +
                    std::to_string(area_sum) + ", boundary loop encloses " +
                    std::to_string(0.5 * boundary_area2));
}

void PolygonalMesh::validate() const {
  const int nv = n_vertices();
  for (int e = 0; e < n_elements(); e++) {
    const std::vector<int>& cyc = elements_[e];
    const int k = static_cast<int>(cyc.size());
    if (k < 3) throw MeshError("element " + std::to_string(e) + " has fewer than 3 vertices");
    for (int v : cyc)
      if (v < 0 || v >= nv)
        throw MeshError("element " + std::to_string(e) + " references invalid vertex " +
                        std::to_string(v));
    for (int i = 0; i < k; i++)
      for (int j = i + 1; j < k; j++)
        if (cyc[i] == cyc[j])
          throw MeshError("element " + std::to_string(e) + " repeats vertex " +
                          std::to_string(cyc[i]) + " in its cycle");
    std::vector<Point2> poly;
    poly.reserve(k);
    for (int v : cyc) poly.push_back(vertices_[v]);
    if (!(polygon_signed_area(poly) > 0))
      throw MeshError("element " + std::to_string(e) + " is not ccw with positive area");
    // Simplicity: non-adjacent edges of the cycle must not meet.
    for (int i = 0; i < k; i++) {
      for (int j = i + 2; j < k; j++) {
        if (i == 0 && j == k - 1) continue;  // adjacent around the wrap
        if (segments_intersect(poly[i], poly[(i + 1) % k], poly[j], poly[(j + 1) % k]))
          throw MeshError("element " + std::to_string(e) + " has a self-intersecting cycle");
      }
    }
  }
}

void PolygonalMesh::build_edges() {
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(4 * elements_.size());
  element_edges_.resize(elements_.size());
  for (int e = 0; e < n_elements(); e++) {
    const std::vector<int>& cyc = elements_[e];
    const int k = static_cast<int>(cyc.size());
    element_edges_[e].resize(k);
    for (int i = 0; i < k; i++) {
      const int a = cyc[i], b = cyc[(i + 1) % k];
      auto [it, inserted] = index.try_emplace(edge_key(a, b), n_edges());
      if (inserted) {
        MeshEdge me;
        me.a = std::min(a, b);
        me.b = std::max(a, b);
        me.elems = {e, -1};
        edges_.push_back(me);
      } else {
        MeshEdge& me = edges_[it->second];
        if (me.elems[1] >= 0)
          throw MeshError("edge (" + std::to_string(me.a) + "," + std::to_string(me.b) +
                          ") borders more than two elements");
        if (me.elems[0] == e)
          throw MeshError("element " + std::to_string(e) + " traverses an edge twice");
        me.elems[1] = e;
      }
      element_edges_[e][i] = it->second;
    }
  }
  edge_index_ = std::move(index);
}

int PolygonalMesh::find_edge(int a, int b) const {
  auto it = edge_index_.find(edge_key(a, b));
  return it == edge_index_.end() ? -1 : it->second;
}

std::vector<Point2> PolygonalMesh::polygon(int e) const {
  std::vector<Point2> poly;
  poly.reserve(elements_[e].size());
  for (int v : elements_[e]) poly.push_back(vertices_[v]);
  return poly;
}

void PolygonalMesh::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path + "' for writing");
  out << "vmesh 1\n" << n_vertices() << " " << n_elements() << "\n";
  char buf[64];
  for (const Point2& v : vertices_) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
    out << buf;
  }
  for (const std::vector<int>& cyc : elements_) {
    out << cyc.size();
    for (int v : cyc) out << " " << v;
    out << "\n";
  }
  if (!out) throw MeshError("write to '" + path + "' failed");
}

namespace {

// Returns the next content line (comments after '#' stripped, blanks skipped);
// false at end of file. `lineno` tracks the 1-based physical line.
bool next_content_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    lineno++;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

PolygonalMesh PolygonalMesh::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open '" + path + "'");
  std::string line;
  int lineno = 0;

  if (!next_content_line(in, line, lineno)) throw ParseError("missing 'vmesh 1' header", lineno);
  {
    std::istringstream ss(line);
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "vmesh" || version != 1)
      throw ParseError("expected 'vmesh 1' header, got '" + line + "'", lineno);
  }

  int nv = 0, ne = 0;
  if (!next_content_line(in, line, lineno)) throw ParseError("missing vertex/element counts", lineno);
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> ne) || nv < 3 || ne < 1)
      throw ParseError("invalid vertex/element counts '" + line + "'", lineno);
  }

  std::vector<Point2> verts(nv);
  for (int i = 0; i < nv; i++) {
    if (!next_content_line(in, line, lineno))
      throw ParseError("expected vertex " + std::to_string(i), lineno);
    std::istringstream ss(line);
    double x, y;
    if (!(ss >> x >> y)) throw ParseError("invalid vertex line '" + line + "'", lineno);
    verts[i] = Point2(x, y);
  }

  std::vector<std::vector<int>> elems(ne);
  for (int i = 0; i < ne; i++) {
    if (!next_content_line(in, line, lineno))
      throw ParseError("expected element " + std::to_string(i), lineno);
    std::istringstream ss(line);
    int k = 0;
    if (!(ss >> k) || k < 3) throw ParseError("invalid element size in '" + line + "'", lineno);
    elems[i].resize(k);
    for (int j = 0; j < k; j++)
      if (!(ss >> elems[i][j]))
        throw ParseError("element " + std::to_string(i) + " expects " + std::to_string(k) +
                             " vertex ids",
                         lineno);
  }

  return PolygonalMesh(std::move(verts), std::move(elems));
}

PolygonalMesh generate_uniform_triangulation(int n) {
  if (n < 1) throw std::invalid_argument("generate_uniform_triangulation: n must be >= 1");
  std::vector<Point2> verts;
  verts.reserve(static_cast<size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; j++)
    for (int i = 0; i <= n; i++)
      verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  std::vector<std::vector<int>> elems;
  elems.reserve(2 * static_cast<size_t>(n) * n);
  for (int j = 0; j < n; j++) {
    for (int i = 0; i < n; i++) {
      const int v00 = j * (n + 1) + i, v10 = v00 + 1;
      const int v01 = v00 + (n + 1), v11 = v01 + 1;
      elems.push_back({v00, v10, v11});  // split along the (v00,v11) diagonal
      elems.push_back({v00, v11, v01});
    }
  }
  return PolygonalMesh(std::move(verts), std::move(elems));
}

PolygonalMesh generate_structured_quads(int n) {
  if (n < 1) throw std::invalid_argument("generate_structured_quads: n must be >= 1");
  std::vector<Point2> verts;
  verts.reserve(static_cast<size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; j++)
    for (int i = 0; i <= n; i++)
      verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  std::vector<std::vector<int>> elems;
  elems.reserve(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; j++) {
    for (int i = 0; i < n; i++) {
      const int v00 = j * (n + 1) + i, v10 = v00 + 1;
      const int v01 = v00 + (n + 1), v11 = v01 + 1;
      elems.push_back({v00, v10, v11, v01});
    }
  }
  return PolygonalMesh(std::move(verts), std::move(elems));
}

PolygonalMesh distort(const PolygonalMesh& mesh, double t_c) {
  // Boundary vertices stay exactly fixed (the map is the identity on the
  // boundary up to roundoff in sin(2 pi)).
  std::vector<char> on_boundary(mesh.n_vertices(), 0);
  for (int e = 0; e < mesh.n_edges(); e++) {
    if (mesh.edge(e).boundary()) {
      on_boundary[mesh.edge(e).a] = 1;
      on_boundary[mesh.edge(e).b] = 1;
    }
  }
  std::vector<Point2> verts(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); v++) {
    const Point2& p = mesh.vertex(v);
    if (on_boundary[v]) {
      verts[v] = p;
    } else {
      const double off = t_c * std::sin(2.0 * M_PI * p.x()) * std::sin(2.0 * M_PI * p.y());
      verts[v] = Point2(p.x() + off, p.y() + off);
    }
  }
  std::vector<std::vector<int>> elems;
  elems.reserve(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); e++) elems.push_back(mesh.element(e));
  try {
    return PolygonalMesh(std::move(verts), std::move(elems));
  } catch (const MeshError& err) {
    throw DistortionFailure(std::string("distortion inverts or tangles an element: ") +
                            err.what());
  }
}

MeshHierarchy refine(const PolygonalMesh& coarse, RefineType type) {
  const int nv = coarse.n_vertices();
  const int ne = coarse.n_edges();

  std::vector<Point2> fverts;
  fverts.reserve(nv + ne + (type == RefineType::Type1 ? coarse.n_elements() : 0));
  for (int v = 0; v < nv; v++) fverts.push_back(coarse.vertex(v));
  for (int e = 0; e < ne; e++)
    fverts.push_back(0.5 * (coarse.vertex(coarse.edge(e).a) + coarse.vertex(coarse.edge(e).b)));
  const auto mid = [&](int edge_id) { return nv + edge_id; };

  std::vector<std::vector<int>> fcycles;
  std::vector<int> parent_of;

  for (int K = 0; K < coarse.n_elements(); K++) {
    const std::vector<int>& cyc = coarse.element(K);
    const std::vector<int>& ced = coarse.element_edges(K);
    const int k = static_cast<int>(cyc.size());

    switch (type) {
      case RefineType::Type1: {
        const ElementGeometry g = coarse.geometry(K);
        for (int i = 0; i < k; i++) {
          const Point2 d0 = g.vertices[i] - g.centroid;
          const Point2 d1 = g.vertices[(i + 1) % k] - g.centroid;
          if (!(cross(d0, d1) > 0))
            throw RefinementFailure("element " + std::to_string(K) +
                                    " is not star-shaped with respect to its centroid");
        }
        const int c = static_cast<int>(fverts.size());
        fverts.push_back(g.centroid);
        for (int i = 0; i < k; i++) {
          fcycles.push_back({cyc[i], mid(ced[i]), c, mid(ced[(i + k - 1) % k])});
          parent_of.push_back(K);
        }
        break;
      }
      case RefineType::Type2: {
        // Midpoint subdivision: k corner triangles plus the midpoint k-gon.
        // On a triangle this is the classical 4-congruent-triangle split.
        for (int i = 0; i < k; i++) {
          const Point2 m_prev = fverts[mid(ced[(i + k - 1) % k])];
          const Point2 m_next = fverts[mid(ced[i])];
          if (!(cross(coarse.vertex(cyc[i]) - m_prev, m_next - m_prev) > 0))
            throw RefinementFailure("element " + std::to_string(K) +
                                    " has a reflex or degenerate corner; midpoint "
                                    "subdivision needs strictly convex corners");
        }
        for (int i = 0; i < k; i++) {
          fcycles.push_back({mid(ced[(i + k - 1) % k]), cyc[i], mid(ced[i])});
          parent_of.push_back(K);
        }
        std::vector<int> central(k);
        for (int i = 0; i < k; i++) central[i] = mid(ced[i]);
        fcycles.push_back(std::move(central));
        parent_of.push_back(K);
        break;
      }
      case RefineType::Type3: {
        std::vector<int> cycle;
        cycle.reserve(2 * k);
        for (int i = 0; i < k; i++) {
          cycle.push_back(cyc[i]);
          cycle.push_back(mid(ced[i]));
        }
        fcycles.push_back(std::move(cycle));
        parent_of.push_back(K);
        break;
      }
    }
  }

  PolygonalMesh fine(std::move(fverts), std::move(fcycles));

  std::vector<std::array<int, 2>> edge_children(ne);
  for (int e = 0; e < ne; e++) {
    const MeshEdge& ce = coarse.edge(e);
    const int c0 = fine.find_edge(ce.a, mid(e));
    const int c1 = fine.find_edge(mid(e), ce.b);
    if (c0 < 0 || c1 < 0)
      throw RefinementFailure("coarse edge " + std::to_string(e) + " lost its fine children");
    edge_children[e] = {c0, c1};
  }

  std::vector<std::vector<int>> children_of(coarse.n_elements());
  for (int f = 0; f < static_cast<int>(parent_of.size()); f++)
    children_of[parent_of[f]].push_back(f);

  return MeshHierarchy{coarse, std::move(fine), type, std::move(parent_of),
                       std::move(children_of), std::move(edge_children)};
}

namespace {

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  const double l2 = d.squaredNorm();
  if (l2 == 0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / l2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

}  // namespace

QualityReport check_c0(const PolygonalMesh& mesh, double gamma1, double gamma2) {
  QualityReport rep;
  rep.gamma1 = gamma1;
  rep.gamma2 = gamma2;
  rep.star_ratio.resize(mesh.n_elements());
  rep.vertex_ratio.resize(mesh.n_elements());
  rep.min_star_ratio = rep.min_vertex_ratio = std::numeric_limits<double>::infinity();
  for (int e = 0; e < mesh.n_elements(); e++) {
    const ElementGeometry g = mesh.geometry(e);
    const int k = g.n_edges();
    double rho = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; i++)
      rho = std::min(rho,
                     point_segment_distance(g.centroid, g.vertices[i], g.vertices[(i + 1) % k]));
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; i++)
      for (int j = i + 1; j < k; j++) dmin = std::min(dmin, (g.vertices[i] - g.vertices[j]).norm());
    rep.star_ratio[e] = rho / g.diameter;
    rep.vertex_ratio[e] = dmin / g.diameter;
    rep.min_star_ratio = std::min(rep.min_star_ratio, rep.star_ratio[e]);
    rep.min_vertex_ratio = std::min(rep.min_vertex_ratio, rep.vertex_ratio[e]);
  }
  rep.pass = rep.min_star_ratio >= gamma1 && rep.min_vertex_ratio >= gamma2;
  return rep;
}

}  // namespace polyvem
