#include "polyvem/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace polyvem;

TEST_SUITE_BEGIN("mesh");

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("uniform triangulation") {
  SUBCASE("n=1") {
    const PolygonalMesh m = generate_uniform_triangulation(1);
    CHECK(m.n_elements() == 2);
    CHECK(m.n_vertices() == 4);
  }
  SUBCASE("n=5: 50 elements, diameter sqrt(2)/5") {
    const PolygonalMesh m = generate_uniform_triangulation(5);
    CHECK(m.n_elements() == 50);
    for (int e = 0; e < m.n_elements(); e++)
      CHECK(m.geometry(e).diameter == doctest::Approx(std::sqrt(2.0) / 5.0).epsilon(1e-13));
  }
  SUBCASE("n=2: tiles the unit square") {
    CHECK(std::abs(generate_uniform_triangulation(2).total_area() - 1.0) < 1e-14);
  }
  SUBCASE("n=0 rejected") {
    CHECK_THROWS_AS(generate_uniform_triangulation(0), std::invalid_argument);
  }
}

TEST_CASE("structured quads") {
  SUBCASE("n=1") {
    const PolygonalMesh m = generate_structured_quads(1);
    CHECK(m.n_elements() == 1);
    CHECK(m.n_vertices() == 4);
    CHECK(m.n_edges() == 4);
  }
  SUBCASE("n=5: 25 elements, 36 vertices") {
    const PolygonalMesh m = generate_structured_quads(5);
    CHECK(m.n_elements() == 25);
    CHECK(m.n_vertices() == 36);
  }
  SUBCASE("n=3: every cell has area 1/9") {
    const PolygonalMesh m = generate_structured_quads(3);
    for (int e = 0; e < m.n_elements(); e++)
      CHECK(std::abs(m.geometry(e).area - 1.0 / 9.0) < 1e-14);
  }
  SUBCASE("n=0 rejected") {
    CHECK_THROWS_AS(generate_structured_quads(0), std::invalid_argument);
  }
}

TEST_CASE("voronoi of two seeds is two half rectangles") {
  const PolygonalMesh m = voronoi_mesh({{0.25, 0.5}, {0.75, 0.5}});
  REQUIRE(m.n_elements() == 2);
  CHECK(m.geometry(0).area == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(m.geometry(1).area == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(m.element(0).size() == 4);
  CHECK(m.element(1).size() == 4);
  CHECK(std::abs(m.total_area() - 1.0) < 1e-13);
}

TEST_CASE("lloyd-relaxed voronoi: convex cells tiling the square") {
  const PolygonalMesh m = generate_voronoi(32, 100, 7);
  CHECK(m.n_elements() == 32);
  CHECK(std::abs(m.total_area() - 1.0) < 1e-10);
  // Convexity oracle: every ccw turn is non-negative (up to a relative slack).
  for (int e = 0; e < m.n_elements(); e++) {
    const ElementGeometry g = m.geometry(e);
    const int k = g.n_edges();
    for (int i = 0; i < k; i++) {
      const Point2 u = g.vertices[(i + 1) % k] - g.vertices[i];
      const Point2 v = g.vertices[(i + 2) % k] - g.vertices[(i + 1) % k];
      CHECK(u.x() * v.y() - u.y() * v.x() > -1e-9 * g.diameter * g.diameter);
    }
  }
}

TEST_CASE("voronoi generation is deterministic") {
  const PolygonalMesh a = generate_voronoi(64, 20, 42);
  const PolygonalMesh b = generate_voronoi(64, 20, 42);
  a.save("tmp_det_a.vmesh");
  b.save("tmp_det_b.vmesh");
  CHECK(slurp("tmp_det_a.vmesh") == slurp("tmp_det_b.vmesh"));
  std::remove("tmp_det_a.vmesh");
  std::remove("tmp_det_b.vmesh");
}

TEST_CASE("distortion map") {
  const PolygonalMesh m = generate_structured_quads(4);
  SUBCASE("t_c=0 is the identity") {
    const PolygonalMesh d = distort(m, 0.0);
    for (int v = 0; v < m.n_vertices(); v++) CHECK((d.vertex(v) - m.vertex(v)).norm() == 0.0);
  }
  SUBCASE("interior vertex (1/4,1/4) moves to (0.35,0.35) at t_c=0.1") {
    const PolygonalMesh d = distort(m, 0.1);
    bool found = false;
    for (int v = 0; v < m.n_vertices(); v++) {
      if ((m.vertex(v) - Point2(0.25, 0.25)).norm() < 1e-14) {
        found = true;
        CHECK((d.vertex(v) - Point2(0.35, 0.35)).norm() < 1e-13);
      }
    }
    CHECK(found);
  }
  SUBCASE("boundary vertices stay fixed") {
    const PolygonalMesh d = distort(m, 0.1);
    for (int v = 0; v < m.n_vertices(); v++) {
      const Point2& p = m.vertex(v);
      if (p.x() == 0 || p.x() == 1 || p.y() == 0 || p.y() == 1)
        CHECK((d.vertex(v) - p).norm() == 0.0);
    }
  }
  SUBCASE("strong distortion inverts an element") {
    CHECK_THROWS_AS(distort(generate_structured_quads(8), 0.35), DistortionFailure);
  }
}

TEST_CASE("refine type1: square into four quads") {
  const MeshHierarchy h = refine(generate_structured_quads(1), RefineType::Type1);
  CHECK(h.fine.n_elements() == 4);
  CHECK(h.fine.n_vertices() == 9);
  CHECK(h.fine.n_edges() == 12);
  for (int f = 0; f < 4; f++) {
    CHECK(h.parent_of[f] == 0);
    CHECK(h.fine.geometry(f).area == doctest::Approx(0.25).epsilon(1e-13));
  }
  REQUIRE(h.coarse_edge_children.size() == 4);
  for (const auto& kids : h.coarse_edge_children) {
    CHECK(kids[0] >= 0);
    CHECK(kids[1] >= 0);
    CHECK(h.fine.edge(kids[0]).boundary());
    CHECK(h.fine.edge(kids[1]).boundary());
  }
}

TEST_CASE("refine type2: triangle into four congruent triangles") {
  const PolygonalMesh tri({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  const MeshHierarchy h = refine(tri, RefineType::Type2);
  CHECK(h.fine.n_elements() == 4);
  CHECK(h.fine.n_vertices() == 6);
  for (int f = 0; f < 4; f++) {
    CHECK(h.fine.element(f).size() == 3);
    CHECK(h.fine.geometry(f).area == doctest::Approx(0.125).epsilon(1e-13));
  }
}

TEST_CASE("refine type2 on a quad: corner triangles plus midpoint quad") {
  const MeshHierarchy h = refine(generate_structured_quads(1), RefineType::Type2);
  CHECK(h.fine.n_elements() == 5);
  CHECK(h.fine.geometry(4).area == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("refine type3: pentagon keeps one element with doubled edges") {
  std::vector<Point2> pts;
  for (int i = 0; i < 5; i++) {
    const double a = 2.0 * M_PI * i / 5;
    pts.emplace_back(0.5 + 0.4 * std::cos(a), 0.5 + 0.4 * std::sin(a));
  }
  const PolygonalMesh pent(pts, {{0, 1, 2, 3, 4}});
  const MeshHierarchy h = refine(pent, RefineType::Type3);
  CHECK(h.fine.n_elements() == 1);
  CHECK(h.fine.element(0).size() == 10);
  CHECK(h.fine.n_edges() == 10);
  CHECK(h.parent_of[0] == 0);
  CHECK(h.fine.geometry(0).area == doctest::Approx(pent.geometry(0).area).epsilon(1e-13));
}

TEST_CASE("refine type1 rejects an element whose centroid leaves the kernel") {
  // Dart: strongly nonconvex quad; the centroid cannot see all of the boundary.
  const PolygonalMesh dart({{0, 0}, {4, 0}, {4, 3}, {3.6, 0.4}}, {{0, 1, 2, 3}});
  CHECK_THROWS_AS(refine(dart, RefineType::Type1), RefinementFailure);
}

TEST_CASE("refinement conserves parent areas") {
  const PolygonalMesh coarse = generate_voronoi(24, 50, 3);
  for (RefineType t : {RefineType::Type1, RefineType::Type2, RefineType::Type3}) {
    if (t == RefineType::Type2) continue;  // voronoi cells may have flat corners
    const MeshHierarchy h = refine(coarse, t);
    for (int K = 0; K < coarse.n_elements(); K++) {
      double sum = 0;
      for (int f : h.children_of[K]) sum += h.fine.geometry(f).area;
      CHECK(std::abs(sum - coarse.geometry(K).area) <= 1e-12 * coarse.geometry(K).area);
    }
  }
  // Type3 keeps the element count (parent map is a bijection).
  CHECK(refine(coarse, RefineType::Type3).fine.n_elements() == coarse.n_elements());
}

TEST_CASE("quality report") {
  SUBCASE("uniform triangulation: min vertex ratio 1/sqrt(2)") {
    const QualityReport rep = check_c0(generate_uniform_triangulation(5), 0.1, 0.1);
    CHECK(rep.min_vertex_ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(rep.pass);
  }
  SUBCASE("unit square star ratio") {
    const QualityReport rep = check_c0(generate_structured_quads(1), 0.1, 0.1);
    CHECK(rep.min_star_ratio == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(rep.pass);
  }
  SUBCASE("sliver fails") {
    const PolygonalMesh sliver({{0, 0}, {1, 0}, {1, 1e-3}, {0, 1e-3}}, {{0, 1, 2, 3}});
    CHECK_FALSE(check_c0(sliver, 0.1, 0.1).pass);
  }
}

TEST_CASE("vmesh io") {
  SUBCASE("parse with comments") {
    std::ofstream out("tmp_io.vmesh");
    out << "# unit square\nvmesh 1\n4 1  # counts\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n";
    out.close();
    const PolygonalMesh m = PolygonalMesh::load("tmp_io.vmesh");
    CHECK(m.n_vertices() == 4);
    CHECK(m.n_elements() == 1);
    CHECK(m.total_area() == doctest::Approx(1.0));
    std::remove("tmp_io.vmesh");
  }
  SUBCASE("save/load round trip is byte-exact") {
    const PolygonalMesh m = generate_voronoi(16, 30, 11);
    m.save("tmp_rt1.vmesh");
    const PolygonalMesh r = PolygonalMesh::load("tmp_rt1.vmesh");
    r.save("tmp_rt2.vmesh");
    CHECK(slurp("tmp_rt1.vmesh") == slurp("tmp_rt2.vmesh"));
    for (int v = 0; v < m.n_vertices(); v++) CHECK((m.vertex(v) - r.vertex(v)).norm() == 0.0);
    std::remove("tmp_rt1.vmesh");
    std::remove("tmp_rt2.vmesh");
  }
  SUBCASE("bad header reports line number") {
    std::ofstream("tmp_bad.vmesh") << "vmash 1\n";
    try {
      PolygonalMesh::load("tmp_bad.vmesh");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
    }
    std::remove("tmp_bad.vmesh");
  }
  SUBCASE("truncated vertex line reports its line number") {
    std::ofstream("tmp_bad2.vmesh") << "vmesh 1\n4 1\n0 0\n1\n";
    try {
      PolygonalMesh::load("tmp_bad2.vmesh");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 4);
    }
    std::remove("tmp_bad2.vmesh");
  }
  SUBCASE("repeated vertex in a cycle is a topology error") {
    std::ofstream("tmp_bad3.vmesh") << "vmesh 1\n4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 1 3\n";
    CHECK_THROWS_AS(PolygonalMesh::load("tmp_bad3.vmesh"), MeshError);
    std::remove("tmp_bad3.vmesh");
  }
}

TEST_CASE("mesh validation") {
  SUBCASE("self-intersecting bowtie rejected") {
    CHECK_THROWS_AS(PolygonalMesh({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, {{0, 1, 2, 3}}), MeshError);
  }
  SUBCASE("edge bordering three elements rejected") {
    CHECK_THROWS_AS(PolygonalMesh({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 1}},
                                  {{0, 1, 2}, {1, 3, 2}, {0, 2, 4}, {0, 1, 2}}),
                    MeshError);
  }
  SUBCASE("overlapping elements fail the tiling check") {
    // Two unit squares stacked on the same footprint via duplicate vertices.
    CHECK_THROWS_AS(PolygonalMesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}, {1, 0}, {1, 1}, {0, 1}},
                                  {{0, 1, 2, 3}, {4, 5, 6, 7}}),
                    MeshError);
  }
}

TEST_SUITE_END();
