#include "polyvem/geometry.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace polyvem {

double polygon_signed_area(const std::vector<Point2>& poly) {
  const int n = static_cast<int>(poly.size());
  double a = 0;
  for (int i = 0; i < n; i++) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

Point2 polygon_centroid(const std::vector<Point2>& poly) {
  const int n = static_cast<int>(poly.size());
  double a = 0;
  Point2 c{0, 0};
  for (int i = 0; i < n; i++) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    const double w = p.x() * q.y() - q.x() * p.y();
    a += w;
    c += w * (p + q);
  }
  if (a == 0) throw std::invalid_argument("polygon_centroid: degenerate polygon");
  return c / (3.0 * a);
}

double polygon_diameter(const std::vector<Point2>& poly) {
  const int n = static_cast<int>(poly.size());
  double d2 = 0;
  for (int i = 0; i < n; i++)
    for (int j = i + 1; j < n; j++) d2 = std::max(d2, (poly[i] - poly[j]).squaredNorm());
  return std::sqrt(d2);
}

ElementGeometry element_geometry_from_polygon(std::vector<Point2> poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) throw std::invalid_argument("element geometry: polygon needs at least 3 vertices");
  ElementGeometry g;
  g.area = polygon_signed_area(poly);
  if (!(g.area > 0))
    throw std::invalid_argument("element geometry: polygon is not ccw with positive area");
  g.centroid = polygon_centroid(poly);
  g.diameter = polygon_diameter(poly);
  g.edges.resize(n);
  for (int i = 0; i < n; i++) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    EdgeGeometry& e = g.edges[i];
    e.length = (q - p).norm();
    if (e.length == 0) throw std::invalid_argument("element geometry: zero-length edge");
    e.midpoint = 0.5 * (p + q);
    e.tangent = (q - p) / e.length;
    e.normal = Point2(e.tangent.y(), -e.tangent.x());  // outward for ccw cycles
    g.perimeter += e.length;
  }
  g.vertices = std::move(poly);
  return g;
}

namespace {

// Degree-4 Dunavant rule on the reference triangle, barycentric points and
// weights normalized so that the weights sum to 1.
struct BaryPoint {
  double l1, l2, l3, w;
};
constexpr std::array<BaryPoint, 6> kTriDeg4 = {{
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
}};

// Gauss-Legendre nodes/weights on [-1,1].
constexpr std::array<double, 3> kGL3x = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGL3w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
constexpr std::array<double, 4> kGL4x = {-0.8611363115940526, -0.3399810435848563,
                                         0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGL4w = {0.3478548451374538, 0.6521451548625461,
                                         0.6521451548625461, 0.3478548451374538};
constexpr std::array<double, 5> kGL5x = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGL5w = {0.2369268850561891, 0.4786286704993665,
                                         0.5688888888888889, 0.4786286704993665,
                                         0.2369268850561891};

}  // namespace

void append_triangle_rule(const Point2& a, const Point2& b, const Point2& c,
                          std::vector<QuadraturePoint>& out) {
  const double area =
      0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  if (!(area > 0)) throw std::invalid_argument("triangle rule: non-positive triangle");
  for (const BaryPoint& p : kTriDeg4)
    out.push_back({p.l1 * a + p.l2 * b + p.l3 * c, p.w * area});
}

std::vector<QuadraturePoint> polygon_quadrature(const ElementGeometry& geom) {
  std::vector<QuadraturePoint> rule;
  const int n = geom.n_edges();
  rule.reserve(6 * static_cast<size_t>(n));
  for (int i = 0; i < n; i++)
    append_triangle_rule(geom.centroid, geom.vertices[i], geom.vertices[(i + 1) % n], rule);
  return rule;
}

std::vector<QuadraturePoint> segment_quadrature(const Point2& a, const Point2& b, int n) {
  std::vector<QuadraturePoint> rule;
  rule.reserve(static_cast<size_t>(n));
  const double len = (b - a).norm();
  auto push = [&](double t, double w) {
    rule.push_back({0.5 * (1.0 - t) * a + 0.5 * (1.0 + t) * b, 0.5 * w * len});
  };
  switch (n) {
    case 3:
      for (int i = 0; i < 3; i++) push(kGL3x[i], kGL3w[i]);
      break;
    case 4:
      for (int i = 0; i < 4; i++) push(kGL4x[i], kGL4w[i]);
      break;
    case 5:
      for (int i = 0; i < 5; i++) push(kGL5x[i], kGL5w[i]);
      break;
    default:
      throw std::invalid_argument("segment_quadrature: unsupported point count");
  }
  return rule;
}

double integrate(const ScalarField& f, const std::vector<QuadraturePoint>& rule) {
  double s = 0;
  for (const auto& q : rule) s += q.w * f(q.x);
  return s;
}

Point2 integrate(const VectorField& f, const std::vector<QuadraturePoint>& rule) {
  Point2 s{0, 0};
  for (const auto& q : rule) s += q.w * f(q.x);
  return s;
}

}  // namespace polyvem
