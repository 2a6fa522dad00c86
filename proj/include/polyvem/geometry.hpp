#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace polyvem {

using Point2 = Eigen::Vector2d;

using ScalarField = std::function<double(const Point2&)>;
using VectorField = std::function<Point2(const Point2&)>;
using MatrixField = std::function<Eigen::Matrix2d(const Point2&)>;

/// Geometry of one boundary edge of a polygon; edge i joins vertex i to vertex i+1 (ccw).
struct EdgeGeometry {
  double length = 0;
  Point2 midpoint{0, 0};
  Point2 normal{0, 0};   ///< outward unit normal
  Point2 tangent{0, 0};  ///< ccw unit tangent; tangent = (-normal.y, normal.x)
};

/// Derived geometric data of a single (ccw, simple) polygonal element.
struct ElementGeometry {
  std::vector<Point2> vertices;  ///< ccw cycle
  std::vector<EdgeGeometry> edges;
  Point2 centroid{0, 0};
  double area = 0;
  double diameter = 0;
  double perimeter = 0;

  int n_edges() const { return static_cast<int>(edges.size()); }
};

double polygon_signed_area(const std::vector<Point2>& poly);
Point2 polygon_centroid(const std::vector<Point2>& poly);
double polygon_diameter(const std::vector<Point2>& poly);

/// Full geometry of a ccw simple polygon. Throws std::invalid_argument on fewer
/// than 3 vertices or non-positive area.
ElementGeometry element_geometry_from_polygon(std::vector<Point2> poly);

struct QuadraturePoint {
  Point2 x{0, 0};
  double w = 0;
};

/// Degree-4 (6-point) rule on the triangle (a,b,c), appended to `out`.
/// Weights carry the triangle area; the triangle must be positively oriented.
void append_triangle_rule(const Point2& a, const Point2& b, const Point2& c,
                          std::vector<QuadraturePoint>& out);

/// Degree-4 rule over a polygon star-shaped with respect to its centroid,
/// built as a centroid fan of triangle rules. Throws std::invalid_argument if
/// some fan triangle is not positively oriented (centroid outside the kernel).
std::vector<QuadraturePoint> polygon_quadrature(const ElementGeometry& geom);

/// n-point Gauss-Legendre rule mapped to the segment [a,b] (n in {3,4,5});
/// weights carry the segment length.
std::vector<QuadraturePoint> segment_quadrature(const Point2& a, const Point2& b, int n = 3);

double integrate(const ScalarField& f, const std::vector<QuadraturePoint>& rule);
Point2 integrate(const VectorField& f, const std::vector<QuadraturePoint>& rule);

}  // namespace polyvem
