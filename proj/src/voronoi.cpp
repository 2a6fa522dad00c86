#include "polyvem/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace polyvem {

namespace {

using Polygon = std::vector<Point2>;

// Sutherland-Hodgman clip of a convex ccw polygon by the half-plane {x : nrm.x <= c}.
Polygon clip_halfplane(const Polygon& poly, const Point2& nrm, double c) {
  Polygon out;
  const int k = static_cast<int>(poly.size());
  out.reserve(k + 1);
  for (int i = 0; i < k; i++) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % k];
    const double dp = nrm.dot(p) - c;
    const double dq = nrm.dot(q) - c;
    if (dp <= 0) {
      out.push_back(p);
      if (dq > 0) out.push_back(p + (dp / (dp - dq)) * (q - p));
    } else if (dq <= 0) {
      out.push_back(p + (dp / (dp - dq)) * (q - p));
    }
  }
  return out;
}

// Voronoi cells of the seeds inside the unit square, one convex ccw polygon per
// seed, by clipping against the bisector of every nearby seed (nearest first,
// stopping once the remaining bisectors cannot reach the current cell).
std::vector<Polygon> voronoi_cells(const std::vector<Point2>& seeds) {
  const int n = static_cast<int>(seeds.size());
  const Polygon square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Polygon> cells(n);
  std::vector<int> order(n);
  std::vector<double> d2(n);
  for (int i = 0; i < n; i++) {
    const Point2 si = seeds[i];
    for (int j = 0; j < n; j++) d2[j] = (seeds[j] - si).squaredNorm();
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return d2[a] != d2[b] ? d2[a] < d2[b] : a < b;
    });

    Polygon cell = square;
    double r2max = 2.0;  // max squared distance from any seed to a square corner
    for (int j : order) {
      if (j == i) continue;
      if (d2[j] > 4.0 * r2max) break;  // bisector cannot reach the cell
      if (d2[j] < 1e-24)
        throw GenerationFailure("voronoi: seeds " + std::to_string(i) + " and " +
                                std::to_string(j) + " coincide");
      const Point2 nrm = seeds[j] - si;
      cell = clip_halfplane(cell, nrm, 0.5 * nrm.dot(seeds[j] + si));
      if (cell.size() < 3)
        throw GenerationFailure("voronoi: cell of seed " + std::to_string(i) + " is empty");
      r2max = 0;
      for (const Point2& v : cell) r2max = std::max(r2max, (v - si).squaredNorm());
    }
    cells[i] = std::move(cell);
  }
  return cells;
}

constexpr double kMergeTol = 1e-7;
constexpr double kBoundaryTol = 1e-12;
constexpr double kCollapseFrac = 0.01;

// Bitmask of unit-square sides a point lies on (two bits at a corner).
int side_mask(const Point2& p) {
  int m = 0;
  if (std::abs(p.x()) < kBoundaryTol) m |= 1;
  if (std::abs(p.x() - 1.0) < kBoundaryTol) m |= 2;
  if (std::abs(p.y()) < kBoundaryTol) m |= 4;
  if (std::abs(p.y() - 1.0) < kBoundaryTol) m |= 8;
  return m;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
};

// The same Voronoi vertex is computed independently by each incident cell, so
// coordinates can differ in the last bits; identify points within kMergeTol
// via a hash grid (deterministic first-use numbering).
struct VertexMerger {
  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  std::vector<Point2> points;

  static std::uint64_t key(long long ix, long long iy) {
    return (static_cast<std::uint64_t>(ix) << 32) ^ static_cast<std::uint64_t>(iy & 0xffffffff);
  }
  int insert(const Point2& p) {
    const long long ix = static_cast<long long>(std::floor(p.x() / kMergeTol));
    const long long iy = static_cast<long long>(std::floor(p.y() / kMergeTol));
    for (long long dx = -1; dx <= 1; dx++) {
      for (long long dy = -1; dy <= 1; dy++) {
        auto it = grid.find(key(ix + dx, iy + dy));
        if (it == grid.end()) continue;
        for (int id : it->second)
          if ((points[id] - p).norm() <= kMergeTol) return id;
      }
    }
    const int id = static_cast<int>(points.size());
    points.push_back(p);
    grid[key(ix, iy)].push_back(id);
    return id;
  }
};

std::vector<int> dedup_cycle(const std::vector<int>& cyc) {
  std::vector<int> out;
  out.reserve(cyc.size());
  for (int v : cyc)
    if (out.empty() || out.back() != v) out.push_back(v);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

}  // namespace

PolygonalMesh voronoi_mesh(const std::vector<Point2>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("voronoi_mesh: no seeds");
  const std::vector<Polygon> cells = voronoi_cells(seeds);

  VertexMerger merger;
  std::vector<std::vector<int>> cycles(cells.size());
  for (size_t c = 0; c < cells.size(); c++) {
    for (const Point2& p : cells[c]) cycles[c].push_back(merger.insert(p));
    cycles[c] = dedup_cycle(cycles[c]);
  }

  // Collapse sliver edges (PolyMesher-style): vertices closer than a small
  // fraction of the local cell scale are fused, snapping onto any square side
  // either endpoint lies on. Usually a no-op for Lloyd-relaxed seeds.
  std::vector<Point2> pos = merger.points;
  UnionFind uf(static_cast<int>(pos.size()));
  std::vector<int> mask(pos.size());
  for (size_t v = 0; v < pos.size(); v++) mask[v] = side_mask(pos[v]);
  for (int pass = 0; pass < 4; pass++) {
    bool changed = false;
    for (size_t c = 0; c < cells.size(); c++) {
      const double scale = std::sqrt(std::abs(polygon_signed_area(cells[c])));
      const std::vector<int>& cyc = cycles[c];
      const int k = static_cast<int>(cyc.size());
      for (int i = 0; i < k; i++) {
        const int a = uf.find(cyc[i]);
        const int b = uf.find(cyc[(i + 1) % k]);
        if (a == b) continue;
        if ((pos[a] - pos[b]).norm() >= kCollapseFrac * scale) continue;
        const int keep = std::popcount(static_cast<unsigned>(mask[a])) >=
                                 std::popcount(static_cast<unsigned>(mask[b]))
                             ? a
                             : b;
        Point2 p = (mask[a] == mask[b]) ? Point2(0.5 * (pos[a] + pos[b])) : pos[keep];
        const int m = mask[a] | mask[b];
        if (m & 1) p.x() = 0;
        if (m & 2) p.x() = 1;
        if (m & 4) p.y() = 0;
        if (m & 8) p.y() = 1;
        uf.parent[uf.find(a == keep ? b : a)] = keep;
        pos[keep] = p;
        mask[keep] = m;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Compact the surviving vertices in deterministic first-use order.
  std::vector<int> compact(pos.size(), -1);
  std::vector<Point2> verts;
  std::vector<std::vector<int>> elems(cells.size());
  for (size_t c = 0; c < cells.size(); c++) {
    std::vector<int> cyc;
    for (int v : cycles[c]) cyc.push_back(uf.find(v));
    cyc = dedup_cycle(cyc);
    if (cyc.size() < 3)
      throw GenerationFailure("voronoi: cell " + std::to_string(c) +
                              " degenerated during edge collapse");
    for (int v : cyc) {
      if (compact[v] < 0) {
        compact[v] = static_cast<int>(verts.size());
        verts.push_back(pos[v]);
      }
      elems[c].push_back(compact[v]);
    }
  }

  try {
    return PolygonalMesh(std::move(verts), std::move(elems));
  } catch (const MeshError& err) {
    throw GenerationFailure(std::string("voronoi: invalid cell complex: ") + err.what());
  }
}

PolygonalMesh generate_voronoi(int n_seeds, int lloyd_iters, std::uint64_t rng_seed) {
  if (n_seeds < 1) throw std::invalid_argument("generate_voronoi: n_seeds must be >= 1");
  if (lloyd_iters < 0) throw std::invalid_argument("generate_voronoi: lloyd_iters must be >= 0");

  // mt19937_64 has a standard-mandated sequence, so meshes are reproducible
  // across platforms for a given rng_seed.
  std::mt19937_64 rng(rng_seed);
  auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point2> seeds(n_seeds);
  for (Point2& s : seeds) s = Point2(u01(), u01());

  for (int it = 0; it < lloyd_iters; it++) {
    const std::vector<Polygon> cells = voronoi_cells(seeds);
    for (int i = 0; i < n_seeds; i++) seeds[i] = polygon_centroid(cells[i]);
  }
  return voronoi_mesh(seeds);
}

}  // namespace polyvem
