#include "polyvem/local_ops.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

namespace polyvem {

std::vector<int> element_sites(const PolygonalMesh& fine, int elem, SpaceKind space) {
  return is_conforming(space) ? fine.element(elem) : fine.element_edges(elem);
}

int n_scalar_sites(const PolygonalMesh& fine, SpaceKind space) {
  return is_conforming(space) ? fine.n_vertices() : fine.n_edges();
}

namespace {

// Scaled monomial basis {1, (x-x_E)/h_E, (y-y_E)/h_E} evaluated at a point.
inline Eigen::Vector3d monomials(const ElementGeometry& g, const Point2& p) {
  return {1.0, (p.x() - g.centroid.x()) / g.diameter, (p.y() - g.centroid.y()) / g.diameter};
}

// Per-site boundary-integral weights: w[i] = int_dE phi_i ds (edge dofs
// integrate to |e| on their own edge; vertex dofs to half the incident edge
// lengths, the trace being piecewise linear). Shared by the mean row of B,
// the div/rot functionals and the load pairing.
Eigen::VectorXd boundary_weights(const ElementGeometry& g, SpaceKind space) {
  const int n = g.n_edges();
  Eigen::VectorXd w(n);
  if (is_conforming(space)) {
    for (int i = 0; i < n; i++)
      w(i) = 0.5 * (g.edges[(i + n - 1) % n].length + g.edges[i].length);
  } else {
    for (int i = 0; i < n; i++) w(i) = g.edges[i].length;
  }
  return w;
}

// As boundary_weights but weighted by a per-edge unit vector component
// (normal for div, tangent for rot): w[i] = int_dE phi_i (dir)_c ds.
Eigen::VectorXd directed_boundary_weights(const ElementGeometry& g, SpaceKind space,
                                          bool tangent, int comp) {
  const int n = g.n_edges();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; i++) {
    const EdgeGeometry& e = g.edges[i];
    const double c = e.length * (tangent ? e.tangent(comp) : e.normal(comp));
    if (is_conforming(space)) {
      w(i) += 0.5 * c;
      w((i + 1) % n) += 0.5 * c;
    } else {
      w(i) += c;
    }
  }
  return w;
}

}  // namespace

ProjectionData elliptic_projection(const ElementGeometry& g, SpaceKind space) {
  const int n = g.n_edges();
  ProjectionData P;
  P.D.resize(n, 3);
  if (is_conforming(space)) {
    for (int i = 0; i < n; i++) P.D.row(i) = monomials(g, g.vertices[i]);
  } else {
    // Edge means of linears are their midpoint values.
    for (int i = 0; i < n; i++) P.D.row(i) = monomials(g, g.edges[i].midpoint);
  }

  P.B.resize(3, n);
  P.B.row(0) = boundary_weights(g, space) / g.perimeter;
  // int_dE phi_i dn m ds with grad m = e_c / h_E constant per component.
  P.B.row(1) = directed_boundary_weights(g, space, /*tangent=*/false, 0) / g.diameter;
  P.B.row(2) = directed_boundary_weights(g, space, /*tangent=*/false, 1) / g.diameter;

  P.G = P.B * P.D;
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(P.G);
  if (!lu.isInvertible())
    throw ProjectionFailure("elliptic projection: singular G on an element with " +
                            std::to_string(n) + " edges");
  P.Pi_coeff = lu.solve(P.B);
  P.Pi_dof = P.D * P.Pi_coeff;
  return P;
}

Eigen::MatrixXd stab_matrix(const ProjectionData& P) {
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(P.Pi_dof.rows(), P.Pi_dof.cols()) - P.Pi_dof;
  return R.transpose() * R;
}

Eigen::MatrixXd consistency_matrix(const ElementGeometry& g, const ProjectionData& P) {
  // (grad m_i, grad m_j)_E = |E|/h_E^2 for i=j in {2,3}, else 0.
  const double s = g.area / (g.diameter * g.diameter);
  Eigen::MatrixXd C = s * (P.Pi_coeff.row(1).transpose() * P.Pi_coeff.row(1) +
                           P.Pi_coeff.row(2).transpose() * P.Pi_coeff.row(2));
  return 0.5 * (C + C.transpose());
}

Eigen::VectorXd div_functional(const ElementGeometry& g, SpaceKind space) {
  const int n = g.n_edges();
  Eigen::VectorXd d(2 * n);
  d.head(n) = directed_boundary_weights(g, space, /*tangent=*/false, 0);
  d.tail(n) = directed_boundary_weights(g, space, /*tangent=*/false, 1);
  return d;
}

Eigen::VectorXd rot_functional(const ElementGeometry& g, SpaceKind space) {
  const int n = g.n_edges();
  Eigen::VectorXd r(2 * n);
  r.head(n) = directed_boundary_weights(g, space, /*tangent=*/true, 0);
  r.tail(n) = directed_boundary_weights(g, space, /*tangent=*/true, 1);
  return r;
}

namespace {

// First-use numbering of the scalar sites of K's children.
void collect_sites(const MeshHierarchy& h, int K, SpaceKind space, std::vector<int>& sites,
                   std::vector<std::vector<int>>& child_sites) {
  std::unordered_map<int, int> local;
  for (int f : h.children_of[K]) {
    const std::vector<int> es = element_sites(h.fine, f, space);
    std::vector<int> loc(es.size());
    for (size_t i = 0; i < es.size(); i++) {
      auto [it, inserted] = local.try_emplace(es[i], static_cast<int>(sites.size()));
      if (inserted) sites.push_back(es[i]);
      loc[i] = it->second;
    }
    child_sites.push_back(std::move(loc));
  }
}

// Scatter-add of a child vector [x|y] into the K-local layout [x|y].
void scatter_add(const Eigen::VectorXd& child, const std::vector<int>& loc, int m,
                 Eigen::VectorXd& out) {
  const int n = static_cast<int>(loc.size());
  for (int i = 0; i < n; i++) {
    out(loc[i]) += child(i);
    out(m + loc[i]) += child(n + i);
  }
}

// rot_K recomputed purely from the fine edges on the boundary of K, traversed
// in K's ccw order; interior contributions must have cancelled exactly.
Eigen::VectorXd boundary_rot(const MeshHierarchy& h, int K, SpaceKind space,
                             const std::vector<int>& sites) {
  const int m = static_cast<int>(sites.size());
  std::unordered_map<int, int> pos;
  for (int i = 0; i < m; i++) pos.emplace(sites[i], i);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * m);
  const std::vector<int>& cyc = h.coarse.element(K);
  const std::vector<int>& ced = h.coarse.element_edges(K);
  const int k = static_cast<int>(cyc.size());
  for (int i = 0; i < k; i++) {
    const MeshEdge& ce = h.coarse.edge(ced[i]);
    const bool forward = (cyc[i] == ce.a);  // K traverses the edge a -> b?
    const auto& kids = h.coarse_edge_children[ced[i]];
    for (int s = 0; s < 2; s++) {
      const int fe = kids[forward ? s : 1 - s];
      const MeshEdge& me = h.fine.edge(fe);
      // Orient the fine edge along K's cycle: the first child starts at the
      // current coarse vertex, the second ends at the next one.
      int from = me.a, to = me.b;
      if (s == 0) {
        if (to == cyc[i]) std::swap(from, to);
      } else {
        if (from == cyc[(i + 1) % k]) std::swap(from, to);
      }
      const Point2 a = h.fine.vertex(from), b = h.fine.vertex(to);
      const double len = (b - a).norm();
      const Point2 t = (b - a) / len;
      if (is_conforming(space)) {
        for (int v : {from, to}) {
          const int loc = pos.at(v);
          r(loc) += 0.5 * len * t.x();
          r(m + loc) += 0.5 * len * t.y();
        }
      } else {
        const int loc = pos.at(fe);
        r(loc) += len * t.x();
        r(m + loc) += len * t.y();
      }
    }
  }
  return r;
}

}  // namespace

LocalFunctionals local_functionals(const MeshHierarchy& h, int K, SpaceKind space) {
  LocalFunctionals lf;
  collect_sites(h, K, space, lf.sites, lf.child_sites);
  const int m = static_cast<int>(lf.sites.size());
  lf.div_K = Eigen::VectorXd::Zero(2 * m);
  lf.rot_K = Eigen::VectorXd::Zero(2 * m);
  const auto& children = h.children_of[K];
  lf.div_child.reserve(children.size());
  for (size_t c = 0; c < children.size(); c++) {
    const ElementGeometry g = h.fine.geometry(children[c]);
    lf.div_child.push_back(div_functional(g, space));
    scatter_add(lf.div_child.back(), lf.child_sites[c], m, lf.div_K);
    scatter_add(rot_functional(g, space), lf.child_sites[c], m, lf.rot_K);
  }
  // Interior contributions along shared fine edges must telescope away.
  const double perim = h.coarse.geometry(K).perimeter;
  const double resid = (lf.rot_K - boundary_rot(h, K, space, lf.sites)).lpNorm<Eigen::Infinity>();
  if (resid > 1e-13 * perim)
    throw std::logic_error("local_functionals: interior edge contributions failed to cancel (" +
                           std::to_string(resid) + ")");
  return lf;
}

LocalMatrix local_stiffness_mu(const MeshHierarchy& h, int K, SpaceKind space) {
  LocalFunctionals lf = local_functionals(h, K, space);
  const int m = static_cast<int>(lf.sites.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  const auto& children = h.children_of[K];
  for (size_t c = 0; c < children.size(); c++) {
    const ElementGeometry g = h.fine.geometry(children[c]);
    const ProjectionData P = elliptic_projection(g, space);
    const Eigen::MatrixXd local = consistency_matrix(g, P) + stab_matrix(P);
    const std::vector<int>& loc = lf.child_sites[c];
    for (size_t i = 0; i < loc.size(); i++)
      for (size_t j = 0; j < loc.size(); j++) M(loc[i], loc[j]) += local(i, j);
  }
  LocalMatrix out;
  out.sites = std::move(lf.sites);
  out.A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  out.A.topLeftCorner(m, m) = M;
  out.A.bottomRightCorner(m, m) = M;
  out.A -= (0.5 / h.coarse.geometry(K).area) * (lf.rot_K * lf.rot_K.transpose());
  return out;
}

LocalMatrix local_stiffness_lambda(const MeshHierarchy& h, int K, SpaceKind space,
                                   SchemeKind scheme) {
  LocalFunctionals lf = local_functionals(h, K, space);
  const int m = static_cast<int>(lf.sites.size());
  LocalMatrix out;
  out.A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  if (scheme == SchemeKind::UnifiedReduced) {
    out.A = (1.0 / h.coarse.geometry(K).area) * (lf.div_K * lf.div_K.transpose());
  } else {
    const auto& children = h.children_of[K];
    for (size_t c = 0; c < children.size(); c++) {
      const double area = h.fine.geometry(children[c]).area;
      const Eigen::VectorXd& d = lf.div_child[c];
      const std::vector<int>& loc = lf.child_sites[c];
      const int n = static_cast<int>(loc.size());
      for (int i = 0; i < 2 * n; i++) {
        const int gi = (i < n ? loc[i] : m + loc[i - n]);
        for (int j = 0; j < 2 * n; j++) {
          const int gj = (j < n ? loc[j] : m + loc[j - n]);
          out.A(gi, gj) += d(i) * d(j) / area;
        }
      }
    }
  }
  out.sites = std::move(lf.sites);
  return out;
}

Eigen::VectorXd local_load(const ElementGeometry& g, SpaceKind space, const VectorField& f) {
  const Point2 F = integrate(f, polygon_quadrature(g));
  const Eigen::VectorXd w = boundary_weights(g, space) / g.perimeter;
  const int n = g.n_edges();
  Eigen::VectorXd b(2 * n);
  b.head(n) = F.x() * w;
  b.tail(n) = F.y() * w;
  return b;
}

double eps_star_quadratic(const MeshHierarchy& h, int K, SpaceKind space,
                          const Eigen::VectorXd& chi) {
  const LocalFunctionals lf = local_functionals(h, K, space);
  const int m = static_cast<int>(lf.sites.size());
  if (chi.size() != 2 * m)
    throw std::invalid_argument("eps_star_quadratic: dof vector has wrong length");
  double val = 0;
  const auto& children = h.children_of[K];
  for (size_t c = 0; c < children.size(); c++) {
    const ElementGeometry g = h.fine.geometry(children[c]);
    const ProjectionData P = elliptic_projection(g, space);
    const Eigen::MatrixXd C = consistency_matrix(g, P);
    const std::vector<int>& loc = lf.child_sites[c];
    const int n = static_cast<int>(loc.size());
    Eigen::VectorXd cx(n), cy(n);
    for (int i = 0; i < n; i++) {
      cx(i) = chi(loc[i]);
      cy(i) = chi(m + loc[i]);
    }
    val += cx.dot(C * cx) + cy.dot(C * cy);
  }
  const double rot = lf.rot_K.dot(chi);
  val -= 0.5 * rot * rot / h.coarse.geometry(K).area;
  return val;
}

}  // namespace polyvem
