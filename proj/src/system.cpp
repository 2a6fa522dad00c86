#include "polyvem/system.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <string>
#include <vector>

namespace polyvem {

namespace {

// Endpoints of a fine edge ordered along the traversal of its first adjacent
// element, so the derived normal points out of the domain on boundary edges.
std::pair<Point2, Point2> directed_edge(const PolygonalMesh& fine, int edge_id) {
  const MeshEdge& me = fine.edge(edge_id);
  const int owner = me.elems[0];
  const std::vector<int>& cyc = fine.element(owner);
  const std::vector<int>& eid = fine.element_edges(owner);
  const int k = static_cast<int>(cyc.size());
  for (int i = 0; i < k; i++) {
    if (eid[i] == edge_id)
      return {fine.vertex(cyc[i]), fine.vertex(cyc[(i + 1) % k])};
  }
  throw std::logic_error("directed_edge: edge not found in its owner element");
}

Point2 edge_mean(const PolygonalMesh& fine, int edge_id, const VectorField& g) {
  const MeshEdge& me = fine.edge(edge_id);
  const Point2 a = fine.vertex(me.a), b = fine.vertex(me.b);
  return integrate(g, segment_quadrature(a, b, 3)) / (b - a).norm();
}

}  // namespace

DofMap build_dof_map(const MeshHierarchy& h, SpaceKind space, Formulation formulation,
                     const BoundarySelector& dirichlet_part) {
  DofMap dm;
  dm.space = space;
  dm.formulation = formulation;
  dm.n_sites = n_scalar_sites(h.fine, space);
  dm.N = 2 * dm.n_sites;
  dm.dirichlet_site.assign(dm.n_sites, 0);

  if (formulation == Formulation::Mixed && !dirichlet_part)
    throw std::invalid_argument("build_dof_map: Mixed needs a Dirichlet boundary selector");

  if (formulation != Formulation::PureTraction) {
    for (int e = 0; e < h.fine.n_edges(); e++) {
      const MeshEdge& me = h.fine.edge(e);
      if (!me.boundary()) continue;
      const bool dir = formulation == Formulation::PureDisplacement ||
                       dirichlet_part(h.fine.vertex(me.a), h.fine.vertex(me.b));
      if (!dir) continue;
      if (is_conforming(space)) {
        dm.dirichlet_site[me.a] = 1;
        dm.dirichlet_site[me.b] = 1;
      } else {
        dm.dirichlet_site[e] = 1;
      }
    }
  }
  for (char c : dm.dirichlet_site) dm.n_dirichlet_sites += c;
  if (formulation == Formulation::Mixed && dm.n_dirichlet_sites == 0)
    throw std::invalid_argument("build_dof_map: Mixed selector matched no boundary edge");
  return dm;
}

BorderedSystem assemble(const MeshHierarchy& h, const ModelProblem& problem, const DofMap& dm) {
  const PolygonalMesh& fine = h.fine;
  const int ns = dm.n_sites;
  const SpaceKind space = dm.space;

  BorderedSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(dm.N);
  sys.dirichlet_values = Eigen::VectorXd::Zero(dm.N);

  if (dm.n_dirichlet_sites > 0) {
    if (!problem.dirichlet)
      throw std::invalid_argument("assemble: Dirichlet dofs present but no g2 given");
    if (is_conforming(space)) {
      for (int s = 0; s < ns; s++) {
        if (!dm.dirichlet_site[s]) continue;
        const Point2 g = problem.dirichlet(fine.vertex(s));
        sys.dirichlet_values(dm.dof(s, 0)) = g.x();
        sys.dirichlet_values(dm.dof(s, 1)) = g.y();
      }
    } else {
      for (int s = 0; s < ns; s++) {
        if (!dm.dirichlet_site[s]) continue;
        const Point2 g = edge_mean(fine, s, problem.dirichlet);
        sys.dirichlet_values(dm.dof(s, 0)) = g.x();
        sys.dirichlet_values(dm.dof(s, 1)) = g.y();
      }
    }
  }

  const auto is_dirichlet = [&](int dof) {
    return dm.dirichlet_site[dof % ns] != 0;
  };

  // Stiffness with symmetric elimination of the prescribed dofs.
  std::vector<Eigen::Triplet<double>> trips;
  for (int K = 0; K < h.coarse.n_elements(); K++) {
    const LocalMatrix lm_mu = local_stiffness_mu(h, K, space);
    const LocalMatrix lm_la = local_stiffness_lambda(h, K, space, problem.scheme);
    const Eigen::MatrixXd Aloc = 2.0 * problem.mu * lm_mu.A + problem.lambda * lm_la.A;
    const int m = static_cast<int>(lm_mu.sites.size());
    std::vector<int> gdof(2 * m);
    for (int i = 0; i < m; i++) {
      gdof[i] = dm.dof(lm_mu.sites[i], 0);
      gdof[m + i] = dm.dof(lm_mu.sites[i], 1);
    }
    for (int i = 0; i < 2 * m; i++) {
      if (is_dirichlet(gdof[i])) continue;
      for (int j = 0; j < 2 * m; j++) {
        const double v = Aloc(i, j);
        if (v == 0.0) continue;
        if (is_dirichlet(gdof[j]))
          sys.rhs(gdof[i]) -= v * sys.dirichlet_values(gdof[j]);
        else
          trips.emplace_back(gdof[i], gdof[j], v);
      }
    }
  }

  // Body force through the piecewise boundary-mean pairing.
  if (problem.f) {
    for (int e = 0; e < fine.n_elements(); e++) {
      const std::vector<int> sites = element_sites(fine, e, space);
      const Eigen::VectorXd b = local_load(fine.geometry(e), space, problem.f);
      const int n = static_cast<int>(sites.size());
      for (int i = 0; i < n; i++) {
        for (int c = 0; c < 2; c++) {
          const int d = dm.dof(sites[i], c);
          if (!is_dirichlet(d)) sys.rhs(d) += b(c * n + i);
        }
      }
    }
  }

  // Neumann data: (int_e g1 ds) paired with the dof weights of the edge.
  if (dm.formulation != Formulation::PureDisplacement && problem.traction) {
    for (int e = 0; e < fine.n_edges(); e++) {
      const MeshEdge& me = fine.edge(e);
      if (!me.boundary()) continue;
      if (dm.formulation == Formulation::Mixed &&
          problem.dirichlet_part(fine.vertex(me.a), fine.vertex(me.b)))
        continue;
      const auto [p, q] = directed_edge(fine, e);
      const Point2 t = (q - p) / (q - p).norm();
      const Point2 nrm(t.y(), -t.x());
      const Point2 g = integrate(
          [&](const Point2& x) { return problem.traction(x, nrm); }, segment_quadrature(p, q, 3));
      if (is_conforming(space)) {
        for (int v : {me.a, me.b}) {
          for (int c = 0; c < 2; c++) {
            const int d = dm.dof(v, c);
            if (!is_dirichlet(d)) sys.rhs(d) += 0.5 * g(c);
          }
        }
      } else {
        for (int c = 0; c < 2; c++) {
          const int d = dm.dof(e, c);
          if (!is_dirichlet(d)) sys.rhs(d) += g(c);
        }
      }
    }
  }

  // Identity rows for the prescribed dofs keep the matrix symmetric.
  for (int s = 0; s < ns; s++) {
    if (!dm.dirichlet_site[s]) continue;
    for (int c = 0; c < 2; c++) {
      const int d = dm.dof(s, c);
      trips.emplace_back(d, d, 1.0);
      sys.rhs(d) = sys.dirichlet_values(d);
    }
  }

  sys.A.resize(dm.N, dm.N);
  sys.A.setFromTriplets(trips.begin(), trips.end());

  // Zero-mean and zero-rotation constraints for the pure-traction space.
  if (dm.formulation == Formulation::PureTraction) {
    sys.nb = 3;
    sys.borders = Eigen::MatrixXd::Zero(dm.N, 3);
    if (space == SpaceKind::NCEnhanced) {
      // Volume means int_Omega Pi v dx = |E| (first projection coefficient).
      for (int e = 0; e < fine.n_elements(); e++) {
        const ElementGeometry g = fine.geometry(e);
        const ProjectionData P = elliptic_projection(g, space);
        const std::vector<int> sites = element_sites(fine, e, space);
        for (size_t i = 0; i < sites.size(); i++) {
          sys.borders(dm.dof(sites[i], 0), 0) += g.area * P.Pi_coeff(0, i);
          sys.borders(dm.dof(sites[i], 1), 1) += g.area * P.Pi_coeff(0, i);
        }
      }
    } else {
      // Boundary means int_dOmega v ds.
      for (int e = 0; e < fine.n_edges(); e++) {
        const MeshEdge& me = fine.edge(e);
        if (!me.boundary()) continue;
        const double len = (fine.vertex(me.a) - fine.vertex(me.b)).norm();
        if (is_conforming(space)) {
          for (int v : {me.a, me.b}) {
            sys.borders(dm.dof(v, 0), 0) += 0.5 * len;
            sys.borders(dm.dof(v, 1), 1) += 0.5 * len;
          }
        } else {
          sys.borders(dm.dof(e, 0), 0) += len;
          sys.borders(dm.dof(e, 1), 1) += len;
        }
      }
    }
    // int_Omega rot_h v dx summed per fine element.
    for (int e = 0; e < fine.n_elements(); e++) {
      const Eigen::VectorXd r = rot_functional(fine.geometry(e), space);
      const std::vector<int> sites = element_sites(fine, e, space);
      const int n = static_cast<int>(sites.size());
      for (int i = 0; i < n; i++) {
        sys.borders(dm.dof(sites[i], 0), 2) += r(i);
        sys.borders(dm.dof(sites[i], 1), 2) += r(n + i);
      }
    }
  }
  return sys;
}

namespace {

struct FullSystem {
  Eigen::SparseMatrix<double> M;
  Eigen::VectorXd b;
  double norm_inf = 0;
};

FullSystem bordered_matrix(const BorderedSystem& sys) {
  const int N = static_cast<int>(sys.A.rows());
  const int M = N + sys.nb;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.A.nonZeros() + 2 * N * sys.nb);
  for (int k = 0; k < sys.A.outerSize(); k++)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int c = 0; c < sys.nb; c++) {
    for (int i = 0; i < N; i++) {
      const double v = sys.borders(i, c);
      if (v == 0.0) continue;
      trips.emplace_back(i, N + c, v);
      trips.emplace_back(N + c, i, v);
    }
  }
  FullSystem full;
  full.M.resize(M, M);
  full.M.setFromTriplets(trips.begin(), trips.end());
  full.b = Eigen::VectorXd::Zero(M);
  full.b.head(N) = sys.rhs;
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(M);
  for (int k = 0; k < full.M.outerSize(); k++)
    for (Eigen::SparseMatrix<double>::InnerIterator it(full.M, k); it; ++it)
      rowsum(it.row()) += std::abs(it.value());
  full.norm_inf = rowsum.maxCoeff();
  return full;
}

// Normwise backward error ||b - Mx|| / (||M|| ||x|| + ||b||).
double backward_error(const FullSystem& full, const Eigen::VectorXd& x) {
  const double r = (full.b - full.M * x).norm();
  const double denom = full.norm_inf * x.norm() + full.b.norm();
  return denom > 0 ? r / denom : r;
}

// Solve + two rounds of iterative refinement with any factored solver.
template <class Solver>
Eigen::VectorXd refine_solve(const Solver& solver, const FullSystem& full) {
  Eigen::VectorXd x = solver.solve(full.b);
  for (int round = 0; round < 2; round++) {
    const Eigen::VectorXd r = full.b - full.M * x;
    x += solver.solve(r);
  }
  return x;
}

}  // namespace

SolveResult solve(const BorderedSystem& sys) {
  const int N = static_cast<int>(sys.A.rows());
  const FullSystem full = bordered_matrix(sys);

  Eigen::VectorXd x;
  bool factored = false;
  if (sys.nb == 0) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(full.M);
    if (ldlt.info() == Eigen::Success) {
      x = refine_solve(ldlt, full);
      factored = true;
    }
  }
  if (!factored) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(full.M);
    if (lu.info() == Eigen::Success) {
      x = refine_solve(lu, full);
      factored = true;
    }
  }
  if ((!factored || backward_error(full, x) > 1e-10) && full.M.rows() < 2000) {
    // Dense fallback for small systems.
    const Eigen::MatrixXd dense(full.M);
    const Eigen::PartialPivLU<Eigen::MatrixXd> plu(dense);
    const Eigen::VectorXd xd = refine_solve(plu, full);
    if (!factored || backward_error(full, xd) < backward_error(full, x)) x = xd;
    factored = true;
  }
  if (!factored) throw SolverError("solve: sparse factorization failed");

  SolveResult res;
  res.residual = backward_error(full, x);
  if (!(res.residual <= 1e-10))
    throw SolverError("solve: backward error " + std::to_string(res.residual) +
                      " exceeds 1e-10");
  res.chi = x.head(N);
  if (sys.nb == 3) res.beta = x.tail(3);
  return res;
}

Eigen::VectorXd interpolate_exact(const VectorField& u, const DofMap& dm,
                                  const MeshHierarchy& h) {
  Eigen::VectorXd chi(dm.N);
  if (is_conforming(dm.space)) {
    for (int s = 0; s < dm.n_sites; s++) {
      const Point2 v = u(h.fine.vertex(s));
      chi(dm.dof(s, 0)) = v.x();
      chi(dm.dof(s, 1)) = v.y();
    }
  } else {
    for (int s = 0; s < dm.n_sites; s++) {
      const Point2 v = edge_mean(h.fine, s, u);
      chi(dm.dof(s, 0)) = v.x();
      chi(dm.dof(s, 1)) = v.y();
    }
  }
  return chi;
}

}  // namespace polyvem
