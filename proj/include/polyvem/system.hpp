#pragma once

#include "polyvem/local_ops.hpp"
#include "polyvem/mesh.hpp"
#include "polyvem/model.hpp"

#include <Eigen/Sparse>

#include <stdexcept>
#include <vector>

namespace polyvem {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Global scalar dof sites are the fine-mesh entities of the space (edges for
/// the nonconforming spaces, vertices for the conforming one); the vector dof
/// layout is [all x | all y], so dof(site, c) = c * n_sites + site.
struct DofMap {
  SpaceKind space = SpaceKind::NCOriginal;
  Formulation formulation = Formulation::PureDisplacement;
  int n_sites = 0;
  int N = 0;  ///< total dofs including Dirichlet ones (= 2 n_sites)
  std::vector<char> dirichlet_site;
  int n_dirichlet_sites = 0;

  int dof(int site, int comp) const { return comp * n_sites + site; }
};

/// Marks Dirichlet sites per formulation. Mixed requires a selector that
/// matches at least one boundary edge (otherwise invalid-argument).
DofMap build_dof_map(const MeshHierarchy& h, SpaceKind space, Formulation formulation,
                     const BoundarySelector& dirichlet_part = nullptr);

/// Assembled linear system. Dirichlet dofs are eliminated symmetrically: their
/// rows/columns are reduced to the identity with the prescribed value on the
/// right-hand side, and their couplings moved to the free right-hand side.
/// Pure traction adds nb = 3 border columns (two zero-mean constraints and the
/// zero-rotation constraint) for the Lagrange multipliers.
struct BorderedSystem {
  Eigen::SparseMatrix<double> A;     ///< N x N, symmetric
  Eigen::VectorXd rhs;               ///< N
  Eigen::MatrixXd borders;           ///< N x nb
  int nb = 0;
  Eigen::VectorXd dirichlet_values;  ///< N; zero at free dofs
};

BorderedSystem assemble(const MeshHierarchy& h, const ModelProblem& problem, const DofMap& dm);

struct SolveResult {
  Eigen::VectorXd chi;
  Eigen::Vector3d beta{0, 0, 0};  ///< multipliers (pure traction only)
  double residual = 0;            ///< normwise backward error of the bordered system
};

/// Direct sparse solve of the (bordered) system with iterative refinement;
/// a dense fallback covers small systems if the sparse factorization fails.
/// Throws SolverError if the backward error stays above 1e-10.
SolveResult solve(const BorderedSystem& sys);

/// Dof vector of a smooth field: edge means by 3-point Gauss (nonconforming)
/// or vertex values (conforming).
Eigen::VectorXd interpolate_exact(const VectorField& u, const DofMap& dm, const MeshHierarchy& h);

}  // namespace polyvem
