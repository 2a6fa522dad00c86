#pragma once

#include "polyvem/mesh.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace polyvem {

/// Discrete space for the lowest-order scheme. The two nonconforming variants
/// share dofs (edge means) and differ only in the zero-mean constraint used by
/// the pure-traction formulation; the conforming space uses vertex values.
enum class SpaceKind { NCOriginal, NCEnhanced, Conforming };

inline bool is_conforming(SpaceKind s) { return s == SpaceKind::Conforming; }

/// Where the divergence is projected in the volumetric term: per fine element
/// (ReducedRot) or per coarse element (UnifiedReduced).
enum class SchemeKind { ReducedRot, UnifiedReduced };

struct ProjectionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scalar dof sites of one fine element: edge ids (nonconforming) or vertex ids
/// (conforming), in element-local order.
std::vector<int> element_sites(const PolygonalMesh& fine, int elem, SpaceKind space);
/// Total number of scalar sites of the fine mesh for the space.
int n_scalar_sites(const PolygonalMesh& fine, SpaceKind space);

/// Energy projection onto linears in the scaled monomial basis
/// {1, (x-x_E)/h_E, (y-y_E)/h_E}, per scalar component.
///   D   - dofs of the monomials (n x 3)
///   B   - boundary functionals: row 0 the boundary mean, rows 1-2 the
///         boundary flux of the monomial gradients (3 x n)
///   G   - B*D (3 x 3); Pi_coeff = G^-1 B; Pi_dof = D*Pi_coeff.
struct ProjectionData {
  Eigen::MatrixXd D;
  Eigen::MatrixXd B;
  Eigen::Matrix3d G;
  Eigen::MatrixXd Pi_coeff;
  Eigen::MatrixXd Pi_dof;
};
ProjectionData elliptic_projection(const ElementGeometry& geom, SpaceKind space);

/// Dof-norm stabilization of the projection remainder: (I-Pi_dof)^T (I-Pi_dof).
Eigen::MatrixXd stab_matrix(const ProjectionData& proj);

/// Gradient-consistency part (grad Pi v, grad Pi w)_E for one scalar component.
Eigen::MatrixXd consistency_matrix(const ElementGeometry& geom, const ProjectionData& proj);

/// Dof coefficients of int_E div v (resp. int_E rot v) over the element dof
/// vector laid out [all x | all y]; exact boundary integrals of the dofs.
Eigen::VectorXd div_functional(const ElementGeometry& geom, SpaceKind space);
Eigen::VectorXd rot_functional(const ElementGeometry& geom, SpaceKind space);

/// div/rot functionals of the fine elements inside coarse element K, plus the
/// aggregates over K. `sites` lists the scalar dof sites of K (global ids) in
/// first-use order; K-local vectors are laid out [all x | all y] over them.
struct LocalFunctionals {
  std::vector<int> sites;
  std::vector<std::vector<int>> child_sites;  ///< per child: positions into `sites`
  std::vector<Eigen::VectorXd> div_child;     ///< per child, over its own 2n dofs
  Eigen::VectorXd div_K;
  Eigen::VectorXd rot_K;
};
LocalFunctionals local_functionals(const MeshHierarchy& h, int K, SpaceKind space);

struct LocalMatrix {
  std::vector<int> sites;  ///< global scalar site ids, K-local order
  Eigen::MatrixXd A;       ///< 2m x 2m over [all x | all y]
};

/// Shear part: consistency + stabilization summed over the children minus the
/// coarse-projected rotation correction  (1 / 2|K|) rot_K rot_K^T.
LocalMatrix local_stiffness_mu(const MeshHierarchy& h, int K, SpaceKind space);

/// Volumetric part (per unit lambda): (1/|E|) div_E div_E^T summed over the
/// children (ReducedRot) or (1/|K|) div_K div_K^T (UnifiedReduced).
LocalMatrix local_stiffness_lambda(const MeshHierarchy& h, int K, SpaceKind space,
                                   SchemeKind scheme);

/// Load dofs of (f, P_h v)_E where P_h v is the boundary mean of v on E:
/// entry = (boundary-mean weight of the dof) * int_E f_c.
Eigen::VectorXd local_load(const ElementGeometry& geom, SpaceKind space, const VectorField& f);

/// Quadratic form of the reduced strain on K evaluated from projected parts:
/// sum_E |grad Pi v|^2_E - (1 / 2|K|) (rot_K . chi)^2, chi over K-local dofs.
double eps_star_quadratic(const MeshHierarchy& h, int K, SpaceKind space,
                          const Eigen::VectorXd& chi);

}  // namespace polyvem
