#pragma once

#include "polyvem/geometry.hpp"
#include "polyvem/local_ops.hpp"

#include <functional>

namespace polyvem {

enum class Formulation { PureTraction, PureDisplacement, Mixed };

/// Classifies a fine boundary edge by its two endpoints; true = Dirichlet part.
using BoundarySelector = std::function<bool(const Point2&, const Point2&)>;

/// Traction data g1(x, n) on the Neumann part.
using TractionField = std::function<Point2(const Point2&, const Point2&)>;

/// One linear elasticity problem: -div sigma(u) = f with
/// sigma(u) = 2 mu eps(u) + lambda div(u) I, plus boundary data and the
/// discretization choices used when driving a solve.
struct ModelProblem {
  double lambda = 1.0;
  double mu = 1.0;
  VectorField f;            ///< body force (null = zero)
  VectorField exact_u;      ///< optional closed-form solution
  MatrixField exact_grad;   ///< optional gradient, grad(i,j) = d_j u_i
  VectorField dirichlet;    ///< g2 on the Dirichlet part
  TractionField traction;   ///< g1 on the Neumann part (null = zero)
  Formulation formulation = Formulation::PureDisplacement;
  SpaceKind space = SpaceKind::NCOriginal;
  SchemeKind scheme = SchemeKind::ReducedRot;
  BoundarySelector dirichlet_part;  ///< Mixed only: which boundary edges carry g2
};

/// g1(x,n) = sigma(u)(x) n built from the exact gradient.
inline TractionField traction_from_gradient(double lambda, double mu, const MatrixField& grad) {
  return [lambda, mu, grad](const Point2& x, const Point2& n) {
    const Eigen::Matrix2d G = grad(x);
    const Eigen::Matrix2d eps = 0.5 * (G + G.transpose());
    const Eigen::Matrix2d sigma =
        2.0 * mu * eps + lambda * G.trace() * Eigen::Matrix2d::Identity();
    return Point2(sigma * n);
  };
}

}  // namespace polyvem
