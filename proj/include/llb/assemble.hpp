// Bilinear form assembly over a FeSpace, plus projection, prolongation and
// norms. All matrices act on 3-component coefficient vectors in the
// component-major block layout; scalar forms are expanded blockwise.
#pragma once

#include <Eigen/Sparse>

#include "llb/space.hpp"

namespace llb {

// <u, phi>  (block-diagonal expansion of the scalar mass matrix).
SparseOperator assemble_mass(const FeSpace& space);

// <grad u, grad phi>, summed over components.
SparseOperator assemble_stiffness(const FeSpace& space);

// Elementwise <Lap u, Lap phi>; requires degree 2 (rejected for P1, whose
// cellwise Laplacian vanishes identically).
SparseOperator assemble_bilaplacian(const FeSpace& space);

// <m_prev x grad u, grad phi> with m_prev evaluated at quadrature points.
// Skew-symmetric: x^T C x = 0 exactly at the quadrature level.
SparseOperator assemble_cross_convection(const FeSpace& space, const Field& m_prev);

// <(1 + mu |m_prev|^2) u, phi>, weight evaluated pointwise at quadrature nodes.
SparseOperator assemble_weighted_mass(const FeSpace& space, const Field& m_prev,
                                      double mu = 1.0);

// L2 projection of a pointwise function onto the space (mass solve).
Field l2_project(const SpacePtr& space, const PointFn& f, double tol = 1e-12);

// Exact transfer of a coarse field to a nested finer space (the fine mesh must
// descend from the coarse mesh through refine()).
Field prolongate(const Field& coarse, const SpacePtr& fine);

struct Norms {
  double l2 = 0.0, h1_semi = 0.0, h1 = 0.0;
};

// l2^2 = u^T M u, h1_semi^2 = u^T K u, h1^2 = their sum; uses the operators
// cached on the field's space.
Norms norms(const Field& u);

}  // namespace llb
