// Finite element spaces for 3-component fields: P1 on intervals (1D),
// P2 on triangles (2D). The space owns its quadrature tables (3-point Gauss
// per interval, 6-point degree-4 rule per triangle) and caches the assembled
// mass / stiffness / elementwise bi-Laplacian operators at construction so
// that every consumer (assembly, loads, energy identity, norms) reads the
// same rule and the same matrices.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "llb/mesh.hpp"

namespace llb {

using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct FeSpace {
  MeshPtr mesh;
  int degree = 1;     // 1 (dim 1) or 2 (dim 2)
  int n_scalar = 0;   // scalar dofs; vector fields hold 3 * n_scalar coeffs
  int ndof_cell = 2;  // local scalar dofs per cell: 2 (P1) or 6 (P2)

  std::vector<double> dof_x, dof_y;  // scalar dof coordinates
  std::vector<int> cell_dofs;        // [cell * ndof_cell + l] -> global scalar dof

  // Quadrature tables, flattened per (cell, qpoint):
  //   index q in cell c lives at  c * nq + q.
  int nq = 0;
  std::vector<double> qw;        // physical weights (reference weight * measure)
  std::vector<double> qx, qy;    // physical quadrature points
  std::vector<double> qN;        // [(c*nq+q)*ndof_cell + l]          shape values
  std::vector<double> qdN;       // [((c*nq+q)*ndof_cell + l)*dim+a]  shape gradients
  std::vector<double> cell_lap;  // [c*ndof_cell + l]  physical Laplacian (P2; zeros P1)

  // Scalar operators expanded to the 3-component block layout (component-major:
  // coefficient of component c at scalar dof i sits at c * n_scalar + i).
  SparseOperator M;  // mass
  SparseOperator K;  // stiffness
  SparseOperator B;  // elementwise bi-Laplacian (P2 only; empty for P1)

  int n_dofs() const { return 3 * n_scalar; }
};

using SpacePtr = std::shared_ptr<const FeSpace>;

// degree must be 1 in 1D and 2 in 2D; anything else is rejected.
SpacePtr make_space(const MeshPtr& mesh, int degree);

// A 3-component finite element field over a space.
struct Field {
  SpacePtr space;
  Eigen::VectorXd coeffs;  // size 3 * n_scalar, component-major

  Field() = default;
  explicit Field(SpacePtr s) : space(std::move(s)) {
    coeffs = Eigen::VectorXd::Zero(space->n_dofs());
  }
  double& at(int comp, int dof) { return coeffs[comp * space->n_scalar + dof]; }
  double at(int comp, int dof) const { return coeffs[comp * space->n_scalar + dof]; }
};

using PointFn = std::function<Eigen::Vector3d(double, double)>;

// Field value / spatial gradient at quadrature point q of a cell, and the
// elementwise Laplacian (constant per cell for P2, identically 0 for P1).
// grad columns are the partial derivatives; column 1 is zero in 1D.
Eigen::Vector3d field_value_at_q(const Field& u, int cell, int q);
Eigen::Matrix<double, 3, 2> field_grad_at_q(const Field& u, int cell, int q);
Eigen::Vector3d field_lap_on_cell(const Field& u, int cell);

// Nodal interpolation of a pointwise function (exact for polynomials of the
// space's degree; used by prolongation and tests — projections go through
// l2_project in assemble.hpp).
Field interpolate(const SpacePtr& space, const PointFn& f);

// Evaluate a field at an arbitrary point of the domain (structured locate).
Eigen::Vector3d eval_field(const Field& u, double x, double y = 0.0);

// Plain-text field dump: header "llb-field dim=<d> degree=<p> ndofs=<n>",
// then one line per scalar dof: "x [y] m1 m2 m3" with 17 significant digits.
void dump_field(const Field& u, std::ostream& os);

}  // namespace llb
