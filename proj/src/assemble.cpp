#include "llb/assemble.hpp"

#include <vector>

#include "llb/solve.hpp"
#include "llb/util.hpp"

namespace llb {

namespace {

using Triplet = Eigen::Triplet<double>;

// Expand scalar-form triplets into the three diagonal component blocks.
SparseOperator expand_blocks(const std::vector<Triplet>& scalar, int n) {
  std::vector<Triplet> trip;
  trip.reserve(3 * scalar.size());
  for (const auto& t : scalar)
    for (int c = 0; c < 3; ++c)
      trip.emplace_back(c * n + t.row(), c * n + t.col(), t.value());
  SparseOperator A(3 * n, 3 * n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

}  // namespace

SparseOperator assemble_mass(const FeSpace& s) {
  std::vector<Triplet> trip;
  trip.reserve(s.mesh->n_cells() * s.ndof_cell * s.ndof_cell);
  for (int c = 0; c < s.mesh->n_cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const double w = s.qw[idx];
      for (int i = 0; i < s.ndof_cell; ++i)
        for (int j = 0; j < s.ndof_cell; ++j)
          trip.emplace_back(s.cell_dofs[c * s.ndof_cell + i],
                            s.cell_dofs[c * s.ndof_cell + j],
                            w * s.qN[idx * s.ndof_cell + i] * s.qN[idx * s.ndof_cell + j]);
    }
  return expand_blocks(trip, s.n_scalar);
}

SparseOperator assemble_stiffness(const FeSpace& s) {
  const int dim = s.mesh->dim;
  std::vector<Triplet> trip;
  trip.reserve(s.mesh->n_cells() * s.ndof_cell * s.ndof_cell);
  for (int c = 0; c < s.mesh->n_cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const double w = s.qw[idx];
      for (int i = 0; i < s.ndof_cell; ++i)
        for (int j = 0; j < s.ndof_cell; ++j) {
          double g = 0.0;
          for (int a = 0; a < dim; ++a)
            g += s.qdN[(idx * s.ndof_cell + i) * dim + a] *
                 s.qdN[(idx * s.ndof_cell + j) * dim + a];
          trip.emplace_back(s.cell_dofs[c * s.ndof_cell + i],
                            s.cell_dofs[c * s.ndof_cell + j], w * g);
        }
    }
  return expand_blocks(trip, s.n_scalar);
}

SparseOperator assemble_bilaplacian(const FeSpace& s) {
  if (s.degree != 2)
    throw ConfigError(
        "assemble_bilaplacian: requires a degree-2 space (the cellwise "
        "Laplacian of P1 vanishes identically)");
  std::vector<Triplet> trip;
  trip.reserve(s.mesh->n_cells() * s.ndof_cell * s.ndof_cell);
  for (int c = 0; c < s.mesh->n_cells(); ++c) {
    const double area = s.mesh->cell_measure(c);
    for (int i = 0; i < s.ndof_cell; ++i)
      for (int j = 0; j < s.ndof_cell; ++j)
        trip.emplace_back(s.cell_dofs[c * s.ndof_cell + i],
                          s.cell_dofs[c * s.ndof_cell + j],
                          area * s.cell_lap[c * s.ndof_cell + i] *
                              s.cell_lap[c * s.ndof_cell + j]);
  }
  return expand_blocks(trip, s.n_scalar);
}

SparseOperator assemble_cross_convection(const FeSpace& s, const Field& m_prev) {
  if (m_prev.space.get() != &s)
    throw ConfigError("assemble_cross_convection: field lives on another space");
  const int dim = s.mesh->dim;
  const int n = s.n_scalar;
  std::vector<Triplet> trip;
  trip.reserve(s.mesh->n_cells() * s.nq * s.ndof_cell * s.ndof_cell * 6);
  for (int c = 0; c < s.mesh->n_cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const double w = s.qw[idx];
      const Eigen::Vector3d m = field_value_at_q(m_prev, c, q);
      // (m x e_d) . e_c as a matrix: the skew cross-product matrix of m.
      const double A[3][3] = {{0.0, -m[2], m[1]},
                              {m[2], 0.0, -m[0]},
                              {-m[1], m[0], 0.0}};
      for (int i = 0; i < s.ndof_cell; ++i)
        for (int j = 0; j < s.ndof_cell; ++j) {
          double g = 0.0;
          for (int a = 0; a < dim; ++a)
            g += s.qdN[(idx * s.ndof_cell + i) * dim + a] *
                 s.qdN[(idx * s.ndof_cell + j) * dim + a];
          if (g == 0.0) continue;
          const int gi = s.cell_dofs[c * s.ndof_cell + i];
          const int gj = s.cell_dofs[c * s.ndof_cell + j];
          for (int cc = 0; cc < 3; ++cc)
            for (int dd = 0; dd < 3; ++dd) {
              if (A[cc][dd] == 0.0) continue;
              trip.emplace_back(cc * n + gi, dd * n + gj, w * g * A[cc][dd]);
            }
        }
    }
  SparseOperator C(3 * n, 3 * n);
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

SparseOperator assemble_weighted_mass(const FeSpace& s, const Field& m_prev,
                                      double mu) {
  if (m_prev.space.get() != &s)
    throw ConfigError("assemble_weighted_mass: field lives on another space");
  std::vector<Triplet> trip;
  trip.reserve(s.mesh->n_cells() * s.ndof_cell * s.ndof_cell);
  for (int c = 0; c < s.mesh->n_cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const Eigen::Vector3d m = field_value_at_q(m_prev, c, q);
      const double w = s.qw[idx] * (1.0 + mu * m.squaredNorm());
      for (int i = 0; i < s.ndof_cell; ++i)
        for (int j = 0; j < s.ndof_cell; ++j)
          trip.emplace_back(s.cell_dofs[c * s.ndof_cell + i],
                            s.cell_dofs[c * s.ndof_cell + j],
                            w * s.qN[idx * s.ndof_cell + i] * s.qN[idx * s.ndof_cell + j]);
    }
  return expand_blocks(trip, s.n_scalar);
}

Field l2_project(const SpacePtr& space, const PointFn& f, double tol) {
  const FeSpace& s = *space;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s.n_dofs());
  for (int c = 0; c < s.mesh->n_cells(); ++c)
    for (int q = 0; q < s.nq; ++q) {
      const int idx = c * s.nq + q;
      const double w = s.qw[idx];
      const Eigen::Vector3d v = f(s.qx[idx], s.qy[idx]);
      for (int l = 0; l < s.ndof_cell; ++l) {
        const double N = s.qN[idx * s.ndof_cell + l];
        const int d = s.cell_dofs[c * s.ndof_cell + l];
        for (int k = 0; k < 3; ++k) b[k * s.n_scalar + d] += w * v[k] * N;
      }
    }
  Field u(space);
  u.coeffs = solve_sparse(s.M, b, tol);
  return u;
}

Field prolongate(const Field& coarse, const SpacePtr& fine) {
  if (fine->mesh == coarse.space->mesh) {
    Field out(fine);
    out.coeffs = coarse.coeffs;  // same mesh: transfer is the identity
    return out;
  }
  // The fine mesh must descend from the coarse one through refine().
  MeshPtr m = fine->mesh;
  while (m && m != coarse.space->mesh) m = m->parent;
  if (!m)
    throw ConfigError(
        "prolongate: target space does not descend from the source mesh");
  // Nested refinement: nodal interpolation at the fine dof coordinates
  // reproduces the coarse polynomial exactly on every fine cell.
  Field out(fine);
  const int n = fine->n_scalar;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d v = eval_field(coarse, fine->dof_x[i], fine->dof_y[i]);
    for (int k = 0; k < 3; ++k) out.coeffs[k * n + i] = v[k];
  }
  return out;
}

Norms norms(const Field& u) {
  const FeSpace& s = *u.space;
  Norms out;
  const double l2s = u.coeffs.dot(s.M * u.coeffs);
  const double h1s = u.coeffs.dot(s.K * u.coeffs);
  out.l2 = std::sqrt(std::max(0.0, l2s));
  out.h1_semi = std::sqrt(std::max(0.0, h1s));
  out.h1 = std::sqrt(std::max(0.0, l2s + h1s));
  return out;
}

}  // namespace llb
