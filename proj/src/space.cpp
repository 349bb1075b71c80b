#include "llb/space.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <utility>

#include "llb/assemble.hpp"
#include "llb/util.hpp"

namespace llb {

namespace {

// ---------------------------------------------------------------- P1 (1D)
// Reference interval [0,1], shapes N0 = 1-t, N1 = t.
// 3-point Gauss rule, exact through degree 5.
constexpr int kNq1d = 3;
const double kGaussT[kNq1d] = {0.5 - 0.5 * 0.77459666924148340, 0.5,
                               0.5 + 0.5 * 0.77459666924148340};
const double kGaussW[kNq1d] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// ---------------------------------------------------------------- P2 (2D)
// Reference triangle (0,0)-(1,0)-(0,1); lambda = (1-xi-eta, xi, eta).
// Local dof order: vertices v0,v1,v2 then edge midpoints e01,e12,e20.
// 6-point degree-4 rule (weights sum to 1, scaled by cell area).
constexpr int kNq2d = 6;
const double kTriA1 = 0.44594849091596489, kTriW1 = 0.22338158967801147;
const double kTriA2 = 0.09157621350977073, kTriW2 = 0.10995174365532187;

void tri_rule(double* xi, double* eta, double* w) {
  const double pts[kNq2d][3] = {
      // (lambda0, lambda1, lambda2)
      {1 - 2 * kTriA1, kTriA1, kTriA1},
      {kTriA1, 1 - 2 * kTriA1, kTriA1},
      {kTriA1, kTriA1, 1 - 2 * kTriA1},
      {1 - 2 * kTriA2, kTriA2, kTriA2},
      {kTriA2, 1 - 2 * kTriA2, kTriA2},
      {kTriA2, kTriA2, 1 - 2 * kTriA2},
  };
  const double ws[kNq2d] = {kTriW1, kTriW1, kTriW1, kTriW2, kTriW2, kTriW2};
  for (int q = 0; q < kNq2d; ++q) {
    xi[q] = pts[q][1];
    eta[q] = pts[q][2];
    w[q] = ws[q];
  }
}

void p2_shapes(double xi, double eta, double* N, double* dxi, double* deta) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  N[0] = l0 * (2 * l0 - 1);
  N[1] = l1 * (2 * l1 - 1);
  N[2] = l2 * (2 * l2 - 1);
  N[3] = 4 * l0 * l1;
  N[4] = 4 * l1 * l2;
  N[5] = 4 * l2 * l0;
  dxi[0] = 1 - 4 * l0;
  deta[0] = 1 - 4 * l0;
  dxi[1] = 4 * l1 - 1;
  deta[1] = 0;
  dxi[2] = 0;
  deta[2] = 4 * l2 - 1;
  dxi[3] = 4 * (l0 - l1);
  deta[3] = -4 * l1;
  dxi[4] = 4 * l2;
  deta[4] = 4 * l1;
  dxi[5] = -4 * l2;
  deta[5] = 4 * (l0 - l2);
}

// Constant reference Hessians of the P2 shapes, row-major [xx, xy, yx, yy].
const double kP2Hess[6][4] = {
    {4, 4, 4, 4},   {4, 0, 0, 0},   {0, 0, 0, 4},
    {-8, -4, -4, 0}, {0, 4, 4, 0},   {0, -4, -4, -8},
};

}  // namespace

SpacePtr make_space(const MeshPtr& mesh, int degree) {
  if (!mesh) throw ConfigError("make_space: null mesh");
  if (mesh->dim == 1 && degree != 1)
    throw ConfigError("make_space: dimension 1 requires degree 1");
  if (mesh->dim == 2 && degree != 2)
    throw ConfigError("make_space: dimension 2 requires degree 2");

  auto sp = std::make_shared<FeSpace>();
  auto& s = *sp;
  s.mesh = mesh;
  s.degree = degree;
  const int nc = mesh->n_cells();

  if (mesh->dim == 1) {
    s.ndof_cell = 2;
    s.n_scalar = mesh->n_vertices();
    s.dof_x = mesh->vx;
    s.dof_y.assign(s.n_scalar, 0.0);
    s.cell_dofs.resize(nc * 2);
    for (int c = 0; c < nc; ++c) {
      s.cell_dofs[2 * c] = mesh->cells[c][0];
      s.cell_dofs[2 * c + 1] = mesh->cells[c][1];
    }
    s.nq = kNq1d;
    s.qw.resize(nc * s.nq);
    s.qx.resize(nc * s.nq);
    s.qy.assign(nc * s.nq, 0.0);
    s.qN.resize(nc * s.nq * 2);
    s.qdN.resize(nc * s.nq * 2);  // dim == 1
    s.cell_lap.assign(nc * 2, 0.0);
    for (int c = 0; c < nc; ++c) {
      const double x0 = mesh->vx[mesh->cells[c][0]];
      const double x1 = mesh->vx[mesh->cells[c][1]];
      const double hc = x1 - x0;
      for (int q = 0; q < s.nq; ++q) {
        const int idx = c * s.nq + q;
        const double t = kGaussT[q];
        s.qw[idx] = kGaussW[q] * hc;
        s.qx[idx] = x0 + hc * t;
        s.qN[idx * 2] = 1.0 - t;
        s.qN[idx * 2 + 1] = t;
        s.qdN[idx * 2] = -1.0 / hc;
        s.qdN[idx * 2 + 1] = 1.0 / hc;
      }
    }
  } else {
    s.ndof_cell = 6;
    const int nv = mesh->n_vertices();
    // Edge midpoint dofs: enumerate unique vertex pairs.
    std::map<std::pair<int, int>, int> edge_id;
    auto edge_dof = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = edge_id.find(key);
      if (it != edge_id.end()) return it->second;
      const int id = nv + static_cast<int>(edge_id.size());
      edge_id.emplace(key, id);
      return id;
    };
    s.cell_dofs.resize(nc * 6);
    for (int c = 0; c < nc; ++c) {
      const auto& cv = mesh->cells[c];
      s.cell_dofs[6 * c + 0] = cv[0];
      s.cell_dofs[6 * c + 1] = cv[1];
      s.cell_dofs[6 * c + 2] = cv[2];
      s.cell_dofs[6 * c + 3] = edge_dof(cv[0], cv[1]);
      s.cell_dofs[6 * c + 4] = edge_dof(cv[1], cv[2]);
      s.cell_dofs[6 * c + 5] = edge_dof(cv[2], cv[0]);
    }
    s.n_scalar = nv + static_cast<int>(edge_id.size());
    s.dof_x.assign(s.n_scalar, 0.0);
    s.dof_y.assign(s.n_scalar, 0.0);
    for (int v = 0; v < nv; ++v) {
      s.dof_x[v] = mesh->vx[v];
      s.dof_y[v] = mesh->vy[v];
    }
    for (const auto& [key, id] : edge_id) {
      s.dof_x[id] = 0.5 * (mesh->vx[key.first] + mesh->vx[key.second]);
      s.dof_y[id] = 0.5 * (mesh->vy[key.first] + mesh->vy[key.second]);
    }

    s.nq = kNq2d;
    double xi[kNq2d], eta[kNq2d], w[kNq2d];
    tri_rule(xi, eta, w);
    s.qw.resize(nc * s.nq);
    s.qx.resize(nc * s.nq);
    s.qy.resize(nc * s.nq);
    s.qN.resize(nc * s.nq * 6);
    s.qdN.resize(nc * s.nq * 6 * 2);
    s.cell_lap.resize(nc * 6);
    double N[6], dxi[6], deta[6];
    for (int c = 0; c < nc; ++c) {
      const auto& cv = mesh->cells[c];
      const double x0 = mesh->vx[cv[0]], y0 = mesh->vy[cv[0]];
      const double j00 = mesh->vx[cv[1]] - x0, j01 = mesh->vx[cv[2]] - x0;
      const double j10 = mesh->vy[cv[1]] - y0, j11 = mesh->vy[cv[2]] - y0;
      const double det = j00 * j11 - j01 * j10;  // 2 * area, positive (CCW)
      // J^{-1} rows; physical grad = J^{-T} ref grad.
      const double i00 = j11 / det, i01 = -j01 / det;
      const double i10 = -j10 / det, i11 = j00 / det;
      for (int l = 0; l < 6; ++l) {
        // Delta N = sum_kl H_kl (C C^T)_kl with C = J^{-1} and constant
        // reference Hessian H; (C C^T)_kl dots ROWS of C.
        const double hxx = kP2Hess[l][0], hxy = kP2Hess[l][1], hyy = kP2Hess[l][3];
        const double lap = hxx * (i00 * i00 + i01 * i01) +
                           2.0 * hxy * (i00 * i10 + i01 * i11) +
                           hyy * (i10 * i10 + i11 * i11);
        s.cell_lap[c * 6 + l] = lap;
      }
      for (int q = 0; q < s.nq; ++q) {
        const int idx = c * s.nq + q;
        p2_shapes(xi[q], eta[q], N, dxi, deta);
        s.qw[idx] = w[q] * 0.5 * det;
        s.qx[idx] = x0 + j00 * xi[q] + j01 * eta[q];
        s.qy[idx] = y0 + j10 * xi[q] + j11 * eta[q];
        for (int l = 0; l < 6; ++l) {
          s.qN[idx * 6 + l] = N[l];
          s.qdN[(idx * 6 + l) * 2 + 0] = i00 * dxi[l] + i10 * deta[l];
          s.qdN[(idx * 6 + l) * 2 + 1] = i01 * dxi[l] + i11 * deta[l];
        }
      }
    }
  }

  // Cache the step-invariant operators once per space.
  s.M = assemble_mass(s);
  s.K = assemble_stiffness(s);
  if (degree == 2) s.B = assemble_bilaplacian(s);
  return sp;
}

Field interpolate(const SpacePtr& space, const PointFn& f) {
  Field u(space);
  const int n = space->n_scalar;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d v = f(space->dof_x[i], space->dof_y[i]);
    for (int c = 0; c < 3; ++c) u.coeffs[c * n + i] = v[c];
  }
  return u;
}

Eigen::Vector3d eval_field(const Field& u, double x, double y) {
  const FeSpace& s = *u.space;
  const Mesh& m = *s.mesh;
  const int c = locate_cell(m, x, y);
  const int n = s.n_scalar;
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  if (m.dim == 1) {
    const double x0 = m.vx[m.cells[c][0]], x1 = m.vx[m.cells[c][1]];
    const double t = (x - x0) / (x1 - x0);
    const double N[2] = {1.0 - t, t};
    for (int l = 0; l < 2; ++l) {
      const int d = s.cell_dofs[2 * c + l];
      for (int k = 0; k < 3; ++k) out[k] += u.coeffs[k * n + d] * N[l];
    }
  } else {
    const auto& cv = m.cells[c];
    const double x0 = m.vx[cv[0]], y0 = m.vy[cv[0]];
    const double j00 = m.vx[cv[1]] - x0, j01 = m.vx[cv[2]] - x0;
    const double j10 = m.vy[cv[1]] - y0, j11 = m.vy[cv[2]] - y0;
    const double det = j00 * j11 - j01 * j10;
    const double xi = (j11 * (x - x0) - j01 * (y - y0)) / det;
    const double eta = (-j10 * (x - x0) + j00 * (y - y0)) / det;
    double N[6], dxi[6], deta[6];
    p2_shapes(xi, eta, N, dxi, deta);
    for (int l = 0; l < 6; ++l) {
      const int d = s.cell_dofs[6 * c + l];
      for (int k = 0; k < 3; ++k) out[k] += u.coeffs[k * n + d] * N[l];
    }
  }
  return out;
}

Eigen::Vector3d field_value_at_q(const Field& u, int cell, int q) {
  const FeSpace& s = *u.space;
  const int idx = cell * s.nq + q;
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  for (int l = 0; l < s.ndof_cell; ++l) {
    const double N = s.qN[idx * s.ndof_cell + l];
    const int d = s.cell_dofs[cell * s.ndof_cell + l];
    for (int k = 0; k < 3; ++k) m[k] += u.coeffs[k * s.n_scalar + d] * N;
  }
  return m;
}

Eigen::Matrix<double, 3, 2> field_grad_at_q(const Field& u, int cell, int q) {
  const FeSpace& s = *u.space;
  const int dim = s.mesh->dim;
  const int idx = cell * s.nq + q;
  Eigen::Matrix<double, 3, 2> g = Eigen::Matrix<double, 3, 2>::Zero();
  for (int l = 0; l < s.ndof_cell; ++l) {
    const int d = s.cell_dofs[cell * s.ndof_cell + l];
    for (int a = 0; a < dim; ++a) {
      const double dN = s.qdN[(idx * s.ndof_cell + l) * dim + a];
      for (int k = 0; k < 3; ++k) g(k, a) += u.coeffs[k * s.n_scalar + d] * dN;
    }
  }
  return g;
}

Eigen::Vector3d field_lap_on_cell(const Field& u, int cell) {
  const FeSpace& s = *u.space;
  Eigen::Vector3d lap = Eigen::Vector3d::Zero();
  for (int l = 0; l < s.ndof_cell; ++l) {
    const double dl = s.cell_lap[cell * s.ndof_cell + l];
    const int d = s.cell_dofs[cell * s.ndof_cell + l];
    for (int k = 0; k < 3; ++k) lap[k] += u.coeffs[k * s.n_scalar + d] * dl;
  }
  return lap;
}

void dump_field(const Field& u, std::ostream& os) {
  const FeSpace& s = *u.space;
  os << "llb-field dim=" << s.mesh->dim << " degree=" << s.degree
     << " ndofs=" << s.n_scalar << "\n";
  for (int i = 0; i < s.n_scalar; ++i) {
    os << fmt_g17(s.dof_x[i]);
    if (s.mesh->dim == 2) os << ' ' << fmt_g17(s.dof_y[i]);
    for (int c = 0; c < 3; ++c) os << ' ' << fmt_g17(u.coeffs[c * s.n_scalar + i]);
    os << '\n';
  }
}

}  // namespace llb
