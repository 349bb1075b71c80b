#include "llb/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "llb/util.hpp"

namespace llb {

double Mesh::cell_measure(int c) const {
  const auto& cv = cells[c];
  if (dim == 1) return vx[cv[1]] - vx[cv[0]];
  const double ax = vx[cv[1]] - vx[cv[0]], ay = vy[cv[1]] - vy[cv[0]];
  const double bx = vx[cv[2]] - vx[cv[0]], by = vy[cv[2]] - vy[cv[0]];
  return 0.5 * (ax * by - ay * bx);  // positive: cells are CCW by construction
}

double Mesh::cell_diameter(int c) const {
  const auto& cv = cells[c];
  if (dim == 1) return vx[cv[1]] - vx[cv[0]];
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    const int i = cv[a], j = cv[(a + 1) % 3];
    d = std::max(d, std::hypot(vx[j] - vx[i], vy[j] - vy[i]));
  }
  return d;
}

double Mesh::h() const {
  double hmax = 0.0;
  for (int c = 0; c < n_cells(); ++c) hmax = std::max(hmax, cell_diameter(c));
  return hmax;
}

MeshPtr build_interval_mesh(double lx, int n) {
  if (n < 1 || lx <= 0.0)
    throw ConfigError("build_interval_mesh: need n >= 1 and lx > 0");
  auto m = std::make_shared<Mesh>();
  m->dim = 1;
  m->lx = lx;
  m->nx = n;
  m->vx.resize(n + 1);
  for (int i = 0; i <= n; ++i) m->vx[i] = lx * static_cast<double>(i) / n;
  m->cells.resize(n);
  for (int i = 0; i < n; ++i) m->cells[i] = {i, i + 1, -1};
  return m;
}

MeshPtr build_structured_tri_mesh(double lx, double ly, int nx, int ny) {
  if (nx < 1 || ny < 1 || lx <= 0.0 || ly <= 0.0)
    throw ConfigError("build_structured_tri_mesh: need nx,ny >= 1 and lx,ly > 0");
  auto m = std::make_shared<Mesh>();
  m->dim = 2;
  m->lx = lx;
  m->ly = ly;
  m->nx = nx;
  m->ny = ny;
  m->vx.resize((nx + 1) * (ny + 1));
  m->vy.resize((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const int v = j * (nx + 1) + i;
      m->vx[v] = lx * static_cast<double>(i) / nx;
      m->vy[v] = ly * static_cast<double>(j) / ny;
    }
  m->cells.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = j * (nx + 1) + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + (nx + 1);
      const int v11 = v01 + 1;
      m->cells.push_back({v00, v10, v11});  // below the (v00,v11) diagonal
      m->cells.push_back({v00, v11, v01});  // above it
    }
  return m;
}

int locate_cell(const Mesh& m, double x, double y) {
  if (m.dim == 1) {
    const double dx = m.lx / m.nx;
    int i = static_cast<int>(std::floor(x / dx));
    return std::clamp(i, 0, m.nx - 1);
  }
  const double dx = m.lx / m.nx, dy = m.ly / m.ny;
  const int i = std::clamp(static_cast<int>(std::floor(x / dx)), 0, m.nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(y / dy)), 0, m.ny - 1);
  const double xi = x / dx - i, eta = y / dy - j;
  const int quad = 2 * (j * m.nx + i);
  return (eta <= xi) ? quad : quad + 1;  // below/above the quad diagonal
}

MeshPtr refine(const MeshPtr& mesh) {
  if (!mesh) throw ConfigError("refine: null mesh");
  MeshPtr fine;
  if (mesh->dim == 1) {
    fine = build_interval_mesh(mesh->lx, 2 * mesh->nx);
  } else {
    fine = build_structured_tri_mesh(mesh->lx, mesh->ly, 2 * mesh->nx, 2 * mesh->ny);
  }
  auto f = std::const_pointer_cast<Mesh>(fine);
  f->parent = mesh;
  f->parent_cell.resize(f->n_cells());
  for (int c = 0; c < f->n_cells(); ++c) {
    const auto& cv = f->cells[c];
    double cx = 0.0, cy = 0.0;
    const int nv = (f->dim == 1) ? 2 : 3;
    for (int a = 0; a < nv; ++a) {
      cx += f->vx[cv[a]];
      if (f->dim == 2) cy += f->vy[cv[a]];
    }
    cx /= nv;
    cy /= nv;
    f->parent_cell[c] = locate_cell(*mesh, cx, cy);
  }
  return fine;
}

}  // namespace llb
