// Structured meshes: interval partitions in 1D, triangulated rectangles in 2D.
//
// 2D meshes split each grid quad along the (v00, v11) diagonal into two
// counter-clockwise triangles. Refinement rebuilds at doubled resolution,
// which for this fixed orientation coincides with 4-way triangle splitting,
// and records the child-to-parent cell map.
#pragma once

#include <array>
#include <memory>
#include <vector>

namespace llb {

struct Mesh {
  int dim = 1;                  // 1 or 2
  double lx = 1.0, ly = 1.0;    // domain extents; ly unused in 1D
  int nx = 0, ny = 0;           // structured resolution (1D: nx intervals)

  std::vector<double> vx, vy;   // vertex coordinates (vy empty in 1D)
  // Cell connectivity; 1D cells use entries [0,1] and set [2] = -1.
  std::vector<std::array<int, 3>> cells;

  // Set by refine(): the coarser mesh this one refines and, per fine cell,
  // the index of the coarse cell containing it.
  std::shared_ptr<const Mesh> parent;
  std::vector<int> parent_cell;

  int n_vertices() const { return static_cast<int>(vx.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }

  double cell_measure(int c) const;   // length (1D) or area (2D)
  double cell_diameter(int c) const;  // longest edge
  double h() const;                   // max cell diameter
};

using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr build_interval_mesh(double lx, int n);
MeshPtr build_structured_tri_mesh(double lx, double ly, int nx, int ny);

// Uniform dyadic refinement; result->parent == mesh.
MeshPtr refine(const MeshPtr& mesh);

// Structured cell lookup for a point of the domain (clamped to the boundary).
int locate_cell(const Mesh& mesh, double x, double y = 0.0);

}  // namespace llb
