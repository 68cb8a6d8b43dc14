#pragma once

#include "thinfilm/core.hpp"

#include <array>
#include <vector>

namespace thinfilm {

/// Uniform nx × ny grid on ω = [0, Lx] × [0, Ly]. Cells are numbered
/// row-major (c = j nx + i), nodes likewise (n = j (nx + 1) + i).
class PlanarMesh {
 public:
  PlanarMesh(int nx, int ny, double lx = 1.0, double ly = 1.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return lx_ / nx_; }
  double hy() const { return ly_ / ny_; }
  double cell_area() const { return hx() * hy(); }
  double area() const { return lx_ * ly_; }

  int cell_count() const { return nx_ * ny_; }
  int node_count() const { return (nx_ + 1) * (ny_ + 1); }
  int cell(int i, int j) const { return j * nx_ + i; }
  int node(int i, int j) const { return j * (nx_ + 1) + i; }
  bool boundary_node(int n) const;

  /// Corner nodes of a cell in the order (i,j), (i+1,j), (i,j+1), (i+1,j+1).
  std::array<int, 4> cell_nodes(int c) const;
  Vec2 cell_center(int c) const;

  /// Interior edge between two cells: `normal_axis` 0 for a vertical edge
  /// (normal e1), 1 for a horizontal edge (normal e2).
  struct Edge {
    int a, b;
    int normal_axis;
    double length;
  };
  const std::vector<Edge>& interior_edges() const { return edges_; }
  /// Indices into interior_edges() of the edges bounding cell c.
  const std::vector<int>& cell_edges(int c) const { return cell_edges_[c]; }

 private:
  int nx_, ny_;
  double lx_, ly_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> cell_edges_;
};

/// Rescaled slab Ω = ω × (-1, 1) with `layers` uniform transverse layers.
/// Cells are numbered c = k (nx ny) + planar cell, nodes n = k (planar nodes)
/// + planar node. Only the lateral boundary ∂ω × (-1, 1) is clamped.
class SlabMesh {
 public:
  SlabMesh(PlanarMesh base, int layers);

  const PlanarMesh& base() const { return base_; }
  int layers() const { return layers_; }
  double hz() const { return 2.0 / layers_; }
  double cell_volume() const { return base_.cell_area() * hz(); }
  double volume() const { return 2.0 * base_.area(); }

  int cell_count() const { return base_.cell_count() * layers_; }
  int node_count() const { return base_.node_count() * (layers_ + 1); }
  int cell(int planar_cell, int k) const { return k * base_.cell_count() + planar_cell; }
  int node(int planar_node, int k) const { return k * base_.node_count() + planar_node; }
  int planar_cell_of(int c) const { return c % base_.cell_count(); }
  int layer_of(int c) const { return c / base_.cell_count(); }
  bool lateral_boundary_node(int n) const { return base_.boundary_node(n % base_.node_count()); }

  /// Corner nodes, local index di + 2 dj + 4 dk.
  std::array<int, 8> cell_nodes(int c) const;
  Vec3 cell_center(int c) const;

  /// Interior face between two cells; normal_axis 2 is transverse.
  struct Face {
    int a, b;
    int normal_axis;
    double area;
  };
  const std::vector<Face>& interior_faces() const { return faces_; }
  const std::vector<int>& cell_faces(int c) const { return cell_faces_[c]; }

 private:
  PlanarMesh base_;
  int layers_;
  std::vector<Face> faces_;
  std::vector<std::vector<int>> cell_faces_;
};

}  // namespace thinfilm
