#include "thinfilm/mesh.hpp"

#include <cmath>

namespace thinfilm {

PlanarMesh::PlanarMesh(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 2 || ny < 2) throw DomainError("planar mesh: need nx, ny >= 2");
  if (!(lx > 0) || !(ly > 0) || !std::isfinite(lx) || !std::isfinite(ly))
    throw DomainError("planar mesh: side lengths must be positive and finite");
  cell_edges_.resize(cell_count());
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) {
      if (i + 1 < nx_) {
        cell_edges_[cell(i, j)].push_back(static_cast<int>(edges_.size()));
        cell_edges_[cell(i + 1, j)].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({cell(i, j), cell(i + 1, j), 0, hy()});
      }
      if (j + 1 < ny_) {
        cell_edges_[cell(i, j)].push_back(static_cast<int>(edges_.size()));
        cell_edges_[cell(i, j + 1)].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({cell(i, j), cell(i, j + 1), 1, hx()});
      }
    }
}

bool PlanarMesh::boundary_node(int n) const {
  const int i = n % (nx_ + 1), j = n / (nx_ + 1);
  return i == 0 || j == 0 || i == nx_ || j == ny_;
}

std::array<int, 4> PlanarMesh::cell_nodes(int c) const {
  const int i = c % nx_, j = c / nx_;
  return {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
}

Vec2 PlanarMesh::cell_center(int c) const {
  const int i = c % nx_, j = c / nx_;
  return {(i + 0.5) * hx(), (j + 0.5) * hy()};
}

SlabMesh::SlabMesh(PlanarMesh base, int layers) : base_(std::move(base)), layers_(layers) {
  if (layers < 1) throw DomainError("slab mesh: need at least one layer");
  const int nx = base_.nx(), ny = base_.ny();
  cell_faces_.resize(cell_count());
  auto add = [&](int a, int b, int axis, double area) {
    cell_faces_[a].push_back(static_cast<int>(faces_.size()));
    cell_faces_[b].push_back(static_cast<int>(faces_.size()));
    faces_.push_back({a, b, axis, area});
  };
  for (int k = 0; k < layers_; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int c = cell(base_.cell(i, j), k);
        if (i + 1 < nx) add(c, cell(base_.cell(i + 1, j), k), 0, base_.hy() * hz());
        if (j + 1 < ny) add(c, cell(base_.cell(i, j + 1), k), 1, base_.hx() * hz());
        if (k + 1 < layers_) add(c, cell(base_.cell(i, j), k + 1), 2, base_.cell_area());
      }
}

std::array<int, 8> SlabMesh::cell_nodes(int c) const {
  const std::array<int, 4> p = base_.cell_nodes(planar_cell_of(c));
  const int k = layer_of(c);
  return {node(p[0], k),     node(p[1], k),     node(p[2], k),     node(p[3], k),
          node(p[0], k + 1), node(p[1], k + 1), node(p[2], k + 1), node(p[3], k + 1)};
}

Vec3 SlabMesh::cell_center(int c) const {
  const Vec2 xy = base_.cell_center(planar_cell_of(c));
  return {xy.x(), xy.y(), -1.0 + (layer_of(c) + 0.5) * hz()};
}

}  // namespace thinfilm
