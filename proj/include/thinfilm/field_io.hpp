#pragma once

#include "thinfilm/solve2d.hpp"

#include <iosfwd>
#include <string>

namespace thinfilm {

/// Plain-text field dump:
///
///   # thinfilm field
///   field phase|displacement
///   nx <entries per row>
///   ny <rows>
///   layers <planes>          (slab fields only)
///   components 1|3
///   <one line per row, rows ordered by plane then y, entries by x>
///
/// Phase dumps hold cell values, displacement dumps nodal vectors.
struct FieldDump {
  std::string field;
  int nx = 0, ny = 0, layers = 0;  // layers == 0 for planar fields
  int components = 1;
  std::vector<double> values;      // row-major, components innermost
};

void write_field(std::ostream& out, const FieldDump& dump);
void write_field(const std::string& path, const FieldDump& dump);
FieldDump read_field(std::istream& in);
FieldDump read_field(const std::string& path);

FieldDump phase_dump(const PhaseField& chi, int nx, int ny, int layers = 0);
FieldDump displacement_dump(const Displacement& u, int nodes_x, int nodes_y, int node_layers = 0);
PhaseField phase_from_dump(const FieldDump& dump);

}  // namespace thinfilm
