#include "thinfilm/field_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace thinfilm {

void write_field(std::ostream& out, const FieldDump& d) {
  const std::size_t per_row = static_cast<std::size_t>(d.nx) * d.components;
  const std::size_t rows = static_cast<std::size_t>(d.ny) * (d.layers > 0 ? d.layers : 1);
  if (d.values.size() != per_row * rows) throw DomainError("field dump: value count does not match the header");
  out << "# thinfilm field\n";
  out << "field " << d.field << "\n";
  out << "nx " << d.nx << "\n";
  out << "ny " << d.ny << "\n";
  if (d.layers > 0) out << "layers " << d.layers << "\n";
  out << "components " << d.components << "\n";
  out << std::setprecision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < per_row; ++k) {
      if (k) out << ' ';
      out << d.values[r * per_row + k];
    }
    out << '\n';
  }
}

void write_field(const std::string& path, const FieldDump& dump) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_field(out, dump);
}

FieldDump read_field(std::istream& in) {
  FieldDump d;
  std::string line;
  bool header_done = false;
  while (!header_done && std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "field") ls >> d.field;
    else if (key == "nx") ls >> d.nx;
    else if (key == "ny") ls >> d.ny;
    else if (key == "layers") ls >> d.layers;
    else if (key == "components") {
      ls >> d.components;
      header_done = true;
    } else {
      throw DomainError("field dump: unexpected header line '" + line + "'");
    }
  }
  if (!header_done || d.nx <= 0 || d.ny <= 0 || d.components <= 0) throw DomainError("field dump: incomplete header");
  double v;
  while (in >> v) d.values.push_back(v);
  const std::size_t expected =
      static_cast<std::size_t>(d.nx) * d.ny * d.components * static_cast<std::size_t>(d.layers > 0 ? d.layers : 1);
  if (d.values.size() != expected) throw DomainError("field dump: value count does not match the header");
  return d;
}

FieldDump read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read field dump '" + path + "'");
  return read_field(in);
}

FieldDump phase_dump(const PhaseField& chi, int nx, int ny, int layers) {
  FieldDump d{"phase", nx, ny, layers, 1, {}};
  for (std::uint8_t v : chi.values) d.values.push_back(v);
  return d;
}

FieldDump displacement_dump(const Displacement& u, int nodes_x, int nodes_y, int node_layers) {
  FieldDump d{"displacement", nodes_x, nodes_y, node_layers, 3, {}};
  d.values.assign(u.data(), u.data() + u.size());
  return d;
}

PhaseField phase_from_dump(const FieldDump& dump) {
  if (dump.field != "phase" || dump.components != 1) throw DomainError("field dump is not a phase field");
  PhaseField chi;
  for (double v : dump.values) {
    if (v != 0.0 && v != 1.0) throw DomainError("phase field dump holds a value other than 0 or 1");
    chi.values.push_back(static_cast<std::uint8_t>(v));
  }
  return chi;
}

}  // namespace thinfilm
