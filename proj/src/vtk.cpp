#include "nsbiot/vtk.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace nsbiot {

VtkDataset VtkDataset::from_mesh(const TriangleMesh& mesh) {
  VtkDataset d;
  d.points = mesh.vertices();
  d.cells.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) d.cells.push_back(mesh.triangle(t));
  return d;
}

void VtkDataset::add_point_scalar(const std::string& name, const std::vector<double>& v) {
  if (v.size() != points.size()) throw std::invalid_argument("point array '" + name + "' has the wrong size");
  point_data[name] = {1, v};
}

void VtkDataset::add_point_vector(const std::string& name, const std::vector<Vec2>& v) {
  if (v.size() != points.size()) throw std::invalid_argument("point array '" + name + "' has the wrong size");
  VtkArray a{3, {}};
  for (const Vec2& p : v) a.values.insert(a.values.end(), {p.x(), p.y(), 0.0});
  point_data[name] = std::move(a);
}

void VtkDataset::add_cell_scalar(const std::string& name, const std::vector<double>& v) {
  if (v.size() != cells.size()) throw std::invalid_argument("cell array '" + name + "' has the wrong size");
  cell_data[name] = {1, v};
}

void VtkDataset::add_cell_vector(const std::string& name, const std::vector<Vec2>& v) {
  if (v.size() != cells.size()) throw std::invalid_argument("cell array '" + name + "' has the wrong size");
  VtkArray a{3, {}};
  for (const Vec2& p : v) a.values.insert(a.values.end(), {p.x(), p.y(), 0.0});
  cell_data[name] = std::move(a);
}

namespace {

void write_arrays(std::ostream& out, const std::map<std::string, VtkArray>& arrays) {
  for (const auto& [name, a] : arrays) {
    if (a.components == 1) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    } else {
      out << "VECTORS " << name << " double\n";
    }
    for (std::size_t i = 0; i < a.values.size(); i += a.components) {
      for (int c = 0; c < a.components; ++c) out << (c ? " " : "") << a.values[i + c];
      out << '\n';
    }
  }
}

}  // namespace

void write_vtk(const VtkDataset& d, const std::string& path, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << d.points.size() << " double\n";
  for (const Vec2& p : d.points) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << d.cells.size() << ' ' << 4 * d.cells.size() << '\n';
  for (const auto& c : d.cells) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << d.cells.size() << '\n';
  for (std::size_t i = 0; i < d.cells.size(); ++i) out << "5\n";
  if (!d.point_data.empty()) {
    out << "POINT_DATA " << d.points.size() << '\n';
    write_arrays(out, d.point_data);
  }
  if (!d.cell_data.empty()) {
    out << "CELL_DATA " << d.cells.size() << '\n';
    write_arrays(out, d.cell_data);
  }
  out.flush();
  if (!out) throw IoError("error while writing '" + path + "'");
}

VtkDataset read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  VtkDataset d;
  std::string word;
  std::map<std::string, VtkArray>* section = nullptr;
  std::size_t count = 0;
  auto fail = [&](const std::string& what) { throw IoError(path + ": " + what); };
  std::string line;
  for (int i = 0; i < 4 && std::getline(in, line); ++i) {
  }
  while (in >> word) {
    if (word == "POINTS") {
      std::string type;
      in >> count >> type;
      d.points.resize(count);
      for (auto& p : d.points) {
        double z;
        in >> p.x() >> p.y() >> z;
      }
    } else if (word == "CELLS") {
      std::size_t n, total;
      in >> n >> total;
      d.cells.resize(n);
      for (auto& c : d.cells) {
        int k;
        in >> k;
        if (k != 3) fail("only triangles are supported");
        in >> c[0] >> c[1] >> c[2];
      }
    } else if (word == "CELL_TYPES") {
      std::size_t n;
      in >> n;
      for (std::size_t i = 0; i < n; ++i) in >> word;
    } else if (word == "POINT_DATA") {
      in >> count;
      section = &d.point_data;
    } else if (word == "CELL_DATA") {
      in >> count;
      section = &d.cell_data;
    } else if (word == "SCALARS" || word == "VECTORS") {
      if (!section) fail("array outside a data section");
      std::string name, type;
      in >> name >> type;
      VtkArray a;
      a.components = word == "SCALARS" ? 1 : 3;
      if (word == "SCALARS") {
        int nc;
        std::string lt, table;
        in >> nc >> lt >> table;
      }
      a.values.resize(count * a.components);
      for (double& v : a.values) in >> v;
      (*section)[name] = std::move(a);
    } else {
      fail("unexpected token '" + word + "'");
    }
    if (!in) fail("truncated file");
  }
  return d;
}

}  // namespace nsbiot
