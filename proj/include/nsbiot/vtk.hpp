#pragma once

#include "nsbiot/mesh.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsbiot {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named arrays attached to a triangle mesh. Each array stores `components`
/// values per point or per cell, interleaved.
struct VtkArray {
  int components = 1;
  std::vector<double> values;
};

struct VtkDataset {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> cells;
  std::map<std::string, VtkArray> point_data;
  std::map<std::string, VtkArray> cell_data;

  static VtkDataset from_mesh(const TriangleMesh& mesh);
  void add_point_scalar(const std::string& name, const std::vector<double>& v);
  void add_point_vector(const std::string& name, const std::vector<Vec2>& v);
  void add_cell_scalar(const std::string& name, const std::vector<double>& v);
  void add_cell_vector(const std::string& name, const std::vector<Vec2>& v);
};

/// Legacy ASCII unstructured grid. Throws IoError when the file cannot be written.
void write_vtk(const VtkDataset& data, const std::string& path, const std::string& title = "nsbiot");
/// Reads files produced by write_vtk.
VtkDataset read_vtk(const std::string& path);

}  // namespace nsbiot
