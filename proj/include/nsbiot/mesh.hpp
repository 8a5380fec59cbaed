#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsbiot {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Subdomain { Fluid, Poroelastic };

enum class BoundaryTag : unsigned char {
  None,            // interior edge
  FluidDirichlet,  // u_f prescribed (natural in the dual-mixed setting)
  FluidNeumann,    // sigma_f n prescribed (essential)
  PoroDirichlet,   // p_p prescribed (natural), eta_p = 0
  PoroNeumann,     // u_p . n prescribed (essential), eta_p = 0
  Interface,
};

const char* to_string(BoundaryTag tag);

enum class Diagonal { Left, Right, Crisscross };

struct Rectangle {
  double x0, x1, y0, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(const Vec2& p, double tol = 0.0) const {
    return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
  }
};

/// Conforming triangulation of one subdomain.
///
/// Local edge i of a triangle is the edge opposite its local vertex i, i.e.
/// (v[i+1], v[i+2]). A global edge (a, b) is stored with a < b; its reference
/// normal is the tangent b - a rotated by -90 degrees. `edge_sign(t, i)` is
/// +1 when that reference normal points out of triangle t and -1 otherwise, so
/// the two triangles sharing an interior edge always carry opposite signs.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  /// Builds edge connectivity from a vertex list and CCW triangles. All
  /// boundary edges start out untagged (BoundaryTag::None).
  TriangleMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
               Subdomain subdomain);

  Subdomain subdomain() const { return subdomain_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  int triangle_edge(int t, int local) const { return tri_edges_[t][local]; }
  int edge_sign(int t, int local) const { return tri_edge_signs_[t][local]; }
  /// Incident triangles of an edge; second entry is -1 on the boundary.
  const std::array<int, 2>& edge_triangles(int e) const { return edge_tris_[e]; }
  bool is_boundary_edge(int e) const { return edge_tris_[e][1] < 0; }
  /// Local index of edge e inside triangle t.
  int local_edge_index(int t, int e) const;

  BoundaryTag tag(int e) const { return tags_[e]; }
  void set_tag(int e, BoundaryTag tag) { tags_[e] = tag; }
  std::vector<int> edges_with_tag(BoundaryTag tag) const;
  std::vector<int> boundary_edges() const;

  double area(int t) const;
  double signed_area(int t) const;
  double diameter(int t) const;
  double max_diameter() const;
  double total_area() const;
  double edge_length(int e) const;
  Vec2 edge_midpoint(int e) const;
  /// Unit reference normal of a global edge (see class comment).
  Vec2 edge_normal(int e) const;
  Vec2 centroid(int t) const;

  /// Throws MeshError when a structural invariant is violated; with
  /// `require_tags`, also when a boundary edge is untagged.
  void validate(bool require_tags = false) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::array<int, 3>> tri_edge_signs_;
  std::vector<std::array<int, 2>> edge_tris_;
  std::vector<BoundaryTag> tags_;
  Subdomain subdomain_ = Subdomain::Fluid;
};

/// Structured nx-by-ny grid of the rectangle, each cell split along the chosen
/// diagonal (2 triangles) or along both diagonals (4 triangles, extra center
/// vertex). Cells whose center lies inside one of `holes` are omitted.
TriangleMesh build_rectangle_mesh(const Rectangle& bounds, int nx, int ny, Diagonal diagonal,
                                  Subdomain subdomain, const std::vector<Rectangle>& holes = {});

struct TagRule {
  std::function<bool(const Vec2& midpoint)> matches;
  BoundaryTag tag;
};

/// Tags every boundary edge with the unique rule that matches its midpoint.
TriangleMesh tag_boundaries(TriangleMesh mesh, const std::vector<TagRule>& rules);

/// Red refinement: each triangle into four congruent children; boundary tags
/// are inherited by the child edges.
TriangleMesh refine_uniform(const TriangleMesh& mesh);

/// Partition of the interface polyline by arc length.
///
/// Subdomain traces know the mesh edge and the mesh vertices behind each
/// segment and breakpoint. A merged trace instead records, per segment, the
/// index of the segment of each input trace that contains it.
struct TraceMesh {
  std::vector<double> breakpoints;  // arc length, strictly increasing
  std::vector<Vec2> points;         // coordinates of the breakpoints
  std::vector<int> parent_edges;    // subdomain edge per segment (subdomain traces)
  std::vector<int> vertex_ids;      // subdomain vertex per breakpoint (subdomain traces)
  std::array<std::vector<int>, 2> source_segments;  // merged traces only

  int num_segments() const { return static_cast<int>(breakpoints.size()) - 1; }
  int num_points() const { return static_cast<int>(breakpoints.size()); }
  double length() const { return breakpoints.back() - breakpoints.front(); }
  double segment_length(int s) const { return breakpoints[s + 1] - breakpoints[s]; }
  double max_segment_length() const;
  /// Segment containing arc-length coordinate s (clamped to the ends).
  int locate(double s) const;
  Vec2 point_at(double s) const;
};

/// Ordered trace of the Interface-tagged edges. The walk starts from the
/// lexicographically smallest endpoint so both subdomains agree on direction.
TraceMesh extract_trace_mesh(const TriangleMesh& mesh);

/// Common refinement of two traces of the same polyline.
TraceMesh merge_trace_partitions(const TraceMesh& first, const TraceMesh& second,
                                 double tolerance = 1e-10);

/// Plain-text node/element/edge-tag listing.
void dump_mesh(const TriangleMesh& mesh, std::ostream& out);

}  // namespace nsbiot
