#include "nsbiot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <sstream>

namespace nsbiot {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

Vec2 rotate_minus_90(const Vec2& v) { return {v.y(), -v.x()}; }

}  // namespace

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::None: return "none";
    case BoundaryTag::FluidDirichlet: return "fluid_dirichlet";
    case BoundaryTag::FluidNeumann: return "fluid_neumann";
    case BoundaryTag::PoroDirichlet: return "poro_dirichlet";
    case BoundaryTag::PoroNeumann: return "poro_neumann";
    case BoundaryTag::Interface: return "interface";
  }
  return "?";
}

TriangleMesh::TriangleMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                           Subdomain subdomain)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), subdomain_(subdomain) {
  std::map<std::uint64_t, int> ids;
  tri_edges_.resize(triangles_.size());
  tri_edge_signs_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3];
      const int b = tri[(i + 2) % 3];
      if (a < 0 || b < 0 || a >= num_vertices() || b >= num_vertices()) {
        throw MeshError("triangle " + std::to_string(t) + " references a missing vertex");
      }
      const auto key = edge_key(a, b);
      auto [it, inserted] = ids.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_tris_.push_back({static_cast<int>(t), -1});
      } else {
        auto& owners = edge_tris_[it->second];
        if (owners[1] >= 0) {
          throw MeshError("edge " + std::to_string(it->second) + " shared by more than 2 triangles");
        }
        owners[1] = static_cast<int>(t);
      }
      tri_edges_[t][i] = it->second;
      // CCW traversal a -> b has its outward normal on the right.
      tri_edge_signs_[t][i] = a < b ? 1 : -1;
    }
  }
  tags_.assign(edges_.size(), BoundaryTag::None);
}

int TriangleMesh::local_edge_index(int t, int e) const {
  for (int i = 0; i < 3; ++i) {
    if (tri_edges_[t][i] == e) return i;
  }
  throw MeshError("edge " + std::to_string(e) + " is not part of triangle " + std::to_string(t));
}

std::vector<int> TriangleMesh::edges_with_tag(BoundaryTag tag) const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e) {
    if (is_boundary_edge(e) && tags_[e] == tag) out.push_back(e);
  }
  return out;
}

std::vector<int> TriangleMesh::boundary_edges() const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e) {
    if (is_boundary_edge(e)) out.push_back(e);
  }
  return out;
}

double TriangleMesh::signed_area(int t) const {
  const auto& tri = triangles_[t];
  const Vec2 a = vertices_[tri[1]] - vertices_[tri[0]];
  const Vec2 b = vertices_[tri[2]] - vertices_[tri[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double TriangleMesh::area(int t) const { return std::abs(signed_area(t)); }

double TriangleMesh::diameter(int t) const {
  const auto& tri = triangles_[t];
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    d = std::max(d, (vertices_[tri[i]] - vertices_[tri[(i + 1) % 3]]).norm());
  }
  return d;
}

double TriangleMesh::max_diameter() const {
  double h = 0.0;
  for (int t = 0; t < num_triangles(); ++t) h = std::max(h, diameter(t));
  return h;
}

double TriangleMesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += area(t);
  return a;
}

double TriangleMesh::edge_length(int e) const {
  return (vertices_[edges_[e][1]] - vertices_[edges_[e][0]]).norm();
}

Vec2 TriangleMesh::edge_midpoint(int e) const {
  return 0.5 * (vertices_[edges_[e][0]] + vertices_[edges_[e][1]]);
}

Vec2 TriangleMesh::edge_normal(int e) const {
  return rotate_minus_90(vertices_[edges_[e][1]] - vertices_[edges_[e][0]]).normalized();
}

Vec2 TriangleMesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

void TriangleMesh::validate(bool require_tags) const {
  for (int t = 0; t < num_triangles(); ++t) {
    if (!(signed_area(t) > 0.0)) {
      throw MeshError("triangle " + std::to_string(t) + " has non-positive signed area");
    }
  }
  for (int e = 0; e < num_edges(); ++e) {
    const auto& owners = edge_tris_[e];
    if (owners[1] >= 0) {
      const int s0 = edge_sign(owners[0], local_edge_index(owners[0], e));
      const int s1 = edge_sign(owners[1], local_edge_index(owners[1], e));
      if (s0 != -s1) throw MeshError("edge " + std::to_string(e) + " has inconsistent orientation");
      if (tags_[e] != BoundaryTag::None) {
        throw MeshError("interior edge " + std::to_string(e) + " carries a boundary tag");
      }
    } else if (require_tags && tags_[e] == BoundaryTag::None) {
      throw MeshError("boundary edge " + std::to_string(e) + " is untagged");
    }
  }
}

TriangleMesh build_rectangle_mesh(const Rectangle& bounds, int nx, int ny, Diagonal diagonal,
                                  Subdomain subdomain, const std::vector<Rectangle>& holes) {
  if (nx < 1 || ny < 1) throw MeshError("rectangle mesh needs nx, ny >= 1");
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0)) {
    throw MeshError("degenerate rectangle");
  }
  const double dx = bounds.width() / nx;
  const double dy = bounds.height() / ny;
  auto grid_point = [&](int i, int j) {
    // Snap the far edges exactly onto the bounds.
    const double x = i == nx ? bounds.x1 : bounds.x0 + i * dx;
    const double y = j == ny ? bounds.y1 : bounds.y0 + j * dy;
    return Vec2(x, y);
  };

  std::vector<int> grid_ids((nx + 1) * (ny + 1), -1);
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  auto vertex_id = [&](int i, int j) {
    int& id = grid_ids[j * (nx + 1) + i];
    if (id < 0) {
      id = static_cast<int>(vertices.size());
      vertices.push_back(grid_point(i, j));
    }
    return id;
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 center = 0.5 * (grid_point(i, j) + grid_point(i + 1, j + 1));
      const bool skip = std::any_of(holes.begin(), holes.end(),
                                    [&](const Rectangle& r) { return r.contains(center); });
      if (skip) continue;
      const int a = vertex_id(i, j);
      const int b = vertex_id(i + 1, j);
      const int c = vertex_id(i + 1, j + 1);
      const int d = vertex_id(i, j + 1);
      switch (diagonal) {
        case Diagonal::Left:
          triangles.push_back({a, b, d});
          triangles.push_back({b, c, d});
          break;
        case Diagonal::Right:
          triangles.push_back({a, b, c});
          triangles.push_back({a, c, d});
          break;
        case Diagonal::Crisscross: {
          const int m = static_cast<int>(vertices.size());
          vertices.push_back(center);
          triangles.push_back({a, b, m});
          triangles.push_back({b, c, m});
          triangles.push_back({c, d, m});
          triangles.push_back({d, a, m});
          break;
        }
      }
    }
  }
  if (triangles.empty()) throw MeshError("rectangle mesh is empty after removing holes");
  return TriangleMesh(std::move(vertices), std::move(triangles), subdomain);
}

TriangleMesh tag_boundaries(TriangleMesh mesh, const std::vector<TagRule>& rules) {
  for (int e : mesh.boundary_edges()) {
    const Vec2 mid = mesh.edge_midpoint(e);
    int hits = 0;
    BoundaryTag tag = BoundaryTag::None;
    for (const auto& rule : rules) {
      if (rule.matches(mid)) {
        ++hits;
        tag = rule.tag;
      }
    }
    if (hits != 1) {
      std::ostringstream msg;
      msg << "boundary edge " << e << " at (" << mid.x() << ", " << mid.y() << ") matched "
          << hits << " tag rules";
      throw MeshError(msg.str());
    }
    mesh.set_tag(e, tag);
  }
  return mesh;
}

TriangleMesh refine_uniform(const TriangleMesh& mesh) {
  std::vector<Vec2> vertices = mesh.vertices();
  std::vector<int> midpoint(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    midpoint[e] = static_cast<int>(vertices.size());
    vertices.push_back(mesh.edge_midpoint(e));
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangle(t);
    const int m0 = midpoint[mesh.triangle_edge(t, 0)];
    const int m1 = midpoint[mesh.triangle_edge(t, 1)];
    const int m2 = midpoint[mesh.triangle_edge(t, 2)];
    triangles.push_back({v[0], m2, m1});
    triangles.push_back({m2, v[1], m0});
    triangles.push_back({m1, m0, v[2]});
    triangles.push_back({m0, m1, m2});
  }
  std::map<std::uint64_t, BoundaryTag> child_tags;
  for (int e : mesh.boundary_edges()) {
    const auto& ab = mesh.edge(e);
    child_tags[edge_key(ab[0], midpoint[e])] = mesh.tag(e);
    child_tags[edge_key(midpoint[e], ab[1])] = mesh.tag(e);
  }
  TriangleMesh fine(std::move(vertices), std::move(triangles), mesh.subdomain());
  for (int e : fine.boundary_edges()) {
    const auto& ab = fine.edge(e);
    auto it = child_tags.find(edge_key(ab[0], ab[1]));
    if (it != child_tags.end()) fine.set_tag(e, it->second);
  }
  return fine;
}

double TraceMesh::max_segment_length() const {
  double h = 0.0;
  for (int s = 0; s < num_segments(); ++s) h = std::max(h, segment_length(s));
  return h;
}

int TraceMesh::locate(double s) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
  int seg = static_cast<int>(it - breakpoints.begin()) - 1;
  return std::clamp(seg, 0, num_segments() - 1);
}

Vec2 TraceMesh::point_at(double s) const {
  const int seg = locate(s);
  const double w = (s - breakpoints[seg]) / segment_length(seg);
  return (1.0 - w) * points[seg] + w * points[seg + 1];
}

TraceMesh extract_trace_mesh(const TriangleMesh& mesh) {
  const auto edges = mesh.edges_with_tag(BoundaryTag::Interface);
  if (edges.empty()) throw MeshError("mesh has no interface edges");

  std::map<int, std::vector<int>> incident;
  for (int e : edges) {
    incident[mesh.edge(e)[0]].push_back(e);
    incident[mesh.edge(e)[1]].push_back(e);
  }
  std::vector<int> endpoints;
  for (const auto& [v, list] : incident) {
    if (list.size() == 1) {
      endpoints.push_back(v);
    } else if (list.size() != 2) {
      throw MeshError("interface is not a simple polyline at vertex " + std::to_string(v));
    }
  }
  if (endpoints.size() != 2) throw MeshError("interface is disconnected or closed");

  auto lex_less = [&](int a, int b) {
    const Vec2& pa = mesh.vertex(a);
    const Vec2& pb = mesh.vertex(b);
    constexpr double tol = 1e-12;
    if (std::abs(pa.x() - pb.x()) > tol) return pa.x() < pb.x();
    return pa.y() < pb.y();
  };
  int current = lex_less(endpoints[0], endpoints[1]) ? endpoints[0] : endpoints[1];

  TraceMesh trace;
  trace.breakpoints.push_back(0.0);
  trace.points.push_back(mesh.vertex(current));
  trace.vertex_ids.push_back(current);
  int previous_edge = -1;
  for (std::size_t step = 0; step < edges.size(); ++step) {
    const auto& list = incident[current];
    const int e = list[0] != previous_edge ? list[0] : (list.size() > 1 ? list[1] : -1);
    if (e < 0 || e == previous_edge) break;
    const int next = mesh.edge(e)[0] == current ? mesh.edge(e)[1] : mesh.edge(e)[0];
    trace.breakpoints.push_back(trace.breakpoints.back() + mesh.edge_length(e));
    trace.points.push_back(mesh.vertex(next));
    trace.vertex_ids.push_back(next);
    trace.parent_edges.push_back(e);
    previous_edge = e;
    current = next;
  }
  if (trace.parent_edges.size() != edges.size()) throw MeshError("interface is disconnected");
  return trace;
}

TraceMesh merge_trace_partitions(const TraceMesh& first, const TraceMesh& second,
                                 double tolerance) {
  const double scale = std::max(1.0, std::max(first.length(), second.length()));
  const double tol = tolerance * scale;
  if ((first.points.front() - second.points.front()).norm() > tol ||
      (first.points.back() - second.points.back()).norm() > tol ||
      std::abs(first.length() - second.length()) > tol) {
    throw MeshError("trace partitions do not share their endpoints");
  }

  std::vector<double> all = first.breakpoints;
  all.insert(all.end(), second.breakpoints.begin(), second.breakpoints.end());
  std::sort(all.begin(), all.end());

  TraceMesh merged;
  for (double s : all) {
    if (merged.breakpoints.empty() || s - merged.breakpoints.back() > tol) {
      merged.breakpoints.push_back(s);
    }
  }
  // Pin the end to the first trace's value so both endpoints coincide exactly.
  merged.breakpoints.back() = first.breakpoints.back();
  for (double s : merged.breakpoints) merged.points.push_back(first.point_at(s));
  merged.points.front() = first.points.front();
  merged.points.back() = first.points.back();

  for (int k = 0; k < merged.num_segments(); ++k) {
    const double mid = 0.5 * (merged.breakpoints[k] + merged.breakpoints[k + 1]);
    merged.source_segments[0].push_back(first.locate(mid));
    merged.source_segments[1].push_back(second.locate(mid));
  }
  return merged;
}

void dump_mesh(const TriangleMesh& mesh, std::ostream& out) {
  out << "# subdomain " << (mesh.subdomain() == Subdomain::Fluid ? "fluid" : "poroelastic")
      << "\n";
  out.precision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    out << "vertex " << v << ' ' << mesh.vertex(v).x() << ' ' << mesh.vertex(v).y() << '\n';
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    out << "triangle " << t << ' ' << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  }
  for (int e : mesh.boundary_edges()) {
    out << "edge " << e << ' ' << mesh.edge(e)[0] << ' ' << mesh.edge(e)[1] << ' '
        << to_string(mesh.tag(e)) << '\n';
  }
}

}  // namespace nsbiot
