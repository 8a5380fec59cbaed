#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace nsbiot;
using nsbiot::testing::unit_pair;

TEST_CASE("rectangle mesh counts") {
  const Rectangle sq{0, 1, 0, 1};
  auto m1 = build_rectangle_mesh(sq, 1, 1, Diagonal::Left, Subdomain::Fluid);
  CHECK(m1.num_triangles() == 2);
  CHECK(m1.num_vertices() == 4);
  auto m2 = build_rectangle_mesh(sq, 2, 2, Diagonal::Right, Subdomain::Fluid);
  CHECK(m2.num_triangles() == 8);
  CHECK(m2.num_vertices() == 9);
  auto m3 = build_rectangle_mesh(sq, 3, 3, Diagonal::Crisscross, Subdomain::Poroelastic);
  CHECK(m3.num_triangles() == 36);
  CHECK(m3.num_vertices() == 16 + 9);
  CHECK(m3.total_area() == doctest::Approx(1.0));
  m3.validate();
}

TEST_CASE("coarsest example 1 fluid mesh size and refinement sequence") {
  auto m = build_rectangle_mesh({0, 1, 0, 1}, 4, 4, Diagonal::Left, Subdomain::Fluid);
  double h = std::sqrt(2.0) / 4;
  for (int level = 0; level < 4; ++level) {
    CHECK(m.max_diameter() == doctest::Approx(h).epsilon(1e-12));
    m = refine_uniform(m);
    h /= 2;
  }
}

TEST_CASE("holes remove cells") {
  auto m = build_rectangle_mesh({0, 2, 0, 1}, 4, 2, Diagonal::Left, Subdomain::Fluid, {{0.5, 1.0, 0.0, 0.5}});
  CHECK(m.num_triangles() == 14);
  CHECK(m.total_area() == doctest::Approx(2.0 - 0.25));
  CHECK_THROWS_AS(build_rectangle_mesh({0, 1, 0, 1}, 1, 1, Diagonal::Left, Subdomain::Fluid, {{0, 1, 0, 1}}),
                  MeshError);
  CHECK_THROWS_AS(build_rectangle_mesh({0, 1, 0, 1}, 0, 1, Diagonal::Left, Subdomain::Fluid), MeshError);
}

TEST_CASE("edge orientation signs are opposite on interior edges") {
  auto m = build_rectangle_mesh({0, 1, 0, 1}, 3, 2, Diagonal::Crisscross, Subdomain::Fluid);
  for (int e = 0; e < m.num_edges(); ++e) {
    const auto& tris = m.edge_triangles(e);
    if (tris[1] < 0) continue;
    const int s0 = m.edge_sign(tris[0], m.local_edge_index(tris[0], e));
    const int s1 = m.edge_sign(tris[1], m.local_edge_index(tris[1], e));
    CHECK(s0 == -s1);
  }
  // The reference normal points out of the triangle with sign +1.
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const int e = m.triangle_edge(t, i);
      const Vec2 out = m.edge_midpoint(e) - m.centroid(t);
      CHECK(m.edge_sign(t, i) * m.edge_normal(e).dot(out) > 0.0);
    }
  }
}

TEST_CASE("example 1 tagging") {
  auto [fluid, poro] = unit_pair(4, 3, Diagonal::Left, Diagonal::Crisscross);
  fluid.validate(true);
  poro.validate(true);
  CHECK(fluid.edges_with_tag(BoundaryTag::FluidDirichlet).size() == 4);
  CHECK(fluid.edges_with_tag(BoundaryTag::FluidNeumann).size() == 8);
  CHECK(fluid.edges_with_tag(BoundaryTag::Interface).size() == 4);
  CHECK(poro.edges_with_tag(BoundaryTag::PoroDirichlet).size() == 3);
  CHECK(poro.edges_with_tag(BoundaryTag::PoroNeumann).size() == 6);
  CHECK(poro.edges_with_tag(BoundaryTag::Interface).size() == 3);
}

TEST_CASE("tag rules must cover every boundary edge exactly once") {
  auto m = build_rectangle_mesh({0, 1, 0, 1}, 2, 2, Diagonal::Left, Subdomain::Fluid);
  const TagRule bottom{[](const Vec2& x) { return x.y() < 1e-9; }, BoundaryTag::Interface};
  try {
    tag_boundaries(m, {bottom});
    FAIL("expected MeshError");
  } catch (const MeshError& e) {
    CHECK(std::string(e.what()).find("boundary edge") != std::string::npos);
    CHECK(std::string(e.what()).find("matched 0") != std::string::npos);
  }
  const TagRule all{[](const Vec2&) { return true; }, BoundaryTag::FluidDirichlet};
  CHECK_THROWS_AS(tag_boundaries(m, {bottom, all}), MeshError);
  CHECK_THROWS_AS(m.validate(true), MeshError);
}

TEST_CASE("uniform refinement") {
  auto m = build_rectangle_mesh({0, 1, 0, 1}, 1, 1, Diagonal::Left, Subdomain::Fluid);
  auto r = refine_uniform(m);
  CHECK(r.num_triangles() == 8);
  CHECK(r.num_vertices() == 9);
  r.validate();

  auto [fluid, poro] = unit_pair(2, 3, Diagonal::Left, Diagonal::Crisscross);
  auto rf = refine_uniform(fluid);
  auto rp = refine_uniform(poro);
  rf.validate(true);
  rp.validate(true);
  CHECK(rf.edges_with_tag(BoundaryTag::Interface).size() == 4);
  CHECK(rp.edges_with_tag(BoundaryTag::PoroNeumann).size() == 12);
  CHECK(rf.total_area() == doctest::Approx(1.0));
}

TEST_CASE("trace meshes and merge") {
  auto [fluid, poro] = unit_pair(2, 3);
  const TraceMesh tf = extract_trace_mesh(fluid);
  const TraceMesh tp = extract_trace_mesh(poro);
  REQUIRE(tf.num_points() == 3);
  REQUIRE(tp.num_points() == 4);
  CHECK(tf.breakpoints[1] == doctest::Approx(0.5));
  CHECK(tp.breakpoints[1] == doctest::Approx(1.0 / 3));
  CHECK(tp.breakpoints[2] == doctest::Approx(2.0 / 3));
  CHECK(tf.points.front().isApprox(Vec2(0, 0)));
  CHECK(tp.points.back().isApprox(Vec2(1, 0)));

  const TraceMesh merged = merge_trace_partitions(tf, tp);
  REQUIRE(merged.num_segments() == 4);
  const std::vector<double> expect{0, 1.0 / 3, 0.5, 2.0 / 3, 1};
  for (int i = 0; i < 5; ++i) CHECK(merged.breakpoints[i] == doctest::Approx(expect[i]).epsilon(1e-14));
  CHECK(merged.source_segments[0] == std::vector<int>{0, 0, 1, 1});
  CHECK(merged.source_segments[1] == std::vector<int>{0, 1, 1, 2});

  // identity and nested cases
  const TraceMesh self = merge_trace_partitions(tf, tf);
  CHECK(self.breakpoints == tf.breakpoints);
  auto [f4, p8] = unit_pair(4, 8);
  const TraceMesh fine = extract_trace_mesh(p8);
  const TraceMesh nested = merge_trace_partitions(extract_trace_mesh(f4), fine);
  REQUIRE(nested.num_points() == fine.num_points());
  for (int i = 0; i < fine.num_points(); ++i) CHECK(nested.breakpoints[i] == doctest::Approx(fine.breakpoints[i]));
  // merging twice changes nothing
  const TraceMesh again = merge_trace_partitions(merged, tp);
  CHECK(again.breakpoints == merged.breakpoints);
}

TEST_CASE("matching grids give identical traces") {
  auto [fluid, poro] = unit_pair(4, 4);
  const TraceMesh a = extract_trace_mesh(fluid);
  const TraceMesh b = extract_trace_mesh(poro);
  CHECK(a.breakpoints == b.breakpoints);
}

TEST_CASE("trace merge rejects different polylines") {
  auto [fluid, poro] = unit_pair(2, 2);
  TraceMesh tf = extract_trace_mesh(fluid);
  TraceMesh tp = extract_trace_mesh(poro);
  tp.breakpoints.back() = 1.5;
  tp.points.back() = Vec2(1.5, 0);
  CHECK_THROWS_AS(merge_trace_partitions(tf, tp), MeshError);
  auto no_iface = build_rectangle_mesh({0, 1, 0, 1}, 1, 1, Diagonal::Left, Subdomain::Fluid);
  CHECK_THROWS_AS(extract_trace_mesh(no_iface), MeshError);
}

TEST_CASE("trace locate and point_at") {
  auto [fluid, poro] = unit_pair(4, 3);
  const TraceMesh t = extract_trace_mesh(fluid);
  CHECK(t.locate(0.0) == 0);
  CHECK(t.locate(0.3) == 1);
  CHECK(t.locate(1.0) == 3);
  CHECK(t.locate(5.0) == 3);
  CHECK(t.point_at(0.6).isApprox(Vec2(0.6, 0.0)));
  CHECK(t.max_segment_length() == doctest::Approx(0.25));
}

TEST_CASE("dump_mesh lists nodes and elements") {
  auto m = build_rectangle_mesh({0, 1, 0, 1}, 1, 1, Diagonal::Left, Subdomain::Fluid);
  std::ostringstream out;
  dump_mesh(m, out);
  CHECK(out.str().find("4") != std::string::npos);
  CHECK(!out.str().empty());
}

TEST_CASE("malformed meshes are rejected") {
  CHECK_THROWS_AS(TriangleMesh({Vec2(0, 0), Vec2(1, 0)}, {{0, 1, 2}}, Subdomain::Fluid), MeshError);
  // clockwise triangle
  TriangleMesh cw({Vec2(0, 0), Vec2(0, 1), Vec2(1, 0)}, {{0, 1, 2}}, Subdomain::Fluid);
  CHECK_THROWS_AS(cw.validate(), MeshError);
}
