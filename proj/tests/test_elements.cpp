#include "helpers.hpp"

#include "nsbiot/elements.hpp"
#include "nsbiot/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsbiot;

namespace {

double integrate_reference(int order, const std::function<double(double, double)>& f) {
  const QuadratureRule& q = make_quadrature(order);
  double s = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const Vec2 xi = q.reference_point(i);
    s += q.weights[i] * f(xi.x(), xi.y());
  }
  return s;
}

// Exact integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!
double monomial_integral(int a, int b) {
  return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
}

}  // namespace

TEST_CASE("triangle rules integrate monomials exactly") {
  CHECK(integrate_reference(0, [](double, double) { return 1.0; }) == doctest::Approx(0.5));
  CHECK(integrate_reference(3, [](double x, double y) { return x * x * y; }) ==
        doctest::Approx(1.0 / 60).epsilon(1e-14));
  for (int order = 0; order <= kMaxTriangleOrder; ++order) {
    const QuadratureRule& q = make_quadrature(order);
    CHECK(q.order >= order);
    for (int i = 0; i < q.size(); ++i) {
      CHECK(q.weights[i] > 0.0);
      const auto& b = q.points[i];
      CHECK(b[0] + b[1] + b[2] == doctest::Approx(1.0));
    }
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) {
        const double got =
            integrate_reference(order, [&](double x, double y) { return std::pow(x, a) * std::pow(y, b); });
        CHECK(got == doctest::Approx(monomial_integral(a, b)).epsilon(1e-13));
      }
    }
  }
  CHECK_THROWS_AS(make_quadrature(-1), std::invalid_argument);
  CHECK_THROWS_AS(make_quadrature(kMaxTriangleOrder + 1), std::invalid_argument);
}

TEST_CASE("line rules") {
  const LineRule& r5 = make_line_quadrature(5);
  double s = 0.0;
  for (int i = 0; i < r5.size(); ++i) s += r5.weights[i] * std::pow(r5.points[i], 5);
  CHECK(s == doctest::Approx(1.0 / 6).epsilon(1e-14));
  for (int order = 0; order <= kMaxLineOrder; ++order) {
    const LineRule& r = make_line_quadrature(order);
    for (int k = 0; k <= order; ++k) {
      double v = 0.0;
      for (int i = 0; i < r.size(); ++i) v += r.weights[i] * std::pow(r.points[i], k);
      CHECK(v == doctest::Approx(1.0 / (k + 1)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(make_line_quadrature(kMaxLineOrder + 1), std::invalid_argument);
}

TEST_CASE("BDM1 reference basis is dual to the edge moments") {
  // Reference edges opposite vertex i: e0 = (1,0)-(0,1), e1 = (0,1)-(0,0), e2 = (0,0)-(1,0).
  const std::array<Vec2, 3> v{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const LineRule& line = make_line_quadrature(4);
  for (int j = 0; j < 6; ++j) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = v[(i + 1) % 3], b = v[(i + 2) % 3];
      const Vec2 tangent = b - a;
      const Vec2 normal = Vec2(tangent.y(), -tangent.x()).normalized();  // outward for CCW
      for (int k = 0; k < 2; ++k) {
        double moment = 0.0;
        for (int q = 0; q < line.size(); ++q) {
          const double s = line.points[q];
          const Vec2 x = a + s * tangent;
          // Lagrange function of endpoint (i + 1 + k) % 3 along the edge
          const double lam = k == 0 ? 1.0 - s : s;
          moment += line.weights[q] * tangent.norm() * reference_bdm1_basis(x).values[j].dot(normal) * lam;
        }
        CHECK(moment == doctest::Approx(j == 2 * i + k ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("Piola map") {
  const CellGeometry id = CellGeometry::from_vertices(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
  const PiolaValue same = piola_map(id, Vec2(0.3, -0.2), 1.5);
  CHECK(same.value.isApprox(Vec2(0.3, -0.2)));
  CHECK(same.divergence == doctest::Approx(1.5));

  const double s = 3.0;
  const CellGeometry scaled = CellGeometry::from_vertices(Vec2(0, 0), Vec2(s, 0), Vec2(0, s));
  CHECK(piola_map(scaled, Vec2(1, 0), 2.0).divergence == doctest::Approx(2.0 / (s * s)));

  // normal flux through a mapped edge is preserved
  const CellGeometry g = CellGeometry::from_vertices(Vec2(0.2, 0.1), Vec2(1.3, 0.4), Vec2(0.5, 1.7));
  const LineRule& line = make_line_quadrature(4);
  for (int j = 0; j < 6; ++j) {
    double ref = 0.0, phys = 0.0;
    // edge 2 of the reference: from (0,0) to (1,0), outward normal (0,-1)
    const Vec2 a = g.map(Vec2(0, 0)), b = g.map(Vec2(1, 0));
    const Vec2 t = b - a;
    const Vec2 n = Vec2(t.y(), -t.x()).normalized();
    for (int q = 0; q < line.size(); ++q) {
      const Vec2 xi(line.points[q], 0.0);
      const BdmBasis rb = reference_bdm1_basis(xi);
      ref += line.weights[q] * rb.values[j].dot(Vec2(0, -1));
      phys += line.weights[q] * t.norm() * piola_map(g, rb.values[j], rb.divergence[j]).value.dot(n);
    }
    CHECK(phys == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
  }
  CHECK_THROWS_AS(CellGeometry::from_vertices(Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)), MeshError);
}

TEST_CASE("BDM1 interpolation") {
  auto mesh = std::make_shared<const TriangleMesh>(
      build_rectangle_mesh({0, 1, 0, 1}, 3, 2, Diagonal::Crisscross, Subdomain::Fluid));
  const FunctionSpace V = FunctionSpace::bdm1_vector(mesh);
  CHECK(V.dof_count() == 2 * mesh->num_edges());

  const Vector zero = interpolate(V, VectorField([](const Vec2&) { return Vec2(0, 0); }));
  CHECK(zero.norm() == 0.0);

  // linear fields are reproduced exactly
  const VectorField lin = [](const Vec2& x) { return Vec2(1.0 + 2 * x.x() - x.y(), 0.5 * x.x() + 3 * x.y()); };
  const Vector c = interpolate(V, lin);
  const QuadratureRule& q = make_quadrature(4);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    const CellGeometry g = CellGeometry::of(*mesh, t);
    for (int i = 0; i < q.size(); ++i) {
      const Vec2 xi = q.reference_point(i);
      CHECK((evaluate_vector(V, c, t, xi) - lin(g.map(xi))).norm() < 1e-12);
      CHECK(evaluate_divergence(V, c, t, xi) == doctest::Approx(5.0));
    }
  }
  const Vector radial = interpolate(V, VectorField([](const Vec2& x) { return x; }));
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    CHECK(evaluate_divergence(V, radial, t, Vec2(0.2, 0.3)) == doctest::Approx(2.0));
  }

  // commuting property: cell mean of div of the interpolant equals the cell mean of div v
  const VectorField quad = [](const Vec2& x) { return Vec2(x.x() * x.x(), x.x() * x.y()); };
  const Vector cq = interpolate(V, quad);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    const CellGeometry g = CellGeometry::of(*mesh, t);
    double mean_h = 0.0, mean = 0.0;
    for (int i = 0; i < q.size(); ++i) {
      const Vec2 xi = q.reference_point(i);
      mean_h += q.weights[i] * evaluate_divergence(V, cq, t, xi);
      mean += q.weights[i] * 3.0 * g.map(xi).x();
    }
    CHECK(mean_h == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("BDM1 normal traces are continuous") {
  auto mesh = std::make_shared<const TriangleMesh>(
      build_rectangle_mesh({0, 1, 0, 1}, 2, 2, Diagonal::Left, Subdomain::Fluid));
  const FunctionSpace V = FunctionSpace::bdm1_vector(mesh);
  std::mt19937 rng(3);
  const Vector c = nsbiot::testing::random_vector(V.dof_count(), rng);
  for (int e = 0; e < mesh->num_edges(); ++e) {
    const auto& tris = mesh->edge_triangles(e);
    if (tris[1] < 0) continue;
    const Vec2 n = mesh->edge_normal(e);
    for (double s : {0.2, 0.7}) {
      const Vec2 x = (1 - s) * mesh->vertex(mesh->edge(e)[0]) + s * mesh->vertex(mesh->edge(e)[1]);
      const Vec2 xa = CellGeometry::of(*mesh, tris[0]).pullback(x);
      const Vec2 xb = CellGeometry::of(*mesh, tris[1]).pullback(x);
      CHECK(evaluate_vector(V, c, tris[0], xa).dot(n) ==
            doctest::Approx(evaluate_vector(V, c, tris[1], xb).dot(n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("space sizes and tensor rows") {
  auto mesh = std::make_shared<const TriangleMesh>(
      build_rectangle_mesh({0, 1, 0, 1}, 2, 2, Diagonal::Left, Subdomain::Fluid));
  CHECK(FunctionSpace::bdm1_tensor_rows(mesh).dof_count() == 4 * mesh->num_edges());
  CHECK(FunctionSpace::p0_skew(mesh).dof_count() == mesh->num_triangles());
  CHECK(FunctionSpace::p0_vector(mesh).dof_count() == 2 * mesh->num_triangles());
  CHECK(FunctionSpace::p1_vector(mesh).dof_count() == 2 * mesh->num_vertices());

  const FunctionSpace S = FunctionSpace::bdm1_tensor_rows(mesh);
  const TensorField m = [](const Vec2& x) {
    Mat2 r;
    r << 1 + x.x(), 2 * x.y(), -x.x(), 3.0;
    return r;
  };
  const Vector c = interpolate(S, m);
  const CellGeometry g = CellGeometry::of(*mesh, 3);
  const Vec2 xi(0.25, 0.5);
  CHECK((evaluate_tensor(S, c, 3, xi) - m(g.map(xi))).norm() < 1e-12);
  CHECK(evaluate_row_divergence(S, c, 3, xi).isApprox(Vec2(3.0, -1.0)));

  const FunctionSpace G = FunctionSpace::p0_skew(mesh);
  const Vector gs = interpolate(G, TensorField([](const Vec2&) { return skew_tensor(0.75); }));
  CHECK(gs[0] == doctest::Approx(0.75));

  const FunctionSpace P1 = FunctionSpace::p1_vector(mesh);
  const Vector p = interpolate(P1, VectorField([](const Vec2& x) { return Vec2(x.x() + 2 * x.y(), -x.y()); }));
  Mat2 grad;
  grad << 1, 2, 0, -1;
  CHECK(evaluate_gradient(P1, p, 5).isApprox(grad));
}

TEST_CASE("trace spaces") {
  auto [fluid, poro] = nsbiot::testing::unit_pair(2, 3);
  auto trace = std::make_shared<const TraceMesh>(extract_trace_mesh(poro));
  const FunctionSpace L = FunctionSpace::p1_trace_scalar(trace);
  CHECK(L.dof_count() == 4);
  const Vector c = interpolate(L, ScalarField([](const Vec2& x) { return 2 * x.x() + 1; }));
  CHECK(evaluate_trace_scalar(L, c, 0.5) == doctest::Approx(2.0));
  const FunctionSpace P = FunctionSpace::p1_trace_vector(trace);
  CHECK(P.dof_count() == 8);
  const Vector v = interpolate(P, VectorField([](const Vec2& x) { return Vec2(x.x(), 1 - x.x()); }));
  CHECK(evaluate_trace_vector(P, v, 0.4).isApprox(Vec2(0.4, 0.6)));
}
