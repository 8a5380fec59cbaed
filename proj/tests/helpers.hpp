#pragma once

#include "nsbiot/scenarios.hpp"

#include <random>

namespace nsbiot::testing {

inline bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

/// Unit squares above and below y = 0 with nx x ny cells each, tagged like Example 1.
inline MeshPair unit_pair(int nf, int np, Diagonal df = Diagonal::Left, Diagonal dp = Diagonal::Left) {
  auto fluid = build_rectangle_mesh({0, 1, 0, 1}, nf, nf, df, Subdomain::Fluid);
  auto poro = build_rectangle_mesh({0, 1, -1, 0}, np, np, dp, Subdomain::Poroelastic);
  fluid = tag_boundaries(std::move(fluid), {
      {[](const Vec2& x) { return near(x.y(), 1.0); }, BoundaryTag::FluidDirichlet},
      {[](const Vec2& x) { return near(x.x(), 0.0) || near(x.x(), 1.0); }, BoundaryTag::FluidNeumann},
      {[](const Vec2& x) { return near(x.y(), 0.0); }, BoundaryTag::Interface},
  });
  poro = tag_boundaries(std::move(poro), {
      {[](const Vec2& x) { return near(x.y(), -1.0); }, BoundaryTag::PoroDirichlet},
      {[](const Vec2& x) { return near(x.x(), 0.0) || near(x.x(), 1.0); }, BoundaryTag::PoroNeumann},
      {[](const Vec2& x) { return near(x.y(), 0.0); }, BoundaryTag::Interface},
  });
  return {std::move(fluid), std::move(poro)};
}

inline std::shared_ptr<const Discretization> discretize(MeshPair m) {
  return std::make_shared<const Discretization>(
      Discretization::build(std::move(m.fluid), std::move(m.poro)));
}

inline Vector random_vector(int n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace nsbiot::testing
