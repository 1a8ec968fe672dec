#include <doctest.h>

#include <random>

#include "chwfr/cone_geometry.hpp"

using namespace chwfr;

namespace {

double chart_distance(const ConePoint& p, const ConePoint& q, const ConeParams& params, double center) {
  const auto z1 = planar_chart(p, params, center), z2 = planar_chart(q, params, center);
  return std::hypot(z1[0] - z2[0], z1[1] - z2[1]);
}

}  // namespace

TEST_CASE("distance basics") {
  const ConeParams p;
  const ConePoint x{1.0, 2.0};
  CHECK(cone_distance(x, x, p) == 0.0);
  // Apex at distance 2b sqrt(m).
  CHECK(cone_distance(x, {0.0, 0.0}, p) == doctest::Approx(2 * p.b * std::sqrt(2.0)).epsilon(1e-15));
  // Same base point: 2b |sqrt(m1) - sqrt(m2)|.
  CHECK(cone_distance({0.3, 1.0}, {0.3, 4.0}, p) == doctest::Approx(2 * p.b * 1.0).epsilon(1e-15));
  // Antipodal points go through the apex when (a/2b) d >= pi.
  CHECK(cone_distance({0.0, 1.0}, {kPi, 1.0}, p) == doctest::Approx(2 * p.b * 2.0).epsilon(1e-15));
}

TEST_CASE("distance equals the Euclidean distance of the global planar chart") {
  const ConeParams p;  // a / 2b = 1
  CHECK(chart_sector(p).global);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi), mass(0.0, 3.0);
  for (int t = 0; t < 2000; ++t) {
    const ConePoint a{ang(rng), mass(rng)}, b{ang(rng), mass(rng)};
    CHECK(std::abs(cone_distance(a, b, p) - chart_distance(a, b, p, 0.0)) < 1e-12);
  }
}

TEST_CASE("local chart is an isometry inside its sector for other coefficients") {
  const ConeParams p{1.0, 1.0};  // a / 2b = 1/2
  const ChartSector s = chart_sector(p, 1.0);
  CHECK_FALSE(s.global);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> off(-0.45 * kPi, 0.45 * kPi), mass(0.1, 3.0);
  for (int t = 0; t < 500; ++t) {
    const ConePoint a{wrap_angle(1.0 + off(rng)), mass(rng)}, b{wrap_angle(1.0 + off(rng)), mass(rng)};
    CHECK(std::abs(cone_distance(a, b, p) - chart_distance(a, b, p, 1.0)) < 1e-12);
  }
  const ConeParams q{3.0, 0.5};  // a / 2b = 3, sector half-width pi / 3
  CHECK(chart_sector(q).half_width == doctest::Approx(kPi / 3));
  CHECK_THROWS_AS(planar_chart({2.0, 1.0}, q, 0.0), InvalidInput);
}

TEST_CASE("chart inverse round trip") {
  const ConeParams p;
  const ConePoint x{2.5, 0.7};
  const ConePoint y = planar_chart_inverse(planar_chart(x, p), p);
  CHECK(y.x == doctest::Approx(x.x).epsilon(1e-14));
  CHECK(y.m == doctest::Approx(x.m).epsilon(1e-14));
  CHECK_THROWS_AS(planar_chart({0.0, 0.0}, p), InvalidInput);
}

TEST_CASE("triangle inequality and mass scaling") {
  for (const ConeParams p : {ConeParams{}, ConeParams{1.0, 1.0}, ConeParams{2.0, 0.3}}) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi), mass(0.0, 2.0), sig(0.1, 5.0);
    for (int t = 0; t < 1000; ++t) {
      const ConePoint a{ang(rng), mass(rng)}, b{ang(rng), mass(rng)}, c{ang(rng), mass(rng)};
      CHECK(cone_distance(a, c, p) <= cone_distance(a, b, p) + cone_distance(b, c, p) + 1e-12);
      const double s = sig(rng);
      const double scaled = cone_distance({a.x, s * a.m}, {b.x, s * b.m}, p);
      CHECK(std::abs(scaled - std::sqrt(s) * cone_distance(a, b, p)) < 1e-12);
    }
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(cone_distance({0, 1}, {0, 1}, ConeParams{-1.0, 0.5}), InvalidInput);
  CHECK_THROWS_AS(cone_distance({0, -1}, {0, 1}, ConeParams{}), InvalidInput);
}

TEST_CASE("geodesic ODE matches the straight-line closed form") {
  const ConeParams p;
  const ConeTangent v0{{0.4, 1.0}, 0.7, -0.3};
  const auto path = cone_geodesic(v0, 1.0, 1e-3, p);
  const GeodesicSample exact = cone_geodesic_exact(v0, 1.0, p);
  CHECK(path.back().t == doctest::Approx(1.0));
  CHECK(cone_distance(path.back().point(), exact.point(), p) < 1e-6);
  // Constant speed and length = distance for a short minimizing arc.
  CHECK(cone_distance(v0.base, path.back().point(), p) ==
        doctest::Approx(cone_speed(v0, p)).epsilon(1e-6));
  for (const auto& s : path) CHECK(cone_speed(s.tangent(), p) == doctest::Approx(cone_speed(v0, p)).epsilon(1e-8));
}

TEST_CASE("radial geodesic into the apex is reported") {
  const ConeParams p;
  const ConeTangent v0{{0.0, 1.0}, 0.0, -1.0};
  // m(t) = (1 - t/2)^2 reaches the apex at t = 2.
  CHECK_THROWS_AS(cone_geodesic(v0, 3.0, 1e-3, p), SolverFailure);
  try {
    cone_geodesic(v0, 3.0, 1e-3, p);
  } catch (const SolverFailure& e) {
    CHECK(e.kind() == "apex_crossing");
  }
}

TEST_CASE("sectional curvature of the cone over a circle") {
  CHECK(cone_sectional_curvature(1.0) == 0.0);
  CHECK(cone_sectional_curvature(0.0) == -1.0);
  CHECK(cone_radial_sectional_curvature() == 0.0);
}
