#include <doctest.h>

#include <random>

#include "chwfr/euler_map.hpp"
#include "chwfr/spectral.hpp"
#include "test_support.hpp"

using namespace chwfr;

namespace {

Field sine(int n, double amp) {
  PeriodicGrid g(n);
  Field u(n);
  for (int i = 0; i < n; ++i) u[i] = amp * std::sin(g.x(i));
  return u;
}

AnnulusGrid annulus(int n) { return AnnulusGrid(PeriodicGrid(n), {0.5, 1.0, 2.0, 3.5}); }

double max_both(const MomentumResidual& r) { return std::max(max_abs(r.radial), max_abs(r.angular)); }

}  // namespace

TEST_CASE("Madelung map") {
  const int n = 64;
  PeriodicGrid g(n);
  const auto id = madelung(GroupElement::identity(n));
  const auto rot = madelung(GroupElement::rotation(n, 0.4));
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(id[i] - std::polar(1.0, g.x(i))) < 1e-15);
    CHECK(std::abs(rot[i] - std::polar(1.0, g.x(i) + 0.4)) < 1e-15);
  }
  std::mt19937_64 rng(40);
  const auto z = madelung(embed_diffeo(testing::random_diffeo(rng, n, 5)));
  Field mod2(n);
  for (int i = 0; i < n; ++i) mod2[i] = std::norm(z[i]);
  CHECK(integrate(mod2) == doctest::Approx(kTwoPi).epsilon(1e-12));
  PeriodicGrid grid(n);
  CHECK_THROWS_AS(madelung(GroupElement(grid.points(), Field(n, 2.0))), InvalidInput);
}

TEST_CASE("polar velocity") {
  const int n = 32;
  PeriodicGrid g(n);
  const PolarVectorField c = polar_velocity(Field(n, 0.6));
  for (int i = 0; i < n; ++i) {
    CHECK(c.v_theta(i, 2.0) == doctest::Approx(1.2));
    CHECK(c.v_r(i, 2.0) == 0.0);
  }
  const PolarVectorField s = polar_velocity(sine(n, 1.0));
  for (int i = 0; i < n; ++i) {
    const double r = 1.7;
    CHECK(s.v_theta(i, r) == doctest::Approx(r * std::sin(g.x(i))).epsilon(1e-14));
    CHECK(s.v_r(i, r) == doctest::Approx(0.5 * r * std::cos(g.x(i))).epsilon(1e-13).scale(1.0));
    CHECK(s.v_theta(i, 3 * r) == doctest::Approx(3 * s.v_theta(i, r)));
    CHECK(s.v_r(i, 3 * r) == doctest::Approx(3 * s.v_r(i, r)));
  }
}

TEST_CASE("mapped velocities are divergence free for the r^-4 density") {
  std::mt19937_64 rng(41);
  const AnnulusGrid grid = annulus(128);
  for (int trial = 0; trial < 20; ++trial) {
    const Field u = testing::random_trig(rng, 128, 20, 2.0, 0.5);
    for (const Field& d : weighted_divergence(polar_velocity(u), grid)) CHECK(max_abs(d) < 1e-12);
  }
  // A pure dilation is not: -2 r^-4.
  const PolarVectorField dilation{Field(128, 0.0), Field(128, 1.0)};
  const auto d = weighted_divergence(dilation, grid);
  for (std::size_t j = 0; j < grid.radii.size(); ++j)
    for (double v : d[j]) CHECK(v == doctest::Approx(-2.0 * std::pow(grid.radii[j], -4)).epsilon(1e-13));
  for (const Field& z : weighted_divergence({Field(128, 0.0), Field(128, 0.0)}, grid)) CHECK(max_abs(z) == 0.0);
}

TEST_CASE("pressure of a rotation is centripetal") {
  const PressureResult p = pressure_from_state(Field(32, 0.8), Field(32, 0.0));
  for (double v : p.p) CHECK(v == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(p.mean == doctest::Approx(0.64));
  CHECK(max_abs(pressure_from_state(Field(32, 0.0), Field(32, 0.0)).p) == 0.0);
  for (double r : {0.5, 1.0, 4.0}) CHECK(max_both(euler_momentum_residual(Field(32, 0.8), Field(32, 0.0), r)) < 1e-12);
  CHECK(max_both(euler_momentum_residual(Field(32, 0.0), Field(32, 0.0), 1.0)) == 0.0);
}

TEST_CASE("recovered pressure satisfies the companion angular equation along the CH flow") {
  std::mt19937_64 rng(42);
  const ConeParams params;
  for (int trial = 0; trial < 5; ++trial) {
    const Field u = spectral::dealias(testing::random_trig(rng, 128, 8, 0.5, 0.1));
    const Field udot = ch_rhs(u, params);
    const Field p = pressure_from_state(u, udot).p;
    const Field du = spectral::derivative(u), dp = spectral::derivative(p);
    for (int i = 0; i < 128; ++i)
      CHECK(std::abs(udot[i] + u[i] * du[i] + du[i] * u[i] + 0.5 * dp[i]) < 1e-10);
  }
}

TEST_CASE("momentum residual is homogeneous in r") {
  std::mt19937_64 rng(43);
  const Field u = testing::random_trig(rng, 64, 6, 0.5);
  const Field udot = testing::random_trig(rng, 64, 6, 0.5);
  const MomentumResidual one = euler_momentum_residual(u, udot, 1.0);
  for (double r : {0.3, 2.0, 7.5}) {
    const MomentumResidual rr = euler_momentum_residual(u, udot, r);
    for (int i = 0; i < 64; ++i) {
      CHECK(std::abs(rr.radial[i] - r * one.radial[i]) < 1e-12 * std::max(1.0, r));
      CHECK(std::abs(rr.angular[i] - r * one.angular[i]) < 1e-12 * std::max(1.0, r));
    }
  }
  // Arbitrary udot breaks the angular equation but never the radial one,
  // which defines the pressure.
  CHECK(max_abs(one.angular) > 1e-3);
  CHECK(max_abs(one.radial) < 1e-13);
}

TEST_CASE("reference run solves Euler") {
  const ConeParams params;
  const CHTrajectory tr = ch_solve(sine(256, 0.2), 1.0, 1e-3, params);
  const EulerReport rep = euler_residual(tr, annulus(256));
  CHECK(rep.max_div < 1e-10);
  CHECK(rep.max_momentum_residual < 1e-5);
  CHECK(rep.samples == tr.size() - 2);
  CHECK(rep.per_radius.size() == 4);
  // Residual on the annulus of radius r is r times the unit one.
  CHECK(rep.per_radius[3] == doctest::Approx(3.5 * rep.per_radius[1]).epsilon(1e-9));

  const CHTrajectory still = ch_solve(Field(64, 0.0), 0.1, 1e-2, params);
  const EulerReport zero = euler_residual(still, annulus(64));
  CHECK(zero.max_div == 0.0);
  CHECK(zero.max_momentum_residual == 0.0);
  const CHTrajectory spin = ch_solve(Field(64, 1.3), 0.1, 1e-2, params);
  CHECK(euler_residual(spin, annulus(64)).max_momentum_residual < 1e-12);
}

TEST_CASE("Lagrangian maps preserve the singular measures") {
  const int n = 256;
  std::mt19937_64 rng(44);
  FlowPath path;
  path.times = {0.0, 1.0, 2.0};
  path.elements = {GroupElement::identity(n), GroupElement::rotation(n, 1.1),
                   embed_diffeo(testing::random_diffeo(rng, n, 8, 0.3))};
  path.phidot.assign(3, Field(n, 0.0));
  const MeasureReport rep = lagrangian_measure_check(path);
  CHECK(rep.jac_det_residual < 1e-10);
  CHECK(rep.measure_residual < 1e-10);
  CHECK(rep.lebesgue_residual < 1e-10);

  FlowPath trivial;
  trivial.times = {0.0};
  trivial.elements = {GroupElement::identity(n)};
  trivial.phidot = {Field(n, 0.0)};
  const MeasureReport z = lagrangian_measure_check(trivial);
  CHECK(z.jac_det_residual < 1e-14);
  CHECK(z.measure_residual < 1e-14);
}

TEST_CASE("Lagrangian and Eulerian geodesic forms agree") {
  const ConeParams params;
  const CHTrajectory tr = ch_solve(sine(128, 0.2), 0.5, 1e-3, params, {0.0, 10});
  FlowOptions fo;
  fo.interp = Interpolation::Trigonometric;
  const FlowPath path = flow_map(tr, fo);
  const GeodesicFormsReport rep = geodesic_forms_consistency(tr, path);
  CHECK(rep.max_difference < 1e-6);
  CHECK(rep.max_eulerian < 1e-6);
  CHECK(rep.max_lagrangian < 1e-6);
}

TEST_CASE("Euler checks need the planar coefficients") {
  const CHTrajectory tr = ch_solve(Field(32, 0.0), 0.1, 1e-2, ConeParams{1.0, 1.0});
  CHECK_THROWS_AS(euler_residual(tr, annulus(32)), InvalidInput);
  CHECK_THROWS_AS(AnnulusGrid(PeriodicGrid(32), {1.0, 0.5}), InvalidInput);
  CHECK_THROWS_AS(AnnulusGrid(PeriodicGrid(32), {0.0, 1.0}), InvalidInput);
}
