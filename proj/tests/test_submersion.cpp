#include <doctest.h>

#include <random>

#include "chwfr/spectral.hpp"
#include "chwfr/submersion.hpp"
#include "test_support.hpp"

using namespace chwfr;

namespace {

DensityField positive_density(std::mt19937_64& rng, int n) {
  DensityField r = testing::random_trig(rng, n, 4, 0.3, 1.0);
  for (double& v : r) v = std::max(v, 0.2);
  return r;
}

VelocityPair random_pair(std::mt19937_64& rng, int n) {
  return {testing::random_trig(rng, n, 4, 1.0, 0.2), testing::random_trig(rng, n, 4, 1.0, -0.1)};
}

VelocityPair isotropy_tangent_pair(const Field& v) {
  Field alpha = spectral::derivative(v);
  for (double& a : alpha) a *= 0.5;
  return {v, alpha};
}

Field trig_field(int n, double c0, double c1, double s1, double c2, double s3) {
  PeriodicGrid g(n);
  Field f(n);
  for (int i = 0; i < n; ++i) {
    const double x = g.x(i);
    f[i] = c0 + c1 * std::cos(x) + s1 * std::sin(x) + c2 * std::cos(2 * x) + s3 * std::sin(3 * x);
  }
  return f;
}

double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_pair(const VelocityPair& x) { return std::max(max_abs(x.v), max_abs(x.alpha)); }

Field sine(int n, double amp) {
  PeriodicGrid g(n);
  Field u(n);
  for (int i = 0; i < n; ++i) u[i] = amp * std::sin(g.x(i));
  return u;
}

}  // namespace

TEST_CASE("horizontal lift examples") {
  const int n = 32;
  PeriodicGrid g(n);
  const DensityField one(n, 1.0);
  const LiftResult c = horizontal_lift(one, Field(n, 0.6));
  for (double v : c.Phi) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
  Field cosx(n);
  for (int i = 0; i < n; ++i) cosx[i] = std::cos(g.x(i));
  const LiftResult k = horizontal_lift(one, cosx);
  for (int i = 0; i < n; ++i) CHECK(k.Phi[i] == doctest::Approx(0.4 * cosx[i]).epsilon(1e-12).scale(1.0));
  CHECK(max_abs(horizontal_lift(one, Field(n, 0.0)).Phi) == 0.0);
  for (int i = 0; i < n; ++i) {
    CHECK(k.pair.alpha[i] == k.Phi[i]);
    CHECK(k.pair.v[i] == doctest::Approx(-0.2 * std::sin(g.x(i))).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("lift reproduces the density variation and is linear") {
  std::mt19937_64 rng(60);
  const int n = 64;
  const DensityField rho = positive_density(rng, n);
  const Field X = testing::random_trig(rng, n, 6, 1.0), Y = testing::random_trig(rng, n, 6, 1.0);
  const LiftResult lx = horizontal_lift(rho, X), ly = horizontal_lift(rho, Y);
  CHECK(lx.residual < 1e-9);
  CHECK(testing::max_diff(infinitesimal_action(lx.pair, rho), X) < 1e-9);
  Field comb(n);
  for (int i = 0; i < n; ++i) comb[i] = 2.5 * X[i] - 0.7 * Y[i];
  const LiftResult lc = horizontal_lift(rho, comb);
  for (int i = 0; i < n; ++i) CHECK(std::abs(lc.Phi[i] - (2.5 * lx.Phi[i] - 0.7 * ly.Phi[i])) < 1e-10);
}

TEST_CASE("lift operator is symmetric positive definite") {
  // The lift applies L^{-1}; symmetry and positivity of L transfer to it.
  std::mt19937_64 rng(61);
  const int n = 48;
  const DensityField rho = positive_density(rng, n);
  for (int t = 0; t < 10; ++t) {
    const Field X = testing::random_trig(rng, n, 10, 1.0, 0.1), Y = testing::random_trig(rng, n, 10, 1.0, -0.3);
    const Field lx = horizontal_lift(rho, X).Phi, ly = horizontal_lift(rho, Y).Phi;
    CHECK(std::abs(dot(X, ly) - dot(lx, Y)) < 1e-10 * std::max(1.0, std::abs(dot(X, ly))));
    CHECK(dot(X, lx) > 0.0);
  }
}

TEST_CASE("lift needs a positive density") {
  DensityField rho(16, 1.0);
  rho[5] = 0.0;
  CHECK_THROWS_AS(horizontal_lift(rho, Field(16, 1.0)), InvalidInput);
  CHECK_THROWS_AS(horizontal_lift(DensityField(16, 1.0), Field(8, 1.0)), InvalidInput);
}

TEST_CASE("vertical and horizontal split") {
  std::mt19937_64 rng(62);
  const int n = 64;
  const DensityField rho = positive_density(rng, n);
  const VelocityPair xi = random_pair(rng, n);
  const SplitResult s = vertical_horizontal_split(xi, rho);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(s.vertical.v[i] + s.horizontal.v[i] - xi.v[i]) < 1e-15);
    CHECK(std::abs(s.vertical.alpha[i] + s.horizontal.alpha[i] - xi.alpha[i]) < 1e-15);
  }
  const double scale = rho_inner(xi, xi, rho);
  CHECK(std::abs(rho_inner(s.vertical, s.horizontal, rho)) < 1e-9 * scale);
  CHECK(max_abs(infinitesimal_action(s.vertical, rho)) < 1e-9);
  // The horizontal part is orthogonal to arbitrary vertical vectors.
  for (int t = 0; t < 5; ++t) {
    const SplitResult other = vertical_horizontal_split(random_pair(rng, n), rho);
    CHECK(std::abs(rho_inner(other.vertical, s.horizontal, rho)) < 1e-9 * scale);
  }
}

TEST_CASE("second fundamental form examples") {
  const int n = 32;
  const double a = 0.7;
  const VelocityPair growth{Field(n, 0.0), Field(n, a)};
  const SecondFundamentalForm f = second_fundamental_form(growth, growth);
  for (double p : f.p) CHECK(p == doctest::Approx(-a * a).epsilon(1e-14));
  CHECK(max_abs(f.II.v) < 1e-14);
  for (double x : f.II.alpha) CHECK(x == doctest::Approx(a * a).epsilon(1e-14));
  CHECK(f.tangency_defect == doctest::Approx(a));  // constant growth is not isotropy-tangent

  const VelocityPair spin{Field(n, 0.8), Field(n, 0.0)};
  const SecondFundamentalForm r = second_fundamental_form(spin, spin);
  for (double p : r.p) CHECK(p == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(r.tangency_defect == 0.0);

  const VelocityPair zero{Field(n, 0.0), Field(n, 0.0)};
  CHECK(max_pair(second_fundamental_form(zero, zero).II) == 0.0);
}

TEST_CASE("second fundamental form is symmetric and normal") {
  std::mt19937_64 rng(63);
  const int n = 64;
  const DensityField one(n, 1.0);
  for (int t = 0; t < 10; ++t) {
    const VelocityPair x = isotropy_tangent_pair(testing::random_trig(rng, n, 5, 1.0, 0.3));
    const VelocityPair y = isotropy_tangent_pair(testing::random_trig(rng, n, 5, 1.0, -0.2));
    const SecondFundamentalForm xy = second_fundamental_form(x, y), yx = second_fundamental_form(y, x);
    CHECK(testing::max_diff(xy.p, yx.p) < 1e-10);
    CHECK(xy.tangency_defect < 1e-12);
    CHECK(max_pair(vertical_horizontal_split(xy.II, one).vertical) < 1e-9);
    for (int i = 0; i < n; ++i) CHECK(xy.II.alpha[i] == -xy.p[i]);
  }
}

TEST_CASE("O'Neill curvature of two Fourier modes") {
  // Phi1 = cos, Phi2 = sin at rho = 1: the bracket is (-1/4, 0), entirely
  // vertical, and the pair is orthogonal with squared norms 5 pi / 4, giving
  // 3/4 * (pi / 8) / (5 pi / 4)^2 = 3 / (50 pi).
  const int n = 64;
  PeriodicGrid g(n);
  Field c(n), s(n), hs(n), hc(n);
  for (int i = 0; i < n; ++i) {
    c[i] = std::cos(g.x(i));
    s[i] = std::sin(g.x(i));
    hs[i] = -0.5 * s[i];
    hc[i] = 0.5 * c[i];
  }
  const DensityField one(n, 1.0);
  const OneillResult r = oneill_curvature({hs, c}, {hc, s}, one);
  CHECK(r.formal);
  CHECK(r.curvature == doctest::Approx(3.0 / (50.0 * kPi)).epsilon(1e-12));
  // Rescaling the inputs does not change the plane.
  Field hs3 = hs, c3 = c;
  for (double& v : hs3) v *= 3.0;
  for (double& v : c3) v *= 3.0;
  CHECK(oneill_curvature({hs3, c3}, {hc, s}, one).curvature == doctest::Approx(r.curvature).epsilon(1e-12));
  CHECK_THROWS_AS(oneill_curvature({Field(n, 1.0), Field(n, 0.0)}, {hc, s}, one), InvalidInput);
}

TEST_CASE("O'Neill curvature is nonnegative and symmetric") {
  std::mt19937_64 rng(64);
  const int n = 64;
  for (int t = 0; t < 5; ++t) {
    const DensityField rho = positive_density(rng, n);
    const VelocityPair h1 = horizontal_lift(rho, testing::random_trig(rng, n, 4, 1.0)).pair;
    const VelocityPair h2 = horizontal_lift(rho, testing::random_trig(rng, n, 4, 1.0)).pair;
    const double k12 = oneill_curvature(h1, h2, rho).curvature, k21 = oneill_curvature(h2, h1, rho).curvature;
    CHECK(k12 >= 0.0);
    CHECK(k12 == doctest::Approx(k21).epsilon(1e-9));
  }
}

TEST_CASE("Gauss-Codazzi value") {
  const int n = 32;
  const VelocityPair x = isotropy_tangent_pair(trig_field(n, 0.3, 1.0, 0.0, 0.2, 0.0));
  const GaussCodazziResult self = gauss_codazzi_sectional(x, x);
  CHECK(self.plane_area == doctest::Approx(0.0).scale(1e-12));
  CHECK(self.sectional == 0.0);
  const VelocityPair y = isotropy_tangent_pair(trig_field(n, -0.1, 0.0, 0.5, 0.0, 0.3));
  const GaussCodazziResult xy = gauss_codazzi_sectional(x, y), yx = gauss_codazzi_sectional(y, x);
  CHECK(xy.plane_area > 0.0);
  CHECK(xy.sectional == doctest::Approx(yx.sectional).epsilon(1e-10));
  CHECK(xy.sectional == doctest::Approx(xy.curvature_form / xy.plane_area));
}

TEST_CASE("Gauss-Codazzi value is resolution independent") {
  double values[2];
  int idx = 0;
  for (int n : {128, 256}) {
    const VelocityPair x = isotropy_tangent_pair(trig_field(n, 0.3, 1.0, 0.4, 0.2, 0.1));
    const VelocityPair y = isotropy_tangent_pair(trig_field(n, -0.1, 0.2, 0.5, -0.6, 0.3));
    values[idx++] = gauss_codazzi_sectional(x, y).sectional;
  }
  CHECK(std::abs(values[0] - values[1]) < 1e-6);
}

TEST_CASE("perturbations vanish at the ends and have the requested slope") {
  const PerturbationFamily fam;
  const int n = 64;
  PeriodicGrid g(n);
  for (int member : {0, 7, 99}) {
    for (double amp : fam.amplitudes) {
      const auto d = perturbation_field(fam, member, amp, n, 21);
      REQUIRE(d.size() == 21);
      CHECK(max_abs(d.front()) == 0.0);
      CHECK(max_abs(d.back()) == 0.0);
      double slope = 0.0;
      for (const Field& f : d) slope = std::max(slope, max_abs(spectral::derivative(f)));
      CHECK(slope == doctest::Approx(amp).epsilon(1e-12));
    }
  }
  const auto a = perturbation_field(fam, 3, 0.1, n, 11), b = perturbation_field(fam, 3, 0.1, n, 11);
  const auto c = perturbation_field(fam, 4, 0.1, n, 11);
  CHECK(testing::max_diff(a[5], b[5]) == 0.0);
  CHECK(testing::max_diff(a[5], c[5]) > 1e-4);
}

TEST_CASE("path action of a rotation") {
  const int n = 32;
  PeriodicGrid g(n);
  std::vector<double> times;
  std::vector<Field> phi;
  for (int k = 0; k <= 10; ++k) {
    times.push_back(0.1 * k);
    Field p = g.points();
    for (double& v : p) v += 0.1 * k * 1.5;
    phi.push_back(p);
  }
  CHECK(isotropy_path_action(times, phi) == doctest::Approx(kTwoPi * 2.25).epsilon(1e-12));
}

TEST_CASE("rotation: unit Hessian bound and window pi") {
  const ConeParams p;
  const CHTrajectory tr = ch_solve(Field(64, 1.0), 1.0, 1e-2, p, {0.0, 5});
  const HessianBound h = pressure_hessian_bound(tr);
  CHECK(h.C == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h.window == doctest::Approx(kPi).epsilon(1e-12));
  const MinimalityReport rep = minimality_test(tr, flow_map(tr), PerturbationFamily{});
  CHECK_FALSE(rep.window_violated);
  CHECK(rep.competitors == 200);
  CHECK(rep.violations == 0);
  CHECK(rep.min_relative_excess > 0.0);
  CHECK(rep.geodesic_action == doctest::Approx(kTwoPi).epsilon(1e-10));
}

TEST_CASE("identity path: every perturbation costs action") {
  const ConeParams p;
  const CHTrajectory tr = ch_solve(Field(64, 0.0), 1.0, 1e-2, p, {0.0, 5});
  const MinimalityReport rep = minimality_test(tr, flow_map(tr), PerturbationFamily{});
  CHECK(rep.geodesic_action == 0.0);
  CHECK(rep.hessian.C == 0.0);
  CHECK(rep.min_competitor_action > 0.0);
  CHECK(rep.violations == 0);
}

TEST_CASE("small smooth geodesic is a local minimizer") {
  const ConeParams p;
  const CHTrajectory tr = ch_solve(sine(128, 0.2), 0.5, 1e-3, p, {0.0, 10});
  const MinimalityReport rep = minimality_test(tr, flow_map(tr), PerturbationFamily{});
  CHECK_FALSE(rep.window_violated);
  CHECK(rep.competitors == 200);
  CHECK(rep.violations == 0);
  CHECK(rep.min_competitor_action > rep.geodesic_action);
}

TEST_CASE("minimality harness validation") {
  const CHTrajectory tr = ch_solve(Field(32, 0.0), 0.1, 1e-2, ConeParams{1.0, 1.0});
  CHECK_THROWS_AS(minimality_test(tr, flow_map(tr), PerturbationFamily{}), InvalidInput);
  PerturbationFamily empty;
  empty.count = 0;
  const CHTrajectory ok = ch_solve(Field(32, 0.0), 0.1, 1e-2, ConeParams{});
  CHECK_THROWS_AS(minimality_test(ok, flow_map(ok), empty), InvalidInput);
}
