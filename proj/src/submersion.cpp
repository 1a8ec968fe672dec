#include "chwfr/submersion.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <random>

#include "chwfr/euler_map.hpp"
#include "chwfr/spectral.hpp"

namespace chwfr {
namespace {

void require_positive(const DensityField& rho, const char* what) {
  for (double r : rho)
    if (!(r > 0.0) || !std::isfinite(r))
      throw InvalidInput(std::string(what) + ": density must be strictly positive");
}

void require_pair(const VelocityPair& xi, std::size_t n, const char* what) {
  if (xi.v.size() != n || xi.alpha.size() != n)
    throw InvalidInput(std::string(what) + ": velocity pair has the wrong size");
}

VelocityPair subtract(const VelocityPair& x, const VelocityPair& y) {
  VelocityPair out{x.v, x.alpha};
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    out.v[i] -= y.v[i];
    out.alpha[i] -= y.alpha[i];
  }
  return out;
}

VelocityPair combine(double s, const VelocityPair& x, double t, const VelocityPair& y) {
  VelocityPair out{x.v, x.alpha};
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    out.v[i] = s * x.v[i] + t * y.v[i];
    out.alpha[i] = s * x.alpha[i] + t * y.alpha[i];
  }
  return out;
}

// Right-hand side w' - 2 gamma of the pressure equation, unsymmetrized.
Field pressure_rhs(const VelocityPair& x, const VelocityPair& y) {
  const std::size_t n = x.v.size();
  const Field dv = spectral::derivative(y.v);
  const Field dbeta = spectral::derivative(y.alpha);
  Field w(n), out(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = x.v[i] * dv[i] + y.alpha[i] * x.v[i] + x.alpha[i] * y.v[i];
  const Field dw = spectral::derivative(w);
  for (std::size_t i = 0; i < n; ++i) {
    const double gamma = dbeta[i] * x.v[i] - x.v[i] * y.v[i] + x.alpha[i] * y.alpha[i];
    out[i] = dw[i] - 2.0 * gamma;
  }
  return out;
}

double tangency(const VelocityPair& xi) {
  const Field dv = spectral::derivative(xi.v);
  double m = 0.0;
  for (std::size_t i = 0; i < dv.size(); ++i) m = std::max(m, std::abs(xi.alpha[i] - 0.5 * dv[i]));
  return m;
}

double identity_inner(const VelocityPair& x, const VelocityPair& y) {
  return rho_inner(x, y, DensityField(x.v.size(), 1.0));
}

double sym2_norm(double a, double b, double c) {
  // Spectral norm of [[a, b], [b, c]].
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  return std::max(std::abs(mean + rad), std::abs(mean - rad));
}

}  // namespace

LiftResult horizontal_lift(const DensityField& rho, const Field& Xrho) {
  const int n = static_cast<int>(rho.size());
  PeriodicGrid grid(n);
  if (Xrho.size() != rho.size()) throw InvalidInput("horizontal_lift: size mismatch");
  require_positive(rho, "horizontal_lift");

  const std::vector<double> D = spectral::derivative_matrix(n);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Dm(
      D.data(), n, n);
  const Eigen::Map<const Eigen::VectorXd> r(rho.data(), n);
  Eigen::MatrixXd L = 0.5 * Dm.transpose() * r.asDiagonal() * Dm;
  L.diagonal() += 2.0 * r;
  const Eigen::LLT<Eigen::MatrixXd> llt(L);
  if (llt.info() != Eigen::Success)
    throw SolverFailure("non_coercive", "horizontal_lift: operator is not positive definite");
  const Eigen::VectorXd phi = llt.solve(Eigen::Map<const Eigen::VectorXd>(Xrho.data(), n));

  LiftResult out;
  out.Phi.assign(phi.data(), phi.data() + n);
  Field half = spectral::derivative(out.Phi);
  for (double& v : half) v *= 0.5;
  out.pair = {std::move(half), out.Phi};
  const Field image = infinitesimal_action(out.pair, rho);
  for (int i = 0; i < n; ++i) out.residual = std::max(out.residual, std::abs(image[i] - Xrho[i]));
  return out;
}

double rho_inner(const VelocityPair& x, const VelocityPair& y, const DensityField& rho) {
  const std::size_t n = rho.size();
  require_pair(x, n, "rho_inner");
  require_pair(y, n, "rho_inner");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (x.v[i] * y.v[i] + x.alpha[i] * y.alpha[i]) * rho[i];
  return s * kTwoPi / static_cast<double>(n);
}

SplitResult vertical_horizontal_split(const VelocityPair& xi, const DensityField& rho) {
  require_pair(xi, rho.size(), "vertical_horizontal_split");
  LiftResult lift = horizontal_lift(rho, infinitesimal_action(xi, rho));
  SplitResult out;
  out.vertical = subtract(xi, lift.pair);
  out.horizontal = std::move(lift.pair);
  return out;
}

SecondFundamentalForm second_fundamental_form(const VelocityPair& xi1, const VelocityPair& xi2) {
  const std::size_t n = xi1.v.size();
  PeriodicGrid grid(static_cast<int>(n));
  require_pair(xi1, n, "second_fundamental_form");
  require_pair(xi2, n, "second_fundamental_form");

  const Field r12 = pressure_rhs(xi1, xi2);
  const Field r21 = pressure_rhs(xi2, xi1);
  SecondFundamentalForm out;
  Field rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.raw_asymmetry = std::max(out.raw_asymmetry, std::abs(r12[i] - r21[i]));
    rhs[i] = 0.5 * (r12[i] + r21[i]);
  }
  out.tangency_defect = std::max(tangency(xi1), tangency(xi2));
  out.p = spectral::helmholtz_solve(rhs, 2.0, 0.5);
  Field v = spectral::derivative(out.p);
  for (double& x : v) x *= -0.5;
  Field alpha = out.p;
  for (double& x : alpha) x = -x;
  out.II = {std::move(v), std::move(alpha)};
  return out;
}

OneillResult oneill_curvature(const VelocityPair& xi1, const VelocityPair& xi2,
                              const DensityField& rho, double tol) {
  require_positive(rho, "oneill_curvature");
  for (const VelocityPair* xi : {&xi1, &xi2}) {
    const SplitResult s = vertical_horizontal_split(*xi, rho);
    const double total = rho_inner(*xi, *xi, rho);
    const double vert = rho_inner(s.vertical, s.vertical, rho);
    if (vert > tol * tol * std::max(total, 1.0))
      throw InvalidInput("oneill_curvature: inputs must be horizontal");
  }
  // Gram-Schmidt in the rho metric; a degenerate plane has zero curvature.
  OneillResult out;
  const double n1 = std::sqrt(rho_inner(xi1, xi1, rho));
  if (n1 == 0.0) return out;
  const VelocityPair e1 = combine(1.0 / n1, xi1, 0.0, xi1);
  const VelocityPair w = combine(1.0, xi2, -rho_inner(xi2, e1, rho), e1);
  const double n2 = std::sqrt(rho_inner(w, w, rho));
  if (n2 <= 1e-12 * std::max(1.0, std::sqrt(rho_inner(xi2, xi2, rho)))) return out;
  const VelocityPair e2 = combine(1.0 / n2, w, 0.0, w);

  const SplitResult br = vertical_horizontal_split(lie_bracket(e1, e2), rho);
  out.bracket_vertical_norm2 = rho_inner(br.vertical, br.vertical, rho);
  out.curvature = 0.75 * out.bracket_vertical_norm2;
  return out;
}

GaussCodazziResult gauss_codazzi_sectional(const VelocityPair& xi1, const VelocityPair& xi2) {
  const SecondFundamentalForm s11 = second_fundamental_form(xi1, xi1);
  const SecondFundamentalForm s22 = second_fundamental_form(xi2, xi2);
  const SecondFundamentalForm s12 = second_fundamental_form(xi1, xi2);
  GaussCodazziResult out;
  out.curvature_form = identity_inner(s11.II, s22.II) - identity_inner(s12.II, s12.II);
  const double uv = identity_inner(xi1, xi2);
  out.plane_area = identity_inner(xi1, xi1) * identity_inner(xi2, xi2) - uv * uv;
  out.sectional = out.plane_area > 0.0 ? out.curvature_form / out.plane_area : 0.0;
  return out;
}

std::vector<Field> perturbation_field(const PerturbationFamily& family, int member, double amplitude,
                                      int n, std::size_t samples) {
  if (samples < 3) throw InvalidInput("perturbation_field: need at least 3 time samples");
  if (family.x_modes < 1 || family.t_modes < 1)
    throw InvalidInput("perturbation_field: mode counts must be positive");
  std::mt19937_64 rng(family.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(member));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double shift = normal(rng);
  std::vector<double> c(family.x_modes + 1), s(family.x_modes + 1), e(family.t_modes + 1);
  for (int j = 1; j <= family.x_modes; ++j) {
    c[j] = normal(rng) / j;
    s[j] = normal(rng) / j;
  }
  for (int k = 1; k <= family.t_modes; ++k) e[k] = normal(rng) / k;

  PeriodicGrid grid(n);
  Field shape(n, shift), dshape(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double x = grid.x(i);
    for (int j = 1; j <= family.x_modes; ++j) {
      shape[i] += c[j] * std::cos(j * x) + s[j] * std::sin(j * x);
      dshape[i] += j * (s[j] * std::cos(j * x) - c[j] * std::sin(j * x));
    }
  }
  std::vector<double> env(samples, 0.0);
  double env_max = 0.0;
  for (std::size_t q = 1; q + 1 < samples; ++q) {
    const double tau = static_cast<double>(q) / static_cast<double>(samples - 1);
    for (int k = 1; k <= family.t_modes; ++k) env[q] += e[k] * std::sin(kPi * k * tau);
    env_max = std::max(env_max, std::abs(env[q]));
  }
  const double scale_x = max_abs(dshape);
  std::vector<Field> out(samples, Field(n, 0.0));
  if (scale_x == 0.0 || env_max == 0.0) return out;
  const double scale = amplitude / (scale_x * env_max);
  for (std::size_t q = 1; q + 1 < samples; ++q)
    for (int i = 0; i < n; ++i) out[q][i] = scale * env[q] * shape[i];
  return out;
}

double isotropy_path_action(const std::vector<double>& times, const std::vector<Field>& phi) {
  if (times.size() != phi.size() || times.size() < 2)
    throw InvalidInput("isotropy_path_action: need matching times and at least 2 samples");
  const std::size_t n = phi[0].size();
  std::vector<Field> lam(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) lam[k] = embed_diffeo(phi[k]).lam();
  double action = 0.0;
  for (std::size_t k = 0; k + 1 < phi.size(); ++k) {
    const double h = times[k + 1] - times[k];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pd = (phi[k + 1][i] - phi[k][i]) / h;
      const double ld = (lam[k + 1][i] - lam[k][i]) / h;
      const double lm = 0.5 * (lam[k + 1][i] + lam[k][i]);
      s += lm * lm * pd * pd + ld * ld;
    }
    action += h * s * kTwoPi / static_cast<double>(n);
  }
  return action;
}

HessianBound pressure_hessian_bound(const CHTrajectory& traj) {
  HessianBound hb;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Field p = pressure_from_state(traj.u[k], ch_rhs(traj.u[k], traj.params)).p;
    const Field dp = spectral::derivative(p);
    const Field ddp = spectral::derivative(p, 2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      hb.block = std::max(hb.block, sym2_norm(0.5 * ddp[i], dp[i], p[i]));
      hb.covariant = std::max(hb.covariant, sym2_norm(p[i] + 0.5 * ddp[i], 0.5 * dp[i], p[i]));
    }
  }
  hb.C = std::max(hb.block, hb.covariant);
  hb.window = hb.C > 0.0 ? kPi / std::sqrt(hb.C) : std::numeric_limits<double>::infinity();
  return hb;
}

MinimalityReport minimality_test(const CHTrajectory& traj, const FlowPath& path,
                                 const PerturbationFamily& family) {
  if (traj.params.a != 1.0 || traj.params.b != 0.5)
    throw InvalidInput("minimality_test: requires (a, b) = (1, 1/2)");
  if (path.size() != traj.size() || path.size() < 3)
    throw InvalidInput("minimality_test: path and trajectory must match (>= 3 samples)");
  if (family.count < 1 || family.amplitudes.empty())
    throw InvalidInput("minimality_test: empty perturbation family");

  MinimalityReport rep;
  rep.hessian = pressure_hessian_bound(traj);
  rep.time_window = std::abs(path.times.back() - path.times.front());
  rep.window_violated = !(rep.time_window < rep.hessian.window);

  std::vector<Field> phi(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) phi[k] = path.elements[k].phi();
  rep.geodesic_action = isotropy_path_action(path.times, phi);
  rep.min_competitor_action = std::numeric_limits<double>::infinity();
  rep.min_relative_excess = std::numeric_limits<double>::infinity();
  const int n = path.elements[0].size();
  for (double amp : family.amplitudes) {
    for (int member = 0; member < family.count; ++member) {
      const std::vector<Field> delta = perturbation_field(family, member, amp, n, path.size());
      std::vector<Field> competitor = phi;
      for (std::size_t k = 0; k < phi.size(); ++k)
        for (int i = 0; i < n; ++i) competitor[k][i] += delta[k][i];
      const double a = isotropy_path_action(path.times, competitor);
      rep.min_competitor_action = std::min(rep.min_competitor_action, a);
      const double scale = std::max(rep.geodesic_action, 1e-300);
      rep.min_relative_excess = std::min(rep.min_relative_excess, (a - rep.geodesic_action) / scale);
      if (a < rep.geodesic_action) ++rep.violations;
      ++rep.competitors;
    }
  }
  return rep;
}

}  // namespace chwfr
