#include "chwfr/camassa_holm.hpp"

#include <algorithm>

#include "chwfr/interpolation.hpp"
#include "chwfr/spectral.hpp"

namespace chwfr {

Field ch_rhs(const Field& u, const ConeParams& params) {
  params.validate();
  const int n = static_cast<int>(u.size());
  PeriodicGrid grid(n);
  const double a2 = params.a * params.a, b2 = params.b * params.b;
  const int K = spectral::dealias_cutoff(n);

  spectral::Coefficients uh = spectral::forward(u);
  for (int k = K + 1; k <= n / 2; ++k) uh[k] = 0.0;
  spectral::Coefficients uxh(uh.size()), mh(uh.size()), mxh(uh.size());
  for (int k = 0; k <= n / 2; ++k) {
    const std::complex<double> ik(0.0, double(k));
    const double symbol = a2 + b2 * double(k) * double(k);
    uxh[k] = ik * uh[k];
    mh[k] = symbol * uh[k];
    mxh[k] = ik * mh[k];
  }
  const Field uu = spectral::backward(uh, n);
  const Field ux = spectral::backward(uxh, n);
  const Field m = spectral::backward(mh, n);
  const Field mx = spectral::backward(mxh, n);
  Field nonlinear(n);
  for (int i = 0; i < n; ++i) nonlinear[i] = uu[i] * mx[i] + 2.0 * ux[i] * m[i];
  spectral::Coefficients nh = spectral::forward(nonlinear);
  for (int k = 0; k <= n / 2; ++k) {
    if (k > K) {
      nh[k] = 0.0;
      continue;
    }
    nh[k] = -nh[k] / (a2 + b2 * double(k) * double(k));
  }
  return spectral::backward(nh, n);
}

double spectral_tail_fraction(const Field& u) {
  const int n = static_cast<int>(u.size());
  const spectral::Coefficients c = spectral::forward(u);
  const int K = spectral::dealias_cutoff(n);
  double total = 0.0, tail = 0.0;
  for (int k = 0; k <= n / 2; ++k) {
    const double e = std::norm(c[k]);
    total += e;
    if (k > K / 2) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

CHTrajectory ch_solve(const Field& u0, double t_final, double dt, const ConeParams& params,
                      const CHOptions& options) {
  params.validate();
  const int n = static_cast<int>(u0.size());
  PeriodicGrid grid(n);
  const double span = t_final - options.t0;
  if (dt == 0.0 || !std::isfinite(dt)) throw InvalidInput("ch_solve: dt must be nonzero");
  if (span != 0.0 && (span > 0.0) != (dt > 0.0))
    throw InvalidInput("ch_solve: dt must point from t0 towards t_final");
  if (options.output_every < 1) throw InvalidInput("ch_solve: output_every must be >= 1");

  const auto steps = static_cast<long>(std::ceil(std::abs(span / dt) - 1e-9));
  CHTrajectory traj;
  traj.params = params;
  traj.dt = dt;
  traj.n = n;
  Field u = spectral::dealias(u0);
  double t = options.t0;
  traj.times.push_back(t);
  traj.u.push_back(u);

  Field stage(n);
  for (long s = 0; s < steps; ++s) {
    const double h = (s + 1 == steps) ? (t_final - t) : dt;
    const Field k1 = ch_rhs(u, params);
    for (int i = 0; i < n; ++i) stage[i] = u[i] + 0.5 * h * k1[i];
    const Field k2 = ch_rhs(stage, params);
    for (int i = 0; i < n; ++i) stage[i] = u[i] + 0.5 * h * k2[i];
    const Field k3 = ch_rhs(stage, params);
    for (int i = 0; i < n; ++i) stage[i] = u[i] + h * k3[i];
    const Field k4 = ch_rhs(stage, params);
    for (int i = 0; i < n; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t = (s + 1 == steps) ? t_final : options.t0 + (s + 1) * dt;

    for (double v : u)
      if (!std::isfinite(v))
        throw SolverFailure("wave_breaking", "non-finite velocity at t = " + std::to_string(t));
    const double tail = spectral_tail_fraction(u);
    if (tail > options.tail_threshold)
      throw SolverFailure("wave_breaking", "spectral tail fraction " + std::to_string(tail) +
                                               " exceeds threshold at t = " + std::to_string(t));
    if ((s + 1) % options.output_every == 0 || s + 1 == steps) {
      traj.times.push_back(t);
      traj.u.push_back(u);
    }
  }
  return traj;
}

FlowPath flow_map(const CHTrajectory& traj, const FlowOptions& options) {
  if (traj.size() == 0) throw InvalidInput("flow_map: empty trajectory");
  const int n = traj.n;
  PeriodicGrid grid(n);
  FlowPath path;
  Field phi = grid.points();

  auto record = [&](std::size_t k, const PeriodicInterpolant& uk) {
    const GroupElement probe(phi, Field(n, 1.0));
    const Field jac = probe.jacobian();
    const double jmin = *std::min_element(jac.begin(), jac.end());
    if (!(jmin > options.jacobian_floor))
      throw SolverFailure("wave_breaking", "min phi' = " + std::to_string(jmin) +
                                               " at t = " + std::to_string(traj.times[k]));
    path.times.push_back(traj.times[k]);
    path.elements.push_back(embed_diffeo(phi));
    path.phidot.push_back(uk.at(phi));
  };

  PeriodicInterpolant u_prev(traj.u[0], options.interp);
  record(0, u_prev);
  Field rhs_prev = ch_rhs(traj.u[0], traj.params);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double h = traj.times[k + 1] - traj.times[k];
    const Field rhs_next = ch_rhs(traj.u[k + 1], traj.params);
    Field mid(n);
    for (int i = 0; i < n; ++i)
      mid[i] = 0.5 * (traj.u[k][i] + traj.u[k + 1][i]) + h / 8.0 * (rhs_prev[i] - rhs_next[i]);
    const PeriodicInterpolant u_mid(mid, options.interp);
    const PeriodicInterpolant u_next(traj.u[k + 1], options.interp);
    for (int i = 0; i < n; ++i) {
      const double p = phi[i];
      const double k1 = u_prev(p);
      const double k2 = u_mid(p + 0.5 * h * k1);
      const double k3 = u_mid(p + 0.5 * h * k2);
      const double k4 = u_next(p + h * k3);
      phi[i] = p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    record(k + 1, u_next);
    u_prev = u_next;
    rhs_prev = rhs_next;
  }
  return path;
}

CHInvariants ch_invariants(const CHState& state, const ConeParams& params) {
  params.validate();
  const Field ux = spectral::derivative(state.u);
  const Field uxx = spectral::derivative(state.u, 2);
  const double a2 = params.a * params.a, b2 = params.b * params.b;
  const std::size_t n = state.u.size();
  Field m(n), e(n);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = a2 * state.u[i] - b2 * uxx[i];
    e[i] = a2 * state.u[i] * state.u[i] + b2 * ux[i] * ux[i];
  }
  return {integrate(m) / kTwoPi, integrate(e)};
}

}  // namespace chwfr
