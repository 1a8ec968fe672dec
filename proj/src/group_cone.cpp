#include "chwfr/group_cone.hpp"

#include <algorithm>

#include "chwfr/spectral.hpp"

namespace chwfr {

void require_density(const DensityField& rho, const std::string& what) {
  for (double v : rho)
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidInput(what + ": density values must be finite and nonnegative");
}

namespace {

void check_monotone(const Field& phi) {
  const int n = static_cast<int>(phi.size());
  for (int i = 0; i < n; ++i) {
    const double next = (i + 1 < n) ? phi[i + 1] : phi[0] + kTwoPi;
    if (!(next - phi[i] > 0.0) || !std::isfinite(phi[i]))
      throw InvalidInput("group element: lift is not strictly increasing at node " +
                         std::to_string(i));
  }
}

void check_same_size(const GroupElement& g1, const GroupElement& g2) {
  if (g1.size() != g2.size()) throw InvalidInput("group elements live on different grids");
}

}  // namespace

GroupElement::GroupElement(Field phi, Field lam) : phi_(std::move(phi)), lam_(std::move(lam)) {
  if (phi_.size() != lam_.size()) throw InvalidInput("group element: phi and lam sizes differ");
  PeriodicGrid grid(static_cast<int>(phi_.size()));
  check_monotone(phi_);
  for (double l : lam_)
    if (!(l > 0.0) || !std::isfinite(l))
      throw InvalidInput("group element: gauge factor must be positive");
}

GroupElement GroupElement::identity(int n) { return rotation(n, 0.0); }

GroupElement GroupElement::rotation(int n, double shift) {
  PeriodicGrid grid(n);
  Field phi = grid.points();
  for (double& p : phi) p += shift;
  return GroupElement(std::move(phi), Field(n, 1.0));
}

Field GroupElement::displacement() const {
  const int n = size();
  Field d(n);
  for (int i = 0; i < n; ++i) d[i] = phi_[i] - kTwoPi * i / n;
  return d;
}

Field GroupElement::jacobian() const {
  Field j = spectral::derivative(displacement());
  for (double& v : j) v += 1.0;
  return j;
}

double invert_lift(const PeriodicInterpolant& displacement, double y, double tol) {
  // F(x) = x + d(x) - y is increasing for a monotone lift; bracket with the
  // extreme sampled displacements plus one cell of slack, then Newton with
  // bisection fallback.
  const int n = displacement.size();
  const double h = kTwoPi / n;
  double dmin = displacement(0.0), dmax = dmin;
  for (int i = 1; i < n; ++i) {
    const double d = displacement(i * h);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  const double slack = h + 0.5 * (dmax - dmin);
  double lo = y - dmax - slack, hi = y - dmin + slack;
  auto F = [&](double x) { return x + displacement(x) - y; };
  for (int k = 0; k < 60 && F(lo) > 0.0; ++k) lo -= slack;
  for (int k = 0; k < 60 && F(hi) < 0.0; ++k) hi += slack;
  double x = std::clamp(y - displacement(y), lo, hi);
  for (int it = 0; it < 200; ++it) {
    const auto [d, dd] = displacement.value_and_derivative(x);
    const double f = x + d - y;
    if (std::abs(f) <= tol) return x;
    if (f > 0.0) hi = x; else lo = x;
    double next = x - f / (1.0 + dd);
    if (!(1.0 + dd > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

GroupElement compose(const GroupElement& g1, const GroupElement& g2, Interpolation interp) {
  check_same_size(g1, g2);
  const int n = g1.size();
  const PeriodicInterpolant d1(g1.displacement(), interp);
  const PeriodicInterpolant l1(g1.lam(), interp);
  Field phi(n), lam(n);
  for (int i = 0; i < n; ++i) {
    const double y = g2.phi()[i];
    phi[i] = y + d1(y);
    lam[i] = l1(y) * g2.lam()[i];
  }
  return GroupElement(std::move(phi), std::move(lam));
}

GroupElement inverse(const GroupElement& g, Interpolation interp) {
  const int n = g.size();
  const PeriodicInterpolant d(g.displacement(), interp);
  const PeriodicInterpolant l(g.lam(), interp);
  Field phi(n), lam(n);
  for (int i = 0; i < n; ++i) {
    phi[i] = invert_lift(d, kTwoPi * i / n);
    lam[i] = 1.0 / l(phi[i]);
  }
  return GroupElement(std::move(phi), std::move(lam));
}

DensityField pushforward_action(const GroupElement& g, const DensityField& rho,
                                Interpolation interp) {
  const int n = g.size();
  if (static_cast<int>(rho.size()) != n) throw InvalidInput("pushforward_action: size mismatch");
  require_density(rho, "pushforward_action");
  const Field jac = g.jacobian();
  Field f(n);
  for (int i = 0; i < n; ++i) f[i] = g.lam()[i] * g.lam()[i] * rho[i] / jac[i];
  const PeriodicInterpolant fi(f, interp);
  const PeriodicInterpolant d(g.displacement(), interp);
  DensityField out(n);
  for (int i = 0; i < n; ++i) out[i] = fi(invert_lift(d, kTwoPi * i / n));
  return out;
}

Field infinitesimal_action(const VelocityPair& xi, const Field& rho) {
  const std::size_t n = rho.size();
  if (xi.v.size() != n || xi.alpha.size() != n)
    throw InvalidInput("infinitesimal_action: size mismatch");
  Field flux(n);
  for (std::size_t i = 0; i < n; ++i) flux[i] = xi.v[i] * rho[i];
  Field out = spectral::derivative(flux);
  for (std::size_t i = 0; i < n; ++i) out[i] = -out[i] + 2.0 * xi.alpha[i] * rho[i];
  return out;
}

VelocityPair lie_bracket(const VelocityPair& xi1, const VelocityPair& xi2) {
  const std::size_t n = xi1.v.size();
  if (xi2.v.size() != n || xi1.alpha.size() != n || xi2.alpha.size() != n)
    throw InvalidInput("lie_bracket: size mismatch");
  const Field dv1 = spectral::derivative(xi1.v), dv2 = spectral::derivative(xi2.v);
  const Field da1 = spectral::derivative(xi1.alpha), da2 = spectral::derivative(xi2.alpha);
  VelocityPair out{Field(n), Field(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.v[i] = xi2.v[i] * dv1[i] - xi1.v[i] * dv2[i];
    out.alpha[i] = da1[i] * xi2.v[i] - da2[i] * xi1.v[i];
  }
  return out;
}

GroupElement embed_diffeo(const Field& phi) {
  const int n = static_cast<int>(phi.size());
  Field lam(n);
  // Build a provisional element for the monotonicity check and the Jacobian.
  const Field jac = GroupElement(phi, Field(n, 1.0)).jacobian();
  for (int i = 0; i < n; ++i) {
    if (!(jac[i] > 0.0))
      throw InvalidInput("embed_diffeo: phi' is not positive at node " + std::to_string(i));
    lam[i] = std::sqrt(jac[i]);
  }
  return GroupElement(phi, std::move(lam));
}

double isotropy_defect(const GroupElement& g) {
  const Field jac = g.jacobian();
  double m = 0.0;
  for (int i = 0; i < g.size(); ++i)
    m = std::max(m, std::abs(g.lam()[i] * g.lam()[i] - jac[i]));
  return m;
}

GroupElement lie_exponential(const VelocityPair& xi, double t, int steps, Interpolation interp) {
  const int n = static_cast<int>(xi.v.size());
  if (steps < 1) throw InvalidInput("lie_exponential: steps must be positive");
  const PeriodicInterpolant v(xi.v, interp), alpha(xi.alpha, interp);
  const double h = t / steps;
  Field phi = PeriodicGrid(n).points();
  Field loglam(n, 0.0);  // lam'/lam = alpha o phi, integrated in log form
  for (int i = 0; i < n; ++i) {
    double p = phi[i], l = 0.0;
    for (int s = 0; s < steps; ++s) {
      const double k1 = v(p), a1 = alpha(p);
      const double k2 = v(p + 0.5 * h * k1), a2 = alpha(p + 0.5 * h * k1);
      const double k3 = v(p + 0.5 * h * k2), a3 = alpha(p + 0.5 * h * k2);
      const double k4 = v(p + h * k3), a4 = alpha(p + h * k3);
      p += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      l += h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
    }
    phi[i] = p;
    loglam[i] = l;
  }
  for (double& l : loglam) l = std::exp(l);
  return GroupElement(std::move(phi), std::move(loglam));
}

double hdiv_energy(const Field& v, const ConeParams& params) {
  params.validate();
  const Field dv = spectral::derivative(v);
  Field integrand(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    integrand[i] = params.a * params.a * v[i] * v[i] + params.b * params.b * dv[i] * dv[i];
  return integrate(integrand);
}

double cone_l2_energy(const GroupElement& g, const GroupTangent& gdot, const ConeParams& params) {
  params.validate();
  const int n = g.size();
  if (static_cast<int>(gdot.phidot.size()) != n || static_cast<int>(gdot.lamdot.size()) != n)
    throw InvalidInput("cone_l2_energy: size mismatch");
  const double a2 = params.a * params.a, b2 = params.b * params.b;
  Field integrand(n);
  for (int i = 0; i < n; ++i) {
    const double lam = g.lam()[i];
    integrand[i] = a2 * lam * lam * gdot.phidot[i] * gdot.phidot[i] +
                   4.0 * b2 * gdot.lamdot[i] * gdot.lamdot[i];
  }
  return integrate(integrand);
}

GroupTangent isotropy_tangent(const GroupElement& g, const Field& phidot) {
  Field lamdot = spectral::derivative(phidot);
  for (int i = 0; i < g.size(); ++i) lamdot[i] /= 2.0 * g.lam()[i];
  return {phidot, std::move(lamdot)};
}

}  // namespace chwfr
