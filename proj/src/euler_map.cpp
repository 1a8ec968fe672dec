#include "chwfr/euler_map.hpp"

#include <algorithm>

#include "chwfr/interpolation.hpp"
#include "chwfr/spectral.hpp"

namespace chwfr {

AnnulusGrid::AnnulusGrid(PeriodicGrid g, std::vector<double> r) : theta(g), radii(std::move(r)) {
  if (radii.empty()) throw InvalidInput("annulus grid needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i]))
      throw InvalidInput("annulus radii must be positive and finite");
    if (i > 0 && !(radii[i] > radii[i - 1]))
      throw InvalidInput("annulus radii must be strictly increasing");
  }
}

std::vector<std::complex<double>> madelung(const GroupElement& g, double tol) {
  const double defect = isotropy_defect(g);
  if (!(defect <= tol))
    throw InvalidInput("madelung: element is not in the isotropy subgroup (defect " +
                       std::to_string(defect) + ")");
  std::vector<std::complex<double>> out(g.size());
  for (int i = 0; i < g.size(); ++i) out[i] = std::polar(g.lam()[i], g.phi()[i]);
  return out;
}

PolarVectorField polar_velocity(const Field& u) {
  PeriodicGrid grid(static_cast<int>(u.size()));
  Field half = spectral::derivative(u);
  for (double& v : half) v *= 0.5;
  return {u, std::move(half)};
}

std::vector<Field> weighted_divergence(const PolarVectorField& v, const AnnulusGrid& grid) {
  const auto n = static_cast<std::size_t>(grid.theta.size());
  if (v.angular.size() != n || v.radial.size() != n)
    throw InvalidInput("weighted_divergence: field does not match the angular grid");
  const Field dA = spectral::derivative(v.angular);
  std::vector<Field> out;
  out.reserve(grid.radii.size());
  for (double r : grid.radii) {
    // r r^-4 v_r = r^-2 B, so (1/r) d_r of it is -2 r^-4 B.
    const double w = std::pow(r, -4.0);
    Field d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = w * (dA[i] - 2.0 * v.radial[i]);
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

struct Kinematics {
  Field alpha, dalpha, alphadot, du;
};

Kinematics kinematics(const Field& u, const Field& udot) {
  if (u.size() != udot.size()) throw InvalidInput("u and udot must have the same size");
  PeriodicGrid grid(static_cast<int>(u.size()));
  Kinematics k;
  k.du = spectral::derivative(u);
  k.alpha = k.du;
  for (double& v : k.alpha) v *= 0.5;
  k.dalpha = spectral::derivative(k.alpha);
  k.alphadot = spectral::derivative(udot);
  for (double& v : k.alphadot) v *= 0.5;
  return k;
}

Field pressure(const Field& u, const Kinematics& k) {
  Field p(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    p[i] = -(k.alphadot[i] + u[i] * k.dalpha[i] + k.alpha[i] * k.alpha[i] - u[i] * u[i]);
  return p;
}

Field time_derivative(const CHTrajectory& traj, std::size_t k) {
  const double span = traj.times[k + 1] - traj.times[k - 1];
  Field d(traj.u[k].size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (traj.u[k + 1][i] - traj.u[k - 1][i]) / span;
  return d;
}

void require_unit_cone(const ConeParams& params) {
  if (params.a != 1.0 || params.b != 0.5)
    throw InvalidInput("the Euler correspondence requires (a, b) = (1, 1/2)");
}

}  // namespace

PressureResult pressure_from_state(const Field& u, const Field& udot) {
  const Kinematics k = kinematics(u, udot);
  PressureResult out{pressure(u, k), 0.0};
  out.mean = integrate(out.p) / kTwoPi;
  return out;
}

MomentumResidual euler_momentum_residual(const Field& u, const Field& udot, double r) {
  const Kinematics k = kinematics(u, udot);
  const Field p = pressure(u, k);
  const Field dp = spectral::derivative(p);
  const std::size_t n = u.size();
  MomentumResidual res{Field(n), Field(n)};
  // v = (r alpha, r u) in (radial, angular) physical components; Psi = r^2 p / 2.
  for (std::size_t i = 0; i < n; ++i) {
    const double A = u[i], B = k.alpha[i];
    res.radial[i] = r * (k.alphadot[i] + B * B + A * k.dalpha[i] - A * A + p[i]);
    res.angular[i] = r * (udot[i] + A * k.du[i] + 2.0 * A * B + 0.5 * dp[i]);
  }
  return res;
}

EulerReport euler_residual(const CHTrajectory& traj, const AnnulusGrid& grid) {
  require_unit_cone(traj.params);
  if (traj.size() < 3) throw InvalidInput("euler_residual: trajectory needs at least 3 samples");
  if (traj.n != grid.theta.size())
    throw InvalidInput("euler_residual: trajectory and annulus grid sizes differ");
  EulerReport rep;
  rep.per_radius.assign(grid.radii.size(), 0.0);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    for (const Field& d : weighted_divergence(polar_velocity(traj.u[k]), grid))
      rep.max_div = std::max(rep.max_div, max_abs(d));
  }
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const Field udot = time_derivative(traj, k);
    for (std::size_t j = 0; j < grid.radii.size(); ++j) {
      const MomentumResidual res = euler_momentum_residual(traj.u[k], udot, grid.radii[j]);
      const double rr = max_abs(res.radial), ra = max_abs(res.angular);
      rep.max_radial_residual = std::max(rep.max_radial_residual, rr);
      rep.max_angular_residual = std::max(rep.max_angular_residual, ra);
      rep.per_radius[j] = std::max(rep.per_radius[j], std::hypot(rr, ra));
    }
    ++rep.samples;
  }
  for (double v : rep.per_radius) rep.max_momentum_residual = std::max(rep.max_momentum_residual, v);
  return rep;
}

MeasureReport lagrangian_measure_check(const FlowPath& path) {
  MeasureReport rep;
  for (const GroupElement& g : path.elements) {
    const Field dphi = g.jacobian();
    const Field dlam = spectral::derivative(g.lam());
    for (int i = 0; i < g.size(); ++i) {
      const double lam = g.lam()[i];
      // DPhi in (theta, r) at r = 1: [[phi', 0], [lam' r, lam]].
      const double j11 = dphi[i], j12 = 0.0, j21 = dlam[i], j22 = lam;
      const double det = j11 * j22 - j12 * j21;
      rep.jac_det_residual =
          std::max(rep.jac_det_residual, std::abs(det - std::pow(dphi[i], 1.5)));
      // (lam r)^-3 * det / r^-3, r cancels.
      rep.measure_residual =
          std::max(rep.measure_residual, std::abs(det / (lam * lam * lam) - 1.0));
      // Lebesgue Jacobian is det * (lam r) / r; density r^-4.
      const double leb = det * lam * std::pow(lam, -4.0);
      rep.lebesgue_residual = std::max(rep.lebesgue_residual, std::abs(leb - 1.0));
    }
  }
  return rep;
}

GeodesicFormsReport geodesic_forms_consistency(const CHTrajectory& traj, const FlowPath& path) {
  require_unit_cone(traj.params);
  if (traj.size() != path.size() || traj.size() < 5)
    throw InvalidInput("geodesic_forms_consistency: path and trajectory must match (>= 5 samples)");
  GeodesicFormsReport rep;
  std::vector<Field> lamdot(path.size());
  for (std::size_t k = 0; k < path.size(); ++k)
    lamdot[k] = isotropy_tangent(path.elements[k], path.phidot[k]).lamdot;

  // Fourth-order centred differences on both sides, so that the comparison
  // is not dominated by the O(dt^2) stencil error.
  auto d4 = [&](const std::vector<Field>& f, std::size_t k, std::size_t i) {
    const double h = 0.25 * (traj.times[k + 2] - traj.times[k - 2]);
    return (f[k - 2][i] - 8.0 * f[k - 1][i] + 8.0 * f[k + 1][i] - f[k + 2][i]) / (12.0 * h);
  };
  for (std::size_t k = 2; k + 2 < traj.size(); ++k) {
    Field udot(traj.u[k].size());
    for (std::size_t i = 0; i < udot.size(); ++i) udot[i] = d4(traj.u, k, i);
    const Kinematics kin = kinematics(traj.u[k], udot);
    const Field p = pressure(traj.u[k], kin);
    const Field dp = spectral::derivative(p);
    const MomentumResidual eul = euler_momentum_residual(traj.u[k], udot, 1.0);

    const PeriodicInterpolant P(p, Interpolation::Trigonometric);
    const PeriodicInterpolant dP(dp, Interpolation::Trigonometric);
    const PeriodicInterpolant E1(eul.angular, Interpolation::Trigonometric);
    const PeriodicInterpolant E2(eul.radial, Interpolation::Trigonometric);

    const GroupElement& g = path.elements[k];
    for (int i = 0; i < g.size(); ++i) {
      const double x = g.phi()[i], lam = g.lam()[i], v = path.phidot[k][i];
      const double acc = d4(path.phidot, k, i);
      const double lacc = d4(lamdot, k, i);
      const double l1 = acc + 2.0 * (lamdot[k][i] / lam) * v + 0.5 * dP(x);
      const double l2 = lacc - lam * v * v + lam * P(x);
      const double e1 = E1(x), e2 = lam * E2(x);
      rep.max_lagrangian = std::max({rep.max_lagrangian, std::abs(l1), std::abs(l2)});
      rep.max_eulerian = std::max({rep.max_eulerian, std::abs(e1), std::abs(e2)});
      rep.max_difference = std::max({rep.max_difference, std::abs(l1 - e1), std::abs(l2 - e2)});
    }
  }
  return rep;
}

}  // namespace chwfr
