#pragma once

#include <complex>
#include <vector>

#include "chwfr/camassa_holm.hpp"
#include "chwfr/common.hpp"
#include "chwfr/group_cone.hpp"

namespace chwfr {

// Everything here is for the coefficient pair (a, b) = (1, 1/2), where the
// cone over S^1 is the Euclidean punctured plane.

/// Angular grid plus sample radii. Fields are radially homogeneous, so radii
/// only serve as evaluation points.
struct AnnulusGrid {
  PeriodicGrid theta;
  std::vector<double> radii;

  AnnulusGrid(PeriodicGrid g, std::vector<double> r);
};

/// Planar vector field, 1-homogeneous in r, in physical polar components:
/// v_theta(theta, r) = r * angular(theta), v_r(theta, r) = r * radial(theta).
struct PolarVectorField {
  Field angular;
  Field radial;

  double v_theta(std::size_t i, double r) const { return r * angular[i]; }
  double v_r(std::size_t i, double r) const { return r * radial[i]; }
};

/// phi -> sqrt(phi') e^{i phi}. Rejects elements off the isotropy subgroup.
std::vector<std::complex<double>> madelung(const GroupElement& g, double tol = 1e-8);

/// u -> (v_theta, v_r) = (r u, (r/2) u').
PolarVectorField polar_velocity(const Field& u);

/// div(r^{-4} V) in polar form, one field per radius:
/// (1/r) d_r(r r^{-4} v_r) + (1/r) d_theta(r^{-4} v_theta), the r-derivative
/// taken exactly on the homogeneous ansatz.
std::vector<Field> weighted_divergence(const PolarVectorField& v, const AnnulusGrid& grid);

struct PressureResult {
  Field p;
  double mean = 0.0;
};

/// p = -(alphadot + u alpha' + alpha^2 - u^2), alpha = u'/2, alphadot = udot'/2.
/// Raw gauge (no mean removal).
PressureResult pressure_from_state(const Field& u, const Field& udot);

/// Polar components of v_t + nabla_v v + grad(r^2 p / 2) at radius r.
struct MomentumResidual {
  Field radial;
  Field angular;
};
MomentumResidual euler_momentum_residual(const Field& u, const Field& udot, double r);

struct EulerReport {
  double max_div = 0.0;
  double max_momentum_residual = 0.0;
  double max_radial_residual = 0.0;
  double max_angular_residual = 0.0;
  std::vector<double> per_radius;  ///< momentum residual sup on each annulus
  std::size_t samples = 0;         ///< time samples checked
};

/// Maps every interior trajectory sample to the plane and evaluates the
/// weighted divergence and the Euler momentum residual with pressure
/// recovered from centred time differences.
EulerReport euler_residual(const CHTrajectory& traj, const AnnulusGrid& grid);

/// Lagrangian checks on Phi(x, r) = (phi(x), lam(x) r).
struct MeasureReport {
  double jac_det_residual = 0.0;  ///< |det DPhi - (phi')^{3/2}|
  double measure_residual = 0.0;  ///< |Jac(Phi) nu~ o Phi / nu~ - 1|, nu~ = r^-3 dr dtheta
  double lebesgue_residual = 0.0; ///< same for rho = r^-4 Leb
};
MeasureReport lagrangian_measure_check(const FlowPath& path);

/// Residuals (fourth-order time differences) of phi'' + 2 (lam'/lam) phi' + (1/2) p' o phi = 0 and
/// lam'' - lam phi'^2 + lam p o phi = 0 along a flow path, against the
/// Eulerian residual composed with phi.
struct GeodesicFormsReport {
  double max_lagrangian = 0.0;
  double max_eulerian = 0.0;
  double max_difference = 0.0;
};
GeodesicFormsReport geodesic_forms_consistency(const CHTrajectory& traj, const FlowPath& path);

}  // namespace chwfr
