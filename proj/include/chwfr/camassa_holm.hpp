#pragma once

#include <vector>

#include "chwfr/common.hpp"
#include "chwfr/group_cone.hpp"

namespace chwfr {

struct CHState {
  Field u;
  double t = 0.0;
};

/// Solution samples at uniformly spaced output times.
struct CHTrajectory {
  std::vector<double> times;
  std::vector<Field> u;
  ConeParams params;
  double dt = 0.0;  ///< solver step (signed)
  int n = 0;

  std::size_t size() const { return times.size(); }
  CHState state(std::size_t k) const { return {u[k], times[k]}; }
};

/// Isotropy-subgroup path (phi(t), sqrt(phi'(t))) with the Lagrangian
/// velocity phidot = u(t, phi).
struct FlowPath {
  std::vector<double> times;
  std::vector<GroupElement> elements;
  std::vector<Field> phidot;

  std::size_t size() const { return times.size(); }
};

struct CHOptions {
  double t0 = 0.0;
  int output_every = 1;          ///< store every k-th step
  double tail_threshold = 1e-6;  ///< spectral tail fraction that signals breaking
};

struct FlowOptions {
  Interpolation interp = Interpolation::CubicSpline;
  double jacobian_floor = 1e-8;  ///< min phi' below this is reported as breaking
};

/// du/dt for a^2 u_t - b^2 u_txx + 3a^2 u u_x - 2b^2 u_x u_xx - b^2 u u_xxx = 0,
/// evaluated in momentum form m = a^2 u - b^2 u_xx, m_t = -(u m_x + 2 u_x m),
/// with 2/3-rule dealiasing and the Fourier symbol a^2 + b^2 k^2 inverted.
Field ch_rhs(const Field& u, const ConeParams& params);

/// RK4 integration of ch_rhs from options.t0 to t_final with step dt (dt may
/// be negative to integrate backwards). The initial datum is projected onto
/// the dealiased modes. Throws SolverFailure("wave_breaking") when the
/// spectral tail or non-finite values indicate gradient blow-up.
CHTrajectory ch_solve(const Field& u0, double t_final, double dt, const ConeParams& params,
                      const CHOptions& options = {});

/// Fraction of spectral energy sitting in the upper half of the retained band.
double spectral_tail_fraction(const Field& u);

/// Integrates phi_t = u(t, phi) node-wise over each trajectory interval with
/// one RK4 step; mid-interval velocities come from cubic Hermite
/// interpolation in time using ch_rhs for the slopes.
FlowPath flow_map(const CHTrajectory& traj, const FlowOptions& options = {});

struct CHInvariants {
  double momentum_mean = 0.0;  ///< (1/2pi) int m dx
  double energy = 0.0;         ///< int a^2 u^2 + b^2 u_x^2 dx
};
CHInvariants ch_invariants(const CHState& state, const ConeParams& params);

}  // namespace chwfr
