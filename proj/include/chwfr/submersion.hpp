#pragma once

#include <cstdint>
#include <vector>

#include "chwfr/camassa_holm.hpp"
#include "chwfr/common.hpp"
#include "chwfr/group_cone.hpp"

namespace chwfr {

// Fixed to (a, b) = (1, 1/2): the rho-weighted metric on right-trivialized
// pairs is int (v1 v2 + alpha1 alpha2) rho dx.

struct LiftResult {
  Field Phi;
  VelocityPair pair;  ///< (Phi' / 2, Phi)
  double residual = 0.0;
};

/// Solves -(rho Phi')' / 2 + 2 rho Phi = X with the spectral derivative
/// matrix D (the operator D^T diag(rho) D / 2 + 2 diag(rho) is SPD) by dense
/// Cholesky. Rejects rho that is not strictly positive.
LiftResult horizontal_lift(const DensityField& rho, const Field& Xrho);

/// int (v1 v2 + alpha1 alpha2) rho dx.
double rho_inner(const VelocityPair& x, const VelocityPair& y, const DensityField& rho);

struct SplitResult {
  VelocityPair vertical;
  VelocityPair horizontal;
};
SplitResult vertical_horizontal_split(const VelocityPair& xi, const DensityField& rho);

struct SecondFundamentalForm {
  Field p;
  VelocityPair II;             ///< (-p'/2, -p)
  double raw_asymmetry = 0.0;  ///< sup |rhs(xi1, xi2) - rhs(xi2, xi1)| before symmetrizing
  double tangency_defect = 0.0;  ///< sup |alpha - v'/2| over both inputs
};

/// Second fundamental form of the isotropy subgroup at the identity. p solves
/// (2 - d_xx / 2) p = w' - 2 gamma with (w, gamma) the ambient covariant
/// derivative (u v' + beta u + alpha v, beta' u - u v + alpha beta),
/// symmetrized in the two arguments.
SecondFundamentalForm second_fundamental_form(const VelocityPair& xi1, const VelocityPair& xi2);

struct OneillResult {
  double curvature = 0.0;             ///< 3/4 |[xi1, xi2]^V|^2 for the orthonormalized pair
  double bracket_vertical_norm2 = 0.0;
  bool formal = true;                 ///< the formula is only formal in infinite dimension
};

/// O'Neill sectional curvature of the density space at rho for the flat cone
/// over S^1. Inputs must be horizontal (relative vertical part <= tol).
OneillResult oneill_curvature(const VelocityPair& xi1, const VelocityPair& xi2,
                              const DensityField& rho, double tol = 1e-8);

struct GaussCodazziResult {
  double curvature_form = 0.0;  ///< <II(U,U), II(V,V)> - |II(U,V)|^2
  double plane_area = 0.0;      ///< |U|^2 |V|^2 - <U,V>^2
  double sectional = 0.0;       ///< curvature_form / plane_area (0 for a degenerate plane)
};
GaussCodazziResult gauss_codazzi_sectional(const VelocityPair& xi1, const VelocityPair& xi2);

// Minimality harness -------------------------------------------------------

/// Competitor fields  A * sum_j (c_j cos jx + s_j sin jx) * sum_k e_k sin(pi k tau),
/// tau in [0, 1], normalized so that sup |d_x delta phi| = A, endpoint slices
/// set to exactly zero.
struct PerturbationFamily {
  std::uint64_t seed = 20240607;
  int count = 100;
  std::vector<double> amplitudes{1e-2, 1e-1};
  int x_modes = 4;
  int t_modes = 3;
};

/// Field on (time sample, node), row-major in time.
std::vector<Field> perturbation_field(const PerturbationFamily& family, int member, double amplitude,
                                      int n, std::size_t samples);

/// Discrete path action sum_k dt int (lam_mid^2 phidot^2 + lamdot^2) dx with
/// forward differences between consecutive samples.
double isotropy_path_action(const std::vector<double>& times, const std::vector<Field>& phi);

struct HessianBound {
  double block = 0.0;      ///< sup norm of [[p''/2, p'], [p', p]]
  double covariant = 0.0;  ///< sup norm of [[p + p''/2, p'/2], [p'/2, p]]
  double C = 0.0;          ///< max of the two
  double window = 0.0;     ///< pi / sqrt(C), +inf when C = 0
};
HessianBound pressure_hessian_bound(const CHTrajectory& traj);

struct MinimalityReport {
  double geodesic_action = 0.0;
  double min_competitor_action = 0.0;
  double min_relative_excess = 0.0;  ///< min (competitor - geodesic) / geodesic
  HessianBound hessian;
  double time_window = 0.0;  ///< t1 - t0 of the path
  bool window_violated = false;
  int competitors = 0;
  int violations = 0;  ///< competitors with action below the geodesic
};

/// Compares the discrete action of a solved isotropy geodesic against seeded
/// endpoint-fixed competitors phi + delta phi, lam = sqrt(phi').
MinimalityReport minimality_test(const CHTrajectory& traj, const FlowPath& path,
                                 const PerturbationFamily& family);

}  // namespace chwfr
