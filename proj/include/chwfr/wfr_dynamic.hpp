#pragma once

#include <vector>

#include "chwfr/common.hpp"
#include "chwfr/group_cone.hpp"

namespace chwfr {

/// Unknowns of the dynamic problem on the staggered space-time grid over
/// [0, 1] x S^1 with nt time cells and nx space cells (centred at the density
/// nodes x_i = 2 pi i / nx):
///   rho  (nt + 1) x nx  on time faces t_k = k / nt; rows 0 and nt are the endpoints,
///   m    nt x nx        on space faces x_{i + 1/2},
///   mu   nt x nx        at cell centres.
/// Storage is row-major in time.
struct WFRVariables {
  int nt = 0;
  int nx = 0;
  Field rho;
  Field m;
  Field mu;

  WFRVariables() = default;
  WFRVariables(int nt_, int nx_);

  double& rho_at(int k, int i) { return rho[static_cast<std::size_t>(k) * nx + i]; }
  double rho_at(int k, int i) const { return rho[static_cast<std::size_t>(k) * nx + i]; }
  double& m_at(int k, int i) { return m[static_cast<std::size_t>(k) * nx + i]; }
  double m_at(int k, int i) const { return m[static_cast<std::size_t>(k) * nx + i]; }
  double& mu_at(int k, int i) { return mu[static_cast<std::size_t>(k) * nx + i]; }
  double mu_at(int k, int i) const { return mu[static_cast<std::size_t>(k) * nx + i]; }
  double dt() const { return 1.0 / nt; }
  double dx() const { return kTwoPi / nx; }
};

/// Cell-centred averages (the interpolation the action is evaluated on).
struct CellValues {
  Field rho, m, mu;
};
CellValues interpolate_to_cells(const WFRVariables& vars);

/// Perspective cost (a^2 m^2 + b^2 mu^2) / rho for one cell; 0 at the origin,
/// +inf when rho < 0, or rho == 0 and (m, mu) != 0.
double action_density(double rho, double m, double mu, const ConeParams& params);

/// Sum of the perspective cost over cell-centred values times dt * dx.
/// May return +inf.
double wfr_action(const WFRVariables& vars, const ConeParams& params);

struct ProxPoint {
  double rho = 0.0;
  double m = 0.0;
  double mu = 0.0;
};

/// argmin_y  F(y) + |y - x|^2 / (2 gamma),  F = (a^2 m^2 + b^2 mu^2) / rho,
/// gamma = 1 / sigma. The rho-equation is a monotone concave scalar root
/// problem solved by Newton from the left.
ProxPoint prox_action(const ProxPoint& x, double sigma, const ConeParams& params);

/// Same map with the source term removed (mu forced to 0).
ProxPoint prox_action_balanced(const ProxPoint& x, double sigma, const ConeParams& params);

/// Euclidean projection onto
///   (rho_{k+1,i} - rho_{k,i}) / dt + (m_{k,i} - m_{k,i-1}) / dx - mu_{k,i} = 0,
///   rho_{0,.} = rho0, rho_{nt,.} = rho1,
/// with mu held at 0 when `balanced`. Throws InvalidInput for nt or nx < 4 and
/// SolverFailure("infeasible") for balanced data of unequal mass.
WFRVariables continuity_project(const WFRVariables& vars, const DensityField& rho0,
                                const DensityField& rho1, bool balanced = false);

/// Sup-norm of the discrete continuity residual (endpoints included).
double constraint_residual(const WFRVariables& vars, const DensityField& rho0,
                           const DensityField& rho1);

enum class WFRAlgorithm {
  PrimalDual,       ///< Chambolle-Pock on the averaging map K
  DouglasRachford,  ///< splitting of F(V) + i_C(U) + i_{V = K U}
};

struct WFROptions {
  int nt = 32;
  int nx = 0;  ///< 0 means the density size; otherwise must match it
  int max_iters = 50000;
  double tol = 1e-7;  ///< on the relative action change between checks
  bool balanced = false;
  WFRAlgorithm algorithm = WFRAlgorithm::PrimalDual;
  double step = 0.0;        ///< sigma (tau = 0.99 / sigma) or gamma; 0 picks one from max density
  double relaxation = 1.0;  ///< over-relaxation in (0, 2)
  bool adaptive = true;     ///< primal-dual only: rebalance sigma and tau from the residuals
  int check_every = 10;
};

struct WFRResult {
  double distance = 0.0;
  double action = 0.0;
  WFRVariables variables;
  int iterations = 0;
  double primal_residual = 0.0;      ///< sup |V - K U|, dual-side cell values vs interpolated U
  double constraint_residual = 0.0;  ///< sup-norm continuity violation of U
  bool converged = false;
};

/// First-order primal-dual iteration: the dual step applies the proximal map
/// of the action through the Moreau identity on cell values, the primal step
/// projects onto the continuity constraint. Deterministic.
WFRResult solve_wfr(const DensityField& rho0, const DensityField& rho1, const ConeParams& params,
                    const WFROptions& options = {});

/// 2b * || sqrt(rho1) - sqrt(rho0) ||_{L^2}.
double hellinger_distance(const DensityField& rho0, const DensityField& rho1,
                          const ConeParams& params);

/// Discrete mass sum(rho) * 2 pi / n.
double density_mass(const DensityField& rho);

/// exp(kappa cos(x - center)), kappa = 1 / width^2, scaled to the given
/// discrete mass.
DensityField von_mises_bump(int n, double center, double width, double mass);

// Geodesic shooting ------------------------------------------------------

struct HorizontalFlowOptions {
  int output_every = 1;
  int defect_every = 1;  ///< lift-based horizontality check on every k-th output
};

struct HorizontalFlow {
  std::vector<double> times;
  std::vector<DensityField> rho;
  std::vector<VelocityPair> xi;
  double action = 0.0;      ///< int_0^T int rho (a^2 v^2 + 4 b^2 alpha^2) dx dt
  double max_defect = 0.0;  ///< sup |xi - horizontal_lift(rho, xi . rho)|
  double max_gradient_defect = 0.0;  ///< sup |v - alpha' / 2|
};

/// Shoots the horizontal geodesic of the submersion (phi, lam) -> phi_*(lam^2 rho0)
/// for (a, b) = (1, 1/2): (v, alpha) start at (Phi0' / 2, Phi0) and follow
///   v_t + v v' + 2 alpha v = 0,  alpha_t + v alpha' + alpha^2 - v^2 = 0,
/// while rho_t = -(v rho)' + 2 alpha rho. Spectral RK4 with 2/3 dealiasing.
/// Throws SolverFailure("negative_density") or ("wave_breaking").
HorizontalFlow horizontal_flow(const DensityField& rho0, const Field& Phi0, double t_final,
                               double dt, const HorizontalFlowOptions& options = {});

/// Named potential conventions. They are related by different scalings and
/// are never converted implicitly.
enum class PotentialConvention {
  Hamiltonian,  ///< q of rho_t + (rho q')' - 2 q rho = 0, q_t + q'^2 + q^2 = 0
  Lift,         ///< Phi of -(rho Phi')'/2 + 2 Phi rho = X, xi = (Phi'/2, Phi)
  Pressure,     ///< p of the pressure-constrained geodesic equation
};
const char* convention_name(PotentialConvention c);

struct HamiltonianFlow {
  std::vector<double> times;
  std::vector<DensityField> rho;
  std::vector<Field> q;
  double action = 0.0;  ///< int_0^T int rho (q'^2 + q^2) dx dt
  PotentialConvention convention = PotentialConvention::Hamiltonian;
};

/// Integrates the displayed Hamiltonian system literally (spectral RK4), as a
/// diagnostic to compare against horizontal_flow.
HamiltonianFlow hamiltonian_flow(const DensityField& rho0, const Field& q0, double t_final,
                                 double dt, int output_every = 1);

}  // namespace chwfr
