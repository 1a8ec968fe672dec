#pragma once

#include "chwfr/common.hpp"
#include "chwfr/interpolation.hpp"

namespace chwfr {

/// Nonnegative density sampled on the grid; mass = integrate(values).
using DensityField = Field;

/// Throws InvalidInput unless all values are finite and >= 0.
void require_density(const DensityField& rho, const std::string& what);

/// Right-trivialized tangent vector (v, alpha) at the identity of
/// Diff(S^1) x| Lambda: a vector field and a growth rate.
struct VelocityPair {
  Field v;
  Field alpha;
};

/// Lagrangian tangent (phidot, lamdot) at a group element.
struct GroupTangent {
  Field phidot;
  Field lamdot;
};

/// Element (phi, lambda) of Aut(C(S^1)): phi is the monotone lift of a circle
/// diffeomorphism sampled at the nodes (phi(x + 2pi) = phi(x) + 2pi) and
/// lambda > 0 is the gauge factor.
class GroupElement {
 public:
  GroupElement(Field phi, Field lam);

  static GroupElement identity(int n);
  static GroupElement rotation(int n, double shift);

  int size() const { return static_cast<int>(phi_.size()); }
  const Field& phi() const { return phi_; }
  const Field& lam() const { return lam_; }
  /// Periodic part phi(x) - x.
  Field displacement() const;
  /// phi' by spectral differentiation of the displacement.
  Field jacobian() const;

 private:
  Field phi_;
  Field lam_;
};

/// (phi1, lam1) . (phi2, lam2) = (phi1 o phi2, (lam1 o phi2) lam2).
GroupElement compose(const GroupElement& g1, const GroupElement& g2,
                     Interpolation interp = Interpolation::CubicSpline);
/// (phi, lam)^{-1} = (phi^{-1}, 1 / lam o phi^{-1}); nodes inverted by
/// safeguarded Newton on the interpolated lift.
GroupElement inverse(const GroupElement& g, Interpolation interp = Interpolation::CubicSpline);

/// Solve x + d(x) = y for a monotone lift given by its periodic displacement.
double invert_lift(const PeriodicInterpolant& displacement, double y, double tol = 1e-13);

/// phi_*(lam^2 rho): output(y) = (lam^2 rho / phi') o phi^{-1}(y).
DensityField pushforward_action(const GroupElement& g, const DensityField& rho,
                                Interpolation interp = Interpolation::Trigonometric);

/// (v, alpha) . rho = -(v rho)' + 2 alpha rho.
Field infinitesimal_action(const VelocityPair& xi, const Field& rho);

/// ([v1, v2], alpha1' v2 - alpha2' v1) with the right-invariant bracket
/// [v1, v2] = v2 v1' - v1 v2' (minus the commutator of vector fields).
VelocityPair lie_bracket(const VelocityPair& xi1, const VelocityPair& xi2);

/// phi -> (phi, sqrt(phi')): the isotropy subgroup of the volume density.
GroupElement embed_diffeo(const Field& phi);

/// Largest |lam^2 - phi'|.
double isotropy_defect(const GroupElement& g);

/// Lie exponential exp(t xi): integrates phi' = v o phi, lam' = lam (alpha o phi)
/// from the identity with `steps` RK4 steps.
GroupElement lie_exponential(const VelocityPair& xi, double t, int steps,
                             Interpolation interp = Interpolation::Trigonometric);

/// Right-invariant H^div energy: int a^2 v^2 + b^2 (v')^2 dx.
double hdiv_energy(const Field& v, const ConeParams& params);

/// L^2(S^1, cone) energy: int a^2 lam^2 phidot^2 + 4 b^2 lamdot^2 dx
/// (cone metric with m = lam^2).
double cone_l2_energy(const GroupElement& g, const GroupTangent& gdot,
                      const ConeParams& params);

/// Tangent to the isotropy subgroup at g induced by phidot:
/// lamdot = (phidot)' / (2 lam).
GroupTangent isotropy_tangent(const GroupElement& g, const Field& phidot);

}  // namespace chwfr
