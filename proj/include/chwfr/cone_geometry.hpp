#pragma once

#include <array>
#include <vector>

#include "chwfr/common.hpp"

namespace chwfr {

/// A point (x, m) of the cone over S^1: base angle and mass coordinate.
/// m == 0 is the apex; its angle is irrelevant.
struct ConePoint {
  double x = 0.0;
  double m = 0.0;
  bool is_apex() const { return m == 0.0; }
};

/// Tangent vector (dx, dm) at a non-apex base point.
struct ConeTangent {
  ConePoint base;
  double dx = 0.0;
  double dm = 0.0;
};

/// Distance of (S^1 x R_+, a^2 m dx^2 + b^2 dm^2 / m) completed by the apex:
/// d^2 = 4b^2 (m1 + m2 - 2 sqrt(m1 m2) cos(min(a/(2b) d_S1, pi))).
double cone_distance(const ConePoint& p1, const ConePoint& p2, const ConeParams& params);

/// Metric norm sqrt(a^2 m dx^2 + b^2 dm^2 / m).
double cone_speed(const ConeTangent& v, const ConeParams& params);

/// One sample of a geodesic. `x_lift` is the continuous angle (not wrapped).
struct GeodesicSample {
  double t = 0.0;
  double x_lift = 0.0;
  double m = 0.0;
  double dx = 0.0;
  double dm = 0.0;

  ConePoint point() const { return {wrap_angle(x_lift), m}; }
  ConeTangent tangent() const { return {point(), dx, dm}; }
};

struct GeodesicOptions {
  double apex_floor = 1e-12;  ///< m below this aborts with "apex_crossing"
};

/// Fixed-step RK4 integration of
///   x'' + (m'/m) x' = 0,   m'' - m'^2/(2m) - (a^2/(2b^2)) x'^2 m = 0.
/// Returns samples at t = 0, dt, ..., t_final (last step shortened if needed).
std::vector<GeodesicSample> cone_geodesic(const ConeTangent& v0, double t_final, double dt,
                                          const ConeParams& params,
                                          const GeodesicOptions& options = {});

/// Closed-form geodesic: a straight line in the planar chart centred on the
/// initial angle. Valid while the line stays away from the origin.
GeodesicSample cone_geodesic_exact(const ConeTangent& v0, double t, const ConeParams& params);

/// Angular window on which planar_chart is an isometry onto its image.
struct ChartSector {
  double center = 0.0;
  double half_width = kPi;  ///< valid for |x - center| < half_width (circle distance)
  bool global = false;      ///< a/(2b) == 1: the whole punctured plane
};
ChartSector chart_sector(const ConeParams& params, double center = 0.0);

/// (x, m) -> 2b sqrt(m) e^{i (a/(2b)) (x - center)} in R^2.
/// Throws for the apex and, when the chart is only local, outside the sector.
std::array<double, 2> planar_chart(const ConePoint& p, const ConeParams& params,
                                   double center = 0.0);
ConePoint planar_chart_inverse(const std::array<double, 2>& z, const ConeParams& params,
                               double center = 0.0);

/// Sectional curvature of the plane spanned by two lifted base directions:
/// K_base - 1.
double cone_sectional_curvature(double k_base);
/// Planes containing the radial direction are flat.
inline double cone_radial_sectional_curvature() { return 0.0; }

}  // namespace chwfr
