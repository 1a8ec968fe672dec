#include "chwfr/cone_geometry.hpp"

#include <algorithm>

namespace chwfr {

double cone_distance(const ConePoint& p1, const ConePoint& p2, const ConeParams& params) {
  params.validate();
  if (p1.m < 0.0 || p2.m < 0.0) throw InvalidInput("cone_distance: negative mass");
  const double theta = std::min(params.angle_ratio() * circle_distance(p1.x, p2.x), kPi);
  const double d2 = 4.0 * params.b * params.b *
                    (p1.m + p2.m - 2.0 * std::sqrt(p1.m * p2.m) * std::cos(theta));
  return std::sqrt(std::max(d2, 0.0));
}

double cone_speed(const ConeTangent& v, const ConeParams& params) {
  if (!(v.base.m > 0.0)) throw InvalidInput("no tangent space at the apex");
  const double a = params.a, b = params.b, m = v.base.m;
  return std::sqrt(a * a * m * v.dx * v.dx + b * b * v.dm * v.dm / m);
}

namespace {

struct State {
  double x, m, dx, dm;
};

State rhs(const State& s, double ratio) {
  return {s.dx, s.dm, -(s.dm / s.m) * s.dx,
          s.dm * s.dm / (2.0 * s.m) + 2.0 * ratio * ratio * s.dx * s.dx * s.m};
}

State axpy(const State& s, double h, const State& k) {
  return {s.x + h * k.x, s.m + h * k.m, s.dx + h * k.dx, s.dm + h * k.dm};
}

}  // namespace

std::vector<GeodesicSample> cone_geodesic(const ConeTangent& v0, double t_final, double dt,
                                          const ConeParams& params,
                                          const GeodesicOptions& options) {
  params.validate();
  if (!(v0.base.m > 0.0)) throw InvalidInput("cone_geodesic: start point is the apex");
  if (!(dt > 0.0) || t_final < 0.0) throw InvalidInput("cone_geodesic: need dt > 0, t_final >= 0");
  // a^2 / (2 b^2) = 2 (a/(2b))^2
  const double ratio = params.angle_ratio();
  // The squared chart radius 4b^2 m is quadratic in t, so the closest approach
  // to the apex is known in advance: m_min = a^2 (m x')^2 / |v|^2 at
  // t* = -2 b^2 m'(0) / |v|^2. A grid step can jump over a grazing zero.
  const double speed2 = std::pow(cone_speed(v0, params), 2);
  if (speed2 > 0.0) {
    const double t_star = -2.0 * params.b * params.b * v0.dm / speed2;
    const double lm = v0.base.m * v0.dx;
    const double m_min = params.a * params.a * lm * lm / speed2;
    if (t_star > 0.0 && t_star <= t_final && m_min < options.apex_floor)
      throw SolverFailure("apex_crossing",
                          "geodesic reaches the cone apex at t = " + std::to_string(t_star));
  }
  State s{v0.base.x, v0.base.m, v0.dx, v0.dm};
  std::vector<GeodesicSample> out;
  out.push_back({0.0, s.x, s.m, s.dx, s.dm});
  const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
  double t = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(dt, t_final - t);
    const State k1 = rhs(s, ratio);
    const State k2 = rhs(axpy(s, h / 2, k1), ratio);
    const State k3 = rhs(axpy(s, h / 2, k2), ratio);
    const State k4 = rhs(axpy(s, h, k3), ratio);
    s = {s.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
         s.m + h / 6 * (k1.m + 2 * k2.m + 2 * k3.m + k4.m),
         s.dx + h / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx),
         s.dm + h / 6 * (k1.dm + 2 * k2.dm + 2 * k3.dm + k4.dm)};
    t = (k + 1 == steps) ? t_final : t + h;
    if (!(s.m >= options.apex_floor) || !std::isfinite(s.x))
      throw SolverFailure("apex_crossing",
                          "geodesic reached the cone apex at t = " + std::to_string(t));
    out.push_back({t, s.x, s.m, s.dx, s.dm});
  }
  return out;
}

GeodesicSample cone_geodesic_exact(const ConeTangent& v0, double t, const ConeParams& params) {
  params.validate();
  if (!(v0.base.m > 0.0)) throw InvalidInput("cone_geodesic_exact: start point is the apex");
  const double a = params.a, b = params.b, m0 = v0.base.m;
  const double sq = std::sqrt(m0);
  // Chart frame rotated so that the start point sits on the positive real axis.
  const double wr = b * v0.dm / sq;
  const double wi = a * sq * v0.dx;
  const double zr = 2.0 * b * sq + t * wr;
  const double zi = t * wi;
  const double r2 = zr * zr + zi * zi;
  if (!(r2 > 0.0)) throw SolverFailure("apex_crossing", "straight line passes through the apex");
  const double theta = std::atan2(zi, zr);
  const double rdot_r = (zr * wr + zi * wi);  // r * dr/dt
  const double thetadot = (zr * wi - zi * wr) / r2;
  GeodesicSample s;
  s.t = t;
  s.x_lift = v0.base.x + theta / params.angle_ratio();
  s.m = r2 / (4.0 * b * b);
  s.dx = thetadot / params.angle_ratio();
  s.dm = 2.0 * rdot_r / (4.0 * b * b);
  return s;
}

ChartSector chart_sector(const ConeParams& params, double center) {
  params.validate();
  ChartSector sector;
  sector.center = wrap_angle(center);
  sector.global = params.angle_ratio() == 1.0;
  sector.half_width = std::min(kPi, kPi / params.angle_ratio());
  return sector;
}

std::array<double, 2> planar_chart(const ConePoint& p, const ConeParams& params,
                                   double center) {
  const ChartSector sector = chart_sector(params, center);
  if (!(p.m > 0.0)) throw InvalidInput("planar_chart: the apex has no chart image");
  // signed angular offset in (-pi, pi]
  double dx = wrap_angle(p.x - sector.center);
  if (dx > kPi) dx -= kTwoPi;
  if (!sector.global && !(std::abs(dx) < sector.half_width))
    throw InvalidInput("planar_chart: point outside the chart sector");
  const double r = 2.0 * params.b * std::sqrt(p.m);
  const double theta = params.angle_ratio() * dx;
  return {r * std::cos(theta), r * std::sin(theta)};
}

ConePoint planar_chart_inverse(const std::array<double, 2>& z, const ConeParams& params,
                               double center) {
  params.validate();
  const double r2 = z[0] * z[0] + z[1] * z[1];
  if (!(r2 > 0.0)) throw InvalidInput("planar_chart_inverse: origin maps to the apex");
  const double theta = std::atan2(z[1], z[0]);
  return {wrap_angle(center + theta / params.angle_ratio()),
          r2 / (4.0 * params.b * params.b)};
}

double cone_sectional_curvature(double k_base) { return k_base - 1.0; }

}  // namespace chwfr
