#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace chwfr {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Real samples of a periodic function on a PeriodicGrid.
using Field = std::vector<double>;

/// Bad arguments, malformed files, violated preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to produce a trustworthy answer
/// (non-convergence, blow-up, apex crossing).
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

/// Weights of the cone metric a^2 m g + b^2 dm^2 / m.
struct ConeParams {
  double a = 1.0;
  double b = 0.5;

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
      throw InvalidInput("cone parameters a, b must be positive and finite");
  }
  /// a / (2b); equals 1 exactly when the cone over S^1 is the punctured plane.
  double angle_ratio() const { return a / (2.0 * b); }
};

/// Uniform grid x_i = 2*pi*i/n on the circle.
class PeriodicGrid {
 public:
  explicit PeriodicGrid(int n) : n_(n), h_(kTwoPi / n) {
    if (n < 8 || n % 2 != 0)
      throw InvalidInput("periodic grid size must be even and at least 8, got " +
                         std::to_string(n));
  }
  int size() const { return n_; }
  double spacing() const { return h_; }
  double x(int i) const { return h_ * i; }
  Field points() const {
    Field p(n_);
    for (int i = 0; i < n_; ++i) p[i] = x(i);
    return p;
  }
  bool operator==(const PeriodicGrid& o) const { return n_ == o.n_; }

 private:
  int n_;
  double h_;
};

/// Riemann sum h * sum(f); exact for trigonometric polynomials below Nyquist.
inline double integrate(const Field& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * kTwoPi / static_cast<double>(f.size());
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

/// Wrap an angle into [0, 2*pi).
inline double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

/// Geodesic distance on the unit circle.
inline double circle_distance(double x1, double x2) {
  double d = std::abs(wrap_angle(x1) - wrap_angle(x2));
  return std::min(d, kTwoPi - d);
}

}  // namespace chwfr
