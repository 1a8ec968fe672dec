#pragma once

#include <cstdint>
#include <random>

#include "chwfr/common.hpp"

namespace chwfr::testing {

/// Smooth random trigonometric polynomial with modes 1..kmax and decaying
/// amplitudes, plus a mean.
inline Field random_trig(std::mt19937_64& rng, int n, int kmax, double scale, double mean = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(kmax + 1), s(kmax + 1);
  for (int k = 1; k <= kmax; ++k) {
    c[k] = scale * normal(rng) / (k * k);
    s[k] = scale * normal(rng) / (k * k);
  }
  PeriodicGrid grid(n);
  Field f(n, mean);
  for (int i = 0; i < n; ++i)
    for (int k = 1; k <= kmax; ++k)
      f[i] += c[k] * std::cos(k * grid.x(i)) + s[k] * std::sin(k * grid.x(i));
  return f;
}

/// Random monotone circle diffeomorphism x + eps * smooth(x) with eps small
/// enough that the derivative stays above 1/2.
inline Field random_diffeo(std::mt19937_64& rng, int n, int kmax, double shift = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  PeriodicGrid grid(n);
  std::vector<double> c(kmax + 1), s(kmax + 1);
  double slope = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    c[k] = normal(rng) / (k * k);
    s[k] = normal(rng) / (k * k);
    slope += k * (std::abs(c[k]) + std::abs(s[k]));
  }
  const double eps = 0.5 / slope;
  Field phi(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid.x(i);
    double d = 0.0;
    for (int k = 1; k <= kmax; ++k) d += c[k] * std::cos(k * x) + s[k] * std::sin(k * x);
    phi[i] = x + shift + eps * d;
  }
  return phi;
}

inline double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace chwfr::testing
