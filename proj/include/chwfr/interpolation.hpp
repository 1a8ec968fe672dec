#pragma once

#include <complex>
#include <utility>

#include "chwfr/common.hpp"
#include "chwfr/spectral.hpp"

namespace chwfr {

enum class Interpolation {
  CubicSpline,    ///< periodic C^2 cubic spline, O(h^4)
  Trigonometric,  ///< band-limited Fourier interpolant, spectral accuracy
};

/// Continuous periodic interpolant of samples on a uniform grid of [0, 2*pi).
/// Evaluation accepts any real x (wrapped).
class PeriodicInterpolant {
 public:
  PeriodicInterpolant(const Field& values, Interpolation kind);

  double operator()(double x) const { return value_and_derivative(x).first; }
  double derivative(double x) const { return value_and_derivative(x).second; }
  std::pair<double, double> value_and_derivative(double x) const;
  Field at(const Field& xs) const;

  Interpolation kind() const { return kind_; }
  int size() const { return n_; }

 private:
  Interpolation kind_;
  int n_;
  double h_;
  Field values_;
  Field second_;                     // spline second derivatives
  spectral::Coefficients coeffs_;    // Fourier half-spectrum
};

}  // namespace chwfr
