#include "chwfr/interpolation.hpp"

namespace chwfr {

PeriodicInterpolant::PeriodicInterpolant(const Field& values, Interpolation kind)
    : kind_(kind), n_(static_cast<int>(values.size())), h_(kTwoPi / values.size()),
      values_(values) {
  if (n_ < 4) throw InvalidInput("interpolant needs at least 4 samples");
  if (kind_ == Interpolation::Trigonometric) {
    coeffs_ = spectral::forward(values_);
    return;
  }
  // Periodic spline moments solve the circulant system
  // M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2,
  // which is diagonal in Fourier space.
  spectral::Coefficients c = spectral::forward(values_);
  for (int k = 0; k <= n_ / 2; ++k) {
    const double cs = std::cos(kTwoPi * k / n_);
    c[k] *= 6.0 / (h_ * h_) * (2.0 * cs - 2.0) / (4.0 + 2.0 * cs);
  }
  second_ = spectral::backward(c, n_);
}

std::pair<double, double> PeriodicInterpolant::value_and_derivative(double x) const {
  const double xw = wrap_angle(x);
  if (kind_ == Interpolation::CubicSpline) {
    int i = static_cast<int>(xw / h_);
    if (i >= n_) i = n_ - 1;
    const int j = (i + 1) % n_;
    const double s = xw - i * h_;  // distance from left node
    const double r = h_ - s;       // distance to right node
    const double mi = second_[i], mj = second_[j];
    const double yi = values_[i], yj = values_[j];
    const double val = mi * r * r * r / (6.0 * h_) + mj * s * s * s / (6.0 * h_) +
                       (yi - mi * h_ * h_ / 6.0) * r / h_ + (yj - mj * h_ * h_ / 6.0) * s / h_;
    const double der = -mi * r * r / (2.0 * h_) + mj * s * s / (2.0 * h_) + (yj - yi) / h_ -
                       (mj - mi) * h_ / 6.0;
    return {val, der};
  }
  const std::complex<double> z(std::cos(xw), std::sin(xw));
  std::complex<double> w = z;
  double val = coeffs_[0].real();
  double der = 0.0;
  const int nyq = n_ / 2;
  for (int k = 1; k < nyq; ++k) {
    const std::complex<double> term = coeffs_[k] * w;
    val += 2.0 * term.real();
    der -= 2.0 * k * term.imag();
    w *= z;
  }
  const double cn = coeffs_[nyq].real();
  val += cn * std::cos(nyq * xw);
  der -= cn * nyq * std::sin(nyq * xw);
  return {val, der};
}

Field PeriodicInterpolant::at(const Field& xs) const {
  Field out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (*this)(xs[i]);
  return out;
}

}  // namespace chwfr
