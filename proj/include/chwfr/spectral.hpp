#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "chwfr/common.hpp"

namespace chwfr::spectral {

using Coefficients = std::vector<std::complex<double>>;

/// Normalized half-spectrum c_k, k = 0..n/2, with f(x) = sum_k c_k e^{ikx}
/// (negative modes are the conjugates).
Coefficients forward(const Field& f);
/// Inverse of forward(); `n` is the physical size.
Field backward(const Coefficients& c, int n);

/// Wavenumber-space derivative. The Nyquist mode is dropped for odd orders
/// so that the first-derivative operator is antisymmetric.
Field derivative(const Field& f, int order = 1);

/// Largest retained wavenumber K under the 2/3 rule (3K < n).
int dealias_cutoff(int n);
/// Zero every mode |k| > dealias_cutoff(n).
Field dealias(const Field& f);

/// Solve (c0 - c2 d_xx) u = f; requires c0 > 0, c2 >= 0.
Field helmholtz_solve(const Field& f, double c0, double c2);

/// Dense first-derivative matrix, row-major n*n, identical to derivative(., 1).
std::vector<double> derivative_matrix(int n);

/// Batched, unnormalized real transforms of `rows` contiguous rows of length
/// n, operating in place on owned aligned buffers.
class RowTransform {
 public:
  RowTransform(int rows, int n);
  ~RowTransform();
  RowTransform(const RowTransform&) = delete;
  RowTransform& operator=(const RowTransform&) = delete;

  int rows() const;
  int size() const;
  int modes() const { return size() / 2 + 1; }
  double* real();                     ///< rows * n
  std::complex<double>* spectrum();   ///< rows * (n / 2 + 1)
  void forward();                     ///< real -> spectrum
  void backward();                    ///< spectrum -> real (scaled by n)

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chwfr::spectral
