#include "chwfr/spectral.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace chwfr::spectral {
namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

std::mutex& planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

struct Plans {
  fftw_plan r2c;
  fftw_plan c2r;
};

// Plans are created once per size under a lock; execution uses the
// new-array interface, which is thread-safe for aligned buffers.
const Plans& plans_for(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  FftwBuffer real(sizeof(double) * n);
  FftwBuffer cplx(sizeof(fftw_complex) * (n / 2 + 1));
  Plans p;
  p.r2c = fftw_plan_dft_r2c_1d(n, static_cast<double*>(real.ptr),
                               static_cast<fftw_complex*>(cplx.ptr), FFTW_ESTIMATE);
  p.c2r = fftw_plan_dft_c2r_1d(n, static_cast<fftw_complex*>(cplx.ptr),
                               static_cast<double*>(real.ptr), FFTW_ESTIMATE);
  return cache.emplace(n, p).first->second;
}

}  // namespace

Coefficients forward(const Field& f) {
  const int n = static_cast<int>(f.size());
  const Plans& p = plans_for(n);
  FftwBuffer real(sizeof(double) * n);
  FftwBuffer cplx(sizeof(fftw_complex) * (n / 2 + 1));
  std::memcpy(real.ptr, f.data(), sizeof(double) * n);
  fftw_execute_dft_r2c(p.r2c, static_cast<double*>(real.ptr),
                       static_cast<fftw_complex*>(cplx.ptr));
  Coefficients c(n / 2 + 1);
  const auto* out = static_cast<fftw_complex*>(cplx.ptr);
  const double scale = 1.0 / n;
  for (int k = 0; k <= n / 2; ++k) c[k] = {out[k][0] * scale, out[k][1] * scale};
  return c;
}

Field backward(const Coefficients& c, int n) {
  const Plans& p = plans_for(n);
  FftwBuffer real(sizeof(double) * n);
  FftwBuffer cplx(sizeof(fftw_complex) * (n / 2 + 1));
  auto* in = static_cast<fftw_complex*>(cplx.ptr);
  for (int k = 0; k <= n / 2; ++k) {
    in[k][0] = c[k].real();
    in[k][1] = c[k].imag();
  }
  // c2r ignores the imaginary parts of the k = 0 and Nyquist modes.
  fftw_execute_dft_c2r(p.c2r, in, static_cast<double*>(real.ptr));
  Field f(n);
  std::memcpy(f.data(), real.ptr, sizeof(double) * n);
  return f;
}

Field derivative(const Field& f, int order) {
  const int n = static_cast<int>(f.size());
  Coefficients c = forward(f);
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<double> ik(0.0, static_cast<double>(k));
    std::complex<double> factor = 1.0;
    for (int j = 0; j < order; ++j) factor *= ik;
    c[k] *= factor;
  }
  if (order % 2 == 1) c[n / 2] = 0.0;
  return backward(c, n);
}

int dealias_cutoff(int n) { return (n - 1) / 3; }

Field dealias(const Field& f) {
  const int n = static_cast<int>(f.size());
  Coefficients c = forward(f);
  const int K = dealias_cutoff(n);
  for (int k = K + 1; k <= n / 2; ++k) c[k] = 0.0;
  return backward(c, n);
}

Field helmholtz_solve(const Field& f, double c0, double c2) {
  if (!(c0 > 0.0) || c2 < 0.0) throw InvalidInput("helmholtz_solve: need c0 > 0, c2 >= 0");
  const int n = static_cast<int>(f.size());
  Coefficients c = forward(f);
  for (int k = 0; k <= n / 2; ++k) c[k] /= (c0 + c2 * double(k) * double(k));
  return backward(c, n);
}

std::vector<double> derivative_matrix(int n) {
  // Closed form for even n: D_ij = (1/2) (-1)^(i-j) cot((i-j) h / 2).
  const double h = kTwoPi / n;
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int diff = i - j;
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      d[static_cast<std::size_t>(i) * n + j] = 0.5 * sign / std::tan(diff * h / 2.0);
    }
  return d;
}

struct RowTransform::Impl {
  int rows = 0;
  int n = 0;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

RowTransform::RowTransform(int rows, int n) : impl_(std::make_unique<Impl>()) {
  if (rows < 1 || n < 1) throw InvalidInput("RowTransform: sizes must be positive");
  impl_->rows = rows;
  impl_->n = n;
  const int modes = n / 2 + 1;
  impl_->real = static_cast<double*>(fftw_malloc(sizeof(double) * rows * n));
  impl_->cplx = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * rows * modes));
  if (!impl_->real || !impl_->cplx) {
    fftw_free(impl_->real);
    fftw_free(impl_->cplx);
    throw std::bad_alloc();
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->fwd = fftw_plan_many_dft_r2c(1, &n, rows, impl_->real, nullptr, 1, n, impl_->cplx,
                                      nullptr, 1, modes, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_many_dft_c2r(1, &n, rows, impl_->cplx, nullptr, 1, modes, impl_->real,
                                      nullptr, 1, n, FFTW_ESTIMATE);
}

RowTransform::~RowTransform() {
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(impl_->fwd);
    fftw_destroy_plan(impl_->bwd);
  }
  fftw_free(impl_->real);
  fftw_free(impl_->cplx);
}

int RowTransform::rows() const { return impl_->rows; }
int RowTransform::size() const { return impl_->n; }
double* RowTransform::real() { return impl_->real; }
std::complex<double>* RowTransform::spectrum() {
  return reinterpret_cast<std::complex<double>*>(impl_->cplx);
}
void RowTransform::forward() { fftw_execute(impl_->fwd); }
void RowTransform::backward() { fftw_execute(impl_->bwd); }

}  // namespace chwfr::spectral
