#include "chwfr/wfr_dynamic.hpp"

#include <algorithm>
#include <limits>

#include "chwfr/spectral.hpp"
#include "chwfr/submersion.hpp"

namespace chwfr {

WFRVariables::WFRVariables(int nt_, int nx_)
    : nt(nt_),
      nx(nx_),
      rho(static_cast<std::size_t>(nt_ + 1) * nx_, 0.0),
      m(static_cast<std::size_t>(nt_) * nx_, 0.0),
      mu(static_cast<std::size_t>(nt_) * nx_, 0.0) {}

namespace {

using cplx = std::complex<double>;

// K: face values -> cell averages. Writes into a preallocated CellValues.
void apply_K(const WFRVariables& v, CellValues& c) {
  const int nt = v.nt, nx = v.nx;
  for (int k = 0; k < nt; ++k) {
    const double* r0 = &v.rho[static_cast<std::size_t>(k) * nx];
    const double* r1 = r0 + nx;
    const double* m = &v.m[static_cast<std::size_t>(k) * nx];
    double* cr = &c.rho[static_cast<std::size_t>(k) * nx];
    double* cm = &c.m[static_cast<std::size_t>(k) * nx];
    for (int i = 0; i < nx; ++i) {
      cr[i] = 0.5 * (r0[i] + r1[i]);
      cm[i] = 0.5 * (m[i == 0 ? nx - 1 : i - 1] + m[i]);
    }
  }
  std::copy(v.mu.begin(), v.mu.end(), c.mu.begin());
}

// K^T, including the pinned rows.
void apply_KT(const CellValues& c, WFRVariables& v) {
  const int nt = v.nt, nx = v.nx;
  std::fill(v.rho.begin(), v.rho.end(), 0.0);
  for (int k = 0; k < nt; ++k) {
    const double* cr = &c.rho[static_cast<std::size_t>(k) * nx];
    const double* cm = &c.m[static_cast<std::size_t>(k) * nx];
    double* r0 = &v.rho[static_cast<std::size_t>(k) * nx];
    double* r1 = r0 + nx;
    double* m = &v.m[static_cast<std::size_t>(k) * nx];
    for (int i = 0; i < nx; ++i) {
      r0[i] += 0.5 * cr[i];
      r1[i] += 0.5 * cr[i];
      m[i] = 0.5 * (cm[i] + cm[i + 1 == nx ? 0 : i + 1]);
    }
  }
  std::copy(c.mu.begin(), c.mu.end(), v.mu.begin());
}

CellValues make_cells(std::size_t cells) { return {Field(cells, 0.0), Field(cells, 0.0), Field(cells, 0.0)}; }

double cell_sum(const CellValues& c, const ConeParams& params) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.rho.size(); ++j) s += action_density(c.rho[j], c.m[j], c.mu[j], params);
  return s;
}

void check_grid(int nt, int nx) {
  if (nt < 4 || nx < 4)
    throw InvalidInput("space-time grid is singular below nt = nx = 4 (got nt = " +
                       std::to_string(nt) + ", nx = " + std::to_string(nx) + ")");
}

// Root of the increasing concave
//   f(r) = r - rt - g a2 mt^2 / (r + 2 g a2)^2 - g b2 ut^2 / (r + 2 g b2)^2,
// f(max(rt, 0)) <= 0, so Newton started there approaches from the left.
double prox_rho(double rt, double mt, double ut, double g, double a2, double b2, bool with_mu) {
  const double ca = g * a2 * mt * mt, da = 2.0 * g * a2;
  const double cb = with_mu ? g * b2 * ut * ut : 0.0, db = 2.0 * g * b2;
  auto f = [&](double r) {
    return r - rt - ca / ((r + da) * (r + da)) - cb / ((r + db) * (r + db));
  };
  auto df = [&](double r) {
    return 1.0 + 2.0 * ca / ((r + da) * (r + da) * (r + da)) +
           2.0 * cb / ((r + db) * (r + db) * (r + db));
  };
  const double f0 = f(0.0);
  if (f0 >= 0.0) return 0.0;
  double lo = 0.0, hi = -f0;
  double r = std::max(rt, 0.0);
  for (int it = 0; it < 100; ++it) {
    const double fr = f(r);
    if (fr == 0.0) return r;
    if (fr < 0.0) lo = std::max(lo, r); else hi = std::min(hi, r);
    const double next = r - fr / df(r);
    if (std::abs(next - r) <= 4e-16 * std::max(1.0, r)) return next;
    r = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
  }
  return r;
}

ProxPoint prox_impl(const ProxPoint& x, double sigma, const ConeParams& params, bool with_mu) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("prox_action: sigma must be positive");
  const double g = 1.0 / sigma;
  const double a2 = params.a * params.a, b2 = params.b * params.b;
  const double r = prox_rho(x.rho, x.m, x.mu, g, a2, b2, with_mu);
  if (r <= 0.0) return {0.0, 0.0, 0.0};
  return {r, r * x.m / (r + 2.0 * g * a2), with_mu ? r * x.mu / (r + 2.0 * g * b2) : 0.0};
}

// Factored symmetric tridiagonal matrix with constant off-diagonal.
class Tridiagonal {
 public:
  Tridiagonal() = default;
  Tridiagonal(const std::vector<double>& diag, double off) : off_(off), c_(diag.size()), inv_(diag.size()) {
    double prev = 0.0;
    for (std::size_t k = 0; k < diag.size(); ++k) {
      const double den = diag[k] - (k > 0 ? off * prev : 0.0);
      inv_[k] = 1.0 / den;
      c_[k] = off * inv_[k];
      prev = c_[k];
    }
  }
  // Solves in place on x[0], x[stride], ...
  template <class T>
  void solve(T* x, std::size_t stride) const {
    const std::size_t n = c_.size();
    x[0] *= inv_[0];
    for (std::size_t k = 1; k < n; ++k) x[k * stride] = (x[k * stride] - off_ * x[(k - 1) * stride]) * inv_[k];
    for (std::size_t k = n - 1; k-- > 0;) x[k * stride] -= c_[k] * x[(k + 1) * stride];
  }

 private:
  double off_ = 0.0;
  std::vector<double> c_, inv_;
};

void require_endpoints(const DensityField& rho0, const DensityField& rho1, int nx) {
  if (static_cast<int>(rho0.size()) != nx || static_cast<int>(rho1.size()) != nx)
    throw InvalidInput("endpoint densities must have nx samples");
  for (const DensityField* r : {&rho0, &rho1})
    for (double x : *r)
      if (!std::isfinite(x)) throw InvalidInput("endpoint densities must be finite");
}

void require_balanced_mass(const DensityField& rho0, const DensityField& rho1) {
  const double m0 = density_mass(rho0), m1 = density_mass(rho1);
  if (std::abs(m0 - m1) > 1e-12 * std::max({1.0, m0, m1}))
    throw SolverFailure("infeasible", "balanced transport requires equal masses (got " +
                                          std::to_string(m0) + " and " + std::to_string(m1) + ")");
}

void continuity_residual_into(const WFRVariables& v, double* res) {
  const int nt = v.nt, nx = v.nx;
  const double idt = 1.0 / v.dt(), idx = 1.0 / v.dx();
  for (int k = 0; k < nt; ++k) {
    const double* r0 = &v.rho[static_cast<std::size_t>(k) * nx];
    const double* r1 = r0 + nx;
    const double* m = &v.m[static_cast<std::size_t>(k) * nx];
    const double* mu = &v.mu[static_cast<std::size_t>(k) * nx];
    double* out = res + static_cast<std::size_t>(k) * nx;
    for (int i = 0; i < nx; ++i)
      out[i] = (r1[i] - r0[i]) * idt + (m[i] - m[i == 0 ? nx - 1 : i - 1]) * idx - mu[i];
  }
}

// Euclidean projection onto the continuity constraint with pinned endpoints:
// U <- U - A^T (A A^T)^{-1} (A U - b). A A^T is diagonal in space modes and a
// Neumann tridiagonal in time (+ identity from mu when unbalanced).
class Projector {
 public:
  Projector(int nt, int nx, bool balanced) : nt_(nt), nx_(nx), balanced_(balanced), fft_(nt, nx) {
    check_grid(nt, nx);
    const double dt = 1.0 / nt, h = kTwoPi / nx;
    const double idt2 = 1.0 / (dt * dt);
    factors_.resize(fft_.modes());
    for (int j = 0; j < fft_.modes(); ++j) {
      const double c = (2.0 - 2.0 * std::cos(kTwoPi * j / nx)) / (h * h) + (balanced ? 0.0 : 1.0);
      if (j == 0 && balanced) continue;
      std::vector<double> diag(nt);
      for (int k = 0; k < nt; ++k) diag[k] = ((k == 0 || k == nt - 1) ? idt2 : 2.0 * idt2) + c;
      factors_[j] = Tridiagonal(diag, -idt2);
    }
  }

  void apply(WFRVariables& v, const DensityField& rho0, const DensityField& rho1) {
    std::copy(rho0.begin(), rho0.end(), v.rho.begin());
    std::copy(rho1.begin(), rho1.end(), v.rho.begin() + static_cast<long>(nt_) * nx_);
    if (balanced_) std::fill(v.mu.begin(), v.mu.end(), 0.0);
    continuity_residual_into(v, fft_.real());
    fft_.forward();
    cplx* s = fft_.spectrum();
    const std::size_t stride = static_cast<std::size_t>(fft_.modes());
    for (int j = 0; j < fft_.modes(); ++j) {
      if (j == 0 && balanced_) {
        // Kernel = constants; fix q_0 = 0 and integrate the flux.
        const double dt2 = 1.0 / (static_cast<double>(nt_) * nt_);
        cplx acc = 0.0, q = 0.0;
        cplx prev = s[0];
        s[0] = 0.0;
        for (int k = 0; k + 1 < nt_; ++k) {
          acc += prev;
          q -= acc * dt2;
          prev = s[(k + 1) * stride];
          s[(k + 1) * stride] = q;
        }
        continue;
      }
      factors_[j].solve(s + j, stride);
    }
    fft_.backward();
    const double* q = fft_.real();
    const double scale = 1.0 / nx_;
    const double idt = nt_ * scale, idx = scale / (kTwoPi / nx_);
    for (int k = 1; k < nt_; ++k) {
      const double* qb = q + static_cast<std::size_t>(k - 1) * nx_;
      const double* qa = qb + nx_;
      double* r = &v.rho[static_cast<std::size_t>(k) * nx_];
      for (int i = 0; i < nx_; ++i) r[i] -= (qb[i] - qa[i]) * idt;
    }
    for (int k = 0; k < nt_; ++k) {
      const double* qk = q + static_cast<std::size_t>(k) * nx_;
      double* m = &v.m[static_cast<std::size_t>(k) * nx_];
      double* mu = &v.mu[static_cast<std::size_t>(k) * nx_];
      for (int i = 0; i < nx_; ++i) {
        m[i] -= (qk[i] - qk[i + 1 == nx_ ? 0 : i + 1]) * idx;
        if (!balanced_) mu[i] += qk[i] * scale;
      }
    }
  }

 private:
  int nt_, nx_;
  bool balanced_;
  spectral::RowTransform fft_;
  std::vector<Tridiagonal> factors_;
};

// Projection onto the graph {(U, V) : V = K U}: U <- (I + K^T K)^{-1}(U + K^T V).
class GraphProjector {
 public:
  GraphProjector(int nt, int nx) : nt_(nt), nx_(nx), fft_(nt, nx), kt_(nt, nx) {
    std::vector<double> diag(nt + 1, 1.5);
    diag.front() = diag.back() = 1.25;
    rho_ = Tridiagonal(diag, 0.25);
    eig_.resize(fft_.modes());
    for (int j = 0; j < fft_.modes(); ++j) eig_[j] = 1.5 + 0.5 * std::cos(kTwoPi * j / nx);
  }

  void apply(WFRVariables& u, CellValues& v) {
    apply_KT(v, kt_);
    for (std::size_t q = 0; q < u.rho.size(); ++q) u.rho[q] += kt_.rho[q];
    for (int i = 0; i < nx_; ++i) rho_.solve(&u.rho[i], static_cast<std::size_t>(nx_));
    double* buf = fft_.real();
    for (std::size_t q = 0; q < u.m.size(); ++q) buf[q] = u.m[q] + kt_.m[q];
    fft_.forward();
    cplx* s = fft_.spectrum();
    const double scale = 1.0 / nx_;
    for (int k = 0; k < nt_; ++k)
      for (int j = 0; j < fft_.modes(); ++j) s[static_cast<std::size_t>(k) * fft_.modes() + j] *= scale / eig_[j];
    fft_.backward();
    std::copy(buf, buf + u.m.size(), u.m.begin());
    for (std::size_t q = 0; q < u.mu.size(); ++q) u.mu[q] = 0.5 * (u.mu[q] + v.mu[q]);
    apply_K(u, v);
  }

 private:
  int nt_, nx_;
  spectral::RowTransform fft_;
  WFRVariables kt_;
  Tridiagonal rho_;
  std::vector<double> eig_;
};

double primal_gap(const CellValues& V, const CellValues& KU) {
  double g = 0.0;
  for (std::size_t j = 0; j < V.rho.size(); ++j)
    g = std::max({g, std::abs(V.rho[j] - KU.rho[j]), std::abs(V.m[j] - KU.m[j]),
                  std::abs(V.mu[j] - KU.mu[j])});
  return g;
}

}  // namespace

CellValues interpolate_to_cells(const WFRVariables& vars) {
  CellValues c = make_cells(static_cast<std::size_t>(vars.nt) * vars.nx);
  apply_K(vars, c);
  return c;
}

double action_density(double rho, double m, double mu, const ConeParams& params) {
  const double num = params.a * params.a * m * m + params.b * params.b * mu * mu;
  if (rho > 0.0) return num / rho;
  return (rho == 0.0 && num == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
}

double wfr_action(const WFRVariables& vars, const ConeParams& params) {
  return cell_sum(interpolate_to_cells(vars), params) * vars.dt() * vars.dx();
}

ProxPoint prox_action(const ProxPoint& x, double sigma, const ConeParams& params) {
  return prox_impl(x, sigma, params, true);
}

ProxPoint prox_action_balanced(const ProxPoint& x, double sigma, const ConeParams& params) {
  return prox_impl(x, sigma, params, false);
}

double constraint_residual(const WFRVariables& vars, const DensityField& rho0,
                           const DensityField& rho1) {
  Field res(static_cast<std::size_t>(vars.nt) * vars.nx);
  continuity_residual_into(vars, res.data());
  double r = max_abs(res);
  for (int i = 0; i < vars.nx; ++i) {
    r = std::max(r, std::abs(vars.rho_at(0, i) - rho0[i]));
    r = std::max(r, std::abs(vars.rho_at(vars.nt, i) - rho1[i]));
  }
  return r;
}

WFRVariables continuity_project(const WFRVariables& vars, const DensityField& rho0,
                                const DensityField& rho1, bool balanced) {
  check_grid(vars.nt, vars.nx);
  require_endpoints(rho0, rho1, vars.nx);
  if (balanced) require_balanced_mass(rho0, rho1);
  WFRVariables out = vars;
  Projector(vars.nt, vars.nx, balanced).apply(out, rho0, rho1);
  return out;
}

WFRResult solve_wfr(const DensityField& rho0, const DensityField& rho1, const ConeParams& params,
                    const WFROptions& options) {
  params.validate();
  const int nx = options.nx == 0 ? static_cast<int>(rho0.size()) : options.nx;
  const int nt = options.nt;
  check_grid(nt, nx);
  require_endpoints(rho0, rho1, nx);
  require_density(rho0, "rho0");
  require_density(rho1, "rho1");
  const double m0 = density_mass(rho0), m1 = density_mass(rho1);
  if (!(m0 > 0.0) || !(m1 > 0.0)) throw InvalidInput("solve_wfr: densities need positive mass");
  if (options.max_iters < 1 || !(options.tol > 0.0) || options.check_every < 1)
    throw InvalidInput("solve_wfr: max_iters, tol and check_every must be positive");
  if (!(options.relaxation > 0.0 && options.relaxation < 2.0))
    throw InvalidInput("solve_wfr: relaxation must lie in (0, 2)");
  const bool balanced = options.balanced;
  if (balanced) require_balanced_mass(rho0, rho1);
  const bool with_mu = !balanced;

  const double scale = std::max(*std::max_element(rho0.begin(), rho0.end()),
                                *std::max_element(rho1.begin(), rho1.end()));
  Projector proj(nt, nx, balanced);
  const std::size_t cells = static_cast<std::size_t>(nt) * nx;
  const double measure = (1.0 / nt) * (kTwoPi / nx);

  WFRVariables U(nt, nx);
  for (int k = 0; k <= nt; ++k) {
    const double s = static_cast<double>(k) / nt;
    for (int i = 0; i < nx; ++i) U.rho_at(k, i) = (1.0 - s) * rho0[i] + s * rho1[i];
  }
  if (with_mu)
    for (int k = 0; k < nt; ++k)
      for (int i = 0; i < nx; ++i) U.mu_at(k, i) = rho1[i] - rho0[i];
  proj.apply(U, rho0, rho1);

  CellValues V = make_cells(cells);
  apply_K(U, V);
  WFRResult result;
  double prev_action = std::numeric_limits<double>::quiet_NaN();
  // Relative change of the action, floored at tol * (m0 + m1) so that a
  // vanishing action (identical endpoints) still terminates.
  const double floor = options.tol * (m0 + m1);
  auto check = [&](int it) {
    if (it % options.check_every != 0) return false;
    const double action = cell_sum(V, params) * measure;
    const double change = std::abs(action - prev_action);
    prev_action = action;
    return change <= options.tol * std::max(action, floor);
  };

  int it = 0;
  if (options.algorithm == WFRAlgorithm::PrimalDual) {
    // K is an averaging map with |K| <= 1, so sigma * tau < 1 suffices.
    double sigma = options.step > 0.0 ? options.step : 10.0 * scale;
    double tau = 0.99 / sigma;
    WFRVariables W = U, Ubar = U, kty(nt, nx), Uold(nt, nx);
    CellValues y = make_cells(cells), kb = make_cells(cells), yold = make_cells(cells),
               kw = make_cells(cells);
    // Residual balancing: sigma * tau stays fixed and the adaptation rate
    // decays geometrically, so the steps freeze after finitely many changes.
    double rate = 0.5;
    for (it = 1; it <= options.max_iters; ++it) {
      const bool adapt = options.adaptive && it % options.check_every == 0;
      if (adapt) {
        Uold = U;
        yold = y;
      }
      apply_K(Ubar, kb);
      for (std::size_t j = 0; j < cells; ++j) {
        // Moreau: prox_{sigma F*}(z) = z - sigma prox_{F/sigma}(z / sigma).
        const ProxPoint z{y.rho[j] + sigma * kb.rho[j], y.m[j] + sigma * kb.m[j],
                          with_mu ? y.mu[j] + sigma * kb.mu[j] : 0.0};
        const ProxPoint p = prox_impl({z.rho / sigma, z.m / sigma, z.mu / sigma}, sigma, params, with_mu);
        V.rho[j] = p.rho;
        V.m[j] = p.m;
        V.mu[j] = p.mu;
        y.rho[j] = z.rho - sigma * p.rho;
        y.m[j] = z.m - sigma * p.m;
        y.mu[j] = z.mu - sigma * p.mu;
      }
      apply_KT(y, kty);
      for (std::size_t q = 0; q < W.rho.size(); ++q) W.rho[q] = U.rho[q] - tau * kty.rho[q];
      for (std::size_t q = 0; q < cells; ++q) {
        W.m[q] = U.m[q] - tau * kty.m[q];
        W.mu[q] = U.mu[q] - tau * kty.mu[q];
      }
      proj.apply(W, rho0, rho1);
      const double r = options.relaxation;
      for (std::size_t q = 0; q < W.rho.size(); ++q) {
        const double nxt = U.rho[q] + r * (W.rho[q] - U.rho[q]);
        Ubar.rho[q] = 2.0 * W.rho[q] - U.rho[q];
        U.rho[q] = nxt;
      }
      for (std::size_t q = 0; q < cells; ++q) {
        const double nm = U.m[q] + r * (W.m[q] - U.m[q]);
        const double nmu = U.mu[q] + r * (W.mu[q] - U.mu[q]);
        Ubar.m[q] = 2.0 * W.m[q] - U.m[q];
        Ubar.mu[q] = 2.0 * W.mu[q] - U.mu[q];
        U.m[q] = nm;
        U.mu[q] = nmu;
      }
      if (adapt) {
        // primal residual (x - x+) / tau, dual residual (y - y+) / sigma + K (xbar - x+)
        double pr = 0.0, dr = 0.0;
        for (std::size_t q = 0; q < W.rho.size(); ++q) pr += std::pow((Uold.rho[q] - W.rho[q]) / tau, 2);
        for (std::size_t q = 0; q < cells; ++q)
          pr += std::pow((Uold.m[q] - W.m[q]) / tau, 2) + std::pow((Uold.mu[q] - W.mu[q]) / tau, 2);
        apply_K(W, kw);
        for (std::size_t j = 0; j < cells; ++j) {
          dr += std::pow((yold.rho[j] - y.rho[j]) / sigma + kb.rho[j] - kw.rho[j], 2) +
                std::pow((yold.m[j] - y.m[j]) / sigma + kb.m[j] - kw.m[j], 2) +
                std::pow((yold.mu[j] - y.mu[j]) / sigma + kb.mu[j] - kw.mu[j], 2);
        }
        pr = std::sqrt(pr);
        dr = std::sqrt(dr);
        if (pr > 1.5 * dr) {
          tau /= 1.0 - rate;
          sigma *= 1.0 - rate;
          rate *= 0.95;
        } else if (dr > 1.5 * pr) {
          tau *= 1.0 - rate;
          sigma /= 1.0 - rate;
          rate *= 0.95;
        }
      }
      if (check(it)) {
        result.converged = true;
        break;
      }
    }
  } else {
    // Douglas-Rachford on F(V) + i_C(U) + i_{V = K U}.
    const double gamma = options.step > 0.0 ? options.step : scale;
    const double alpha = options.relaxation;
    GraphProjector graph(nt, nx);
    WFRVariables zU = U, xU = U, wU = U;
    CellValues zV = V, xV = V;
    for (it = 1; it <= options.max_iters; ++it) {
      xU = zU;
      xV = zV;
      graph.apply(xU, xV);
      for (std::size_t q = 0; q < wU.rho.size(); ++q) wU.rho[q] = 2.0 * xU.rho[q] - zU.rho[q];
      for (std::size_t q = 0; q < cells; ++q) {
        wU.m[q] = 2.0 * xU.m[q] - zU.m[q];
        wU.mu[q] = 2.0 * xU.mu[q] - zU.mu[q];
      }
      proj.apply(wU, rho0, rho1);
      for (std::size_t j = 0; j < cells; ++j) {
        const ProxPoint p = prox_impl({2.0 * xV.rho[j] - zV.rho[j], 2.0 * xV.m[j] - zV.m[j],
                                       with_mu ? 2.0 * xV.mu[j] - zV.mu[j] : 0.0},
                                      1.0 / gamma, params, with_mu);
        V.rho[j] = p.rho;
        V.m[j] = p.m;
        V.mu[j] = p.mu;
        zV.rho[j] += alpha * (p.rho - xV.rho[j]);
        zV.m[j] += alpha * (p.m - xV.m[j]);
        zV.mu[j] += alpha * (p.mu - xV.mu[j]);
      }
      for (std::size_t q = 0; q < zU.rho.size(); ++q) zU.rho[q] += alpha * (wU.rho[q] - xU.rho[q]);
      for (std::size_t q = 0; q < cells; ++q) {
        zU.m[q] += alpha * (wU.m[q] - xU.m[q]);
        zU.mu[q] += alpha * (wU.mu[q] - xU.mu[q]);
      }
      if (check(it)) {
        result.converged = true;
        break;
      }
    }
    U = wU;
  }
  result.iterations = std::min(it, options.max_iters);
  result.action = cell_sum(V, params) * measure;
  result.distance = std::sqrt(result.action);
  CellValues ku = make_cells(cells);
  apply_K(U, ku);
  result.primal_residual = primal_gap(V, ku);
  result.constraint_residual = constraint_residual(U, rho0, rho1);
  result.variables = std::move(U);
  return result;
}

double density_mass(const DensityField& rho) { return integrate(rho); }

double hellinger_distance(const DensityField& rho0, const DensityField& rho1,
                          const ConeParams& params) {
  params.validate();
  if (rho0.size() != rho1.size()) throw InvalidInput("hellinger_distance: size mismatch");
  require_density(rho0, "rho0");
  require_density(rho1, "rho1");
  Field d(rho0.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double s = std::sqrt(rho1[i]) - std::sqrt(rho0[i]);
    d[i] = s * s;
  }
  return 2.0 * params.b * std::sqrt(integrate(d));
}

DensityField von_mises_bump(int n, double center, double width, double mass) {
  PeriodicGrid grid(n);
  if (!(width > 0.0) || !(mass >= 0.0) || !std::isfinite(center))
    throw InvalidInput("bump: width must be positive, mass nonnegative");
  const double kappa = 1.0 / (width * width);
  DensityField rho(n);
  for (int i = 0; i < n; ++i) rho[i] = std::exp(kappa * (std::cos(grid.x(i) - center) - 1.0));
  const double s = integrate(rho);
  for (double& r : rho) r *= mass / s;
  return rho;
}

// Geodesic shooting ------------------------------------------------------

namespace {

struct FlowState {
  Field v, alpha, rho;
};

void dealias_inplace(Field& f) { f = spectral::dealias(f); }

FlowState flow_rhs(const FlowState& s) {
  const std::size_t n = s.v.size();
  const Field dv = spectral::derivative(s.v);
  const Field da = spectral::derivative(s.alpha);
  FlowState d{Field(n), Field(n), Field(n)};
  Field flux(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.v[i] = -(s.v[i] * dv[i] + 2.0 * s.alpha[i] * s.v[i]);
    d.alpha[i] = -(s.v[i] * da[i] + s.alpha[i] * s.alpha[i] - s.v[i] * s.v[i]);
    flux[i] = s.v[i] * s.rho[i];
  }
  dealias_inplace(d.v);
  dealias_inplace(d.alpha);
  const Field dflux = spectral::derivative(flux);
  for (std::size_t i = 0; i < n; ++i) d.rho[i] = -dflux[i] + 2.0 * s.alpha[i] * s.rho[i];
  return d;
}

FlowState axpy(const FlowState& s, double h, const FlowState& d) {
  FlowState o = s;
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    o.v[i] += h * d.v[i];
    o.alpha[i] += h * d.alpha[i];
    o.rho[i] += h * d.rho[i];
  }
  return o;
}

double kinetic(const FlowState& s) {
  Field e(s.v.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = s.rho[i] * (s.v[i] * s.v[i] + s.alpha[i] * s.alpha[i]);
  return integrate(e);
}

long step_count(double t_final, double dt) {
  if (!(dt > 0.0) || !(t_final >= 0.0) || !std::isfinite(t_final))
    throw InvalidInput("flow: need dt > 0 and t_final >= 0");
  return static_cast<long>(std::ceil(t_final / dt - 1e-9));
}

}  // namespace

HorizontalFlow horizontal_flow(const DensityField& rho0, const Field& Phi0, double t_final,
                               double dt, const HorizontalFlowOptions& options) {
  const int n = static_cast<int>(rho0.size());
  PeriodicGrid grid(n);
  if (Phi0.size() != rho0.size()) throw InvalidInput("horizontal_flow: size mismatch");
  for (double r : rho0)
    if (!(r > 0.0) || !std::isfinite(r))
      throw InvalidInput("horizontal_flow: rho0 must be strictly positive");
  if (options.output_every < 1 || options.defect_every < 1)
    throw InvalidInput("horizontal_flow: output strides must be positive");
  const long steps = step_count(t_final, dt);

  FlowState s;
  s.alpha = spectral::dealias(Phi0);
  s.v = spectral::derivative(s.alpha);
  for (double& x : s.v) x *= 0.5;
  s.rho = rho0;

  HorizontalFlow out;
  std::vector<double> energy_t;
  std::vector<double> energy;
  auto record = [&](double t, long index) {
    energy_t.push_back(t);
    energy.push_back(kinetic(s));
    if (index % options.output_every != 0 && index != steps) return;
    const std::size_t slot = out.times.size();
    out.times.push_back(t);
    out.rho.push_back(s.rho);
    out.xi.push_back({s.v, s.alpha});
    const Field da = spectral::derivative(s.alpha);
    for (int i = 0; i < n; ++i)
      out.max_gradient_defect = std::max(out.max_gradient_defect, std::abs(s.v[i] - 0.5 * da[i]));
    if (slot % static_cast<std::size_t>(options.defect_every) == 0 || index == steps) {
      const SplitResult split = vertical_horizontal_split(out.xi.back(), s.rho);
      out.max_defect =
          std::max({out.max_defect, max_abs(split.vertical.v), max_abs(split.vertical.alpha)});
    }
  };

  double t = 0.0;
  record(t, 0);
  for (long k = 0; k < steps; ++k) {
    const double h = (k + 1 == steps) ? (t_final - t) : dt;
    const FlowState k1 = flow_rhs(s);
    const FlowState k2 = flow_rhs(axpy(s, 0.5 * h, k1));
    const FlowState k3 = flow_rhs(axpy(s, 0.5 * h, k2));
    const FlowState k4 = flow_rhs(axpy(s, h, k3));
    for (int i = 0; i < n; ++i) {
      s.v[i] += h / 6.0 * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
      s.alpha[i] += h / 6.0 * (k1.alpha[i] + 2.0 * k2.alpha[i] + 2.0 * k3.alpha[i] + k4.alpha[i]);
      s.rho[i] += h / 6.0 * (k1.rho[i] + 2.0 * k2.rho[i] + 2.0 * k3.rho[i] + k4.rho[i]);
    }
    t = (k + 1 == steps) ? t_final : t + h;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(s.v[i]) || !std::isfinite(s.alpha[i]) || !std::isfinite(s.rho[i]))
        throw SolverFailure("wave_breaking", "horizontal_flow: non-finite state at t = " +
                                                 std::to_string(t));
      if (!(s.rho[i] > 0.0))
        throw SolverFailure("negative_density", "horizontal_flow: density reached zero at t = " +
                                                    std::to_string(t));
    }
    record(t, k + 1);
  }
  for (std::size_t k = 0; k + 1 < energy.size(); ++k)
    out.action += 0.5 * (energy_t[k + 1] - energy_t[k]) * (energy[k] + energy[k + 1]);
  return out;
}

const char* convention_name(PotentialConvention c) {
  switch (c) {
    case PotentialConvention::Hamiltonian: return "hamiltonian_q";
    case PotentialConvention::Lift: return "lift_Phi";
    case PotentialConvention::Pressure: return "pressure_p";
  }
  return "unknown";
}

HamiltonianFlow hamiltonian_flow(const DensityField& rho0, const Field& q0, double t_final,
                                 double dt, int output_every) {
  const int n = static_cast<int>(rho0.size());
  PeriodicGrid grid(n);
  if (q0.size() != rho0.size()) throw InvalidInput("hamiltonian_flow: size mismatch");
  require_density(rho0, "rho0");
  if (output_every < 1) throw InvalidInput("hamiltonian_flow: output_every must be positive");
  const long steps = step_count(t_final, dt);

  // State (q, rho); rho_t = -(rho q')' + 2 q rho, q_t = -(q'^2 + q^2).
  auto rhs = [&](const Field& q, const Field& rho, Field& dq, Field& drho) {
    const Field qx = spectral::derivative(q);
    Field flux(n);
    for (int i = 0; i < n; ++i) {
      dq[i] = -(qx[i] * qx[i] + q[i] * q[i]);
      flux[i] = rho[i] * qx[i];
    }
    dq = spectral::dealias(dq);
    const Field dflux = spectral::derivative(flux);
    for (int i = 0; i < n; ++i) drho[i] = -dflux[i] + 2.0 * q[i] * rho[i];
  };
  auto energy = [&](const Field& q, const Field& rho) {
    const Field qx = spectral::derivative(q);
    Field e(n);
    for (int i = 0; i < n; ++i) e[i] = rho[i] * (qx[i] * qx[i] + q[i] * q[i]);
    return integrate(e);
  };

  HamiltonianFlow out;
  Field q = spectral::dealias(q0), rho = rho0;
  double t = 0.0, prev_e = energy(q, rho);
  out.times.push_back(t);
  out.rho.push_back(rho);
  out.q.push_back(q);
  std::vector<Field> kq(4, Field(n)), kr(4, Field(n));
  Field qs(n), rs(n);
  for (long s = 0; s < steps; ++s) {
    const double h = (s + 1 == steps) ? (t_final - t) : dt;
    rhs(q, rho, kq[0], kr[0]);
    const double c[3] = {0.5, 0.5, 1.0};
    for (int st = 1; st < 4; ++st) {
      for (int i = 0; i < n; ++i) {
        qs[i] = q[i] + c[st - 1] * h * kq[st - 1][i];
        rs[i] = rho[i] + c[st - 1] * h * kr[st - 1][i];
      }
      rhs(qs, rs, kq[st], kr[st]);
    }
    for (int i = 0; i < n; ++i) {
      q[i] += h / 6.0 * (kq[0][i] + 2.0 * kq[1][i] + 2.0 * kq[2][i] + kq[3][i]);
      rho[i] += h / 6.0 * (kr[0][i] + 2.0 * kr[1][i] + 2.0 * kr[2][i] + kr[3][i]);
    }
    t = (s + 1 == steps) ? t_final : t + h;
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(q[i]) || !std::isfinite(rho[i]))
        throw SolverFailure("wave_breaking", "hamiltonian_flow: non-finite state");
    const double e = energy(q, rho);
    out.action += 0.5 * h * (prev_e + e);
    prev_e = e;
    if ((s + 1) % output_every == 0 || s + 1 == steps) {
      out.times.push_back(t);
      out.rho.push_back(rho);
      out.q.push_back(q);
    }
  }
  return out;
}

}  // namespace chwfr
