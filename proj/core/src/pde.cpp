#include "deeppde/pde.hpp"

#include <cmath>
#include <complex>

#include "deeppde/errors.hpp"
#include "deeppde/fourier.hpp"

namespace deeppde {

std::string to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::none: return "none";
    case Nonlinearity::burgers_conservative: return "burgers-conservative";
    case Nonlinearity::allen_cahn: return "allen-cahn";
    case Nonlinearity::reaction_with_source: return "reaction-with-source";
  }
  return "none";
}

Nonlinearity nonlinearity_from_string(const std::string& s) {
  if (s == "none") return Nonlinearity::none;
  if (s == "burgers-conservative") return Nonlinearity::burgers_conservative;
  if (s == "allen-cahn") return Nonlinearity::allen_cahn;
  if (s == "reaction-with-source") return Nonlinearity::reaction_with_source;
  throw ConfigError("unknown nonlinearity: " + s);
}

std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::spectral: return "spectral";
    case SolveMethod::fdm: return "fdm";
    case SolveMethod::fem: return "fem";
  }
  return "spectral";
}

SolveMethod solve_method_from_string(const std::string& s) {
  if (s == "spectral") return SolveMethod::spectral;
  if (s == "fdm") return SolveMethod::fdm;
  if (s == "fem") return SolveMethod::fem;
  throw ConfigError("unknown solver method: " + s);
}

void SemilinearPdeSpec::validate() const {
  if (dim < 1 || static_cast<int>(lengths.size()) != dim)
    throw ConfigError("pde: lengths must match dim");
  if (!(diffusion > 0.0)) throw ConfigError("pde: diffusion must be positive");
  if (!(horizon > 0.0)) throw ConfigError("pde: horizon must be positive");
  if (nonlinearity == Nonlinearity::burgers_conservative && dim != 1)
    throw ConfigError("pde: conservative Burgers term is one-dimensional");
}

void SolverConfig::validate() const {
  if (space_steps < 4) throw ConfigError("solver: need at least 4 space steps");
  if (time_steps < 1) throw ConfigError("solver: need at least 1 time step");
}

namespace {

using cd = std::complex<double>;

int signed_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

// Periodic Laplacian eigenvalue (continuous symbol) of the multi-index k.
double lambda_of(std::span<const int> kidx, std::span<const int> extents,
                 std::span<const double> lengths) {
  double acc = 0.0;
  for (std::size_t a = 0; a < kidx.size(); ++a) {
    const double w = 2.0 * M_PI * signed_freq(kidx[a], extents[a]) / lengths[a];
    acc += w * w;
  }
  return acc;
}

void check_finite_or_throw(std::span<const double> u, const char* who, int step) {
  for (double v : u)
    if (!std::isfinite(v))
      throw NumericalError(std::string(who) + ": non-finite value at step " +
                           std::to_string(step));
}

// Pointwise reaction terms in physical space.
void apply_reaction(const SemilinearPdeSpec& pde, std::span<const double> u,
                    std::span<double> out) {
  switch (pde.nonlinearity) {
    case Nonlinearity::none:
      std::fill(out.begin(), out.end(), 0.0);
      break;
    case Nonlinearity::allen_cahn:
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - u[i] * u[i] * u[i];
      break;
    case Nonlinearity::reaction_with_source: {
      if (!pde.source || pde.source->size() != u.size())
        throw ConfigError("pde: reaction-with-source needs a source field on the grid");
      const auto& g = pde.source->values;
      for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = pde.reaction_rate * (u[i] - u[i] * u[i] * u[i]) + g[i];
      break;
    }
    case Nonlinearity::burgers_conservative:
      throw ConfigError("internal: burgers handled in spectral space");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Spectral solver
// ---------------------------------------------------------------------------

GridFunction spectral_solve(const SemilinearPdeSpec& pde, const GridFunction& g0,
                            const SolverConfig& cfg) {
  pde.validate();
  cfg.validate();
  if (g0.dims() != pde.dim) throw ConfigError("spectral_solve: initial value rank mismatch");
  for (int e : g0.extents)
    if (e != cfg.space_steps)
      throw ConfigError("spectral_solve: initial value extents must equal space_steps");

  const int d = pde.dim;
  const int n = cfg.space_steps;
  const std::size_t nodes = g0.size();
  const double dt = pde.horizon / cfg.time_steps;
  const double norm = 1.0 / static_cast<double>(nodes);

  // per-mode linear symbol A_k = -c lambda_k and, for Burgers, i xi_k
  std::vector<double> lin(nodes);
  std::vector<double> deriv(nodes, 0.0);  // first-derivative frequency (1-d Burgers)
  std::vector<char> dealias_mask(nodes, 1);
  {
    std::vector<int> kidx(d, 0);
    for (std::size_t f = 0; f < nodes; ++f) {
      lin[f] = -pde.diffusion * lambda_of(kidx, g0.extents, g0.lengths);
      if (pde.nonlinearity == Nonlinearity::burgers_conservative)
        deriv[f] = 2.0 * M_PI * signed_freq(kidx[0], n) / g0.lengths[0];
      if (cfg.dealias) {
        for (int a = 0; a < d; ++a)
          if (std::abs(signed_freq(kidx[a], g0.extents[a])) > n / 3) dealias_mask[f] = 0;
      }
      for (int a = d - 1; a >= 0; --a) {
        if (++kidx[a] < g0.extents[a]) break;
        kidx[a] = 0;
      }
    }
  }

  if (pde.nonlinearity == Nonlinearity::reaction_with_source &&
      (!pde.source || pde.source->extents != g0.extents))
    throw ConfigError("spectral_solve: source must live on the solver grid");

  std::vector<cd> uhat(nodes);
  for (std::size_t i = 0; i < nodes; ++i) uhat[i] = {g0.values[i], 0.0};
  fft_nd(uhat, g0.extents, -1);
  for (auto& z : uhat) z *= norm;

  std::vector<cd> work(nodes), fhat(nodes);
  std::vector<double> phys(nodes), react(nodes);

  auto nonlinearity_hat = [&](const std::vector<cd>& state, std::vector<cd>& out) {
    if (pde.nonlinearity == Nonlinearity::none) {
      std::fill(out.begin(), out.end(), cd{0.0, 0.0});
      return;
    }
    work = state;
    fft_nd(work, g0.extents, +1);  // to physical
    if (pde.nonlinearity == Nonlinearity::burgers_conservative) {
      for (std::size_t i = 0; i < nodes; ++i) {
        const double u = work[i].real();
        work[i] = {u * u, 0.0};
      }
      fft_nd(work, g0.extents, -1);
      for (std::size_t i = 0; i < nodes; ++i) {
        cd w = work[i] * norm;
        if (cfg.dealias && !dealias_mask[i]) w = {0.0, 0.0};
        // -1/2 d(u^2)/dx: multiply by -(1/2) * (i xi)
        out[i] = cd{0.0, -0.5 * deriv[i]} * w;
      }
    } else {
      for (std::size_t i = 0; i < nodes; ++i) phys[i] = work[i].real();
      apply_reaction(pde, phys, react);
      for (std::size_t i = 0; i < nodes; ++i) work[i] = {react[i], 0.0};
      fft_nd(work, g0.extents, -1);
      for (std::size_t i = 0; i < nodes; ++i) out[i] = work[i] * norm;
    }
  };

  std::vector<cd> mid(nodes);
  for (int step = 0; step < cfg.time_steps; ++step) {
    nonlinearity_hat(uhat, fhat);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double a4 = 0.25 * dt * lin[i];
      mid[i] = ((1.0 + a4) * uhat[i] + 0.5 * dt * fhat[i]) / (1.0 - a4);
    }
    nonlinearity_hat(mid, fhat);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double a2 = 0.5 * dt * lin[i];
      uhat[i] = ((1.0 + a2) * uhat[i] + dt * fhat[i]) / (1.0 - a2);
    }
    if (!std::isfinite(uhat[0].real()) || !std::isfinite(uhat[0].imag()))
      throw NumericalError("spectral_solve: non-finite value at step " + std::to_string(step));
  }

  work = uhat;
  fft_nd(work, g0.extents, +1);
  GridFunction out(g0.extents, g0.lengths);
  for (std::size_t i = 0; i < nodes; ++i) out.values[i] = work[i].real();
  check_finite_or_throw(out.values.values(), "spectral_solve", cfg.time_steps);
  return out;
}

// ---------------------------------------------------------------------------
// FDM solver
// ---------------------------------------------------------------------------

namespace {

// Thomas elimination for a constant-coefficient tridiagonal system with a
// Sherman-Morrison corner correction (periodic wrap).
class CyclicTridiag {
 public:
  // diag a, off-diagonal and corner b, size n >= 3
  CyclicTridiag(double a, double b, int n) : a_(a), b_(b), n_(n) {
    if (n < 3) throw ConfigError("cyclic solver: need n >= 3");
    const double gamma = -a_;
    z_.assign(n_, 0.0);
    std::vector<double> u(n_, 0.0);
    u[0] = gamma;
    u[n_ - 1] = b_;
    solve_plain(u, z_, gamma);
    vz_ = z_[0] + (b_ / gamma) * z_[n_ - 1];
  }

  void solve(std::span<const double> rhs, std::span<double> x) const {
    std::vector<double> y(n_);
    solve_plain(std::vector<double>(rhs.begin(), rhs.end()), y, -a_);
    const double vy = y[0] + (b_ / -a_) * y[n_ - 1];
    const double factor = vy / (1.0 + vz_);
    for (int i = 0; i < n_; ++i) x[i] = y[i] - factor * z_[i];
  }

 private:
  // tridiag(b, a', b) with modified first/last diagonal entries
  void solve_plain(const std::vector<double>& rhs, std::vector<double>& x,
                   double gamma) const {
    std::vector<double> diag(n_, a_);
    diag[0] = a_ - gamma;
    diag[n_ - 1] = a_ - b_ * b_ / gamma;
    std::vector<double> c(n_, 0.0);
    x.assign(n_, 0.0);
    // forward sweep
    c[0] = b_ / diag[0];
    x[0] = rhs[0] / diag[0];
    for (int i = 1; i < n_; ++i) {
      const double m = diag[i] - b_ * c[i - 1];
      c[i] = b_ / m;
      x[i] = (rhs[i] - b_ * x[i - 1]) / m;
    }
    for (int i = n_ - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
  }

  double a_, b_;
  int n_;
  std::vector<double> z_;
  double vz_;
};

// (I + s L_h) u with the periodic second-difference stencil, any dimension.
void apply_shifted_laplacian(std::span<const double> u, std::span<double> out,
                             std::span<const int> extents, std::span<const double> inv_h2,
                             double s) {
  const int d = static_cast<int>(extents.size());
  std::vector<int> idx(d, 0);
  const std::size_t nodes = u.size();
  for (std::size_t f = 0; f < nodes; ++f) {
    double lap = 0.0;
    std::size_t stride = 1;
    for (int a = d - 1; a >= 0; --a) {
      const int n = extents[a];
      const int i = idx[a];
      const std::size_t up = f + stride * static_cast<std::size_t>((i + 1) % n - i);
      const std::size_t dn = f + stride * static_cast<std::size_t>((i - 1 + n) % n - i);
      lap += (u[up] - 2.0 * u[f] + u[dn]) * inv_h2[a];
      stride *= static_cast<std::size_t>(n);
    }
    out[f] = u[f] + s * lap;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < extents[a]) break;
      idx[a] = 0;
    }
  }
}

// Burgers nodal nonlinearity: -(w_{i+1} - w_{i-1}) / (4h) with w = u^2.
void burgers_nodal(std::span<const double> u, std::span<double> out, double h) {
  const int n = static_cast<int>(u.size());
  for (int i = 0; i < n; ++i) {
    const double wp = u[(i + 1) % n] * u[(i + 1) % n];
    const double wm = u[(i - 1 + n) % n] * u[(i - 1 + n) % n];
    out[i] = -(wp - wm) / (4.0 * h);
  }
}

void fdm_nodal_nonlinearity(const SemilinearPdeSpec& pde, std::span<const double> u,
                            std::span<double> out, double h) {
  if (pde.nonlinearity == Nonlinearity::burgers_conservative)
    burgers_nodal(u, out, h);
  else
    apply_reaction(pde, u, out);
}

// Solve (I - s L_h) x = b by FFT diagonalization (any dimension, used in 2-d).
class CirculantSolver {
 public:
  CirculantSolver(std::span<const int> extents, std::span<const double> inv_h2, double s)
      : extents_(extents.begin(), extents.end()) {
    std::size_t nodes = 1;
    for (int e : extents_) nodes *= static_cast<std::size_t>(e);
    eig_.resize(nodes);
    std::vector<int> kidx(extents_.size(), 0);
    for (std::size_t f = 0; f < nodes; ++f) {
      double lam = 0.0;  // discrete Laplacian eigenvalue (negative semidefinite)
      for (std::size_t a = 0; a < extents_.size(); ++a)
        lam -= 2.0 * inv_h2[a] * (1.0 - std::cos(2.0 * M_PI * kidx[a] / extents_[a]));
      eig_[f] = 1.0 - s * lam;
      for (int a = static_cast<int>(extents_.size()) - 1; a >= 0; --a) {
        if (++kidx[a] < extents_[a]) break;
        kidx[a] = 0;
      }
    }
  }

  void solve(std::span<const double> rhs, std::span<double> x) const {
    std::vector<cd> data(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) data[i] = {rhs[i], 0.0};
    fft_nd(data, extents_, -1);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] /= eig_[i];
    fft_nd(data, extents_, +1);
    const double norm = 1.0 / static_cast<double>(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) x[i] = data[i].real() * norm;
  }

 private:
  std::vector<int> extents_;
  std::vector<double> eig_;
};

}  // namespace

GridFunction fdm_solve(const SemilinearPdeSpec& pde, const GridFunction& g0,
                       const SolverConfig& cfg) {
  pde.validate();
  cfg.validate();
  if (pde.dim > 2) throw ConfigError("fdm_solve: d <= 2 only");
  if (g0.dims() != pde.dim) throw ConfigError("fdm_solve: initial value rank mismatch");
  for (int e : g0.extents)
    if (e != cfg.space_steps)
      throw ConfigError("fdm_solve: initial value extents must equal space_steps");

  const int d = pde.dim;
  const std::size_t nodes = g0.size();
  const double dt = pde.horizon / cfg.time_steps;
  const double c = pde.diffusion;

  std::vector<double> inv_h2(d);
  for (int a = 0; a < d; ++a) {
    const double h = g0.lengths[a] / g0.extents[a];
    inv_h2[a] = 1.0 / (h * h);
  }
  const double h0 = g0.lengths[0] / g0.extents[0];

  // implicit solvers for the two LIRK stage shifts
  std::unique_ptr<CyclicTridiag> tri4, tri2;
  std::unique_ptr<CirculantSolver> circ4, circ2;
  if (d == 1) {
    const double s4 = 0.25 * dt * c * inv_h2[0];
    const double s2 = 0.5 * dt * c * inv_h2[0];
    tri4 = std::make_unique<CyclicTridiag>(1.0 + 2.0 * s4, -s4, g0.extents[0]);
    tri2 = std::make_unique<CyclicTridiag>(1.0 + 2.0 * s2, -s2, g0.extents[0]);
  } else {
    circ4 = std::make_unique<CirculantSolver>(g0.extents, inv_h2, 0.25 * dt * c);
    circ2 = std::make_unique<CirculantSolver>(g0.extents, inv_h2, 0.5 * dt * c);
  }
  auto solve4 = [&](std::span<const double> b, std::span<double> x) {
    if (d == 1)
      tri4->solve(b, x);
    else
      circ4->solve(b, x);
  };
  auto solve2 = [&](std::span<const double> b, std::span<double> x) {
    if (d == 1)
      tri2->solve(b, x);
    else
      circ2->solve(b, x);
  };

  std::vector<double> u = g0.values.values();
  std::vector<double> rhs(nodes), f(nodes), mid(nodes);
  for (int step = 0; step < cfg.time_steps; ++step) {
    fdm_nodal_nonlinearity(pde, u, f, h0);
    apply_shifted_laplacian(u, rhs, g0.extents, inv_h2, 0.25 * dt * c);
    for (std::size_t i = 0; i < nodes; ++i) rhs[i] += 0.5 * dt * f[i];
    solve4(rhs, mid);

    fdm_nodal_nonlinearity(pde, mid, f, h0);
    apply_shifted_laplacian(u, rhs, g0.extents, inv_h2, 0.5 * dt * c);
    for (std::size_t i = 0; i < nodes; ++i) rhs[i] += dt * f[i];
    solve2(rhs, u);
    if (!std::isfinite(u[0]))
      throw NumericalError("fdm_solve: non-finite value at step " + std::to_string(step));
  }
  check_finite_or_throw(u, "fdm_solve", cfg.time_steps);
  return GridFunction(g0.extents, g0.lengths, Tensor(g0.extents, std::move(u)));
}

// ---------------------------------------------------------------------------
// FEM solver (periodic P1, 1-d)
// ---------------------------------------------------------------------------

namespace {

// y = circ(a, b) x : constant tridiagonal-with-wrap multiply
void cyclic_tridiag_apply(std::span<const double> x, std::span<double> y, double a,
                          double b) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i)
    y[i] = a * x[i] + b * (x[(i + 1) % n] + x[(i - 1 + n) % n]);
}

}  // namespace

GridFunction fem_solve(const SemilinearPdeSpec& pde, const GridFunction& g0,
                       const SolverConfig& cfg) {
  pde.validate();
  cfg.validate();
  if (pde.dim != 1) throw ConfigError("fem_solve: one-dimensional only");
  if (g0.dims() != 1 || g0.extents[0] != cfg.space_steps)
    throw ConfigError("fem_solve: initial value extents must equal space_steps");

  const int n = cfg.space_steps;
  const double h = g0.lengths[0] / n;
  const double dt = pde.horizon / cfg.time_steps;
  const double c = pde.diffusion;

  // consistent mass M = h/6 circ(4, 1); stiffness K = 1/h circ(2, -1)
  const double ma = 4.0 * h / 6.0, mb = h / 6.0;
  const double ka = 2.0 / h, kb = -1.0 / h;

  // stage matrices  M + s c K  for s = dt/4, dt/2
  CyclicTridiag lhs4(ma + 0.25 * dt * c * ka, mb + 0.25 * dt * c * kb, n);
  CyclicTridiag lhs2(ma + 0.5 * dt * c * ka, mb + 0.5 * dt * c * kb, n);

  std::vector<double> u = g0.values.values();
  std::vector<double> f(n), mf(n), rhs(n), mid(n), tmp(n);
  for (int step = 0; step < cfg.time_steps; ++step) {
    fdm_nodal_nonlinearity(pde, u, f, h);
    cyclic_tridiag_apply(u, tmp, ma - 0.25 * dt * c * ka, mb - 0.25 * dt * c * kb);
    cyclic_tridiag_apply(f, mf, ma, mb);
    for (int i = 0; i < n; ++i) rhs[i] = tmp[i] + 0.5 * dt * mf[i];
    lhs4.solve(rhs, mid);

    fdm_nodal_nonlinearity(pde, mid, f, h);
    cyclic_tridiag_apply(u, tmp, ma - 0.5 * dt * c * ka, mb - 0.5 * dt * c * kb);
    cyclic_tridiag_apply(f, mf, ma, mb);
    for (int i = 0; i < n; ++i) rhs[i] = tmp[i] + dt * mf[i];
    lhs2.solve(rhs, u);
    if (!std::isfinite(u[0]))
      throw NumericalError("fem_solve: non-finite value at step " + std::to_string(step));
  }
  check_finite_or_throw(u, "fem_solve", cfg.time_steps);
  return GridFunction(g0.extents, g0.lengths, Tensor(g0.extents, std::move(u)));
}

GridFunction reference_solve(const SemilinearPdeSpec& pde, const GridFunction& g0,
                             const SolverConfig& cfg) {
  switch (cfg.method) {
    case SolveMethod::spectral: return spectral_solve(pde, g0, cfg);
    case SolveMethod::fdm: return fdm_solve(pde, g0, cfg);
    case SolveMethod::fem: return fem_solve(pde, g0, cfg);
  }
  throw ConfigError("reference_solve: bad method");
}

// ---------------------------------------------------------------------------
// Analytic heat-equation values
// ---------------------------------------------------------------------------

double heat_exact_affine(std::span<const double> a, double b, std::span<const double> x) {
  double acc = b;
  for (std::size_t i = 0; i < x.size(); ++i) acc += a[i] * x[i];
  return acc;
}

double heat_exact_quadratic(double q, std::span<const double> a, double b, double rho,
                            double t, std::span<const double> x) {
  double acc = b + 2.0 * rho * t * q * static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) acc += q * x[i] * x[i] + a[i] * x[i];
  return acc;
}

double heat_exact_gaussian_bump(double alpha, std::span<const double> m, double rho,
                                double t, std::span<const double> x) {
  const double s = 1.0 + 2.0 * rho * t * alpha;
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - m[i]) * (x[i] - m[i]);
  return std::pow(s, -0.5 * static_cast<double>(x.size())) * std::exp(-alpha * r2 / (2.0 * s));
}

double heat_mode_decay(double c, double length, int k, double t) {
  const double w = 2.0 * M_PI * k / length;
  return std::exp(-c * w * w * t);
}

}  // namespace deeppde
