#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deeppde/grid.hpp"
#include "deeppde/rng.hpp"

#include "json.hpp"

namespace deeppde {

/// Semilinear parabolic problems on periodic boxes:
///   du/dt = c Laplace(u) + F(u)
/// with F one of: none (pure heat), -1/2 d(u^2)/dx (conservative Burgers),
/// u - u^3 (Allen-Cahn), k (u - u^3) + g (reaction with source).
enum class Nonlinearity { none, burgers_conservative, allen_cahn, reaction_with_source };

std::string to_string(Nonlinearity n);
Nonlinearity nonlinearity_from_string(const std::string& s);

struct SemilinearPdeSpec {
  int dim = 1;
  std::vector<double> lengths{2.0 * M_PI};
  double diffusion = 0.1;  // c
  double horizon = 1.0;    // T
  Nonlinearity nonlinearity = Nonlinearity::allen_cahn;
  double reaction_rate = 2.0;               // k, reaction_with_source only
  std::optional<GridFunction> source;       // g, reaction_with_source only

  void validate() const;
};

enum class SolveMethod { spectral, fdm, fem };
std::string to_string(SolveMethod m);
SolveMethod solve_method_from_string(const std::string& s);

struct SolverConfig {
  SolveMethod method = SolveMethod::spectral;
  int space_steps = 64;  // N per axis
  int time_steps = 1000;  // M
  bool dealias = true;    // 2/3-rule for the Burgers quadratic term

  void validate() const;
};

/// Fourier-space LIRK2 stepping (Crank-Nicolson on the linear part, explicit
/// midpoint on the nonlinearity); returns u(T) on the solver grid.
GridFunction spectral_solve(const SemilinearPdeSpec& pde, const GridFunction& g0,
                            const SolverConfig& cfg);

/// Same time stepping on the (2d+1)-point periodic Laplacian stencil; cyclic
/// tridiagonal solves in 1-d, FFT-diagonalized circulant solves in 2-d.
GridFunction fdm_solve(const SemilinearPdeSpec& pde, const GridFunction& g0,
                       const SolverConfig& cfg);

/// Periodic P1 finite elements with consistent mass matrix (1-d only).
GridFunction fem_solve(const SemilinearPdeSpec& pde, const GridFunction& g0,
                       const SolverConfig& cfg);

GridFunction reference_solve(const SemilinearPdeSpec& pde, const GridFunction& g0,
                             const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Gaussian random fields with spectral density  max(s2 (eta + lambda_k)^-r - c0, 0)
// where lambda_k is the periodic Laplacian eigenvalue (2 pi |k| / S)^2.
// ---------------------------------------------------------------------------

struct GrfSpec {
  double variance = 1e6;  // s2
  double offset = 10.0;   // eta
  double decay = 6.0;     // r
  double shift = 0.0;     // c0 (diagonal shift, subtracted)
  bool clamp = true;      // clamp negative mode variances at zero

  void validate() const;
  double mode_variance(double lambda) const;
};

void to_json(nlohmann::json& j, const GrfSpec& s);
void from_json(const nlohmann::json& j, GrfSpec& s);

/// Spectral sampling with conjugate symmetry; the returned field is real and
/// its Fourier coefficient at mode k has variance mode_variance(lambda_k).
GridFunction grf_sample(const GrfSpec& spec, const std::vector<int>& extents,
                        const std::vector<double>& lengths, RngState& rng);

// ---------------------------------------------------------------------------
// Analytic heat-equation values (Feynman-Kac closed forms) for the oracles.
// ---------------------------------------------------------------------------

struct KolmogorovSpec {
  int dim = 1;
  double horizon = 1.0;  // T
  double rate = 0.5;     // rho

  double varrho_terminal() const { return std::sqrt(2.0 * horizon * rate); }
  double varrho_full() const { return std::sqrt(2.0 * rate); }
};

/// u(t,x) for du/dt = rho Laplace(u), u(0,.) = phi, phi(x) = <a,x> + b.
double heat_exact_affine(std::span<const double> a, double b, std::span<const double> x);

/// phi(x) = |x|^2 q + <a,x> + b  (isotropic quadratic):
/// u(t,x) = phi(x) + 2 rho t d q.
double heat_exact_quadratic(double q, std::span<const double> a, double b, double rho,
                            double t, std::span<const double> x);

/// phi(x) = exp(-alpha |x - m|^2 / 2):
/// u(t,x) = (1 + 2 rho t alpha)^(-d/2) exp(-alpha |x-m|^2 / (2 (1 + 2 rho t alpha))).
double heat_exact_gaussian_bump(double alpha, std::span<const double> m, double rho,
                                double t, std::span<const double> x);

/// Periodic heat decay: the coefficient of mode k is damped by
/// exp(-c (2 pi |k| / S)^2 t).
double heat_mode_decay(double c, double length, int k, double t);

}  // namespace deeppde
