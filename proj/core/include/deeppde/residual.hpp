#pragma once

#include <functional>
#include <span>
#include <vector>

#include "deeppde/grid.hpp"
#include "deeppde/mlp.hpp"
#include "deeppde/operators.hpp"
#include "deeppde/rng.hpp"
#include "deeppde/tape.hpp"

namespace deeppde {

/// Value and exact input derivatives of a scalar-output network at one point,
/// as tape variables differentiable in the parameters (one second-order dual
/// pass per input axis).
struct PointProbe {
  Var value;
  std::vector<Var> grad;    // d(value)/d(x_i)
  std::vector<Var> second;  // d^2(value)/d(x_i)^2

  Var laplacian_from(Tape& tape, int first_axis) const;
};

PointProbe probe_scalar_mlp(Tape& tape, const MlpArchitecture& arch,
                            std::span<const Var> theta, std::span<const double> point);

/// Plain-valued counterpart (no tape) for loss evaluation and oracles.
struct PointProbePlain {
  double value;
  std::vector<double> grad;
  std::vector<double> second;
};

PointProbePlain probe_scalar_mlp_plain(const MlpArchitecture& arch,
                                       std::span<const double> theta,
                                       std::span<const double> point);

// ---------------------------------------------------------------------------
// PINN losses. Each problem owns its samplers and residual forms; the built-in
// instances cover the Laplace boundary value problem and a one-dimensional
// Dirichlet heat initial value problem.
// ---------------------------------------------------------------------------

struct BvpBatch {
  std::vector<std::vector<double>> interior;
  std::vector<std::vector<double>> boundary;
};

struct BvpProblem {
  int dim = 2;
  std::function<std::vector<double>(RngState&)> interior_sampler;
  std::function<std::vector<double>(RngState&)> boundary_sampler;  // faces by measure
  // differential residual D(v)(x) from the probe, boundary residual B(v)(y)
  std::function<Var(Tape&, const PointProbe&, std::span<const double>)> interior_residual;
  std::function<Var(Tape&, Var, std::span<const double>)> boundary_residual;

  BvpBatch sample(int interior_count, int boundary_count, RngState& rng) const;

  /// Laplace equation on the unit box with Dirichlet data f.
  static BvpProblem laplace_box(int dim,
                                std::function<double(std::span<const double>)> boundary_data);
};

Var pinn_bvp_loss_traced(Tape& tape, const BvpProblem& problem, const MlpArchitecture& net,
                         std::span<const Var> theta, const BvpBatch& batch);
double pinn_bvp_loss(const BvpProblem& problem, const MlpArchitecture& net,
                     std::span<const double> theta, const BvpBatch& batch);

struct IvpBatch {
  std::vector<double> t;                    // interior times
  std::vector<std::vector<double>> x;       // interior points (also feed the init term)
  std::vector<double> tb;                   // boundary times
  std::vector<std::vector<double>> y;       // boundary points
};

struct IvpProblem {
  int dim = 1;
  double horizon = 1.0;
  double diffusion = 0.1;
  std::function<double(std::span<const double>)> initial;  // phi
  // box domain (0,1)^d with zero Dirichlet data
  IvpBatch sample(int interior_count, int boundary_count, RngState& rng) const;

  static IvpProblem heat_dirichlet(int dim, double diffusion, double horizon);
};

/// Three-term loss: heat residual (d/dt - c Lap), boundary value, initial
/// mismatch |N(0, x) - phi(x)|^2.
Var pinn_ivp_loss_traced(Tape& tape, const IvpProblem& problem, const MlpArchitecture& net,
                         std::span<const Var> theta, const IvpBatch& batch);
double pinn_ivp_loss(const IvpProblem& problem, const MlpArchitecture& net,
                     std::span<const double> theta, const IvpBatch& batch);

// ---------------------------------------------------------------------------
// Stefan free-boundary loss: two networks, u1 on [0,T] x R and u2 on [0,T],
// with the six-term residual of the melting problem.
// ---------------------------------------------------------------------------

struct StefanProblem {
  double horizon = 1.0;
  double psi = 1.0;  // u2(0)
  std::function<double(double)> flux;        // g
  std::function<double(double)> front_value; // h0
  std::function<double(double)> front_flux;  // h1
  std::function<double(double)> initial;     // phi

  static StefanProblem zero_data(double horizon, double psi);
};

struct StefanBatch {
  std::vector<double> t;
  std::vector<double> x;
};

struct StefanNets {
  MlpArchitecture heat_net;   // (t, x) -> u1
  MlpArchitecture front_net;  // t -> u2
  std::size_t param_count() const {
    return heat_net.param_count() + front_net.param_count();
  }
};

/// Samples (t, x) on [0,T] x [0, 2 psi] masked by x < front(t) under the
/// current parameters (rejection with a deterministic fallback).
StefanBatch sample_stefan_batch(const StefanProblem& problem, const StefanNets& nets,
                                std::span<const double> theta, int count, RngState& rng);

Var stefan_loss_traced(Tape& tape, const StefanProblem& problem, const StefanNets& nets,
                       std::span<const Var> theta, const StefanBatch& batch);
double stefan_loss(const StefanProblem& problem, const StefanNets& nets,
                   std::span<const double> theta, const StefanBatch& batch);

// ---------------------------------------------------------------------------
// PINO composite risks.
// ---------------------------------------------------------------------------

struct PinoConfig {
  double weight_data = 1.0;
  double weight_pde = 1.0;
  double weight_boundary = 0.0;  // time-dependent variant only
  double weight_init = 0.0;      // time-dependent variant only

  void validate() const;
};

/// Steady periodic elliptic instance -u'' + u = i on a circle of length S:
/// solvable exactly in Fourier space, residual by spectral differentiation.
struct PinoEllipticInstance {
  double length = 1.0;
  int grid = 32;

  GridFunction solve(const GridFunction& input) const;  // the target operator S
};

struct PinoBvpBatch {
  std::vector<int> data_sample;          // index into the instance list
  std::vector<std::size_t> data_node;    // grid node for the data term
  std::vector<int> pde_sample;
  std::vector<std::size_t> pde_node;
};

double pino_bvp_risk(const PinoConfig& config, const PinoEllipticInstance& instance,
                     const std::function<GridFunction(const GridFunction&)>& model,
                     std::span<const GridFunction> inputs,
                     std::span<const GridFunction> references, const PinoBvpBatch& batch);
Var pino_bvp_risk_traced(Tape& tape, const PinoConfig& config,
                         const PinoEllipticInstance& instance, const OperatorModel& model,
                         std::span<const Var> theta, std::span<const GridFunction> inputs,
                         std::span<const GridFunction> references, const PinoBvpBatch& batch);

/// Time-dependent instance: Dirichlet heat on (0,1), initial values given as
/// finite sine series (exact solution available in closed form), model is an
/// unstacked DeepONet queried at (t, x) with derivatives through the trunk.
struct PinoHeatInstance {
  double diffusion = 0.1;
  double horizon = 1.0;

  // sine-series initial value: i(x) = sum_k a_k sin(pi k x)
  struct Input {
    std::vector<double> coefficients;
    double value(double x) const;
  };
  double exact(const Input& input, double t, double x) const;
};

struct PinoIvpBatch {
  std::vector<int> data_sample;
  std::vector<double> data_t, data_x;
  std::vector<int> pde_sample;
  std::vector<double> pde_t, pde_x;
  std::vector<int> boundary_sample;
  std::vector<double> boundary_t, boundary_y;  // y in {0, 1}
  std::vector<int> init_sample;
  std::vector<double> init_x;
};

double pino_ivp_risk(const PinoConfig& config, const PinoHeatInstance& instance,
                     const DeepOnetSpec& model, std::span<const double> theta,
                     std::span<const PinoHeatInstance::Input> inputs,
                     const PinoIvpBatch& batch);
Var pino_ivp_risk_traced(Tape& tape, const PinoConfig& config,
                         const PinoHeatInstance& instance, const DeepOnetSpec& model,
                         std::span<const Var> theta,
                         std::span<const PinoHeatInstance::Input> inputs,
                         const PinoIvpBatch& batch);

}  // namespace deeppde
