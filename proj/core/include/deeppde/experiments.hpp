#pragma once

#include <cstdint>
#include <vector>

#include "deeppde/residual.hpp"
#include "deeppde/stochastic.hpp"
#include "deeppde/train.hpp"

namespace deeppde {

// ---------------------------------------------------------------------------
// Self-contained experiment drivers used by the CLI and the acceptance suite.
// All of them train with Adam on fresh batches and the validation-driven
// halving schedule, and keep the best-validation parameters.
// ---------------------------------------------------------------------------

struct ExperimentLogRow {
  int step = 0;
  double train_loss = 0.0;
  double validation = 0.0;
  double learning_rate = 0.0;
};

/// Deep Kolmogorov regression for the heat terminal value with phi(x) = |x|^2.
struct KolmogorovTrainConfig {
  KolmogorovSpec spec{1, 1.0, 0.5};
  bool full_solution = false;  // regress v(tau, xi) instead of v(xi)
  std::vector<int> hidden{32, 32};
  Activation activation = Activation::tanh;
  int batch = 512;
  int max_steps = 5000;
  double learning_rate = 2e-3;
  // loss-based validation carries the conditional-variance floor, so only
  // near-stagnation should trigger a halving
  double tolerance = 0.999;
  int validate_every = 400;
  int validation_batch = 4096;
  std::uint64_t seed = 0;
};

struct KolmogorovTrainResult {
  MlpArchitecture net;
  ParamVector theta;
  double relative_l2 = 0.0;  // against the analytic solution on [-2, 2]^d
  int steps_done = 0;
  std::vector<ExperimentLogRow> log;
};

KolmogorovTrainResult train_kolmogorov_square(const KolmogorovTrainConfig& cfg);

/// PINN for the Laplace equation on (0,1)^2 with boundary data x^2 - y^2.
struct PinnLaplaceConfig {
  std::vector<int> hidden{32, 32};
  Activation activation = Activation::tanh;
  int interior_batch = 32;
  int boundary_batch = 32;
  int max_steps = 10000;
  double learning_rate = 1e-3;
  double tolerance = 0.97;
  int validate_every = 400;
  std::uint64_t seed = 0;
};

struct PinnTrainResult {
  MlpArchitecture net;
  ParamVector theta;
  double l2_error = 0.0;  // against the harmonic solution, absolute L2
  int steps_done = 0;
  std::vector<ExperimentLogRow> log;
};

PinnTrainResult train_pinn_laplace(const PinnLaplaceConfig& cfg);

/// PINN for the Dirichlet heat equation on (0,1), phi(x) = sin(pi x).
struct PinnHeatConfig {
  double diffusion = 0.1;
  double horizon = 1.0;
  std::vector<int> hidden{24, 24};
  Activation activation = Activation::tanh;
  int interior_batch = 32;
  int boundary_batch = 16;
  int max_steps = 500;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

PinnTrainResult train_pinn_heat(const PinnHeatConfig& cfg);

/// Stefan training on the travelling-front solution u1 = exp(psi + t - x) - 1,
/// front s(t) = psi + t.
struct StefanTrainConfig {
  double horizon = 0.5;
  double psi = 0.5;
  std::vector<int> heat_hidden{16, 16};
  std::vector<int> front_hidden{8};
  Activation activation = Activation::tanh;
  int batch = 32;
  int max_steps = 2000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

struct StefanTrainResult {
  StefanNets nets;
  ParamVector theta;
  double final_loss = 0.0;
  double front_error = 0.0;  // max |u2(t) - (psi + t)| on a time grid
  std::vector<ExperimentLogRow> log;
};

StefanTrainResult train_stefan_front(const StefanTrainConfig& cfg);

/// Deep BSDE consistency run: heat case with analytic controls, terminal loss
/// per time-step count.
struct BsdeConsistencyConfig {
  double rate = 0.2;  // rho
  double horizon = 1.0;
  int paths = 10000;
  std::vector<int> step_counts{10, 20, 40};
  std::uint64_t seed = 0;
};

std::vector<double> bsde_consistency(const BsdeConsistencyConfig& cfg);

/// Deep BSDE training at desk scale (networks for v and V).
struct BsdeTrainConfig {
  double rate = 0.25;
  double horizon = 1.0;
  int time_steps = 20;
  int batch = 64;
  int max_steps = 1500;
  double learning_rate = 1e-2;
  std::vector<int> hidden{16, 16};
  std::uint64_t seed = 0;
};

struct BsdeTrainResult {
  BsdeControls controls;
  ParamVector theta;
  double final_loss = 0.0;
  double value_error_at_zero = 0.0;  // |v(0) - u(0,0)| for g = x^2
  std::vector<ExperimentLogRow> log;
};

BsdeTrainResult train_bsde_quadratic(const BsdeTrainConfig& cfg);

}  // namespace deeppde
