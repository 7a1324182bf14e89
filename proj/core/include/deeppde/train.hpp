#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deeppde/grid.hpp"
#include "deeppde/operators.hpp"
#include "deeppde/pde.hpp"
#include "deeppde/rng.hpp"

#include "json.hpp"

namespace deeppde {

// ---------------------------------------------------------------------------
// Optimizer steps
// ---------------------------------------------------------------------------

/// theta' = theta - (gamma / M) sum of the batch gradients.
void sgd_step(std::span<double> theta, std::span<const double> gradient_sum, double gamma,
              int batch_size);

struct AdamState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  long long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update on the mean gradient.
void adam_step(AdamState& state, std::span<double> theta, std::span<const double> gradient,
               double gamma);

/// Halve gamma whenever the validation error fails to beat
/// tolerance * best-so-far; stop below the floor or at the step budget.
struct LrSchedule {
  double tolerance = 0.97;
  double gamma_floor = 1e-5;

  double best = std::numeric_limits<double>::infinity();
  bool should_stop = false;

  /// Returns the (possibly halved) learning rate; updates best and stop flag.
  double observe(double validation_error, double gamma);
};

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct Dataset {
  std::vector<GridFunction> inputs;
  std::vector<GridFunction> targets;
  nlohmann::json metadata;

  std::size_t size() const { return inputs.size(); }
  void validate() const;
};

struct DataGenConfig {
  SemilinearPdeSpec pde;
  GrfSpec grf;
  SolverConfig solver;       // fine-grid reference configuration
  int model_resolution = 64; // outputs restricted onto this grid
  int count = 0;
  std::uint64_t seed = 0;
};

/// Inputs drawn from the GRF prior at the solver resolution, targets computed
/// by the reference solver, both restricted to the model resolution. Solver
/// failures are resampled (at most 3 retries per sample).
Dataset dataset_generate(const DataGenConfig& cfg, int threads = 1);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  int batch_size = 16;
  double learning_rate = 1e-3;  // gamma_0
  double improvement_tolerance = 0.97;
  int steps_between_validation = 400;
  int max_steps = 2000;
  int runs = 1;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct Checkpoint {
  nlohmann::json descriptor;
  ParamVector params;
  nlohmann::json metadata;
};

struct TrainLogRow {
  int run = 0;
  int step = 0;
  double train_loss = 0.0;
  double validation_error = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  Checkpoint best;
  double best_validation_error = 0.0;
  int steps_done = 0;
  double train_seconds = 0.0;
  std::vector<TrainLogRow> log;
};

/// Data-driven operator training: squared discrete-L2 loss per sample,
/// minibatches drawn i.i.d. with replacement, best-validation checkpoint over
/// the configured number of runs.
TrainResult train(const OperatorModel& model, const Dataset& train_set,
                  const Dataset& validation_set, const TrainConfig& cfg);

/// Squared-seminorm data loss of one sample (shared by training and tests).
double sample_data_loss(const OperatorModel& model, std::span<const double> theta,
                        const GridFunction& input, const GridFunction& target);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct ResultRow {
  std::string method;
  double l2_error = 0.0;
  std::size_t param_count = 0;
  double training_time = 0.0;  // precomputation time in seconds
  double test_time = 0.0;      // one test-set evaluation, averaged over repeats
  long long train_steps = 0;
};

struct EvalMethod {
  std::string name;
  std::function<GridFunction(const GridFunction&)> apply;
  std::size_t param_count = 0;
  double training_time = 0.0;
  long long train_steps = 0;
};

/// Per-method Monte Carlo L2 error over the test set plus wall-clock
/// evaluation time averaged over `repeats` full passes (0 = skip timing).
std::vector<ResultRow> evaluate(std::span<const EvalMethod> methods, const Dataset& test_set,
                                int repeats);

std::string results_to_csv(std::span<const ResultRow> rows);
std::vector<ResultRow> results_from_csv(const std::string& text);

}  // namespace deeppde
