#include "deeppde/train.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace deeppde {

namespace {

// Work-stealing-free parallel map: indices are claimed from a shared counter
// but every result lands in its own caller-owned slot, so the outcome does
// not depend on the thread count or schedule. fn receives (worker, index).
void parallel_for(std::size_t n, int threads,
                  const std::function<void(int, std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(0, i);
    return;
  }
  const int t = static_cast<int>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(t);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(t);
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(w, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void sgd_step(std::span<double> theta, std::span<const double> gradient_sum, double gamma,
              int batch_size) {
  if (theta.size() != gradient_sum.size()) throw ConfigError("sgd_step: shape mismatch");
  const double scale = gamma / static_cast<double>(batch_size);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= scale * gradient_sum[i];
}

void adam_step(AdamState& state, std::span<double> theta, std::span<const double> gradient,
               double gamma) {
  if (state.m.size() != theta.size() || gradient.size() != theta.size())
    throw ConfigError("adam_step: shape mismatch");
  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * gradient[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * gradient[i] * gradient[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    theta[i] -= gamma * mhat / (std::sqrt(vhat) + state.eps);
  }
}

double LrSchedule::observe(double validation_error, double gamma) {
  if (validation_error < tolerance * best) {
    best = std::min(best, validation_error);
    return gamma;
  }
  best = std::min(best, validation_error);
  gamma *= 0.5;
  if (gamma < gamma_floor) should_stop = true;
  return gamma;
}

void Dataset::validate() const {
  if (inputs.size() != targets.size())
    throw ConfigError("Dataset: inputs/targets count mismatch");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].extents != inputs[0].extents || targets[i].extents != targets[0].extents)
      throw ConfigError("Dataset: inconsistent extents");
  }
}

Dataset dataset_generate(const DataGenConfig& cfg, int threads) {
  cfg.pde.validate();
  cfg.solver.validate();
  if (cfg.count < 0) throw ConfigError("dataset_generate: negative count");
  if (cfg.solver.space_steps % cfg.model_resolution != 0)
    throw ConfigError("dataset_generate: model resolution must divide the solver grid");

  Dataset ds;
  ds.inputs.resize(cfg.count);
  ds.targets.resize(cfg.count);
  const std::vector<int> fine_ext(cfg.pde.dim, cfg.solver.space_steps);
  const std::vector<int> coarse_ext(cfg.pde.dim, cfg.model_resolution);

  RngState root(cfg.seed);
  parallel_for(static_cast<std::size_t>(cfg.count), threads, [&](int, std::size_t s) {
    RngState sample_rng = root.split(s);
    for (int attempt = 0;; ++attempt) {
      RngState rng = sample_rng.split(attempt);
      try {
        GridFunction field = grf_sample(cfg.grf, fine_ext, cfg.pde.lengths, rng);
        SemilinearPdeSpec pde = cfg.pde;
        GridFunction initial = field;
        if (pde.nonlinearity == Nonlinearity::reaction_with_source) {
          // the random field is the source; the state starts at zero
          pde.source = field;
          initial = GridFunction(fine_ext, pde.lengths);
        }
        GridFunction target = reference_solve(pde, initial, cfg.solver);
        ds.inputs[s] = grid_restrict(field, coarse_ext);
        ds.targets[s] = grid_restrict(target, coarse_ext);
        break;
      } catch (const NumericalError&) {
        if (attempt >= 3) throw;
      }
    }
  });

  ds.metadata = {
      {"pde",
       {{"dim", cfg.pde.dim},
        {"lengths", cfg.pde.lengths},
        {"diffusion", cfg.pde.diffusion},
        {"horizon", cfg.pde.horizon},
        {"nonlinearity", to_string(cfg.pde.nonlinearity)},
        {"reaction_rate", cfg.pde.reaction_rate}}},
      {"grf", nlohmann::json(cfg.grf)},
      {"solver",
       {{"method", to_string(cfg.solver.method)},
        {"space_steps", cfg.solver.space_steps},
        {"time_steps", cfg.solver.time_steps},
        {"dealias", cfg.solver.dealias}}},
      {"model_resolution", cfg.model_resolution},
      {"count", cfg.count},
      {"seed", cfg.seed},
  };
  return ds;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (!(improvement_tolerance > 0.0 && improvement_tolerance < 1.0))
    throw ConfigError("train: improvement tolerance must lie in (0,1)");
  if (steps_between_validation < 1 || max_steps < 0 || runs < 1)
    throw ConfigError("train: bad step configuration");
}

double sample_data_loss(const OperatorModel& model, std::span<const double> theta,
                        const GridFunction& input, const GridFunction& target) {
  GridFunction out = model.apply(theta, input);
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out.values[i] - target.values[i];
    acc += d * d;
  }
  return acc * input.cell_volume();
}

namespace {

double validation_error(const OperatorModel& model, std::span<const double> theta,
                        const Dataset& val, int threads) {
  std::vector<double> sq(val.size());
  parallel_for(val.size(), threads, [&](int, std::size_t s) {
    GridFunction out = model.apply(theta, val.inputs[s]);
    GridFunction d = out;
    for (std::size_t i = 0; i < d.size(); ++i) d.values[i] -= val.targets[s].values[i];
    const double e = discrete_l2_seminorm(d);
    sq[s] = e * e;
  });
  double acc = 0.0;
  for (double v : sq) acc += v;
  return std::sqrt(acc / static_cast<double>(val.size()));
}

}  // namespace

TrainResult train(const OperatorModel& model, const Dataset& train_set,
                  const Dataset& validation_set, const TrainConfig& cfg) {
  cfg.validate();
  train_set.validate();
  validation_set.validate();
  if (train_set.size() == 0) throw ConfigError("train: empty training set");

  const auto t_start = std::chrono::steady_clock::now();
  TrainResult result;
  result.best_validation_error = std::numeric_limits<double>::infinity();

  const std::size_t np = model.param_count();
  const double cell = train_set.inputs[0].cell_volume();

  for (int run = 0; run < cfg.runs; ++run) {
    RngState init_rng(cfg.seed, 1000 + static_cast<std::uint64_t>(run));
    RngState batch_rng(cfg.seed, 2000 + static_cast<std::uint64_t>(run));
    ParamVector theta = model.init_params(init_rng);
    ParamVector best_theta = theta;
    double best_val = validation_error(model, theta, validation_set, cfg.threads);
    result.log.push_back({run, 0, 0.0, best_val, cfg.learning_rate});

    AdamState adam(np);
    LrSchedule schedule;
    schedule.tolerance = cfg.improvement_tolerance;
    double gamma = cfg.learning_rate;

    std::vector<std::size_t> picks(cfg.batch_size);
    std::vector<std::vector<double>> grads(cfg.batch_size, std::vector<double>(np));
    std::vector<double> losses(cfg.batch_size);
    std::vector<double> grad_sum(np);
    bool diverged = false;
    int step = 0;

    std::vector<Tape> tapes(std::max(1, cfg.threads));

    for (step = 1; step <= cfg.max_steps && !schedule.should_stop; ++step) {
      for (int m = 0; m < cfg.batch_size; ++m)
        picks[m] = static_cast<std::size_t>(batch_rng.next_u64() % train_set.size());

      // per-sample tapes, one per worker, reused across steps; the gradient
      // sum below runs in batch order so the update is schedule-independent
      parallel_for(static_cast<std::size_t>(cfg.batch_size), cfg.threads,
                   [&](int worker, std::size_t m) {
                     Tape& tape = tapes[worker];
                     tape.clear();
                     std::vector<Var> tv(np);
                     for (std::size_t i = 0; i < np; ++i) tv[i] = tape.input(theta[i]);
                     const GridFunction& in = train_set.inputs[picks[m]];
                     const GridFunction& tg = train_set.targets[picks[m]];
                     auto out = model.apply_traced(tape, tv, in);
                     Var loss = sqr(out[0] - tg.values[0]);
                     for (std::size_t i = 1; i < out.size(); ++i)
                       loss = loss + sqr(out[i] - tg.values[i]);
                     loss = loss * cell;
                     losses[m] = loss.value();
                     tape.gradient(loss, tv, grads[m]);
                   });

      std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
      double mean_loss = 0.0;
      for (int m = 0; m < cfg.batch_size; ++m) {
        mean_loss += losses[m];
        for (std::size_t i = 0; i < np; ++i) grad_sum[i] += grads[m][i];
      }
      mean_loss /= cfg.batch_size;
      if (!std::isfinite(mean_loss)) {
        diverged = true;
        break;
      }

      if (cfg.optimizer == OptimizerKind::sgd) {
        sgd_step(theta, grad_sum, gamma, cfg.batch_size);
      } else {
        for (std::size_t i = 0; i < np; ++i) grad_sum[i] /= cfg.batch_size;
        adam_step(adam, theta, grad_sum, gamma);
      }

      if (step % cfg.steps_between_validation == 0 || step == cfg.max_steps) {
        const double val = validation_error(model, theta, validation_set, cfg.threads);
        if (!std::isfinite(val)) {
          diverged = true;
          break;
        }
        if (val < best_val) {
          best_val = val;
          best_theta = theta;
        }
        gamma = schedule.observe(val, gamma);
        result.log.push_back({run, step, mean_loss, val, gamma});
      }
    }

    if (!diverged && best_val < result.best_validation_error) {
      result.best_validation_error = best_val;
      result.best.descriptor = model.descriptor();
      result.best.params = best_theta;
      result.best.metadata = {{"run", run},
                              {"steps", std::min(step, cfg.max_steps)},
                              {"validation_error", best_val},
                              {"seed", cfg.seed}};
      result.steps_done = std::min(step, cfg.max_steps);
    }
  }
  if (result.best.params.empty())
    throw NumericalError("train: every run diverged");

  result.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

std::vector<ResultRow> evaluate(std::span<const EvalMethod> methods, const Dataset& test_set,
                                int repeats) {
  test_set.validate();
  if (test_set.size() == 0) throw ConfigError("evaluate: empty test set");
  std::vector<ResultRow> rows;
  for (const EvalMethod& method : methods) {
    ResultRow row;
    row.method = method.name;
    row.param_count = method.param_count;
    row.training_time = method.training_time;
    row.train_steps = method.train_steps;

    std::vector<GridFunction> outputs(test_set.size());
    for (std::size_t s = 0; s < test_set.size(); ++s) {
      outputs[s] = method.apply(test_set.inputs[s]);
      if (outputs[s].extents != test_set.targets[s].extents)
        throw ConfigError("evaluate: output extent mismatch for " + method.name);
    }
    row.l2_error = l2_error_mc(outputs, test_set.targets);

    if (repeats > 0) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < repeats; ++r)
        for (std::size_t s = 0; s < test_set.size(); ++s) {
          GridFunction out = method.apply(test_set.inputs[s]);
          (void)out;
        }
      row.test_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
          repeats;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string results_to_csv(std::span<const ResultRow> rows) {
  std::string out = "Method;L2_error;nr_params;training_time;test_time;done_trainsteps\n";
  char buf[256];
  for (const ResultRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s;%.12g;%zu;%.6g;%.6g;%lld\n", r.method.c_str(),
                  r.l2_error, r.param_count, r.training_time, r.test_time, r.train_steps);
    out += buf;
  }
  return out;
}

std::vector<ResultRow> results_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "Method;L2_error;nr_params;training_time;test_time;done_trainsteps")
    throw ConfigError("results csv: bad header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    ResultRow r;
    if (!std::getline(ls, r.method, ';')) throw ConfigError("results csv: bad row");
    auto next_double = [&](double& target) {
      if (!std::getline(ls, field, ';')) throw ConfigError("results csv: bad row");
      target = std::stod(field);
    };
    next_double(r.l2_error);
    if (!std::getline(ls, field, ';')) throw ConfigError("results csv: bad row");
    r.param_count = static_cast<std::size_t>(std::stoull(field));
    next_double(r.training_time);
    next_double(r.test_time);
    if (!std::getline(ls, field, ';')) throw ConfigError("results csv: bad row");
    r.train_steps = std::stoll(field);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace deeppde
