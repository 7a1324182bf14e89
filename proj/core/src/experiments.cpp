#include "deeppde/experiments.hpp"

#include <cmath>

namespace deeppde {

namespace {

struct AdamLoop {
  AdamState state;
  LrSchedule schedule;
  double gamma;
  double best_val = std::numeric_limits<double>::infinity();
  ParamVector best_theta;

  AdamLoop(std::size_t n, double lr, double tolerance) : state(n), gamma(lr) {
    schedule.tolerance = tolerance;
  }
};

}  // namespace

KolmogorovTrainResult train_kolmogorov_square(const KolmogorovTrainConfig& cfg) {
  const int d = cfg.spec.dim;
  auto phi = [](std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc;
  };

  std::vector<int> widths{cfg.full_solution ? d + 1 : d};
  for (int h : cfg.hidden) widths.push_back(h);
  widths.push_back(1);
  MlpArchitecture net(widths, cfg.activation);

  RngState init_rng(cfg.seed, 1);
  RngState data_rng(cfg.seed, 2);
  RngState val_rng(cfg.seed, 3);
  ParamVector theta = mlp_init(net, init_rng);

  const KolmogorovBatch val_batch =
      cfg.full_solution
          ? KolmogorovBatch::sample_full(cfg.validation_batch, d, cfg.spec.horizon, val_rng)
          : KolmogorovBatch::sample_terminal(cfg.validation_batch, d, val_rng);

  auto val_loss = [&](const ParamVector& th) {
    return cfg.full_solution
               ? kolmogorov_full_loss(cfg.spec, phi, net, th, val_batch)
               : kolmogorov_terminal_loss(cfg.spec, phi, net, th, val_batch);
  };

  KolmogorovTrainResult result;
  AdamLoop loop(theta.size(), cfg.learning_rate, cfg.tolerance);
  loop.best_theta = theta;
  loop.best_val = val_loss(theta);
  result.log.push_back({0, 0.0, loop.best_val, loop.gamma});

  Tape tape;
  std::vector<Var> tv(theta.size());
  std::vector<double> grad(theta.size());
  int step = 1;
  for (; step <= cfg.max_steps && !loop.schedule.should_stop; ++step) {
    const KolmogorovBatch batch =
        cfg.full_solution
            ? KolmogorovBatch::sample_full(cfg.batch, d, cfg.spec.horizon, data_rng)
            : KolmogorovBatch::sample_terminal(cfg.batch, d, data_rng);
    tape.clear();
    for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.input(theta[i]);
    Var loss = cfg.full_solution
                   ? kolmogorov_full_loss_traced(tape, cfg.spec, phi, net, tv, batch)
                   : kolmogorov_terminal_loss_traced(tape, cfg.spec, phi, net, tv, batch);
    tape.gradient(loss, tv, grad);
    adam_step(loop.state, theta, grad, loop.gamma);

    if (step % cfg.validate_every == 0 || step == cfg.max_steps) {
      const double val = val_loss(theta);
      if (val < loop.best_val) {
        loop.best_val = val;
        loop.best_theta = theta;
      }
      loop.gamma = loop.schedule.observe(val, loop.gamma);
      result.log.push_back({step, loss.value(), val, loop.gamma});
    }
  }

  result.net = net;
  result.theta = loop.best_theta;
  result.steps_done = std::min(step, cfg.max_steps);

  // relative L2 error against the analytic solution on [-2, 2]^d (tensor grid
  // for d = 1; Monte Carlo over the box otherwise)
  const double tshift = 2.0 * cfg.spec.rate * cfg.spec.horizon * d;
  double num = 0.0, den = 0.0;
  if (d == 1) {
    const int pts = 401;
    std::vector<double> x(1);
    for (int i = 0; i < pts; ++i) {
      x[0] = -2.0 + 4.0 * i / (pts - 1);
      std::vector<double> in;
      if (cfg.full_solution) in = {cfg.spec.horizon, x[0]};
      const double got = cfg.full_solution ? mlp_apply(net, result.theta, in)[0]
                                           : mlp_apply(net, result.theta, x)[0];
      const double want = x[0] * x[0] + tshift;
      num += (got - want) * (got - want);
      den += want * want;
    }
  } else {
    RngState box_rng(cfg.seed, 4);
    std::vector<double> x(d);
    for (int s = 0; s < 4096; ++s) {
      double want = tshift;
      for (int k = 0; k < d; ++k) {
        x[k] = box_rng.next_uniform(-2.0, 2.0);
        want += x[k] * x[k];
      }
      std::vector<double> in;
      if (cfg.full_solution) {
        in.push_back(cfg.spec.horizon);
        in.insert(in.end(), x.begin(), x.end());
      }
      const double got = cfg.full_solution ? mlp_apply(net, result.theta, in)[0]
                                           : mlp_apply(net, result.theta, x)[0];
      num += (got - want) * (got - want);
      den += want * want;
    }
  }
  result.relative_l2 = std::sqrt(num / den);
  return result;
}

PinnTrainResult train_pinn_laplace(const PinnLaplaceConfig& cfg) {
  auto harmonic = [](std::span<const double> p) { return p[0] * p[0] - p[1] * p[1]; };
  BvpProblem problem = BvpProblem::laplace_box(2, harmonic);

  std::vector<int> widths{2};
  for (int h : cfg.hidden) widths.push_back(h);
  widths.push_back(1);
  MlpArchitecture net(widths, cfg.activation);

  RngState init_rng(cfg.seed, 1);
  RngState data_rng(cfg.seed, 2);
  RngState val_rng(cfg.seed, 3);
  ParamVector theta = mlp_init(net, init_rng);
  const BvpBatch val_batch = problem.sample(256, 256, val_rng);

  PinnTrainResult result;
  AdamLoop loop(theta.size(), cfg.learning_rate, cfg.tolerance);
  loop.best_theta = theta;
  loop.best_val = pinn_bvp_loss(problem, net, theta, val_batch);
  result.log.push_back({0, 0.0, loop.best_val, loop.gamma});

  Tape tape;
  std::vector<Var> tv(theta.size());
  std::vector<double> grad(theta.size());
  int step = 1;
  for (; step <= cfg.max_steps && !loop.schedule.should_stop; ++step) {
    BvpBatch batch = problem.sample(cfg.interior_batch, cfg.boundary_batch, data_rng);
    tape.clear();
    for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.input(theta[i]);
    Var loss = pinn_bvp_loss_traced(tape, problem, net, tv, batch);
    tape.gradient(loss, tv, grad);
    adam_step(loop.state, theta, grad, loop.gamma);
    if (step % cfg.validate_every == 0 || step == cfg.max_steps) {
      const double val = pinn_bvp_loss(problem, net, theta, val_batch);
      if (val < loop.best_val) {
        loop.best_val = val;
        loop.best_theta = theta;
      }
      loop.gamma = loop.schedule.observe(val, loop.gamma);
      result.log.push_back({step, loss.value(), val, loop.gamma});
    }
  }

  result.net = net;
  result.theta = loop.best_theta;
  result.steps_done = std::min(step, cfg.max_steps);

  // absolute L2 error over the box via tensor quadrature
  const int n = 64;
  double acc = 0.0;
  std::vector<double> p(2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      p[0] = (i + 0.5) / n;
      p[1] = (j + 0.5) / n;
      const double diff = mlp_apply(net, result.theta, p)[0] - harmonic(p);
      acc += diff * diff;
    }
  result.l2_error = std::sqrt(acc / (n * n));
  return result;
}

PinnTrainResult train_pinn_heat(const PinnHeatConfig& cfg) {
  IvpProblem problem = IvpProblem::heat_dirichlet(1, cfg.diffusion, cfg.horizon);

  std::vector<int> widths{2};
  for (int h : cfg.hidden) widths.push_back(h);
  widths.push_back(1);
  MlpArchitecture net(widths, cfg.activation);

  RngState init_rng(cfg.seed, 1);
  RngState data_rng(cfg.seed, 2);
  ParamVector theta = mlp_init(net, init_rng);

  PinnTrainResult result;
  AdamState adam(theta.size());
  Tape tape;
  std::vector<Var> tv(theta.size());
  std::vector<double> grad(theta.size());
  for (int step = 1; step <= cfg.max_steps; ++step) {
    IvpBatch batch = problem.sample(cfg.interior_batch, cfg.boundary_batch, data_rng);
    tape.clear();
    for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.input(theta[i]);
    Var loss = pinn_ivp_loss_traced(tape, problem, net, tv, batch);
    tape.gradient(loss, tv, grad);
    adam_step(adam, theta, grad, cfg.learning_rate);
    if (step % 25 == 0 || step == 1)
      result.log.push_back({step, loss.value(), 0.0, cfg.learning_rate});
  }
  result.net = net;
  result.theta = theta;
  result.steps_done = cfg.max_steps;

  // L2 error against the decaying-mode solution at a grid of (t, x)
  const double c = cfg.diffusion;
  double acc = 0.0;
  int count = 0;
  for (int it = 0; it <= 8; ++it)
    for (int ix = 1; ix < 16; ++ix) {
      const double t = cfg.horizon * it / 8.0;
      const double x = ix / 16.0;
      const double want = std::exp(-c * M_PI * M_PI * t) * std::sin(M_PI * x);
      const double got = mlp_apply(net, theta, std::vector<double>{t, x})[0];
      acc += (got - want) * (got - want);
      ++count;
    }
  result.l2_error = std::sqrt(acc / count);
  return result;
}

StefanTrainResult train_stefan_front(const StefanTrainConfig& cfg) {
  StefanProblem problem;
  problem.horizon = cfg.horizon;
  problem.psi = cfg.psi;
  const double psi = cfg.psi;
  problem.flux = [psi](double t) { return -std::exp(psi + t); };
  problem.front_value = [](double) { return 0.0; };
  problem.front_flux = [](double) { return -1.0; };
  problem.initial = [psi](double x) { return std::exp(psi - x) - 1.0; };

  StefanNets nets;
  std::vector<int> hw{2};
  for (int h : cfg.heat_hidden) hw.push_back(h);
  hw.push_back(1);
  nets.heat_net = MlpArchitecture(hw, cfg.activation);
  std::vector<int> fw{1};
  for (int h : cfg.front_hidden) fw.push_back(h);
  fw.push_back(1);
  nets.front_net = MlpArchitecture(fw, cfg.activation);

  RngState init_rng(cfg.seed, 1);
  RngState data_rng(cfg.seed, 2);
  ParamVector theta = mlp_init(nets.heat_net, init_rng);
  {
    ParamVector t2 = mlp_init(nets.front_net, init_rng);
    theta.insert(theta.end(), t2.begin(), t2.end());
  }

  StefanTrainResult result;
  AdamState adam(theta.size());
  Tape tape;
  std::vector<Var> tv(theta.size());
  std::vector<double> grad(theta.size());
  for (int step = 1; step <= cfg.max_steps; ++step) {
    StefanBatch batch = sample_stefan_batch(problem, nets, theta, cfg.batch, data_rng);
    tape.clear();
    for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.input(theta[i]);
    Var loss = stefan_loss_traced(tape, problem, nets, tv, batch);
    tape.gradient(loss, tv, grad);
    adam_step(adam, theta, grad, cfg.learning_rate);
    result.final_loss = loss.value();
    if (step % 50 == 0 || step == 1)
      result.log.push_back({step, result.final_loss, 0.0, cfg.learning_rate});
  }
  result.nets = nets;
  result.theta = theta;

  const std::size_t d1 = nets.heat_net.param_count();
  double worst = 0.0;
  for (int i = 0; i <= 16; ++i) {
    const double t = cfg.horizon * i / 16.0;
    const double got =
        mlp_apply(nets.front_net, std::span<const double>(theta).subspan(d1),
                  std::vector<double>{t})[0];
    worst = std::max(worst, std::abs(got - (cfg.psi + t)));
  }
  result.front_error = worst;
  return result;
}

std::vector<double> bsde_consistency(const BsdeConsistencyConfig& cfg) {
  const double varrho = std::sqrt(2.0 * cfg.rate);
  const double T = cfg.horizon;
  SdeSpec sde =
      SdeSpec::heat(1, cfg.rate, T, [](std::span<const double> x) { return x[0] * x[0]; });
  auto v = [&](std::span<const double> x) { return x[0] * x[0] + varrho * varrho * T; };
  auto grad = [&](double, std::span<const double> x) {
    return std::vector<double>{2.0 * varrho * x[0]};
  };

  std::vector<double> losses;
  RngState rng(cfg.seed);
  for (int steps : cfg.step_counts) {
    std::vector<BsdeSample> batch;
    batch.reserve(cfg.paths);
    for (int s = 0; s < cfg.paths; ++s)
      batch.push_back({{rng.next_gaussian()}, BrownianPath::sample(steps, 1, T, rng)});
    losses.push_back(bsde_terminal_loss(sde, v, grad, batch));
  }
  return losses;
}

BsdeTrainResult train_bsde_quadratic(const BsdeTrainConfig& cfg) {
  const double varrho = std::sqrt(2.0 * cfg.rate);
  SdeSpec sde = SdeSpec::heat(1, cfg.rate, cfg.horizon,
                              [](std::span<const double> x) { return x[0] * x[0]; });

  BsdeTrainResult result;
  std::vector<int> vw{1};
  for (int h : cfg.hidden) vw.push_back(h);
  vw.push_back(1);
  result.controls.value_net = MlpArchitecture(vw, Activation::tanh);
  std::vector<int> gw{2};
  for (int h : cfg.hidden) gw.push_back(h);
  gw.push_back(1);
  result.controls.gradient_net = MlpArchitecture(gw, Activation::tanh);

  RngState init_rng(cfg.seed, 1);
  RngState data_rng(cfg.seed, 2);
  ParamVector theta = mlp_init(result.controls.value_net, init_rng);
  {
    ParamVector t2 = mlp_init(result.controls.gradient_net, init_rng);
    theta.insert(theta.end(), t2.begin(), t2.end());
  }

  AdamState adam(theta.size());
  Tape tape;
  std::vector<Var> tv(theta.size());
  std::vector<double> grad(theta.size());
  for (int step = 1; step <= cfg.max_steps; ++step) {
    std::vector<BsdeSample> batch;
    batch.reserve(cfg.batch);
    for (int s = 0; s < cfg.batch; ++s)
      batch.push_back({{data_rng.next_gaussian()},
                       BrownianPath::sample(cfg.time_steps, 1, cfg.horizon, data_rng)});
    tape.clear();
    for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.input(theta[i]);
    Var loss = bsde_terminal_loss_traced(tape, sde, result.controls, tv, batch);
    tape.gradient(loss, tv, grad);
    adam_step(adam, theta, grad, cfg.learning_rate);
    result.final_loss = loss.value();
    if (step % 50 == 0 || step == 1)
      result.log.push_back({step, result.final_loss, 0.0, cfg.learning_rate});
  }
  result.theta = theta;

  const double u00 = varrho * varrho * cfg.horizon;  // u(0, 0) for g = x^2
  const double v0 = mlp_apply(result.controls.value_net,
                              std::span<const double>(theta).subspan(
                                  0, result.controls.value_net.param_count()),
                              std::vector<double>{0.0})[0];
  result.value_error_at_zero = std::abs(v0 - u00);
  return result;
}

}  // namespace deeppde
