#include <cmath>

#include "deeppde/stochastic.hpp"
#include "doctest.h"

using namespace deeppde;

namespace {

SdeSpec deterministic_drift_sde(double mu) {
  SdeSpec sde;
  sde.dim = 1;
  sde.horizon = 1.0;
  sde.drift = [mu](double, std::span<const double>) { return std::vector<double>{mu}; };
  sde.diffusion = [](double, std::span<const double>) { return std::vector<double>{0.0}; };
  sde.terminal = [](std::span<const double> x) { return x[0]; };
  return sde;
}

}  // namespace

TEST_CASE("euler_maruyama degenerate cases") {
  RngState rng(1);
  // mu = 0, sigma = 0: constant
  SdeSpec still = deterministic_drift_sde(0.0);
  BrownianPath p = BrownianPath::sample(16, 1, 1.0, rng);
  auto traj = euler_maruyama(still, std::vector<double>{0.7}, p);
  for (double v : traj) CHECK(v == 0.7);

  // mu = 1, sigma = 0: X_T = 1 for any step count
  for (int steps : {1, 7, 40}) {
    SdeSpec drift = deterministic_drift_sde(1.0);
    BrownianPath q = BrownianPath::sample(steps, 1, 1.0, rng);
    auto t2 = euler_maruyama(drift, std::vector<double>{0.0}, q);
    CHECK(t2.back() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("euler_maruyama Brownian moments") {
  RngState rng(2);
  SdeSpec bm;
  bm.dim = 1;
  bm.horizon = 1.0;
  bm.drift = [](double, std::span<const double>) { return std::vector<double>{0.0}; };
  bm.diffusion = [](double, std::span<const double>) { return std::vector<double>{1.0}; };
  bm.terminal = [](std::span<const double> x) { return x[0]; };
  const int paths = 10000;
  double mean = 0.0, sq = 0.0;
  for (int s = 0; s < paths; ++s) {
    BrownianPath p = BrownianPath::sample(20, 1, 1.0, rng);
    auto traj = euler_maruyama(bm, std::vector<double>{0.3}, p);
    mean += traj.back();
    sq += (traj.back() - 0.3) * (traj.back() - 0.3);
  }
  mean /= paths;
  sq /= paths;
  const double tol = 3.0 * std::sqrt(2.0 / paths);
  CHECK(std::abs(mean - 0.3) < tol);
  CHECK(std::abs(sq - 1.0) < tol);
}

TEST_CASE("bsde rollout degenerate controls") {
  RngState rng(3);
  SdeSpec heat = SdeSpec::heat(1, 0.5, 1.0, [](std::span<const double> x) { return x[0]; });
  auto v = [](std::span<const double> x) { return 2.0 * x[0] + 1.0; };
  auto zero_grad = [](double, std::span<const double>) { return std::vector<double>{0.0}; };

  // f = 0, V = 0: Y_T = v(X_0)
  BrownianPath p = BrownianPath::sample(10, 1, 1.0, rng);
  auto r = bsde_rollout(heat, v, zero_grad, std::vector<double>{0.4}, p);
  CHECK(r.y.back() == doctest::Approx(v(std::vector<double>{0.4})));

  // f = c, V = 0: Y_T = v(X_0) - c T
  heat.generator = std::make_shared<ConstantGenerator>(0.8);
  auto r2 = bsde_rollout(heat, v, zero_grad, std::vector<double>{0.4}, p);
  CHECK(r2.y.back() == doctest::Approx(v(std::vector<double>{0.4}) - 0.8).epsilon(1e-12));
}

TEST_CASE("bsde terminal loss trivia") {
  RngState rng(4);
  SdeSpec sde = SdeSpec::heat(1, 0.5, 1.0, [](std::span<const double>) { return 0.0; });
  auto v0 = [](std::span<const double>) { return 0.0; };
  auto g0 = [](double, std::span<const double>) { return std::vector<double>{0.0}; };
  std::vector<BsdeSample> batch;
  for (int s = 0; s < 4; ++s)
    batch.push_back({{rng.next_gaussian()}, BrownianPath::sample(8, 1, 1.0, rng)});
  CHECK(bsde_terminal_loss(sde, v0, g0, batch) == 0.0);

  // g = 1, zero controls: loss 1
  sde.terminal = [](std::span<const double>) { return 1.0; };
  CHECK(bsde_terminal_loss(sde, v0, g0, batch) == doctest::Approx(1.0));

  CHECK_THROWS_AS(bsde_terminal_loss(sde, v0, g0, std::span<const BsdeSample>{}),
                  ConfigError);
}

TEST_CASE("bsde terminal loss shrinks with the time step under analytic controls") {
  // heat case: du/dt + rho Lap u = 0, u(T,.) = g = x^2
  // v(x) = u(0,x) = x^2 + varrho^2 T, V(t,x) = varrho * 2x
  const double rho = 0.2, T = 1.0;
  const double varrho = std::sqrt(2.0 * rho);
  SdeSpec sde = SdeSpec::heat(1, rho, T, [](std::span<const double> x) { return x[0] * x[0]; });
  auto v = [&](std::span<const double> x) { return x[0] * x[0] + varrho * varrho * T; };
  auto grad = [&](double, std::span<const double> x) {
    return std::vector<double>{varrho * 2.0 * x[0]};
  };

  RngState rng(5);
  double prev = 1e100;
  for (int steps : {10, 20, 40}) {
    std::vector<BsdeSample> batch;
    for (int s = 0; s < 10000; ++s)
      batch.push_back({{rng.next_gaussian()}, BrownianPath::sample(steps, 1, T, rng)});
    const double loss = bsde_terminal_loss(sde, v, grad, batch);
    CHECK(loss < prev);
    prev = loss;
    // closed form: E|Y_T - g(X_T)|^2 = 2 varrho^4 T dt
    const double want = 2.0 * varrho * varrho * varrho * varrho * T * (T / steps);
    CHECK(loss == doctest::Approx(want).epsilon(0.1));
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("bsde theta-gradient matches finite differences") {
  RngState rng(6);
  SdeSpec sde = SdeSpec::heat(1, 0.5, 1.0, [](std::span<const double> x) { return x[0]; });
  sde.generator = std::make_shared<QuadraticGenerator>(0.3, 0.1);
  BsdeControls controls;
  controls.value_net = MlpArchitecture({1, 4, 1}, Activation::tanh);
  controls.gradient_net = MlpArchitecture({2, 4, 1}, Activation::tanh);
  ParamVector theta = mlp_init(controls.value_net, rng);
  ParamVector g = mlp_init(controls.gradient_net, rng);
  theta.insert(theta.end(), g.begin(), g.end());
  for (double& t : theta) t += 0.1 * rng.next_gaussian();

  std::vector<BsdeSample> batch;
  for (int s = 0; s < 2; ++s)
    batch.push_back({{rng.next_gaussian()}, BrownianPath::sample(6, 1, 1.0, rng)});

  Tape tape;
  std::vector<Var> tv(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.input(theta[i]);
  Var loss = bsde_terminal_loss_traced(tape, sde, controls, tv, batch);
  auto grad = tape.gradient(loss, tv);

  for (std::size_t i = 0; i < theta.size(); i += 3) {
    ParamVector tp = theta;
    tp[i] += 1e-5;
    const double up = bsde_terminal_loss(sde, controls, tp, batch);
    tp[i] -= 2e-5;
    const double dn = bsde_terminal_loss(sde, controls, tp, batch);
    const double fd = (up - dn) / 2e-5;
    CHECK(std::abs(grad[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("bsde martingale property with f = 0") {
  RngState rng(7);
  SdeSpec sde = SdeSpec::heat(1, 0.5, 1.0, [](std::span<const double> x) { return x[0]; });
  auto v = [](std::span<const double> x) { return std::sin(x[0]); };
  auto grad = [](double t, std::span<const double> x) {
    return std::vector<double>{0.7 * std::cos(x[0] + t)};
  };
  const int paths = 20000;
  double sum_y = 0.0, sum_v = 0.0, sq = 0.0;
  for (int s = 0; s < paths; ++s) {
    const std::vector<double> x0{rng.next_gaussian()};
    BrownianPath p = BrownianPath::sample(10, 1, 1.0, rng);
    auto r = bsde_rollout(sde, v, grad, x0, p);
    sum_y += r.y.back();
    sum_v += v(x0);
    sq += r.y.back() * r.y.back();
  }
  const double mean_y = sum_y / paths;
  const double mean_v = sum_v / paths;
  const double sd = std::sqrt(std::max(0.0, sq / paths - mean_y * mean_y));
  CHECK(std::abs(mean_y - mean_v) < 3.0 * sd / std::sqrt(static_cast<double>(paths)));
}

TEST_CASE("kolmogorov terminal loss trivia and residual variance") {
  KolmogorovSpec spec;
  spec.dim = 1;
  spec.horizon = 1.0;
  spec.rate = 0.5;  // varrho = 1
  RngState rng(8);
  KolmogorovBatch batch = KolmogorovBatch::sample_terminal(100000, 1, rng);

  auto zero = [](std::span<const double>) { return 0.0; };
  CHECK(kolmogorov_terminal_loss(spec, zero, zero, batch) == 0.0);

  // phi(x) = x, v(x) = x: loss = varrho^2 E B^2 = 1
  auto lin = [](std::span<const double> x) { return x[0]; };
  const double loss = kolmogorov_terminal_loss(spec, lin, lin, batch);
  CHECK(loss == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("kolmogorov optimality gap under shared randomness") {
  KolmogorovSpec spec;
  spec.dim = 1;
  spec.horizon = 1.0;
  spec.rate = 0.5;
  auto phi = [](std::span<const double> x) { return x[0] * x[0]; };
  auto exact = [&](std::span<const double> x) {
    return x[0] * x[0] + 2.0 * spec.rate * spec.horizon;
  };
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    RngState rng(seed);
    KolmogorovBatch batch = KolmogorovBatch::sample_terminal(100000, 1, rng);
    const double base = kolmogorov_terminal_loss(spec, phi, exact, batch);
    for (double delta : {0.05, 0.1, 0.2}) {
      auto shifted = [&](std::span<const double> x) { return exact(x) + delta; };
      const double worse = kolmogorov_terminal_loss(spec, phi, shifted, batch);
      CHECK(worse > base);
    }
    // Pythagoras with offset 0.1 adds 0.01 in expectation
    auto off = [&](std::span<const double> x) { return exact(x) + 0.1; };
    CHECK(kolmogorov_terminal_loss(spec, phi, off, batch) - base ==
          doctest::Approx(0.01).epsilon(0.02));
  }
}

TEST_CASE("kolmogorov full loss degenerate time and nested-MC oracle") {
  KolmogorovSpec spec;
  spec.dim = 1;
  spec.horizon = 1.0;
  spec.rate = 0.5;
  auto phi = [](std::span<const double> x) { return x[0] * x[0]; };

  // constant phi and v: zero loss
  RngState rng(9);
  KolmogorovBatch batch = KolmogorovBatch::sample_full(50000, 1, 1.0, rng);
  auto cphi = [](std::span<const double>) { return 3.0; };
  auto cv = [](double, std::span<const double>) { return 3.0; };
  CHECK(kolmogorov_full_loss(spec, cphi, cv, batch) == 0.0);

  // tau forced to zero reduces to mean |phi(xi) - v(0, xi)|^2
  KolmogorovBatch frozen = batch;
  std::fill(frozen.tau.begin(), frozen.tau.end(), 0.0);
  auto v0 = [](double, std::span<const double> x) { return x[0]; };
  double direct = 0.0;
  for (std::size_t s = 0; s < frozen.size(); ++s) {
    const double xi = frozen.xi[s];
    const double diff = phi(std::vector<double>{xi}) - xi;
    direct += diff * diff;
  }
  direct /= static_cast<double>(frozen.size());
  CHECK(kolmogorov_full_loss(spec, phi, v0, frozen) == doctest::Approx(direct));

  // v = exact solution: loss equals the mean conditional variance of
  // phi(varrho sqrt(tau) B + xi) given (tau, xi), estimated by nested MC
  auto exact = [&](double t, std::span<const double> x) {
    return x[0] * x[0] + 2.0 * spec.rate * t;
  };
  const double loss = kolmogorov_full_loss(spec, phi, exact, batch);
  RngState nested(10);
  double cvar = 0.0;
  const int outer = 4000, inner = 200;
  const double varrho = spec.varrho_full();
  for (int o = 0; o < outer; ++o) {
    const double tau = nested.next_uniform(0.0, 1.0);
    const double xi = nested.next_gaussian();
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < inner; ++i) {
      const double z = xi + varrho * std::sqrt(tau) * nested.next_gaussian();
      const double val = z * z;
      m1 += val;
      m2 += val * val;
    }
    m1 /= inner;
    m2 /= inner;
    cvar += (m2 - m1 * m1) * inner / (inner - 1.0);
  }
  cvar /= outer;
  // 3-sigma agreement between two Monte Carlo estimates of the same quantity
  CHECK(loss == doctest::Approx(cvar).epsilon(0.1));
}

TEST_CASE("kolmogorov traced gradient matches finite differences") {
  KolmogorovSpec spec;
  spec.dim = 1;
  spec.horizon = 1.0;
  spec.rate = 0.5;
  auto phi = [](std::span<const double> x) { return x[0] * x[0]; };
  RngState rng(11);
  MlpArchitecture net({1, 6, 1}, Activation::tanh);
  ParamVector theta = mlp_init(net, rng);
  for (double& t : theta) t += 0.1 * rng.next_gaussian();
  KolmogorovBatch batch = KolmogorovBatch::sample_terminal(8, 1, rng);

  Tape tape;
  std::vector<Var> tv(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.input(theta[i]);
  Var loss = kolmogorov_terminal_loss_traced(tape, spec, phi, net, tv, batch);
  auto grad = tape.gradient(loss, tv);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    ParamVector tp = theta;
    tp[i] += 1e-5;
    const double up = kolmogorov_terminal_loss(spec, phi, net, tp, batch);
    tp[i] -= 2e-5;
    const double dn = kolmogorov_terminal_loss(spec, phi, net, tp, batch);
    const double fd = (up - dn) / 2e-5;
    CHECK(std::abs(grad[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }

  // full variant as well
  KolmogorovBatch fb = KolmogorovBatch::sample_full(8, 1, 1.0, rng);
  MlpArchitecture net2({2, 6, 1}, Activation::gelu);
  ParamVector theta2 = mlp_init(net2, rng);
  Tape tape2;
  std::vector<Var> tv2(theta2.size());
  for (std::size_t i = 0; i < theta2.size(); ++i) tv2[i] = tape2.input(theta2[i]);
  Var loss2 = kolmogorov_full_loss_traced(tape2, spec, phi, net2, tv2, fb);
  auto grad2 = tape2.gradient(loss2, tv2);
  for (std::size_t i = 0; i < theta2.size(); i += 5) {
    ParamVector tp = theta2;
    tp[i] += 1e-5;
    const double up = kolmogorov_full_loss(spec, phi, net2, tp, fb);
    tp[i] -= 2e-5;
    const double dn = kolmogorov_full_loss(spec, phi, net2, tp, fb);
    const double fd = (up - dn) / 2e-5;
    CHECK(std::abs(grad2[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("losses are bit-reproducible for fixed seeds") {
  KolmogorovSpec spec;
  spec.dim = 2;
  spec.horizon = 1.0;
  spec.rate = 0.3;
  auto phi = [](std::span<const double> x) { return x[0] + x[1] * x[1]; };
  auto v = [](std::span<const double> x) { return x[0] - x[1]; };
  RngState a(77), b(77);
  KolmogorovBatch ba = KolmogorovBatch::sample_terminal(512, 2, a);
  KolmogorovBatch bb = KolmogorovBatch::sample_terminal(512, 2, b);
  CHECK(kolmogorov_terminal_loss(spec, phi, v, ba) ==
        kolmogorov_terminal_loss(spec, phi, v, bb));
}

TEST_CASE("conditional expectation oracle on trivial partitions") {
  DiscreteProbSpace space;
  space.probabilities = {0.25, 0.25, 0.25, 0.25};
  space.block_of = {0, 0, 0, 0};
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  auto ce = cond_exp_oracle(space, x);
  for (double v : ce) CHECK(v == doctest::Approx(2.5));

  space.block_of = {0, 1, 2, 3};
  auto ce2 = cond_exp_oracle(space, x);
  for (int i = 0; i < 4; ++i) CHECK(ce2[i] == x[i]);
}

TEST_CASE("pythagoras identity and minimizer enumeration on fuzzed spaces") {
  RngState rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 7);  // 2..8 outcomes
    DiscreteProbSpace space;
    space.probabilities.resize(n);
    double total = 0.0;
    for (double& p : space.probabilities) {
      p = 0.05 + rng.next_unit();
      total += p;
    }
    for (double& p : space.probabilities) p /= total;
    // normalize exactly: fix the last probability by the residual
    double head = 0.0;
    for (int i = 0; i + 1 < n; ++i) head += space.probabilities[i];
    space.probabilities[n - 1] = 1.0 - head;
    const int nb = 1 + static_cast<int>(rng.next_u64() % n);
    space.block_of.resize(n);
    for (int i = 0; i < n; ++i) space.block_of[i] = i % nb;

    std::vector<double> x(n);
    for (double& v : x) v = rng.next_gaussian();

    // identity holds for random blockwise-constant Y
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<double> yblocks(nb);
      for (double& v : yblocks) v = rng.next_gaussian();
      std::vector<double> y(n);
      for (int i = 0; i < n; ++i) y[i] = yblocks[space.block_of[i]];
      auto r = pythagoras_check(space, x, y);
      CHECK(std::abs(r.total - (r.within + r.between)) < 1e-12);
    }

    // the enumerated minimizer over blockwise-constant candidates is the mean
    const auto ce = cond_exp_oracle(space, x);
    auto loss_of = [&](const std::vector<double>& y) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += space.probabilities[i] * (x[i] - y[i]) * (x[i] - y[i]);
      return acc;
    };
    const double best = loss_of(ce);
    // grid of candidate block values around the mean
    std::vector<double> grid{-1.5, -0.5, -0.1, 0.0, 0.1, 0.5, 1.5};
    std::vector<double> y(n);
    std::vector<int> pick(nb, 0);
    bool done = false;
    while (!done) {
      for (int i = 0; i < n; ++i)
        y[i] = ce[i] + grid[pick[space.block_of[i]]];
      CHECK(loss_of(y) >= best - 1e-12);
      int b = 0;
      while (b < nb) {
        if (++pick[b] < static_cast<int>(grid.size())) break;
        pick[b] = 0;
        ++b;
      }
      done = (b == nb);
    }
  }
}

TEST_CASE("pythagoras rejects non-measurable Y") {
  DiscreteProbSpace space;
  space.probabilities = {0.5, 0.5};
  space.block_of = {0, 0};
  std::vector<double> x{1.0, 2.0};
  std::vector<double> y{1.0, 2.0};  // differs within the single block
  CHECK_THROWS_AS(pythagoras_check(space, x, y), ConfigError);
}
