// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria can be selected by number on the command line.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "deeppde/conv.hpp"
#include "deeppde/experiments.hpp"
#include "deeppde/fourier.hpp"
#include "deeppde/io.hpp"
#include "deeppde/residual.hpp"
#include "deeppde/stochastic.hpp"
#include "deeppde/train.hpp"

using namespace deeppde;
namespace fs = std::filesystem;

namespace {

int worker_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(8u, std::max(1u, hc)));
}

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
  void note(const std::string& what) {
    if (detail.empty()) detail = what;
  }
};

// finite-difference oracle over a plain loss callable
void probe_gradients(Check& c, const char* family,
                     const std::function<double(const ParamVector&)>& plain,
                     const std::function<std::vector<double>(const ParamVector&)>& autodiff,
                     const ParamVector& theta, int probes, RngState& rng) {
  const auto grad = autodiff(theta);
  for (int p = 0; p < probes; ++p) {
    const std::size_t i = rng.next_u64() % theta.size();
    ParamVector tp = theta;
    tp[i] += 1e-5;
    const double up = plain(tp);
    tp[i] -= 2e-5;
    const double dn = plain(tp);
    const double fd = (up - dn) / 2e-5;
    const double err = std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd));
    c.require(err < 1e-5, std::string(family) + ": gradient probe error " +
                              std::to_string(err));
  }
}

GridFunction random_grid(std::vector<int> ext, std::vector<double> len, RngState& rng) {
  GridFunction g(std::move(ext), std::move(len));
  for (double& v : g.values.values()) v = rng.next_gaussian();
  return g;
}

// ---------------------------------------------------------------------------
// 1. Gradient integrity across every loss family
// ---------------------------------------------------------------------------

bool criterion_gradient_integrity(std::string& detail) {
  Check c;
  RngState rng(101);

  // operator data loss over three architectures
  {
    GridFunction in = random_grid({8}, {1.0}, rng);
    GridFunction tg = random_grid({8}, {1.0}, rng);
    std::vector<std::unique_ptr<OperatorModel>> models;
    {
      FnoSpec fno;
      fno.dim = 1;
      fno.grid_n = 8;
      fno.channels = 2;
      fno.length = 1;
      fno.modes = 2;
      fno.lift_hidden = {4};
      fno.proj_hidden = {4};
      models.push_back(make_model(fno));
      PeriodicCnnSpec pcnn;
      pcnn.extents = {8};
      pcnn.channels = {1, 2, 1};
      pcnn.half_widths = {{1}, {1}};
      models.push_back(make_model(pcnn));
      DeepOnetSpec onet;
      onet.sensors = DeepOnetSpec::grid_sensors({8}, {1.0});
      onet.latent = 3;
      onet.branch_hidden = {5};
      onet.trunk_hidden = {5};
      models.push_back(make_model(onet));
    }
    for (const auto& model : models) {
      ParamVector theta = model->init_params(rng);
      probe_gradients(
          c, "operator-data",
          [&](const ParamVector& th) { return sample_data_loss(*model, th, in, tg); },
          [&](const ParamVector& th) {
            Tape tape;
            std::vector<Var> tv(th.size());
            for (std::size_t i = 0; i < th.size(); ++i) tv[i] = tape.input(th[i]);
            auto out = model->apply_traced(tape, tv, in);
            Var loss = sqr(out[0] - tg.values[0]);
            for (std::size_t i = 1; i < out.size(); ++i)
              loss = loss + sqr(out[i] - tg.values[i]);
            loss = loss * in.cell_volume();
            return tape.gradient(loss, tv);
          },
          theta, 7, rng);
    }
  }

  // PINN BVP
  {
    BvpProblem problem = BvpProblem::laplace_box(
        2, [](std::span<const double> p) { return p[0] * p[0] - p[1] * p[1]; });
    BvpBatch batch = problem.sample(4, 4, rng);
    MlpArchitecture net({2, 8, 1}, Activation::tanh);
    ParamVector theta = mlp_init(net, rng);
    probe_gradients(
        c, "pinn-bvp",
        [&](const ParamVector& th) { return pinn_bvp_loss(problem, net, th, batch); },
        [&](const ParamVector& th) {
          Tape tape;
          std::vector<Var> tv(th.size());
          for (std::size_t i = 0; i < th.size(); ++i) tv[i] = tape.input(th[i]);
          return tape.gradient(pinn_bvp_loss_traced(tape, problem, net, tv, batch), tv);
        },
        theta, 20, rng);
  }

  // PINN IVP
  {
    IvpProblem problem = IvpProblem::heat_dirichlet(1, 0.1, 1.0);
    IvpBatch batch = problem.sample(3, 3, rng);
    MlpArchitecture net({2, 8, 1}, Activation::gelu);
    ParamVector theta = mlp_init(net, rng);
    probe_gradients(
        c, "pinn-ivp",
        [&](const ParamVector& th) { return pinn_ivp_loss(problem, net, th, batch); },
        [&](const ParamVector& th) {
          Tape tape;
          std::vector<Var> tv(th.size());
          for (std::size_t i = 0; i < th.size(); ++i) tv[i] = tape.input(th[i]);
          return tape.gradient(pinn_ivp_loss_traced(tape, problem, net, tv, batch), tv);
        },
        theta, 20, rng);
  }

  // Stefan
  {
    StefanProblem problem;
    problem.horizon = 1.0;
    problem.psi = 0.8;
    problem.flux = [](double t) { return 0.2 * t; };
    problem.front_value = [](double) { return 0.0; };
    problem.front_flux = [](double) { return -1.0; };
    problem.initial = [](double x) { return 0.3 * x; };
    StefanNets nets;
    nets.heat_net = MlpArchitecture({2, 6, 1}, Activation::tanh);
    nets.front_net = MlpArchitecture({1, 4, 1}, Activation::tanh);
    ParamVector theta = mlp_init(nets.heat_net, rng);
    ParamVector t2 = mlp_init(nets.front_net, rng);
    theta.insert(theta.end(), t2.begin(), t2.end());
    StefanBatch batch = sample_stefan_batch(problem, nets, theta, 3, rng);
    probe_gradients(
        c, "stefan",
        [&](const ParamVector& th) { return stefan_loss(problem, nets, th, batch); },
        [&](const ParamVector& th) {
          Tape tape;
          std::vector<Var> tv(th.size());
          for (std::size_t i = 0; i < th.size(); ++i) tv[i] = tape.input(th[i]);
          return tape.gradient(stefan_loss_traced(tape, problem, nets, tv, batch), tv);
        },
        theta, 20, rng);
  }

  // Kolmogorov terminal and full
  {
    KolmogorovSpec spec{1, 1.0, 0.5};
    auto phi = [](std::span<const double> x) { return x[0] * x[0]; };
    MlpArchitecture net({1, 8, 1}, Activation::tanh);
    ParamVector theta = mlp_init(net, rng);
    KolmogorovBatch batch = KolmogorovBatch::sample_terminal(8, 1, rng);
    probe_gradients(
        c, "kolmogorov-terminal",
        [&](const ParamVector& th) {
          return kolmogorov_terminal_loss(spec, phi, net, th, batch);
        },
        [&](const ParamVector& th) {
          Tape tape;
          std::vector<Var> tv(th.size());
          for (std::size_t i = 0; i < th.size(); ++i) tv[i] = tape.input(th[i]);
          return tape.gradient(
              kolmogorov_terminal_loss_traced(tape, spec, phi, net, tv, batch), tv);
        },
        theta, 20, rng);

    MlpArchitecture net2({2, 8, 1}, Activation::gelu);
    ParamVector theta2 = mlp_init(net2, rng);
    KolmogorovBatch fbatch = KolmogorovBatch::sample_full(8, 1, 1.0, rng);
    probe_gradients(
        c, "kolmogorov-full",
        [&](const ParamVector& th) {
          return kolmogorov_full_loss(spec, phi, net2, th, fbatch);
        },
        [&](const ParamVector& th) {
          Tape tape;
          std::vector<Var> tv(th.size());
          for (std::size_t i = 0; i < th.size(); ++i) tv[i] = tape.input(th[i]);
          return tape.gradient(
              kolmogorov_full_loss_traced(tape, spec, phi, net2, tv, fbatch), tv);
        },
        theta2, 20, rng);
  }

  // BSDE terminal
  {
    SdeSpec sde = SdeSpec::heat(1, 0.5, 1.0, [](std::span<const double> x) { return x[0]; });
    sde.generator = std::make_shared<QuadraticGenerator>(0.2, 0.1);
    BsdeControls controls;
    controls.value_net = MlpArchitecture({1, 5, 1}, Activation::tanh);
    controls.gradient_net = MlpArchitecture({2, 5, 1}, Activation::tanh);
    ParamVector theta = mlp_init(controls.value_net, rng);
    ParamVector t2 = mlp_init(controls.gradient_net, rng);
    theta.insert(theta.end(), t2.begin(), t2.end());
    std::vector<BsdeSample> batch;
    for (int s = 0; s < 2; ++s)
      batch.push_back({{rng.next_gaussian()}, BrownianPath::sample(5, 1, 1.0, rng)});
    probe_gradients(
        c, "bsde-terminal",
        [&](const ParamVector& th) { return bsde_terminal_loss(sde, controls, th, batch); },
        [&](const ParamVector& th) {
          Tape tape;
          std::vector<Var> tv(th.size());
          for (std::size_t i = 0; i < th.size(); ++i) tv[i] = tape.input(th[i]);
          return tape.gradient(bsde_terminal_loss_traced(tape, sde, controls, tv, batch),
                               tv);
        },
        theta, 20, rng);
  }

  // PINO (steady instance through an operator model)
  {
    PinoEllipticInstance instance;
    instance.grid = 8;
    GrfSpec prior{1.0, 1.0, 2.0, 0.0, true};
    std::vector<GridFunction> inputs, refs;
    for (int s = 0; s < 2; ++s) {
      inputs.push_back(grf_sample(prior, {8}, {1.0}, rng));
      refs.push_back(instance.solve(inputs.back()));
    }
    FcnnOperatorSpec spec;
    spec.extents = {8};
    spec.hidden = {6};
    spec.activation = Activation::gelu;
    auto model = make_model(spec);
    ParamVector theta = model->init_params(rng);
    PinoBvpBatch batch;
    for (int m = 0; m < 6; ++m) {
      batch.data_sample.push_back(static_cast<int>(rng.next_u64() % 2));
      batch.data_node.push_back(rng.next_u64() % 8);
      batch.pde_sample.push_back(static_cast<int>(rng.next_u64() % 2));
      batch.pde_node.push_back(rng.next_u64() % 8);
    }
    PinoConfig cfg{0.8, 1.2, 0.0, 0.0};
    probe_gradients(
        c, "pino",
        [&](const ParamVector& th) {
          auto fn = [&](const GridFunction& g) { return model->apply(th, g); };
          return pino_bvp_risk(cfg, instance, fn, inputs, refs, batch);
        },
        [&](const ParamVector& th) {
          Tape tape;
          std::vector<Var> tv(th.size());
          for (std::size_t i = 0; i < th.size(); ++i) tv[i] = tape.input(th[i]);
          return tape.gradient(
              pino_bvp_risk_traced(tape, cfg, instance, *model, tv, inputs, refs, batch),
              tv);
        },
        theta, 20, rng);
  }

  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 2. Interpolation exactness
// ---------------------------------------------------------------------------

bool criterion_interpolation(std::string& detail) {
  Check c;
  RngState rng(102);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 3);
    std::vector<int> ext(d);
    for (int k = 0; k < d; ++k) ext[k] = 1 + static_cast<int>(rng.next_u64() % 8);
    GridFunction g(ext, std::vector<double>(d, 1.0));
    for (double& v : g.values.values()) v = rng.next_gaussian();
    std::vector<int> idx(d, 0);
    std::vector<double> y(d);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      for (int k = 0; k < d; ++k) y[k] = static_cast<double>(idx[k]) / ext[k];
      const double got = interp_eval(g, y);
      c.require(std::abs(got - g.values[flat]) <= 1e-14 * std::max(1.0, std::abs(g.values[flat])),
                "grid-point reproduction off by " +
                    std::to_string(std::abs(got - g.values[flat])));
      for (int k = d - 1; k >= 0; --k) {
        if (++idx[k] < ext[k]) break;
        idx[k] = 0;
      }
    }
  }
  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 3. DFT round trip, Parseval, FFT vs naive
// ---------------------------------------------------------------------------

bool criterion_dft(std::string& detail) {
  Check c;
  RngState rng(103);
  for (int n : {4, 8, 16, 64}) {
    Tensor f({n});
    for (double& v : f.values()) v = rng.next_gaussian();
    FourierCoeffs fc = dft_n(f, n);

    auto grid = idft_grid(fc);
    for (int i = 0; i < n; ++i)
      c.require(std::abs(grid[i] - std::complex<double>(f[i], 0.0)) < 1e-10,
                "round trip residual at N=" + std::to_string(n));

    double grid_sum = 0.0, coef_sum = 0.0;
    for (int i = 0; i < n; ++i) grid_sum += f[i] * f[i];
    for (std::size_t k = 0; k < fc.size(); ++k) coef_sum += std::norm(fc.at_flat(k));
    c.require(std::abs(grid_sum / n - coef_sum) < 1e-10,
              "Parseval constant off at N=" + std::to_string(n));

    FourierCoeffs naive = dft_n_naive(f, n);
    for (std::size_t k = 0; k < fc.size(); ++k)
      c.require(std::abs(fc.at_flat(k) - naive.at_flat(k)) < 1e-10,
                "FFT vs naive mismatch at N=" + std::to_string(n));
  }
  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 4. Convolution algebra
// ---------------------------------------------------------------------------

bool criterion_conv(std::string& detail) {
  Check c;
  RngState rng(104);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_u64() % 6);
    Tensor a({n});
    for (double& v : a.values()) v = rng.next_gaussian();
    Tensor w({3});
    for (double& v : w.values()) v = rng.next_gaussian();

    Tensor delta({3}, std::vector<double>{0, 1, 0});
    Tensor id = pconv(a, delta);
    for (int i = 0; i < n; ++i) c.require(id[i] == a[i], "delta-kernel identity");

    Tensor conv = pconv(a, w);
    for (int s = 1; s < n; ++s) {
      Tensor shifted({n});
      for (int i = 0; i < n; ++i) shifted[mod_index(n, i + s)] = a[i];
      Tensor lhs = pconv(shifted, w);
      for (int i = 0; i < n; ++i)
        c.require(std::abs(lhs[mod_index(n, i + s)] - conv[i]) <= 1e-12,
                  "shift equivariance");
    }

    const int kw = 1 + static_cast<int>(rng.next_u64() % 3);
    const int nb = 1 + static_cast<int>(rng.next_u64() % 2);
    Tensor a2({nb * kw});
    for (double& v : a2.values()) v = rng.next_gaussian();
    Tensor b2({nb});
    for (double& v : b2.values()) v = rng.next_gaussian();
    Tensor k2({kw});
    for (double& v : k2.values()) v = rng.next_gaussian();
    Tensor tc = tconv(b2, k2), sc = sconv(a2, k2);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < tc.size(); ++i) lhs += tc[i] * a2[i];
    for (std::size_t i = 0; i < sc.size(); ++i) rhs += b2[i] * sc[i];
    c.require(std::abs(lhs - rhs) <= 1e-12, "sconv/tconv adjointness");
  }
  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 5. Solver correctness
// ---------------------------------------------------------------------------

bool criterion_solvers(std::string& detail) {
  Check c;

  // heat-only single-mode decay, spectral N=64 M=1000
  {
    SemilinearPdeSpec pde;
    pde.dim = 1;
    pde.lengths = {2.0 * M_PI};
    pde.diffusion = 0.1;
    pde.horizon = 1.0;
    pde.nonlinearity = Nonlinearity::none;
    SolverConfig cfg{SolveMethod::spectral, 64, 1000, true};
    GridFunction g0 = grid_sample([](std::span<const double> x) { return std::sin(x[0]); },
                                  {64}, {2.0 * M_PI});
    GridFunction out = spectral_solve(pde, g0, cfg);
    const double decay = heat_mode_decay(0.1, 2.0 * M_PI, 1, 1.0);
    for (int i = 0; i < 64; ++i) {
      const double want = decay * g0.values[i];
      c.require(std::abs(out.values[i] - want) <= 1e-6 * std::max(1e-3, std::abs(want)),
                "spectral heat decay");
    }
  }

  // FDM per-step multiplier
  {
    SemilinearPdeSpec pde;
    pde.dim = 1;
    pde.lengths = {2.0};
    pde.diffusion = 0.05;
    pde.horizon = 0.01;
    pde.nonlinearity = Nonlinearity::none;
    SolverConfig cfg{SolveMethod::fdm, 32, 1, true};
    GridFunction g0 = grid_sample(
        [](std::span<const double> x) { return std::cos(M_PI * x[0]); }, {32}, {2.0});
    GridFunction out = fdm_solve(pde, g0, cfg);
    const double h = 2.0 / 32.0;
    const double lam = (2.0 / (h * h)) * (1.0 - std::cos(2.0 * M_PI * h / 2.0));
    const double mult = (1.0 - 0.05 * lam * 0.005) / (1.0 + 0.05 * lam * 0.005);
    for (int i = 0; i < 32; ++i)
      c.require(std::abs(out.values[i] - mult * g0.values[i]) <= 1e-12,
                "FDM circulant-eigenvalue multiplier");
  }

  // temporal order 2 for the three solvers
  {
    auto order_ratio = [&](const SemilinearPdeSpec& pde, SolveMethod method,
                           const GridFunction& g0, int base_steps) {
      auto err = [&](int steps) {
        SolverConfig c1{method, g0.extents[0], steps, true};
        SolverConfig c4{method, g0.extents[0], 4 * steps, true};
        GridFunction coarse = reference_solve(pde, g0, c1);
        GridFunction fine = reference_solve(pde, g0, c4);
        GridFunction d = coarse;
        for (std::size_t i = 0; i < d.size(); ++i) d.values[i] -= fine.values[i];
        return discrete_l2_seminorm(d);
      };
      return err(base_steps) / err(2 * base_steps);
    };
    GridFunction g0 = grid_sample(
        [](std::span<const double> x) { return std::sin(x[0]) + 0.3 * std::cos(2.0 * x[0]); },
        {64}, {2.0 * M_PI});
    SemilinearPdeSpec burgers;
    burgers.dim = 1;
    burgers.lengths = {2.0 * M_PI};
    burgers.diffusion = 0.1;
    burgers.horizon = 1.0;
    burgers.nonlinearity = Nonlinearity::burgers_conservative;
    SemilinearPdeSpec ac = burgers;
    ac.nonlinearity = Nonlinearity::allen_cahn;

    for (auto [name, pde, method] :
         {std::tuple{"spectral", burgers, SolveMethod::spectral},
          std::tuple{"fdm", ac, SolveMethod::fdm},
          std::tuple{"fem", burgers, SolveMethod::fem}}) {
      const double r = order_ratio(pde, method, g0, 16);
      c.require(r >= 3.4 && r <= 4.6,
                std::string(name) + " temporal order ratio " + std::to_string(r));
    }
  }

  // FDM vs spectral on reaction-diffusion at N=128, M=1000
  {
    RngState rng(105);
    GrfSpec grf{1e8, 100.0, 4.0, 0.8, true};
    GridFunction source = grf_sample(grf, {128}, {2.0}, rng);
    SemilinearPdeSpec pde;
    pde.dim = 1;
    pde.lengths = {2.0};
    pde.diffusion = 0.05;
    pde.horizon = 1.0;
    pde.nonlinearity = Nonlinearity::reaction_with_source;
    pde.reaction_rate = 2.0;
    pde.source = source;
    GridFunction zero({128}, {2.0});
    GridFunction a = fdm_solve(pde, zero, SolverConfig{SolveMethod::fdm, 128, 1000, true});
    GridFunction b =
        spectral_solve(pde, zero, SolverConfig{SolveMethod::spectral, 128, 1000, true});
    GridFunction d = a;
    for (std::size_t i = 0; i < d.size(); ++i) d.values[i] -= b.values[i];
    const double err = discrete_l2_seminorm(d);
    c.require(err < 1e-3, "FDM vs spectral reaction-diffusion error " + std::to_string(err));
  }

  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 6. Conservation and equilibria
// ---------------------------------------------------------------------------

bool criterion_conservation(std::string& detail) {
  Check c;
  {
    SemilinearPdeSpec pde;
    pde.dim = 1;
    pde.lengths = {2.0 * M_PI};
    pde.diffusion = 0.1;
    pde.horizon = 1.0;
    pde.nonlinearity = Nonlinearity::burgers_conservative;
    GridFunction g0 = grid_sample(
        [](std::span<const double> x) { return std::sin(x[0]) + 0.2; }, {64}, {2.0 * M_PI});
    GridFunction out = spectral_solve(pde, g0, SolverConfig{SolveMethod::spectral, 64, 1000, true});
    double m0 = 0.0, m1 = 0.0;
    for (int i = 0; i < 64; ++i) {
      m0 += g0.values[i];
      m1 += out.values[i];
    }
    c.require(std::abs(m1 - m0) / 64.0 < 1e-10, "Burgers mean drift");
  }
  {
    SemilinearPdeSpec pde;
    pde.dim = 1;
    pde.lengths = {1.0};
    pde.diffusion = 0.002;
    pde.horizon = 0.003;
    pde.nonlinearity = Nonlinearity::allen_cahn;
    for (double eq : {-1.0, 0.0, 1.0}) {
      GridFunction g0({64}, {1.0}, Tensor({64}, eq));
      GridFunction out = spectral_solve(pde, g0, SolverConfig{SolveMethod::spectral, 64, 1, true});
      for (double v : out.values.values())
        c.require(std::abs(v - eq) < 1e-12, "Allen-Cahn equilibrium drift");
    }
  }
  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 7. GRF sampler against the three priors
// ---------------------------------------------------------------------------

bool criterion_grf(std::string& detail) {
  Check c;
  struct Prior {
    const char* name;
    GrfSpec spec;
    double length;
  };
  const Prior priors[] = {
      {"burgers", GrfSpec{1e6, 10.0, 6.0, 0.0, true}, 2.0 * M_PI},
      {"allen-cahn", GrfSpec{25e6, std::sqrt(5000.0), 4.0, 0.8, true}, 1.0},
      {"reaction-diffusion", GrfSpec{1e8, 100.0, 4.0, 0.8, true}, 2.0},
  };
  RngState root(106);
  const int n = 32, samples = 10000;
  int prior_id = 0;
  for (const Prior& p : priors) {
    RngState rng = root.split(prior_id++);
    std::vector<double> acc(5, 0.0);
    double sym_residue = 0.0;
    for (int s = 0; s < samples; ++s) {
      GridFunction g = grf_sample(p.spec, {n}, {p.length}, rng);
      FourierCoeffs fc = dft_n(g.values, n);
      for (int k = 0; k <= 4; ++k) acc[k] += std::norm(fc.at_flat(k));
      if (s < 100) {
        for (int k = 1; k < n / 2; ++k)
          sym_residue = std::max(
              sym_residue,
              std::abs(fc.at_flat(k) -
                       std::conj(fc.at_flat(static_cast<std::size_t>(n - k)))));
      }
    }
    c.require(sym_residue < 1e-12,
              std::string(p.name) + " realness residue " + std::to_string(sym_residue));
    for (int k = 0; k <= 4; ++k) {
      const double w = 2.0 * M_PI * k / p.length;
      const double want = p.spec.mode_variance(w * w);
      const double got = acc[k] / samples;
      if (want == 0.0) {
        c.require(got < 1e-12, std::string(p.name) + " clamped mode leaks");
      } else {
        c.require(std::abs(got - want) <= 0.05 * want,
                  std::string(p.name) + " mode " + std::to_string(k) + " variance off by " +
                      std::to_string(std::abs(got - want) / want));
      }
    }
  }
  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 8. Conditional-expectation reformulation
// ---------------------------------------------------------------------------

bool criterion_cond_exp(std::string& detail) {
  Check c;
  RngState rng(107);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 7);
    DiscreteProbSpace space;
    space.probabilities.resize(n);
    double total = 0.0;
    for (double& p : space.probabilities) {
      p = 0.05 + rng.next_unit();
      total += p;
    }
    for (double& p : space.probabilities) p /= total;
    double head = 0.0;
    for (int i = 0; i + 1 < n; ++i) head += space.probabilities[i];
    space.probabilities[n - 1] = 1.0 - head;
    const int nb = 1 + static_cast<int>(rng.next_u64() % n);
    space.block_of.resize(n);
    for (int i = 0; i < n; ++i) space.block_of[i] = i % nb;

    std::vector<double> x(n);
    for (double& v : x) v = rng.next_gaussian();
    const auto ce = cond_exp_oracle(space, x);

    for (int probe = 0; probe < 10; ++probe) {
      std::vector<double> yb(nb);
      for (double& v : yb) v = rng.next_gaussian();
      std::vector<double> y(n);
      for (int i = 0; i < n; ++i) y[i] = yb[space.block_of[i]];
      const auto r = pythagoras_check(space, x, y);
      c.require(std::abs(r.total - (r.within + r.between)) < 1e-12, "Pythagoras identity");
    }

    auto loss_of = [&](const std::vector<double>& y) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += space.probabilities[i] * (x[i] - y[i]) * (x[i] - y[i]);
      return acc;
    };
    const double best = loss_of(ce);
    const std::vector<double> offsets{-1.0, -0.3, 0.0, 0.3, 1.0};
    std::vector<int> pick(nb, 0);
    bool done = false;
    bool minimum_attained_at_mean = true;
    while (!done) {
      std::vector<double> y(n);
      bool is_mean = true;
      for (int i = 0; i < n; ++i) {
        y[i] = ce[i] + offsets[pick[space.block_of[i]]];
        if (offsets[pick[space.block_of[i]]] != 0.0) is_mean = false;
      }
      const double l = loss_of(y);
      if (l < best - 1e-12) minimum_attained_at_mean = false;
      if (!is_mean && l <= best - 1e-12) minimum_attained_at_mean = false;
      int b = 0;
      while (b < nb) {
        if (++pick[b] < static_cast<int>(offsets.size())) break;
        pick[b] = 0;
        ++b;
      }
      done = (b == nb);
    }
    c.require(minimum_attained_at_mean, "enumerated minimizer is not the blockwise mean");
  }
  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 9. Deep Kolmogorov desk-scale training
// ---------------------------------------------------------------------------

bool criterion_kolmogorov_training(std::string& detail) {
  KolmogorovTrainConfig cfg;
  cfg.spec = KolmogorovSpec{1, 1.0, 0.5};
  cfg.hidden = {32, 32};
  cfg.activation = Activation::tanh;
  cfg.max_steps = 5000;
  cfg.seed = 0;
  KolmogorovTrainResult r = train_kolmogorov_square(cfg);
  detail = "relative L2 error " + std::to_string(r.relative_l2) + " after " +
           std::to_string(r.steps_done) + " steps";
  return r.relative_l2 < 5e-2;
}

// ---------------------------------------------------------------------------
// 10. BSDE consistency
// ---------------------------------------------------------------------------

bool criterion_bsde(std::string& detail) {
  BsdeConsistencyConfig cfg;
  cfg.rate = 0.2;
  cfg.horizon = 1.0;
  cfg.paths = 10000;
  cfg.step_counts = {10, 20, 40};
  cfg.seed = 0;
  const auto losses = bsde_consistency(cfg);
  detail = "losses " + std::to_string(losses[0]) + " / " + std::to_string(losses[1]) +
           " / " + std::to_string(losses[2]);
  return losses[0] > losses[1] && losses[1] > losses[2] && losses[2] < 1e-2;
}

// ---------------------------------------------------------------------------
// 11. PINN desk-scale training
// ---------------------------------------------------------------------------

bool criterion_pinn_training(std::string& detail) {
  PinnLaplaceConfig cfg;
  cfg.hidden = {32, 32};
  cfg.activation = Activation::tanh;
  cfg.max_steps = 10000;
  cfg.seed = 0;
  PinnTrainResult r = train_pinn_laplace(cfg);
  detail = "L2 error " + std::to_string(r.l2_error) + " after " +
           std::to_string(r.steps_done) + " steps";
  return r.l2_error < 5e-2;
}

// ---------------------------------------------------------------------------
// 12. Operator-learning end to end on Burgers
// ---------------------------------------------------------------------------

bool criterion_operator_end_to_end(std::string& detail) {
  Check c;
  const int threads = worker_threads();

  DataGenConfig dg;
  dg.pde.dim = 1;
  dg.pde.lengths = {2.0 * M_PI};
  dg.pde.diffusion = 0.1;
  dg.pde.horizon = 1.0;
  dg.pde.nonlinearity = Nonlinearity::burgers_conservative;
  dg.grf = GrfSpec{1e6, 10.0, 6.0, 0.0, true};
  dg.solver = SolverConfig{SolveMethod::spectral, 128, 1000, true};
  dg.model_resolution = 64;
  dg.seed = 1;
  dg.count = 4096;
  Dataset train_set = dataset_generate(dg, threads);
  dg.seed = 2;
  dg.count = 512;
  Dataset val_set = dataset_generate(dg, threads);
  dg.seed = 3;
  Dataset test_set = dataset_generate(dg, threads);
  std::printf("  [c12] datasets ready\n");
  std::fflush(stdout);

  const double identity_error = [&] {
    std::vector<GridFunction> outs = test_set.inputs;
    return l2_error_mc(outs, test_set.targets);
  }();

  TrainConfig tc;
  tc.batch_size = 16;
  tc.learning_rate = 1e-3;
  tc.improvement_tolerance = 0.96;
  tc.steps_between_validation = 400;
  tc.max_steps = 2000;
  tc.runs = 1;
  tc.optimizer = OptimizerKind::adam;
  tc.seed = 0;
  tc.threads = threads;

  auto run_model = [&](std::unique_ptr<OperatorModel> model, double factor,
                       const char* label) {
    RngState init_rng(tc.seed, 1000);
    ParamVector theta0 = model->init_params(init_rng);
    std::vector<GridFunction> init_out(test_set.size());
    for (std::size_t s = 0; s < test_set.size(); ++s)
      init_out[s] = model->apply(theta0, test_set.inputs[s]);
    const double init_error = l2_error_mc(init_out, test_set.targets);

    TrainResult r = train(*model, train_set, val_set, tc);
    std::vector<GridFunction> outs(test_set.size());
    for (std::size_t s = 0; s < test_set.size(); ++s)
      outs[s] = model->apply(r.best.params, test_set.inputs[s]);
    const double trained_error = l2_error_mc(outs, test_set.targets);

    std::printf("  [c12] %s: init %.4g -> trained %.4g (identity %.4g)\n", label,
                init_error, trained_error, identity_error);
    std::fflush(stdout);
    c.require(trained_error * factor <= init_error,
              std::string(label) + " improvement factor below " + std::to_string(factor));
    c.require(trained_error < identity_error,
              std::string(label) + " does not beat the identity baseline");
  };

  {
    FnoSpec fno;
    fno.dim = 1;
    fno.grid_n = 64;
    fno.channels = 8;
    fno.length = 2;
    fno.modes = 12;
    fno.lift_hidden = {16};
    fno.proj_hidden = {16};
    fno.real_constrained = true;
    fno.activation = Activation::gelu;
    run_model(make_model(fno), 10.0, "FNO");
  }
  {
    PeriodicCnnSpec pcnn;
    pcnn.extents = {64};
    pcnn.channels = {1, 8, 8, 1};
    pcnn.half_widths = {{6}, {6}, {6}};
    pcnn.activation = Activation::gelu;
    run_model(make_model(pcnn), 3.0, "Periodic-CNN");
  }
  {
    DeepOnetSpec onet;
    onet.sensors = DeepOnetSpec::grid_sensors({64}, {2.0 * M_PI});
    onet.coord_dim = 1;
    onet.latent = 32;
    onet.branch_hidden = {64};
    onet.trunk_hidden = {64};
    onet.activation = Activation::gelu;
    run_model(make_model(onet), 3.0, "DeepONet");
  }

  detail = c.detail;
  return c.ok;
}

// ---------------------------------------------------------------------------
// 13. Determinism and persistence through the CLI bench pipeline
// ---------------------------------------------------------------------------

bool criterion_determinism(std::string& detail) {
#ifndef DEEPPDE_CLI_PATH
  detail = "CLI path not configured";
  return false;
#else
  Check c;
  const fs::path cli = DEEPPDE_CLI_PATH;
  if (!fs::exists(cli)) {
    detail = "CLI binary missing";
    return false;
  }
  const fs::path base = fs::temp_directory_path() / "deeppde_acceptance_bench";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path cfg_path = base / "bench.json";
  write_text_file(cfg_path.string(),
                  "{\"problem\":\"burgers\",\"counts\":{\"train\":8,\"validation\":4,"
                  "\"test\":4},\"solver\":{\"space_steps\":64,\"time_steps\":50},"
                  "\"model_resolution\":32,"
                  "\"models\":[{\"type\":\"fno\",\"channels\":2,\"length\":1,\"modes\":4}],"
                  "\"train\":{\"batch_size\":4,\"max_steps\":20,"
                  "\"steps_between_validation\":10},"
                  "\"baselines\":[{\"method\":\"identity\"}]}");

  auto run_once = [&](const std::string& outdir) {
    const std::string cmd = "\"" + cli.string() + "\" bench --config \"" +
                            cfg_path.string() + "\" --out \"" + outdir +
                            "\" --seed 11 --threads 2 > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const std::string out1 = (base / "run1").string(), out2 = (base / "run2").string();
  c.require(run_once(out1), "first bench invocation failed");
  c.require(run_once(out2), "second bench invocation failed");

  for (const char* name :
       {"train.ds", "validation.ds", "test.ds", "FNO.ck", "results.csv"}) {
    const std::string a = read_text_file((fs::path(out1) / name).string());
    const std::string b = read_text_file((fs::path(out2) / name).string());
    c.require(!a.empty() && a == b, std::string(name) + " differs between runs");
  }
  // the CSV conforms to the declared schema
  try {
    auto rows = results_from_csv(read_text_file((fs::path(out1) / "results.csv").string()));
    c.require(rows.size() == 2, "results.csv row count");
  } catch (const std::exception& e) {
    c.require(false, std::string("csv schema: ") + e.what());
  }
  detail = c.detail;
  return c.ok;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* title;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient integrity across loss families", criterion_gradient_integrity},
      {2, "interpolation grid exactness", criterion_interpolation},
      {3, "DFT round trip, Parseval, FFT vs naive", criterion_dft},
      {4, "convolution algebra", criterion_conv},
      {5, "solver correctness", criterion_solvers},
      {6, "conservation and equilibria", criterion_conservation},
      {7, "GRF per-mode variances", criterion_grf},
      {8, "conditional-expectation reformulation", criterion_cond_exp},
      {9, "deep Kolmogorov desk-scale training", criterion_kolmogorov_training},
      {10, "BSDE terminal-loss consistency", criterion_bsde},
      {11, "PINN Laplace desk-scale training", criterion_pinn_training},
      {12, "operator learning end to end (Burgers)", criterion_operator_end_to_end},
      {13, "determinism and persistence", criterion_determinism},
  };

  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));

  int failures = 0;
  for (const Criterion& cr : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), cr.id) == selected.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = cr.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", cr.id,
                cr.title, secs, detail.empty() ? "" : " - ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
