#include "deeppde/residual.hpp"

#include <cmath>

#include "deeppde/fourier.hpp"

namespace deeppde {

Var PointProbe::laplacian_from(Tape& tape, int first_axis) const {
  Var acc = tape.constant(0.0);
  for (std::size_t i = static_cast<std::size_t>(first_axis); i < second.size(); ++i)
    acc = acc + second[i];
  return acc;
}

PointProbe probe_scalar_mlp(Tape& tape, const MlpArchitecture& arch,
                            std::span<const Var> theta, std::span<const double> point) {
  if (arch.output_dim() != 1) throw ConfigError("probe: scalar-output networks only");
  const int d = static_cast<int>(point.size());
  PointProbe p;
  p.grad.resize(d);
  p.second.resize(d);
  std::vector<Dual2<Var>> in(d);
  std::vector<Dual2<Var>> out;
  for (int axis = 0; axis < d; ++axis) {
    for (int i = 0; i < d; ++i)
      in[i] = {tape.constant(point[i]), tape.constant(i == axis ? 1.0 : 0.0),
               tape.constant(0.0)};
    mlp_eval<Var, Dual2<Var>>(arch, theta, std::span<const Dual2<Var>>(in), out);
    if (axis == 0) p.value = out[0].v;
    p.grad[axis] = out[0].d;
    p.second[axis] = out[0].dd;
  }
  return p;
}

PointProbePlain probe_scalar_mlp_plain(const MlpArchitecture& arch,
                                       std::span<const double> theta,
                                       std::span<const double> point) {
  if (arch.output_dim() != 1) throw ConfigError("probe: scalar-output networks only");
  const int d = static_cast<int>(point.size());
  PointProbePlain p;
  p.grad.resize(d);
  p.second.resize(d);
  std::vector<Dual2<double>> in(d);
  std::vector<Dual2<double>> out;
  for (int axis = 0; axis < d; ++axis) {
    for (int i = 0; i < d; ++i) in[i] = {point[i], i == axis ? 1.0 : 0.0, 0.0};
    mlp_eval<double, Dual2<double>>(arch, theta, std::span<const Dual2<double>>(in), out);
    if (axis == 0) p.value = out[0].v;
    p.grad[axis] = out[0].d;
    p.second[axis] = out[0].dd;
  }
  return p;
}

// ---------------------------------------------------------------------------
// PINN: boundary value problems
// ---------------------------------------------------------------------------

BvpBatch BvpProblem::sample(int interior_count, int boundary_count, RngState& rng) const {
  BvpBatch b;
  b.interior.reserve(interior_count);
  b.boundary.reserve(boundary_count);
  for (int i = 0; i < interior_count; ++i) b.interior.push_back(interior_sampler(rng));
  for (int i = 0; i < boundary_count; ++i) b.boundary.push_back(boundary_sampler(rng));
  return b;
}

BvpProblem BvpProblem::laplace_box(
    int dim, std::function<double(std::span<const double>)> boundary_data) {
  BvpProblem p;
  p.dim = dim;
  p.interior_sampler = [dim](RngState& rng) {
    std::vector<double> x(dim);
    for (double& v : x) v = rng.next_unit();
    return x;
  };
  // unit box: all 2d faces carry equal measure
  p.boundary_sampler = [dim](RngState& rng) {
    std::vector<double> y(dim);
    for (double& v : y) v = rng.next_unit();
    const int axis = static_cast<int>(rng.next_u64() % dim);
    const bool high = (rng.next_u64() & 1) != 0;
    y[axis] = high ? 1.0 : 0.0;
    return y;
  };
  p.interior_residual = [](Tape& tape, const PointProbe& probe, std::span<const double>) {
    return probe.laplacian_from(tape, 0);
  };
  p.boundary_residual = [f = std::move(boundary_data)](Tape&, Var value,
                                                       std::span<const double> y) {
    return value - f(y);
  };
  return p;
}

Var pinn_bvp_loss_traced(Tape& tape, const BvpProblem& problem, const MlpArchitecture& net,
                         std::span<const Var> theta, const BvpBatch& batch) {
  if (batch.interior.empty() || batch.boundary.empty())
    throw ConfigError("pinn_bvp_loss: empty batch");
  if (net.input_dim() != problem.dim)
    throw ConfigError("pinn_bvp_loss: network input dimension mismatch");
  if (!is_smooth(net.activation) || net.activation == Activation::relu)
    throw ConfigError("pinn_bvp_loss: residual needs a twice differentiable activation");

  Var acc = tape.constant(0.0);
  for (const auto& x : batch.interior) {
    PointProbe probe = probe_scalar_mlp(tape, net, theta, x);
    acc = acc + sqr(problem.interior_residual(tape, probe, x)) *
                    (1.0 / static_cast<double>(batch.interior.size()));
  }
  for (const auto& y : batch.boundary) {
    Var value = mlp_eval_traced(tape, net, theta, y)[0];
    acc = acc + sqr(problem.boundary_residual(tape, value, y)) *
                    (1.0 / static_cast<double>(batch.boundary.size()));
  }
  return acc;
}

double pinn_bvp_loss(const BvpProblem& problem, const MlpArchitecture& net,
                     std::span<const double> theta, const BvpBatch& batch) {
  Tape tape;
  std::vector<Var> tv(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.constant(theta[i]);
  return pinn_bvp_loss_traced(tape, problem, net, tv, batch).value();
}

// ---------------------------------------------------------------------------
// PINN: time-dependent initial value problems
// ---------------------------------------------------------------------------

IvpProblem IvpProblem::heat_dirichlet(int dim, double diffusion, double horizon) {
  IvpProblem p;
  p.dim = dim;
  p.diffusion = diffusion;
  p.horizon = horizon;
  p.initial = [dim](std::span<const double> x) {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= std::sin(M_PI * x[i]);
    return v;
  };
  return p;
}

IvpBatch IvpProblem::sample(int interior_count, int boundary_count, RngState& rng) const {
  IvpBatch b;
  for (int i = 0; i < interior_count; ++i) {
    b.t.push_back(rng.next_uniform(0.0, horizon));
    std::vector<double> x(dim);
    for (double& v : x) v = rng.next_unit();
    b.x.push_back(std::move(x));
  }
  for (int i = 0; i < boundary_count; ++i) {
    b.tb.push_back(rng.next_uniform(0.0, horizon));
    std::vector<double> y(dim);
    for (double& v : y) v = rng.next_unit();
    const int axis = static_cast<int>(rng.next_u64() % dim);
    y[axis] = (rng.next_u64() & 1) ? 1.0 : 0.0;
    b.y.push_back(std::move(y));
  }
  return b;
}

Var pinn_ivp_loss_traced(Tape& tape, const IvpProblem& problem, const MlpArchitecture& net,
                         std::span<const Var> theta, const IvpBatch& batch) {
  if (batch.t.empty() || batch.tb.empty()) throw ConfigError("pinn_ivp_loss: empty batch");
  if (net.input_dim() != problem.dim + 1)
    throw ConfigError("pinn_ivp_loss: network must take (t, x)");
  if (!is_smooth(net.activation) || net.activation == Activation::relu)
    throw ConfigError("pinn_ivp_loss: residual needs a twice differentiable activation");

  Var acc = tape.constant(0.0);
  const double w_int = 1.0 / static_cast<double>(batch.t.size());
  std::vector<double> point(problem.dim + 1);
  for (std::size_t s = 0; s < batch.t.size(); ++s) {
    point[0] = batch.t[s];
    std::copy(batch.x[s].begin(), batch.x[s].end(), point.begin() + 1);
    PointProbe probe = probe_scalar_mlp(tape, net, theta, point);
    Var residual = probe.grad[0] - probe.laplacian_from(tape, 1) * problem.diffusion;
    acc = acc + sqr(residual) * w_int;

    // initial term on the same spatial sample
    point[0] = 0.0;
    Var v0 = mlp_eval_traced(tape, net, theta, point)[0];
    acc = acc + sqr(v0 - problem.initial(batch.x[s])) * w_int;
  }
  const double w_bnd = 1.0 / static_cast<double>(batch.tb.size());
  for (std::size_t s = 0; s < batch.tb.size(); ++s) {
    point[0] = batch.tb[s];
    std::copy(batch.y[s].begin(), batch.y[s].end(), point.begin() + 1);
    Var vb = mlp_eval_traced(tape, net, theta, point)[0];
    acc = acc + sqr(vb) * w_bnd;
  }
  return acc;
}

double pinn_ivp_loss(const IvpProblem& problem, const MlpArchitecture& net,
                     std::span<const double> theta, const IvpBatch& batch) {
  Tape tape;
  std::vector<Var> tv(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.constant(theta[i]);
  return pinn_ivp_loss_traced(tape, problem, net, tv, batch).value();
}

// ---------------------------------------------------------------------------
// Stefan free boundary
// ---------------------------------------------------------------------------

StefanProblem StefanProblem::zero_data(double horizon, double psi) {
  StefanProblem p;
  p.horizon = horizon;
  p.psi = psi;
  p.flux = [](double) { return 0.0; };
  p.front_value = [](double) { return 0.0; };
  p.front_flux = [](double) { return 0.0; };
  p.initial = [](double) { return 0.0; };
  return p;
}

StefanBatch sample_stefan_batch(const StefanProblem& problem, const StefanNets& nets,
                                std::span<const double> theta, int count, RngState& rng) {
  const std::size_t d1 = nets.heat_net.param_count();
  auto front = [&](double t) {
    return mlp_apply(nets.front_net, theta.subspan(d1), std::vector<double>{t})[0];
  };
  StefanBatch b;
  const double x_max = 2.0 * problem.psi;
  int rejections = 0;
  while (static_cast<int>(b.t.size()) < count) {
    const double t = rng.next_uniform(0.0, problem.horizon);
    const double x = rng.next_uniform(0.0, x_max);
    if (x < front(t)) {
      b.t.push_back(t);
      b.x.push_back(x);
      rejections = 0;
    } else if (++rejections > 1000) {
      // degenerate current front: fall back to a sliver above zero
      b.t.push_back(t);
      b.x.push_back(rng.next_unit() * 1e-3 * problem.psi);
      rejections = 0;
    }
  }
  return b;
}

Var stefan_loss_traced(Tape& tape, const StefanProblem& problem, const StefanNets& nets,
                       std::span<const Var> theta, const StefanBatch& batch) {
  if (batch.t.empty()) throw ConfigError("stefan_loss: empty batch");
  if (nets.heat_net.input_dim() != 2 || nets.heat_net.output_dim() != 1 ||
      nets.front_net.input_dim() != 1 || nets.front_net.output_dim() != 1)
    throw ConfigError("stefan_loss: nets must be (t,x)->R and t->R");
  const std::size_t d1 = nets.heat_net.param_count();
  std::span<const Var> th1 = theta.subspan(0, d1);
  std::span<const Var> th2 = theta.subspan(d1);

  const double w = 1.0 / static_cast<double>(batch.t.size());
  Var acc = tape.constant(0.0);
  std::vector<Dual1<Var>> din(2);
  std::vector<Dual1<Var>> dout;
  for (std::size_t s = 0; s < batch.t.size(); ++s) {
    const double t = batch.t[s];
    const double x = batch.x[s];

    // heat residual  d u1/dt - d^2 u1/dx^2  at (t, x)
    PointProbe probe = probe_scalar_mlp(tape, nets.heat_net, th1,
                                        std::vector<double>{t, x});
    acc = acc + sqr(probe.grad[0] - probe.second[1]) * w;

    // flux at the fixed wall x = 0
    PointProbe wall = probe_scalar_mlp(tape, nets.heat_net, th1,
                                       std::vector<double>{t, 0.0});
    acc = acc + sqr(wall.grad[1] - problem.flux(t)) * w;

    // value and flux at the moving front x = u2(t): the front position is a
    // tape variable, so the x-dual carries it as the evaluation point
    Var front_t = mlp_eval_traced(tape, nets.front_net, th2, std::vector<double>{t})[0];
    din[0] = {tape.constant(t), tape.constant(0.0)};
    din[1] = {front_t, tape.constant(1.0)};
    mlp_eval<Var, Dual1<Var>>(nets.heat_net, th1, std::span<const Dual1<Var>>(din), dout);
    acc = acc + sqr(dout[0].v - problem.front_value(t)) * w;
    acc = acc + sqr(dout[0].d - problem.front_flux(t)) * w;

    // initial value of u1 on the sampled x
    Var u10 = mlp_eval_traced(tape, nets.heat_net, th1, std::vector<double>{0.0, x})[0];
    acc = acc + sqr(u10 - problem.initial(x)) * w;

    // initial front position
    Var u20 = mlp_eval_traced(tape, nets.front_net, th2, std::vector<double>{0.0})[0];
    acc = acc + sqr(u20 - problem.psi) * w;
  }
  return acc;
}

double stefan_loss(const StefanProblem& problem, const StefanNets& nets,
                   std::span<const double> theta, const StefanBatch& batch) {
  Tape tape;
  std::vector<Var> tv(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.constant(theta[i]);
  return stefan_loss_traced(tape, problem, nets, tv, batch).value();
}

// ---------------------------------------------------------------------------
// PINO risks
// ---------------------------------------------------------------------------

void PinoConfig::validate() const {
  if (weight_data < 0.0 || weight_pde < 0.0 || weight_boundary < 0.0 || weight_init < 0.0)
    throw ConfigError("pino: weights must be nonnegative");
  if (weight_data == 0.0 && weight_pde == 0.0 && weight_boundary == 0.0 &&
      weight_init == 0.0)
    throw ConfigError("pino: all weights are zero");
}

namespace {

std::vector<double> circle_lambdas(int n, double length) {
  std::vector<double> lam(n);
  for (int k = 0; k < n; ++k) {
    const int sk = k <= n / 2 ? k : k - n;
    const double w = 2.0 * M_PI * sk / length;
    lam[k] = w * w;
  }
  return lam;
}

}  // namespace

GridFunction PinoEllipticInstance::solve(const GridFunction& input) const {
  if (input.dims() != 1 || input.extents[0] != grid)
    throw ConfigError("pino elliptic: input must live on the instance grid");
  const int n = grid;
  std::vector<std::complex<double>> data(n);
  for (int i = 0; i < n; ++i) data[i] = {input.values[i], 0.0};
  fft_nd(data, input.extents, -1);
  const auto lam = circle_lambdas(n, length);
  for (int k = 0; k < n; ++k) data[k] /= static_cast<double>(n) * (1.0 + lam[k]);
  fft_nd(data, input.extents, +1);
  GridFunction out(input.extents, input.lengths);
  for (int i = 0; i < n; ++i) out.values[i] = data[i].real();
  return out;
}

namespace {

// (-d^2/dx^2) of grid values by spectral differentiation, plain and traced.
std::vector<double> spectral_neg_second(const GridFunction& g) {
  const int n = g.extents[0];
  std::vector<std::complex<double>> data(n);
  for (int i = 0; i < n; ++i) data[i] = {g.values[i], 0.0};
  fft_nd(data, g.extents, -1);
  const auto lam = circle_lambdas(n, g.lengths[0]);
  for (int k = 0; k < n; ++k) data[k] *= lam[k] / static_cast<double>(n);
  fft_nd(data, g.extents, +1);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = data[i].real();
  return out;
}

std::vector<Var> spectral_neg_second_traced(Tape& tape, std::span<const Var> values,
                                            const std::vector<int>& extents, double length) {
  const int n = extents[0];
  std::vector<Cplx<Var>> data(n);
  for (int i = 0; i < n; ++i) data[i] = {values[i], tape.constant(0.0)};
  fft_nd(data, extents, -1);
  const auto lam = circle_lambdas(n, length);
  for (int k = 0; k < n; ++k) {
    const double s = lam[k] / static_cast<double>(n);
    data[k] = {data[k].re * s, data[k].im * s};
  }
  fft_nd(data, extents, +1);
  std::vector<Var> out(n);
  for (int i = 0; i < n; ++i) out[i] = data[i].re;
  return out;
}

}  // namespace

double pino_bvp_risk(const PinoConfig& config, const PinoEllipticInstance& instance,
                     const std::function<GridFunction(const GridFunction&)>& model,
                     std::span<const GridFunction> inputs,
                     std::span<const GridFunction> references, const PinoBvpBatch& batch) {
  config.validate();
  if (inputs.size() != references.size())
    throw ConfigError("pino_bvp_risk: inputs/references mismatch");

  // distinct samples get the model applied once
  std::vector<GridFunction> outputs(inputs.size());
  std::vector<char> have(inputs.size(), 0);
  auto output_of = [&](int s) -> const GridFunction& {
    if (!have[s]) {
      outputs[s] = model(inputs[s]);
      have[s] = 1;
    }
    return outputs[s];
  };

  double risk = 0.0;
  if (config.weight_data > 0.0 && !batch.data_sample.empty()) {
    double acc = 0.0;
    for (std::size_t m = 0; m < batch.data_sample.size(); ++m) {
      const int s = batch.data_sample[m];
      const double diff =
          output_of(s).values[batch.data_node[m]] - references[s].values[batch.data_node[m]];
      acc += diff * diff;
    }
    risk += config.weight_data * acc / static_cast<double>(batch.data_sample.size());
  }
  if (config.weight_pde > 0.0 && !batch.pde_sample.empty()) {
    double acc = 0.0;
    std::vector<std::vector<double>> neg_second(inputs.size());
    for (std::size_t m = 0; m < batch.pde_sample.size(); ++m) {
      const int s = batch.pde_sample[m];
      if (neg_second[s].empty()) neg_second[s] = spectral_neg_second(output_of(s));
      const std::size_t node = batch.pde_node[m];
      const double residual = neg_second[s][node] + output_of(s).values[node] -
                              inputs[s].values[node];
      acc += residual * residual;
    }
    risk += config.weight_pde * acc / static_cast<double>(batch.pde_sample.size());
  }
  return risk;
}

Var pino_bvp_risk_traced(Tape& tape, const PinoConfig& config,
                         const PinoEllipticInstance& instance, const OperatorModel& model,
                         std::span<const Var> theta, std::span<const GridFunction> inputs,
                         std::span<const GridFunction> references, const PinoBvpBatch& batch) {
  config.validate();
  (void)instance;
  std::vector<std::vector<Var>> outputs(inputs.size());
  auto output_of = [&](int s) -> const std::vector<Var>& {
    if (outputs[s].empty()) outputs[s] = model.apply_traced(tape, theta, inputs[s]);
    return outputs[s];
  };

  Var risk = tape.constant(0.0);
  if (config.weight_data > 0.0 && !batch.data_sample.empty()) {
    Var acc = tape.constant(0.0);
    for (std::size_t m = 0; m < batch.data_sample.size(); ++m) {
      const int s = batch.data_sample[m];
      acc = acc + sqr(output_of(s)[batch.data_node[m]] -
                      references[s].values[batch.data_node[m]]);
    }
    risk = risk + acc * (config.weight_data / static_cast<double>(batch.data_sample.size()));
  }
  if (config.weight_pde > 0.0 && !batch.pde_sample.empty()) {
    Var acc = tape.constant(0.0);
    std::vector<std::vector<Var>> neg_second(inputs.size());
    for (std::size_t m = 0; m < batch.pde_sample.size(); ++m) {
      const int s = batch.pde_sample[m];
      if (neg_second[s].empty())
        neg_second[s] = spectral_neg_second_traced(tape, output_of(s), inputs[s].extents,
                                                   inputs[s].lengths[0]);
      const std::size_t node = batch.pde_node[m];
      acc = acc + sqr(neg_second[s][node] + output_of(s)[node] - inputs[s].values[node]);
    }
    risk = risk + acc * (config.weight_pde / static_cast<double>(batch.pde_sample.size()));
  }
  return risk;
}

// ---------------------------------------------------------------------------
// PINO time-dependent instance (DeepONet on Dirichlet heat)
// ---------------------------------------------------------------------------

double PinoHeatInstance::Input::value(double x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k)
    acc += coefficients[k] * std::sin(M_PI * static_cast<double>(k + 1) * x);
  return acc;
}

double PinoHeatInstance::exact(const Input& input, double t, double x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < input.coefficients.size(); ++k) {
    const double km = M_PI * static_cast<double>(k + 1);
    acc += input.coefficients[k] * std::exp(-diffusion * km * km * t) * std::sin(km * x);
  }
  return acc;
}

namespace {

std::vector<double> deeponet_sensor_values(const DeepOnetSpec& spec,
                                           const PinoHeatInstance::Input& input) {
  std::vector<double> vals(spec.sensors.size());
  for (std::size_t i = 0; i < spec.sensors.size(); ++i)
    vals[i] = input.value(spec.sensors[i][0]);
  return vals;
}

}  // namespace

double pino_ivp_risk(const PinoConfig& config, const PinoHeatInstance& instance,
                     const DeepOnetSpec& model, std::span<const double> theta,
                     std::span<const PinoHeatInstance::Input> inputs,
                     const PinoIvpBatch& batch) {
  config.validate();
  const MlpArchitecture ba = model.branch_arch();
  const MlpArchitecture ta = model.trunk_arch();
  const std::size_t bd = ba.param_count();
  if (model.coord_dim != 2) throw ConfigError("pino_ivp_risk: trunk must take (t, x)");

  std::vector<std::vector<double>> branch(inputs.size());
  auto branch_of = [&](int s) -> const std::vector<double>& {
    if (branch[s].empty())
      branch[s] = mlp_apply(ba, theta.subspan(0, bd), deeponet_sensor_values(model, inputs[s]));
    return branch[s];
  };
  auto value_at = [&](int s, double t, double x) {
    const auto trunk = mlp_apply(ta, theta.subspan(bd), std::vector<double>{t, x});
    const auto& b = branch_of(s);
    double acc = 0.0;
    for (int i = 0; i < model.latent; ++i) acc += b[i] * trunk[i];
    return acc;
  };

  double risk = 0.0;
  if (config.weight_data > 0.0 && !batch.data_sample.empty()) {
    double acc = 0.0;
    for (std::size_t m = 0; m < batch.data_sample.size(); ++m) {
      const int s = batch.data_sample[m];
      const double diff = value_at(s, batch.data_t[m], batch.data_x[m]) -
                          instance.exact(inputs[s], batch.data_t[m], batch.data_x[m]);
      acc += diff * diff;
    }
    risk += config.weight_data * acc / static_cast<double>(batch.data_sample.size());
  }
  if (config.weight_pde > 0.0 && !batch.pde_sample.empty()) {
    double acc = 0.0;
    for (std::size_t m = 0; m < batch.pde_sample.size(); ++m) {
      const int s = batch.pde_sample[m];
      // residual through the trunk: sum_i b_i (dT_i/dt - c d2T_i/dx2)
      PointProbePlain probe;
      const auto& b = branch_of(s);
      double residual = 0.0;
      {
        // one dual pass per axis over the full trunk output
        std::vector<Dual2<double>> in(2), out;
        for (int axis = 0; axis < 2; ++axis) {
          in[0] = {batch.pde_t[m], axis == 0 ? 1.0 : 0.0, 0.0};
          in[1] = {batch.pde_x[m], axis == 1 ? 1.0 : 0.0, 0.0};
          mlp_eval<double, Dual2<double>>(ta, theta.subspan(bd),
                                          std::span<const Dual2<double>>(in), out);
          if (axis == 0)
            for (int i = 0; i < model.latent; ++i) residual += b[i] * out[i].d;
          else
            for (int i = 0; i < model.latent; ++i)
              residual -= instance.diffusion * b[i] * out[i].dd;
        }
      }
      (void)probe;
      acc += residual * residual;
    }
    risk += config.weight_pde * acc / static_cast<double>(batch.pde_sample.size());
  }
  if (config.weight_boundary > 0.0 && !batch.boundary_sample.empty()) {
    double acc = 0.0;
    for (std::size_t m = 0; m < batch.boundary_sample.size(); ++m) {
      const double v =
          value_at(batch.boundary_sample[m], batch.boundary_t[m], batch.boundary_y[m]);
      acc += v * v;
    }
    risk += config.weight_boundary * acc / static_cast<double>(batch.boundary_sample.size());
  }
  if (config.weight_init > 0.0 && !batch.init_sample.empty()) {
    double acc = 0.0;
    for (std::size_t m = 0; m < batch.init_sample.size(); ++m) {
      const int s = batch.init_sample[m];
      const double diff =
          value_at(s, 0.0, batch.init_x[m]) - inputs[s].value(batch.init_x[m]);
      acc += diff * diff;
    }
    risk += config.weight_init * acc / static_cast<double>(batch.init_sample.size());
  }
  return risk;
}

Var pino_ivp_risk_traced(Tape& tape, const PinoConfig& config,
                         const PinoHeatInstance& instance, const DeepOnetSpec& model,
                         std::span<const Var> theta,
                         std::span<const PinoHeatInstance::Input> inputs,
                         const PinoIvpBatch& batch) {
  config.validate();
  const MlpArchitecture ba = model.branch_arch();
  const MlpArchitecture ta = model.trunk_arch();
  const std::size_t bd = ba.param_count();
  if (model.coord_dim != 2) throw ConfigError("pino_ivp_risk: trunk must take (t, x)");

  std::vector<std::vector<Var>> branch(inputs.size());
  auto branch_of = [&](int s) -> const std::vector<Var>& {
    if (branch[s].empty())
      branch[s] = mlp_eval_traced(tape, ba, theta.subspan(0, bd),
                                  deeponet_sensor_values(model, inputs[s]));
    return branch[s];
  };
  auto value_at = [&](int s, double t, double x) {
    const auto trunk = mlp_eval_traced(tape, ta, theta.subspan(bd), std::vector<double>{t, x});
    const auto& b = branch_of(s);
    Var acc = b[0] * trunk[0];
    for (int i = 1; i < model.latent; ++i) acc = acc + b[i] * trunk[i];
    return acc;
  };

  Var risk = tape.constant(0.0);
  if (config.weight_data > 0.0 && !batch.data_sample.empty()) {
    Var acc = tape.constant(0.0);
    for (std::size_t m = 0; m < batch.data_sample.size(); ++m) {
      const int s = batch.data_sample[m];
      acc = acc + sqr(value_at(s, batch.data_t[m], batch.data_x[m]) -
                      instance.exact(inputs[s], batch.data_t[m], batch.data_x[m]));
    }
    risk = risk + acc * (config.weight_data / static_cast<double>(batch.data_sample.size()));
  }
  if (config.weight_pde > 0.0 && !batch.pde_sample.empty()) {
    Var acc = tape.constant(0.0);
    std::vector<Dual2<Var>> in(2), out;
    for (std::size_t m = 0; m < batch.pde_sample.size(); ++m) {
      const int s = batch.pde_sample[m];
      const auto& b = branch_of(s);
      Var residual = tape.constant(0.0);
      for (int axis = 0; axis < 2; ++axis) {
        in[0] = {tape.constant(batch.pde_t[m]), tape.constant(axis == 0 ? 1.0 : 0.0),
                 tape.constant(0.0)};
        in[1] = {tape.constant(batch.pde_x[m]), tape.constant(axis == 1 ? 1.0 : 0.0),
                 tape.constant(0.0)};
        mlp_eval<Var, Dual2<Var>>(ta, theta.subspan(bd), std::span<const Dual2<Var>>(in),
                                  out);
        if (axis == 0)
          for (int i = 0; i < model.latent; ++i) residual = residual + b[i] * out[i].d;
        else
          for (int i = 0; i < model.latent; ++i)
            residual = residual - b[i] * out[i].dd * instance.diffusion;
      }
      acc = acc + sqr(residual);
    }
    risk = risk + acc * (config.weight_pde / static_cast<double>(batch.pde_sample.size()));
  }
  if (config.weight_boundary > 0.0 && !batch.boundary_sample.empty()) {
    Var acc = tape.constant(0.0);
    for (std::size_t m = 0; m < batch.boundary_sample.size(); ++m)
      acc = acc + sqr(value_at(batch.boundary_sample[m], batch.boundary_t[m],
                               batch.boundary_y[m]));
    risk = risk +
           acc * (config.weight_boundary / static_cast<double>(batch.boundary_sample.size()));
  }
  if (config.weight_init > 0.0 && !batch.init_sample.empty()) {
    Var acc = tape.constant(0.0);
    for (std::size_t m = 0; m < batch.init_sample.size(); ++m) {
      const int s = batch.init_sample[m];
      acc = acc + sqr(value_at(s, 0.0, batch.init_x[m]) - inputs[s].value(batch.init_x[m]));
    }
    risk = risk + acc * (config.weight_init / static_cast<double>(batch.init_sample.size()));
  }
  return risk;
}

}  // namespace deeppde
