#include "deeppde/stochastic.hpp"

#include <cmath>

namespace deeppde {

SdeSpec SdeSpec::heat(int dim, double rho, double horizon,
                      std::function<double(std::span<const double>)> terminal) {
  SdeSpec sde;
  sde.dim = dim;
  sde.horizon = horizon;
  sde.drift = [dim](double, std::span<const double>) {
    return std::vector<double>(dim, 0.0);
  };
  const double varrho = std::sqrt(2.0 * rho);
  sde.diffusion = [dim, varrho](double, std::span<const double>) {
    std::vector<double> s(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) s[static_cast<std::size_t>(i) * dim + i] = varrho;
    return s;
  };
  sde.generator = std::make_shared<ZeroGenerator>();
  sde.terminal = std::move(terminal);
  return sde;
}

BrownianPath BrownianPath::sample(int steps, int dim, double horizon, RngState& rng) {
  if (steps < 1) throw ConfigError("BrownianPath: need at least one step");
  BrownianPath p;
  p.dim = dim;
  p.dt = horizon / steps;
  p.increments.resize(static_cast<std::size_t>(steps) * dim);
  const double s = std::sqrt(p.dt);
  for (double& v : p.increments) v = s * rng.next_gaussian();
  return p;
}

std::vector<double> euler_maruyama(const SdeSpec& sde, std::span<const double> x0,
                                   const BrownianPath& path) {
  if (static_cast<int>(x0.size()) != sde.dim)
    throw ConfigError("euler_maruyama: initial state dimension mismatch");
  if (path.dim != sde.dim) throw ConfigError("euler_maruyama: path dimension mismatch");
  const int steps = path.steps();
  const int d = sde.dim;
  std::vector<double> traj(static_cast<std::size_t>(steps + 1) * d);
  std::copy(x0.begin(), x0.end(), traj.begin());
  std::vector<double> cur(x0.begin(), x0.end());
  for (int m = 0; m < steps; ++m) {
    const double t = m * path.dt;
    const auto mu = sde.drift(t, cur);
    const auto sig = sde.diffusion(t, cur);
    const auto db = path.increment(m);
    for (int i = 0; i < d; ++i) {
      double acc = cur[i] + mu[i] * path.dt;
      for (int j = 0; j < d; ++j) acc += sig[static_cast<std::size_t>(i) * d + j] * db[j];
      cur[i] = acc;
      if (!std::isfinite(cur[i]))
        throw NumericalError("euler_maruyama: non-finite state at step " + std::to_string(m));
    }
    std::copy(cur.begin(), cur.end(), traj.begin() + static_cast<std::size_t>(m + 1) * d);
  }
  return traj;
}

BsdeRollout bsde_rollout(const SdeSpec& sde, const InitialControl& v,
                         const GradientControl& grad_v, std::span<const double> x0,
                         const BrownianPath& path) {
  BsdeRollout out;
  out.x = euler_maruyama(sde, x0, path);
  const int steps = path.steps();
  const int d = sde.dim;
  out.y.resize(steps + 1);
  out.y[0] = v(x0);
  for (int m = 0; m < steps; ++m) {
    const double t = m * path.dt;
    std::span<const double> xm(out.x.data() + static_cast<std::size_t>(m) * d, d);
    const auto z = grad_v(t, xm);
    const auto db = path.increment(m);
    double y = out.y[m] - sde.generator->eval(t, xm, out.y[m], z) * path.dt;
    for (int j = 0; j < d; ++j) y += z[j] * db[j];
    if (!std::isfinite(y))
      throw NumericalError("bsde_rollout: non-finite Y at step " + std::to_string(m));
    out.y[m + 1] = y;
  }
  return out;
}

double bsde_terminal_loss(const SdeSpec& sde, const InitialControl& v,
                          const GradientControl& grad_v, std::span<const BsdeSample> batch) {
  if (batch.empty()) throw ConfigError("bsde_terminal_loss: empty batch");
  const int d = sde.dim;
  double acc = 0.0;
  for (const BsdeSample& s : batch) {
    BsdeRollout r = bsde_rollout(sde, v, grad_v, s.x0, s.path);
    std::span<const double> xT(r.x.data() + r.x.size() - d, d);
    const double diff = r.y.back() - sde.terminal(xT);
    acc += diff * diff;
  }
  return acc / static_cast<double>(batch.size());
}

void BsdeControls::validate(int dim) const {
  if (value_net.input_dim() != dim || value_net.output_dim() != 1)
    throw ConfigError("BsdeControls: value net must map R^d -> R");
  if (gradient_net.input_dim() != dim + 1 || gradient_net.output_dim() != dim)
    throw ConfigError("BsdeControls: gradient net must map [0,T] x R^d -> R^d");
}

double bsde_terminal_loss(const SdeSpec& sde, const BsdeControls& controls,
                          std::span<const double> theta, std::span<const BsdeSample> batch) {
  controls.validate(sde.dim);
  const std::size_t vd = controls.value_net.param_count();
  auto v = [&](std::span<const double> x) {
    return mlp_apply(controls.value_net, theta.subspan(0, vd), x)[0];
  };
  auto grad_v = [&](double t, std::span<const double> x) {
    std::vector<double> in(x.size() + 1);
    in[0] = t;
    std::copy(x.begin(), x.end(), in.begin() + 1);
    return mlp_apply(controls.gradient_net, theta.subspan(vd), in);
  };
  return bsde_terminal_loss(sde, v, grad_v, batch);
}

Var bsde_terminal_loss_traced(Tape& tape, const SdeSpec& sde, const BsdeControls& controls,
                              std::span<const Var> theta, std::span<const BsdeSample> batch) {
  if (batch.empty()) throw ConfigError("bsde_terminal_loss: empty batch");
  controls.validate(sde.dim);
  const std::size_t vd = controls.value_net.param_count();
  const int d = sde.dim;

  Var acc = tape.constant(0.0);
  for (const BsdeSample& s : batch) {
    const auto x = euler_maruyama(sde, s.x0, s.path);
    const int steps = s.path.steps();
    Var y = mlp_eval_traced(tape, controls.value_net, theta.subspan(0, vd), s.x0)[0];
    std::vector<double> in(static_cast<std::size_t>(d) + 1);
    for (int m = 0; m < steps; ++m) {
      const double t = m * s.path.dt;
      std::span<const double> xm(x.data() + static_cast<std::size_t>(m) * d, d);
      in[0] = t;
      std::copy(xm.begin(), xm.end(), in.begin() + 1);
      const auto z = mlp_eval_traced(tape, controls.gradient_net, theta.subspan(vd), in);
      Var f = sde.generator->eval(tape, t, xm, y, z);
      Var ynew = y - f * s.path.dt;
      const auto db = s.path.increment(m);
      for (int j = 0; j < d; ++j) ynew = ynew + z[j] * db[j];
      y = ynew;
    }
    std::span<const double> xT(x.data() + x.size() - d, d);
    acc = acc + sqr(y - sde.terminal(xT));
  }
  return acc * (1.0 / static_cast<double>(batch.size()));
}

// ---------------------------------------------------------------------------
// Deep Kolmogorov losses
// ---------------------------------------------------------------------------

KolmogorovBatch KolmogorovBatch::sample_terminal(int count, int dim, RngState& rng) {
  KolmogorovBatch b;
  b.dim = dim;
  b.xi = gauss_sample(rng, static_cast<std::size_t>(count) * dim);
  b.bnorm = gauss_sample(rng, static_cast<std::size_t>(count) * dim);
  return b;
}

KolmogorovBatch KolmogorovBatch::sample_full(int count, int dim, double horizon,
                                             RngState& rng) {
  KolmogorovBatch b = sample_terminal(count, dim, rng);
  b.tau = uniform_sample(rng, 0.0, horizon, static_cast<std::size_t>(count));
  return b;
}

namespace {

template <class VFn>
double kolmogorov_loss_impl(double varrho, bool with_time, const PointFunction& phi,
                            const VFn& v, const KolmogorovBatch& batch) {
  const std::size_t count = batch.size();
  if (count == 0) throw ConfigError("kolmogorov loss: empty batch");
  const int d = batch.dim;
  std::vector<double> shifted(d);
  double acc = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    std::span<const double> xi(batch.xi.data() + s * d, d);
    std::span<const double> bn(batch.bnorm.data() + s * d, d);
    const double scale = with_time ? varrho * std::sqrt(batch.tau[s]) : varrho;
    for (int i = 0; i < d; ++i) shifted[i] = xi[i] + scale * bn[i];
    const double target = phi(shifted);
    const double diff = target - v(s, xi);
    acc += diff * diff;
  }
  return acc / static_cast<double>(count);
}

}  // namespace

double kolmogorov_terminal_loss(const KolmogorovSpec& spec, const PointFunction& phi,
                                const PointFunction& v, const KolmogorovBatch& batch) {
  return kolmogorov_loss_impl(
      spec.varrho_terminal(), false, phi,
      [&](std::size_t, std::span<const double> xi) { return v(xi); }, batch);
}

double kolmogorov_terminal_loss(const KolmogorovSpec& spec, const PointFunction& phi,
                                const MlpArchitecture& net, std::span<const double> theta,
                                const KolmogorovBatch& batch) {
  return kolmogorov_loss_impl(
      spec.varrho_terminal(), false, phi,
      [&](std::size_t, std::span<const double> xi) { return mlp_apply(net, theta, xi)[0]; },
      batch);
}

double kolmogorov_full_loss(const KolmogorovSpec& spec, const PointFunction& phi,
                            const TimePointFunction& v, const KolmogorovBatch& batch) {
  if (batch.tau.size() != batch.size())
    throw ConfigError("kolmogorov_full_loss: batch lacks tau samples");
  return kolmogorov_loss_impl(
      spec.varrho_full(), true, phi,
      [&](std::size_t s, std::span<const double> xi) { return v(batch.tau[s], xi); }, batch);
}

double kolmogorov_full_loss(const KolmogorovSpec& spec, const PointFunction& phi,
                            const MlpArchitecture& net, std::span<const double> theta,
                            const KolmogorovBatch& batch) {
  std::vector<double> in(static_cast<std::size_t>(batch.dim) + 1);
  return kolmogorov_loss_impl(
      spec.varrho_full(), true, phi,
      [&](std::size_t s, std::span<const double> xi) {
        in[0] = batch.tau[s];
        std::copy(xi.begin(), xi.end(), in.begin() + 1);
        return mlp_apply(net, theta, in)[0];
      },
      batch);
}

namespace {

Var kolmogorov_loss_traced_impl(Tape& tape, double varrho, bool with_time,
                                const PointFunction& phi, const MlpArchitecture& net,
                                std::span<const Var> theta, const KolmogorovBatch& batch) {
  const std::size_t count = batch.size();
  if (count == 0) throw ConfigError("kolmogorov loss: empty batch");
  const int d = batch.dim;
  std::vector<double> shifted(d);
  std::vector<double> in(with_time ? d + 1 : d);
  Var acc = tape.constant(0.0);
  for (std::size_t s = 0; s < count; ++s) {
    std::span<const double> xi(batch.xi.data() + s * d, d);
    std::span<const double> bn(batch.bnorm.data() + s * d, d);
    const double scale = with_time ? varrho * std::sqrt(batch.tau[s]) : varrho;
    for (int i = 0; i < d; ++i) shifted[i] = xi[i] + scale * bn[i];
    const double target = phi(shifted);
    if (with_time) {
      in[0] = batch.tau[s];
      std::copy(xi.begin(), xi.end(), in.begin() + 1);
    } else {
      std::copy(xi.begin(), xi.end(), in.begin());
    }
    Var out = mlp_eval_traced(tape, net, theta, in)[0];
    acc = acc + sqr(out - target);
  }
  return acc * (1.0 / static_cast<double>(count));
}

}  // namespace

Var kolmogorov_terminal_loss_traced(Tape& tape, const KolmogorovSpec& spec,
                                    const PointFunction& phi, const MlpArchitecture& net,
                                    std::span<const Var> theta, const KolmogorovBatch& batch) {
  return kolmogorov_loss_traced_impl(tape, spec.varrho_terminal(), false, phi, net, theta,
                                     batch);
}

Var kolmogorov_full_loss_traced(Tape& tape, const KolmogorovSpec& spec,
                                const PointFunction& phi, const MlpArchitecture& net,
                                std::span<const Var> theta, const KolmogorovBatch& batch) {
  if (batch.tau.size() != batch.size())
    throw ConfigError("kolmogorov_full_loss: batch lacks tau samples");
  return kolmogorov_loss_traced_impl(tape, spec.varrho_full(), true, phi, net, theta, batch);
}

// ---------------------------------------------------------------------------
// Discrete conditional expectations
// ---------------------------------------------------------------------------

void DiscreteProbSpace::validate() const {
  if (probabilities.empty() || probabilities.size() != block_of.size())
    throw ConfigError("DiscreteProbSpace: outcomes/blocks mismatch");
  double total = 0.0;
  for (double p : probabilities) {
    if (p < 0.0) throw ConfigError("DiscreteProbSpace: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("DiscreteProbSpace: probabilities must sum to 1");
  const int nb = block_count();
  std::vector<char> seen(nb, 0);
  for (int b : block_of) {
    if (b < 0 || b >= nb) throw ConfigError("DiscreteProbSpace: bad block index");
    seen[b] = 1;
  }
  for (char s : seen)
    if (!s) throw ConfigError("DiscreteProbSpace: empty partition block");
}

int DiscreteProbSpace::block_count() const {
  int nb = 0;
  for (int b : block_of) nb = std::max(nb, b + 1);
  return nb;
}

std::vector<double> cond_exp_oracle(const DiscreteProbSpace& space,
                                    std::span<const double> x) {
  space.validate();
  if (x.size() != space.probabilities.size())
    throw ConfigError("cond_exp_oracle: outcome count mismatch");
  const int nb = space.block_count();
  std::vector<double> mass(nb, 0.0), mean(nb, 0.0);
  for (std::size_t w = 0; w < x.size(); ++w) {
    mass[space.block_of[w]] += space.probabilities[w];
    mean[space.block_of[w]] += space.probabilities[w] * x[w];
  }
  for (int b = 0; b < nb; ++b) {
    // blocks of probability zero keep conditional value 0 by convention
    if (mass[b] > 0.0) mean[b] /= mass[b];
  }
  std::vector<double> out(x.size());
  for (std::size_t w = 0; w < x.size(); ++w) out[w] = mean[space.block_of[w]];
  return out;
}

PythagorasResult pythagoras_check(const DiscreteProbSpace& space,
                                  std::span<const double> x, std::span<const double> y) {
  space.validate();
  if (x.size() != space.probabilities.size() || y.size() != x.size())
    throw ConfigError("pythagoras_check: outcome count mismatch");
  // Y must be measurable w.r.t. the partition (blockwise constant)
  const int nb = space.block_count();
  std::vector<double> rep(nb, 0.0);
  std::vector<char> set(nb, 0);
  for (std::size_t w = 0; w < y.size(); ++w) {
    const int b = space.block_of[w];
    if (!set[b]) {
      rep[b] = y[w];
      set[b] = 1;
    } else if (y[w] != rep[b]) {
      throw ConfigError("pythagoras_check: Y is not blockwise constant");
    }
  }
  const auto ce = cond_exp_oracle(space, x);
  PythagorasResult r{0.0, 0.0, 0.0};
  for (std::size_t w = 0; w < x.size(); ++w) {
    const double p = space.probabilities[w];
    r.total += p * (x[w] - y[w]) * (x[w] - y[w]);
    r.within += p * (x[w] - ce[w]) * (x[w] - ce[w]);
    r.between += p * (ce[w] - y[w]) * (ce[w] - y[w]);
  }
  return r;
}

}  // namespace deeppde
