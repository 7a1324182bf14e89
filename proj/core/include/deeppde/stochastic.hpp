#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "deeppde/mlp.hpp"
#include "deeppde/pde.hpp"
#include "deeppde/rng.hpp"
#include "deeppde/tape.hpp"

namespace deeppde {

/// Generator nonlinearity f(t, x, y, z) of a semilinear parabolic terminal
/// value problem, evaluable on plain reals and on tape variables.
class SdeGenerator {
 public:
  virtual ~SdeGenerator() = default;
  virtual double eval(double t, std::span<const double> x, double y,
                      std::span<const double> z) const = 0;
  virtual Var eval(Tape& tape, double t, std::span<const double> x, Var y,
                   std::span<const Var> z) const = 0;
};

class ZeroGenerator final : public SdeGenerator {
 public:
  double eval(double, std::span<const double>, double, std::span<const double>) const override {
    return 0.0;
  }
  Var eval(Tape& tape, double, std::span<const double>, Var,
           std::span<const Var>) const override {
    return tape.constant(0.0);
  }
};

class ConstantGenerator final : public SdeGenerator {
 public:
  explicit ConstantGenerator(double c) : c_(c) {}
  double eval(double, std::span<const double>, double, std::span<const double>) const override {
    return c_;
  }
  Var eval(Tape& tape, double, std::span<const double>, Var,
           std::span<const Var>) const override {
    return tape.constant(c_);
  }

 private:
  double c_;
};

/// f = a y + b <z, z> (smooth toy nonlinearity for gradient checks).
class QuadraticGenerator final : public SdeGenerator {
 public:
  QuadraticGenerator(double a, double b) : a_(a), b_(b) {}
  double eval(double, std::span<const double>, double y,
              std::span<const double> z) const override {
    double zz = 0.0;
    for (double v : z) zz += v * v;
    return a_ * y + b_ * zz;
  }
  Var eval(Tape& tape, double, std::span<const double>, Var y,
           std::span<const Var> z) const override {
    Var zz = tape.constant(0.0);
    for (Var v : z) zz = zz + v * v;
    return y * a_ + zz * b_;
  }

 private:
  double a_, b_;
};

struct SdeSpec {
  int dim = 1;
  double horizon = 1.0;
  std::function<std::vector<double>(double, std::span<const double>)> drift;
  // sigma(t, x), d x d row-major
  std::function<std::vector<double>(double, std::span<const double>)> diffusion;
  std::shared_ptr<const SdeGenerator> generator = std::make_shared<ZeroGenerator>();
  std::function<double(std::span<const double>)> terminal;

  static SdeSpec heat(int dim, double rho, double horizon,
                      std::function<double(std::span<const double>)> terminal);
};

/// Brownian increments on a uniform grid; increment m is N(0, dt I).
struct BrownianPath {
  double dt = 0.0;
  int dim = 1;
  std::vector<double> increments;  // steps x dim, row-major

  int steps() const { return static_cast<int>(increments.size()) / dim; }
  std::span<const double> increment(int m) const {
    return std::span<const double>(increments).subspan(static_cast<std::size_t>(m) * dim, dim);
  }
  static BrownianPath sample(int steps, int dim, double horizon, RngState& rng);
};

/// Forward Euler-Maruyama trajectory, (steps+1) x dim row-major.
std::vector<double> euler_maruyama(const SdeSpec& sde, std::span<const double> x0,
                                   const BrownianPath& path);

// -- BSDE rollouts -----------------------------------------------------------

using InitialControl = std::function<double(std::span<const double>)>;           // v(x)
using GradientControl =
    std::function<std::vector<double>(double, std::span<const double>)>;          // V(t, x)

struct BsdeRollout {
  std::vector<double> x;  // (steps+1) x dim
  std::vector<double> y;  // steps+1
};

/// Y_0 = v(X_0); Y_{m+1} = Y_m - f(t_m, X_m, Y_m, V(t_m, X_m)) dt
///                        + <V(t_m, X_m), dB_m>.
BsdeRollout bsde_rollout(const SdeSpec& sde, const InitialControl& v,
                         const GradientControl& grad_v, std::span<const double> x0,
                         const BrownianPath& path);

struct BsdeSample {
  std::vector<double> x0;
  BrownianPath path;
};

/// Batch mean of |Y_T - g(X_T)|^2 with plain-callable controls.
double bsde_terminal_loss(const SdeSpec& sde, const InitialControl& v,
                          const GradientControl& grad_v, std::span<const BsdeSample> batch);

/// Network controls: v on R^d, V on [0,T] x R^d (time is the first input).
struct BsdeControls {
  MlpArchitecture value_net;     // dim -> 1
  MlpArchitecture gradient_net;  // 1+dim -> dim

  std::size_t param_count() const {
    return value_net.param_count() + gradient_net.param_count();
  }
  void validate(int dim) const;
};

double bsde_terminal_loss(const SdeSpec& sde, const BsdeControls& controls,
                          std::span<const double> theta, std::span<const BsdeSample> batch);
Var bsde_terminal_loss_traced(Tape& tape, const SdeSpec& sde, const BsdeControls& controls,
                              std::span<const Var> theta, std::span<const BsdeSample> batch);

// -- deep Kolmogorov losses ----------------------------------------------------

struct KolmogorovBatch {
  int dim = 1;
  std::vector<double> xi;     // K x dim
  std::vector<double> bnorm;  // K x dim, standard normal
  std::vector<double> tau;    // K, full-solution variant only

  std::size_t size() const { return xi.size() / static_cast<std::size_t>(dim); }
  static KolmogorovBatch sample_terminal(int count, int dim, RngState& rng);
  static KolmogorovBatch sample_full(int count, int dim, double horizon, RngState& rng);
};

using PointFunction = std::function<double(std::span<const double>)>;

/// mean |phi(varrho B + xi) - v(xi)|^2 with varrho = sqrt(2 T rho).
double kolmogorov_terminal_loss(const KolmogorovSpec& spec, const PointFunction& phi,
                                const PointFunction& v, const KolmogorovBatch& batch);
double kolmogorov_terminal_loss(const KolmogorovSpec& spec, const PointFunction& phi,
                                const MlpArchitecture& net, std::span<const double> theta,
                                const KolmogorovBatch& batch);
Var kolmogorov_terminal_loss_traced(Tape& tape, const KolmogorovSpec& spec,
                                    const PointFunction& phi, const MlpArchitecture& net,
                                    std::span<const Var> theta, const KolmogorovBatch& batch);

using TimePointFunction = std::function<double(double, std::span<const double>)>;

/// mean |phi(varrho sqrt(tau) B + xi) - v(tau, xi)|^2 with varrho = sqrt(2 rho).
double kolmogorov_full_loss(const KolmogorovSpec& spec, const PointFunction& phi,
                            const TimePointFunction& v, const KolmogorovBatch& batch);
double kolmogorov_full_loss(const KolmogorovSpec& spec, const PointFunction& phi,
                            const MlpArchitecture& net, std::span<const double> theta,
                            const KolmogorovBatch& batch);
Var kolmogorov_full_loss_traced(Tape& tape, const KolmogorovSpec& spec,
                                const PointFunction& phi, const MlpArchitecture& net,
                                std::span<const Var> theta, const KolmogorovBatch& batch);

// -- discrete conditional-expectation oracle ----------------------------------

struct DiscreteProbSpace {
  std::vector<double> probabilities;  // one per outcome, sums to 1
  std::vector<int> block_of;          // partition block index per outcome

  void validate() const;
  int block_count() const;
};

/// E[X | G] per outcome: the probability-weighted mean over each block.
std::vector<double> cond_exp_oracle(const DiscreteProbSpace& space,
                                    std::span<const double> x);

struct PythagorasResult {
  double total;        // E|X - Y|^2
  double within;       // E|X - E[X|G]|^2
  double between;      // E|E[X|G] - Y|^2
};

/// Verifies E|X-Y|^2 = E|X-E[X|G]|^2 + E|E[X|G]-Y|^2 for blockwise-constant Y.
PythagorasResult pythagoras_check(const DiscreteProbSpace& space,
                                  std::span<const double> x, std::span<const double> y);

}  // namespace deeppde
