#include <cmath>

#include "deeppde/mlp.hpp"
#include "doctest.h"

using namespace deeppde;

namespace {

// Independent straight-line oracle: explicit two-loop evaluation.
std::vector<double> mlp_oracle(const std::vector<int>& widths, Activation act,
                               const std::vector<double>& theta,
                               const std::vector<double>& x) {
  std::vector<double> cur = x;
  std::size_t s = 0;
  for (std::size_t layer = 1; layer < widths.size(); ++layer) {
    const int m = widths[layer], n = widths[layer - 1];
    std::vector<double> next(m);
    for (int i = 0; i < m; ++i) {
      double acc = theta[s + static_cast<std::size_t>(m) * n + i];
      for (int j = 0; j < n; ++j) acc += theta[s + static_cast<std::size_t>(i) * n + j] * cur[j];
      next[i] = (layer + 1 < widths.size()) ? act_value(act, acc) : acc;
    }
    s += static_cast<std::size_t>(m) * (n + 1);
    cur = next;
  }
  return cur;
}

double fd_input_partial(const MlpArchitecture& arch, const ParamVector& theta,
                        std::vector<double> x, std::size_t i, double h = 1e-5) {
  x[i] += h;
  const double up = mlp_apply(arch, theta, x)[0];
  x[i] -= 2 * h;
  const double dn = mlp_apply(arch, theta, x)[0];
  return (up - dn) / (2 * h);
}

double fd_input_second(const MlpArchitecture& arch, const ParamVector& theta,
                       std::vector<double> x, std::size_t i, double h = 1e-4) {
  const double mid = mlp_apply(arch, theta, x)[0];
  x[i] += h;
  const double up = mlp_apply(arch, theta, x)[0];
  x[i] -= 2 * h;
  const double dn = mlp_apply(arch, theta, x)[0];
  return (up - 2 * mid + dn) / (h * h);
}

}  // namespace

TEST_CASE("parameter offsets follow the layer-size formula") {
  MlpArchitecture arch({2, 3, 1}, Activation::tanh);
  CHECK(arch.offset(0) == 0);
  CHECK(arch.offset(1) == 9);   // 3*(2+1)
  CHECK(arch.offset(2) == 13);  // + 1*(3+1)
  CHECK(arch.param_count() == 13);
}

TEST_CASE("affine_apply reads weight-then-bias layout") {
  // m=n=1, theta=(3,4), x=2 -> 3*2+4
  std::vector<double> theta{3.0, 4.0};
  std::vector<double> x{2.0}, out(1);
  affine_apply(theta, 0, 1, 1, x, out);
  CHECK(out[0] == doctest::Approx(10.0));

  // identity weight block
  std::vector<double> th2{1, 0, 0, 1, 0, 0};
  std::vector<double> x2{5, 7}, out2(2);
  affine_apply(th2, 0, 2, 2, x2, out2);
  CHECK(out2[0] == 5.0);
  CHECK(out2[1] == 7.0);

  // zero parameters give the zero vector
  std::vector<double> th3(6, 0.0);
  affine_apply(th3, 0, 2, 2, x2, out2);
  CHECK(out2[0] == 0.0);
  CHECK(out2[1] == 0.0);

  CHECK_THROWS_AS(affine_apply(theta, 1, 1, 1, x, out), ConfigError);
}

TEST_CASE("activation_map is elementwise and shape preserving") {
  Tensor t({2}, std::vector<double>{-1.0, 2.0});
  Tensor r = activation_map(Activation::relu, t);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 2.0);
  Tensor id = activation_map(Activation::identity, t);
  CHECK(id[0] == -1.0);
  CHECK(act_value(Activation::gelu, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("mlp_apply identity composition and zero parameters") {
  MlpArchitecture arch({1, 1, 1}, Activation::identity);
  ParamVector theta{1, 0, 1, 0};
  CHECK(mlp_apply(arch, theta, std::vector<double>{5.0})[0] == doctest::Approx(5.0));

  ParamVector zero(arch.param_count(), 0.0);
  CHECK(mlp_apply(arch, zero, std::vector<double>{5.0})[0] == 0.0);
}

TEST_CASE("mlp_apply equals the straight-line oracle") {
  MlpArchitecture arch({2, 3, 1}, Activation::tanh);
  RngState rng(3);
  ParamVector theta = mlp_init(arch, rng);
  for (double& t : theta) t += 0.05 * rng.next_gaussian();  // nonzero biases too
  std::vector<double> x{0.1, 0.2};
  auto got = mlp_apply(arch, theta, x);
  auto want = mlp_oracle({2, 3, 1}, Activation::tanh, theta, x);
  CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-14));
}

TEST_CASE("parameter layout round-trips through (W,b) pairs") {
  MlpArchitecture arch({3, 4, 2}, Activation::gelu);
  RngState rng(9);
  ParamVector theta = mlp_init(arch, rng);
  // read into (W,b), re-flatten
  ParamVector rebuilt(theta.size());
  for (int layer = 1; layer <= arch.depth(); ++layer) {
    const int m = arch.widths[layer], n = arch.widths[layer - 1];
    const std::size_t s = arch.offset(layer - 1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        rebuilt[s + static_cast<std::size_t>(i) * n + j] =
            theta[s + static_cast<std::size_t>(i) * n + j];
    for (int i = 0; i < m; ++i)
      rebuilt[s + static_cast<std::size_t>(m) * n + i] =
          theta[s + static_cast<std::size_t>(m) * n + i];
  }
  CHECK(rebuilt == theta);
}

TEST_CASE("final-layer positive homogeneity with zero final bias") {
  MlpArchitecture arch({2, 4, 1}, Activation::tanh);
  RngState rng(17);
  ParamVector theta = mlp_init(arch, rng);
  const std::size_t s = arch.offset(1);
  theta[arch.param_count() - 1] = 0.0;  // final bias
  std::vector<double> x{0.3, -0.7};
  const double base = mlp_apply(arch, theta, x)[0];
  ParamVector scaled = theta;
  for (std::size_t k = s; k + 1 < arch.param_count(); ++k) scaled[k] *= 2.5;
  CHECK(mlp_apply(arch, scaled, x)[0] == doctest::Approx(2.5 * base).epsilon(1e-14));
}

TEST_CASE("linear net input gradient and Laplacian") {
  // identity activation: two affine layers compose to a linear map
  MlpArchitecture arch({2, 2, 1}, Activation::identity);
  // layer 1: W=[[1,2],[3,4]], b=0 ; layer 2: W=[5,6], b=0
  ParamVector theta{1, 2, 3, 4, 0, 0, 5, 6, 0};
  auto g = mlp_input_gradient(arch, theta, std::vector<double>{0.4, -0.2});
  CHECK(g[0] == doctest::Approx(5 * 1 + 6 * 3));
  CHECK(g[1] == doctest::Approx(5 * 2 + 6 * 4));
  CHECK(mlp_input_laplacian(arch, theta, std::vector<double>{0.4, -0.2}) ==
        doctest::Approx(0.0));
}

TEST_CASE("input gradient matches finite differences on random nets") {
  RngState rng(77);
  for (Activation act : {Activation::tanh, Activation::gelu}) {
    MlpArchitecture arch({3, 8, 1}, act);
    ParamVector theta = mlp_init(arch, rng);
    for (double& t : theta) t += 0.1 * rng.next_gaussian();
    for (int probe = 0; probe < 10; ++probe) {
      std::vector<double> x{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
      auto g = mlp_input_gradient(arch, theta, x);
      for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(g[i] - fd_input_partial(arch, theta, x, i)) < 1e-6);
    }
  }
}

TEST_CASE("input Laplacian matches summed second differences on a (2,8,1) tanh net") {
  RngState rng(101);
  MlpArchitecture arch({2, 8, 1}, Activation::tanh);
  ParamVector theta = mlp_init(arch, rng);
  for (double& t : theta) t += 0.1 * rng.next_gaussian();
  for (int probe = 0; probe < 10; ++probe) {
    std::vector<double> x{rng.next_gaussian(), rng.next_gaussian()};
    const double lap = mlp_input_laplacian(arch, theta, x);
    const double fd = fd_input_second(arch, theta, x, 0) + fd_input_second(arch, theta, x, 1);
    CHECK(std::abs(lap - fd) < 1e-4);
  }
}

TEST_CASE("smoothness guards") {
  MlpArchitecture arch({2, 4, 1}, Activation::relu);
  RngState rng(5);
  ParamVector theta = mlp_init(arch, rng);
  CHECK_THROWS_AS(mlp_input_laplacian(arch, theta, std::vector<double>{0.1, 0.2}),
                  ConfigError);
  // tanh and gelu never raise
  for (Activation act : {Activation::tanh, Activation::gelu}) {
    MlpArchitecture smooth({2, 4, 1}, act);
    ParamVector th = mlp_init(smooth, rng);
    CHECK_NOTHROW(mlp_input_laplacian(smooth, th, std::vector<double>{0.1, 0.2}));
    CHECK_NOTHROW(mlp_input_gradient(smooth, th, std::vector<double>{0.1, 0.2}));
  }
}

TEST_CASE("traced theta-gradient matches finite differences") {
  RngState rng(31);
  MlpArchitecture arch({2, 5, 1}, Activation::gelu);
  ParamVector theta = mlp_init(arch, rng);
  for (double& t : theta) t += 0.1 * rng.next_gaussian();
  std::vector<double> x{0.3, -0.5};

  Tape tape;
  std::vector<Var> tv(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) tv[i] = tape.input(theta[i]);
  auto out = mlp_eval_traced(tape, arch, tv, x);
  auto grad = tape.gradient(out[0], tv);

  for (std::size_t i = 0; i < theta.size(); ++i) {
    ParamVector tp = theta;
    tp[i] += 1e-5;
    const double up = mlp_apply(arch, tp, x)[0];
    tp[i] -= 2e-5;
    const double dn = mlp_apply(arch, tp, x)[0];
    const double fd = (up - dn) / 2e-5;
    CHECK(std::abs(grad[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}
