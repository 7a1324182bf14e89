#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "deeppde/activation.hpp"
#include "deeppde/rng.hpp"
#include "deeppde/tensor.hpp"

namespace deeppde {

/// Fully-connected feed-forward network: widths l_0..l_L, hidden activation,
/// final layer affine. Parameters live in one flat vector; layer j occupies
/// offsets [offset(j), offset(j+1)) with the weight matrix first (row-major)
/// and the bias after it.
struct MlpArchitecture {
  std::vector<int> widths;
  Activation activation = Activation::tanh;

  MlpArchitecture() = default;
  MlpArchitecture(std::vector<int> w, Activation a);

  int depth() const { return static_cast<int>(widths.size()) - 1; }
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }

  /// Cumulative parameter offsets d_j = sum_{k<=j} l_k (l_{k-1}+1).
  std::size_t offset(int layer) const { return offsets_[layer]; }
  std::size_t param_count() const { return offsets_.back(); }

 private:
  std::vector<std::size_t> offsets_;
};

/// W x + b with W read row-major from theta[s .. s+m*n) and b from
/// theta[s+m*n .. s+m*n+m).
void affine_apply(std::span<const double> theta, std::size_t s, int m, int n,
                  std::span<const double> x, std::span<double> out);

/// Elementwise activation; shape preserved.
Tensor activation_map(Activation a, const Tensor& x);

/// Network realization on doubles.
std::vector<double> mlp_apply(const MlpArchitecture& arch, std::span<const double> theta,
                              std::span<const double> x);

/// Exact input gradient of a scalar-output network.
std::vector<double> mlp_input_gradient(const MlpArchitecture& arch,
                                       std::span<const double> theta,
                                       std::span<const double> x);

/// Exact input Laplacian of a scalar-output network; smooth activations only.
double mlp_input_laplacian(const MlpArchitecture& arch, std::span<const double> theta,
                           std::span<const double> x);

/// Uniform-on +/- sqrt(6/(fan_in+fan_out)) weights, zero biases.
ParamVector mlp_init(const MlpArchitecture& arch, RngState& rng);

// -- generic evaluation ------------------------------------------------------
//
// P is the parameter scalar (double or Var), X the data scalar (double, Var,
// Dual1<Var>, Dual2<Var>, ...). X must support X + X*P and act_value.

template <class P, class X>
void mlp_eval(const MlpArchitecture& arch, std::span<const P> theta,
              std::span<const X> in, std::vector<X>& out) {
  if (static_cast<int>(in.size()) != arch.input_dim())
    throw ConfigError("mlp_eval: input dimension mismatch");
  if (theta.size() != arch.param_count())
    throw ConfigError("mlp_eval: parameter count mismatch");

  const int L = arch.depth();
  std::vector<X> cur(in.begin(), in.end());
  std::vector<X> next;
  for (int layer = 1; layer <= L; ++layer) {
    const int m = arch.widths[layer];
    const int n = arch.widths[layer - 1];
    const std::size_t s = arch.offset(layer - 1);
    next.clear();
    next.reserve(m);
    for (int i = 0; i < m; ++i) {
      X acc = cur[0] * theta[s + static_cast<std::size_t>(i) * n];
      for (int j = 1; j < n; ++j)
        acc = acc + cur[j] * theta[s + static_cast<std::size_t>(i) * n + j];
      acc = acc + theta[s + static_cast<std::size_t>(m) * n + i];
      if (layer < L) acc = act_value(arch.activation, acc);
      next.push_back(acc);
    }
    cur.swap(next);
  }
  out = std::move(cur);
}

/// Convenience: parameters as tape variables, plain double inputs.
std::vector<Var> mlp_eval_traced(Tape& tape, const MlpArchitecture& arch,
                                 std::span<const Var> theta, std::span<const double> x);

}  // namespace deeppde
