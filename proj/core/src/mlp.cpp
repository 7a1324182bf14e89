#include "deeppde/mlp.hpp"

#include <cmath>

namespace deeppde {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::gelu: return "gelu";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "gelu") return Activation::gelu;
  throw ConfigError("unknown activation: " + name);
}

MlpArchitecture::MlpArchitecture(std::vector<int> w, Activation a)
    : widths(std::move(w)), activation(a) {
  if (widths.size() < 2) throw ConfigError("MlpArchitecture: needs at least two widths");
  for (int l : widths)
    if (l <= 0) throw ConfigError("MlpArchitecture: widths must be positive");
  offsets_.resize(widths.size());
  offsets_[0] = 0;
  for (std::size_t j = 1; j < widths.size(); ++j)
    offsets_[j] = offsets_[j - 1] +
                  static_cast<std::size_t>(widths[j]) * (widths[j - 1] + 1);
}

void affine_apply(std::span<const double> theta, std::size_t s, int m, int n,
                  std::span<const double> x, std::span<double> out) {
  if (theta.size() < s + static_cast<std::size_t>(m) * n + m)
    throw ConfigError("affine_apply: parameter vector too short");
  if (static_cast<int>(x.size()) != n || static_cast<int>(out.size()) != m)
    throw ConfigError("affine_apply: shape mismatch");
  for (int i = 0; i < m; ++i) {
    double acc = theta[s + static_cast<std::size_t>(m) * n + i];
    const double* row = theta.data() + s + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
}

Tensor activation_map(Activation a, const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = act_value(a, v);
  return y;
}

std::vector<double> mlp_apply(const MlpArchitecture& arch, std::span<const double> theta,
                              std::span<const double> x) {
  std::vector<double> out;
  mlp_eval<double, double>(arch, theta, x, out);
  return out;
}

std::vector<Var> mlp_eval_traced(Tape& tape, const MlpArchitecture& arch,
                                 std::span<const Var> theta, std::span<const double> x) {
  std::vector<Var> in(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) in[i] = tape.constant(x[i]);
  std::vector<Var> out;
  mlp_eval<Var, Var>(arch, theta, std::span<const Var>(in), out);
  return out;
}

std::vector<double> mlp_input_gradient(const MlpArchitecture& arch,
                                       std::span<const double> theta,
                                       std::span<const double> x) {
  if (arch.output_dim() != 1)
    throw ConfigError("mlp_input_gradient: scalar-output networks only");
  Tape tape;
  std::vector<Var> in(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) in[i] = tape.input(x[i]);
  std::vector<Var> out;
  mlp_eval<double, Var>(arch, theta, std::span<const Var>(in), out);
  return tape.gradient(out[0], in);
}

double mlp_input_laplacian(const MlpArchitecture& arch, std::span<const double> theta,
                           std::span<const double> x) {
  if (arch.output_dim() != 1)
    throw ConfigError("mlp_input_laplacian: scalar-output networks only");
  if (!is_smooth(arch.activation) || arch.activation == Activation::relu)
    throw ConfigError("mlp_input_laplacian: activation must be twice differentiable");
  const std::size_t d = x.size();
  double lap = 0.0;
  std::vector<double> grad(d), hv(d);
  for (std::size_t axis = 0; axis < d; ++axis) {
    Tape tape;
    tape.enable_tangents();
    std::vector<Var> in(d);
    for (std::size_t i = 0; i < d; ++i) in[i] = tape.input(x[i], i == axis ? 1.0 : 0.0);
    std::vector<Var> out;
    mlp_eval<double, Var>(arch, theta, std::span<const Var>(in), out);
    tape.gradient_with_hv(out[0], in, grad, hv);
    lap += hv[axis];
  }
  return lap;
}

ParamVector mlp_init(const MlpArchitecture& arch, RngState& rng) {
  ParamVector theta(arch.param_count(), 0.0);
  const int L = arch.depth();
  for (int layer = 1; layer <= L; ++layer) {
    const int m = arch.widths[layer];
    const int n = arch.widths[layer - 1];
    const double bound = std::sqrt(6.0 / (n + m));
    const std::size_t s = arch.offset(layer - 1);
    for (std::size_t k = 0; k < static_cast<std::size_t>(m) * n; ++k)
      theta[s + k] = rng.next_uniform(-bound, bound);
    // biases stay zero
  }
  return theta;
}

}  // namespace deeppde
