#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "deeppde/grid.hpp"
#include "deeppde/mlp.hpp"
#include "deeppde/rng.hpp"
#include "deeppde/tape.hpp"

#include "json.hpp"

namespace deeppde {

// ---------------------------------------------------------------------------
// Architecture descriptors. Each spec declares an exact parameter count and a
// documented flat layout; apply() consumes the flat vector directly.
// ---------------------------------------------------------------------------

/// Grid sample -> flatten -> fully-connected net -> unflatten -> interpolate.
/// Widths are (prod extents, hidden..., prod extents).
struct FcnnOperatorSpec {
  std::vector<int> extents;
  std::vector<int> hidden;
  Activation activation = Activation::gelu;

  MlpArchitecture arch() const;
  std::size_t param_count() const { return arch().param_count(); }
};

/// Periodic CNN: channel structure (1, l_1, ..., l_{L-1}, 1), per-layer
/// per-axis kernel half-widths; layer rule  act(B 1 + sum_m x_m conv W).
/// Layout per layer: kernels (n outer, m inner, row-major taps), then biases.
struct PeriodicCnnSpec {
  std::vector<int> extents;
  std::vector<int> channels;                  // l_0..l_L, l_0 = l_L = 1
  std::vector<std::vector<int>> half_widths;  // [layer][axis]
  Activation activation = Activation::gelu;

  void validate() const;
  std::size_t param_count() const;
};

/// Strided-conv encoder and transposed-conv decoder; kernel extents are the
/// strides, shapes contract by a_{l,k} = a_{l-1,k} / w_{l,k}. Layout: all
/// encoder layers (kernels then biases), then all decoder layers.
struct EncDecCnnSpec {
  std::vector<int> extents;              // a_{0,k}
  std::vector<int> channels;             // l_0..l_L, l_0 = 1
  std::vector<std::vector<int>> kernel;  // [layer][axis] w_{l,k}
  Activation activation = Activation::gelu;

  void validate() const;
  std::vector<std::vector<int>> level_extents() const;  // a_{0..L,k}
  std::size_t param_count() const;
};

/// Discretized FNO. Spectral weights are stored per signed frequency slot
/// sigma in {-modes..modes-1}^d, so one parameter set serves any power-of-two
/// resolution M >= 2*modes. With real_constrained the slots satisfy
/// R(sigma) = conj(R(-sigma)) and the hidden functions stay real.
/// Layout: lifting MLP, then per layer [W (n x n), R slots], then projection.
struct FnoSpec {
  int dim = 1;
  int grid_n = 64;  // default resolution, apply() also accepts other pow2 grids
  int channels = 8;
  int length = 2;
  int modes = 12;
  std::vector<int> lift_hidden{16};
  std::vector<int> proj_hidden{16};
  bool real_constrained = true;
  Activation activation = Activation::gelu;

  void validate() const;
  MlpArchitecture lift_arch() const;  // (dim+1) -> ... -> channels (real case)
  MlpArchitecture proj_arch() const;
  int slots_per_axis() const { return 2 * modes; }
  std::size_t slot_count() const;     // (2 modes)^d
  std::size_t spectral_reals_per_layer() const;
  std::size_t param_count() const;
};

/// Unstacked DeepONet: branch net on sensor values, trunk net on the query
/// coordinate, output is their inner product. Layout: branch, then trunk.
struct DeepOnetSpec {
  std::vector<std::vector<double>> sensors;  // physical coordinates
  int coord_dim = 1;
  int latent = 32;
  std::vector<int> branch_hidden{64};
  std::vector<int> trunk_hidden{64};
  Activation activation = Activation::gelu;

  MlpArchitecture branch_arch() const;
  MlpArchitecture trunk_arch() const;
  std::size_t param_count() const {
    return branch_arch().param_count() + trunk_arch().param_count();
  }
  /// Sensors at the nodes of a grid (the usual choice for grid datasets).
  static std::vector<std::vector<double>> grid_sensors(const std::vector<int>& extents,
                                                       const std::vector<double>& lengths);
};

/// Integral kernel neural operator with Lebesgue-on-ball quadrature measures:
/// the layer integral is summed over grid nodes within periodic distance
/// radius, weighted by the cell volume.
/// Layout: lifting MLP, per layer [W (n x n), kernel MLP], projection MLP.
struct IkNoSpec {
  std::vector<int> extents;
  std::vector<double> lengths;
  int channels = 2;
  int length = 1;
  double radius = 0.3;
  std::vector<int> lift_hidden{8};
  std::vector<int> kernel_hidden{8};
  std::vector<int> proj_hidden{8};
  Activation activation = Activation::gelu;

  void validate() const;
  MlpArchitecture lift_arch() const;    // (d+1) -> n
  MlpArchitecture kernel_arch() const;  // (2d+2) -> n*n
  MlpArchitecture proj_arch() const;    // n -> 1
  std::size_t param_count() const;
};

// ---------------------------------------------------------------------------
// Apply paths. The plain path works on doubles; the traced path records the
// same computation on a tape with the parameters as variables.
// ---------------------------------------------------------------------------

GridFunction fcnn_operator_apply(const FcnnOperatorSpec& spec, std::span<const double> theta,
                                 const GridFunction& in);
std::vector<Var> fcnn_operator_apply_traced(const FcnnOperatorSpec& spec, Tape& tape,
                                            std::span<const Var> theta,
                                            const GridFunction& in);

GridFunction pcnn_operator_apply(const PeriodicCnnSpec& spec, std::span<const double> theta,
                                 const GridFunction& in);
std::vector<Var> pcnn_operator_apply_traced(const PeriodicCnnSpec& spec, Tape& tape,
                                            std::span<const Var> theta,
                                            const GridFunction& in);

GridFunction encdec_operator_apply(const EncDecCnnSpec& spec, std::span<const double> theta,
                                   const GridFunction& in);
std::vector<Var> encdec_operator_apply_traced(const EncDecCnnSpec& spec, Tape& tape,
                                              std::span<const Var> theta,
                                              const GridFunction& in);

GridFunction fno_apply(const FnoSpec& spec, std::span<const double> theta,
                       const GridFunction& in);
std::vector<Var> fno_apply_traced(const FnoSpec& spec, Tape& tape,
                                  std::span<const Var> theta, const GridFunction& in);
/// Maximum |imag| residue of the hidden output before it is dropped
/// (diagnostic for the real-constraint check).
double fno_imag_residue(const FnoSpec& spec, std::span<const double> theta,
                        const GridFunction& in);
/// Expands one layer's flat spectral block into the full complex weight
/// tensor, slot-major with n x n row-major matrices per slot.
std::vector<std::complex<double>> fno_unpack_spectral(const FnoSpec& spec,
                                                      std::span<const double> layer_block);
/// Conjugate-partner slot index within the signed-frequency slot grid.
std::size_t fno_conjugate_slot(const FnoSpec& spec, std::size_t slot);

double deeponet_apply(const DeepOnetSpec& spec, std::span<const double> theta,
                      const GridFunction& u, std::span<const double> y);
GridFunction deeponet_apply_grid(const DeepOnetSpec& spec, std::span<const double> theta,
                                 const GridFunction& u);
std::vector<Var> deeponet_apply_traced(const DeepOnetSpec& spec, Tape& tape,
                                       std::span<const Var> theta, const GridFunction& u);

GridFunction ikno_apply(const IkNoSpec& spec, std::span<const double> theta,
                        const GridFunction& in);
std::vector<Var> ikno_apply_traced(const IkNoSpec& spec, Tape& tape,
                                   std::span<const Var> theta, const GridFunction& in);

// ---------------------------------------------------------------------------
// Uniform model handle used by training, checkpointing and the CLI.
// ---------------------------------------------------------------------------

class OperatorModel {
 public:
  virtual ~OperatorModel() = default;
  virtual std::string name() const = 0;
  virtual std::size_t param_count() const = 0;
  virtual ParamVector init_params(RngState& rng) const = 0;
  virtual GridFunction apply(std::span<const double> theta, const GridFunction& in) const = 0;
  virtual std::vector<Var> apply_traced(Tape& tape, std::span<const Var> theta,
                                        const GridFunction& in) const = 0;
  virtual nlohmann::json descriptor() const = 0;

  static std::unique_ptr<OperatorModel> from_descriptor(const nlohmann::json& j);
};

void to_json(nlohmann::json& j, const FcnnOperatorSpec& s);
void from_json(const nlohmann::json& j, FcnnOperatorSpec& s);
void to_json(nlohmann::json& j, const PeriodicCnnSpec& s);
void from_json(const nlohmann::json& j, PeriodicCnnSpec& s);
void to_json(nlohmann::json& j, const EncDecCnnSpec& s);
void from_json(const nlohmann::json& j, EncDecCnnSpec& s);
void to_json(nlohmann::json& j, const FnoSpec& s);
void from_json(const nlohmann::json& j, FnoSpec& s);
void to_json(nlohmann::json& j, const DeepOnetSpec& s);
void from_json(const nlohmann::json& j, DeepOnetSpec& s);
void to_json(nlohmann::json& j, const IkNoSpec& s);
void from_json(const nlohmann::json& j, IkNoSpec& s);

std::unique_ptr<OperatorModel> make_model(const FcnnOperatorSpec& s);
std::unique_ptr<OperatorModel> make_model(const PeriodicCnnSpec& s);
std::unique_ptr<OperatorModel> make_model(const EncDecCnnSpec& s);
std::unique_ptr<OperatorModel> make_model(const FnoSpec& s);
std::unique_ptr<OperatorModel> make_model(const DeepOnetSpec& s);
std::unique_ptr<OperatorModel> make_model(const IkNoSpec& s);

}  // namespace deeppde
