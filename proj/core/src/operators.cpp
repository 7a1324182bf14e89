#include "deeppde/operators.hpp"

#include <algorithm>
#include <cmath>

#include "deeppde/conv.hpp"
#include "deeppde/fourier.hpp"

namespace deeppde {

namespace {

using nlohmann::json;

// Value-context shims so one template body serves the plain and traced paths.
struct PlainCtx {
  using value_type = double;
  double make_const(double v) const { return v; }
};
struct TracedCtx {
  using value_type = Var;
  Tape* tape;
  Var make_const(double v) const { return tape->constant(v); }
};

template <class Ctx, class T = typename Ctx::value_type>
std::vector<T> lift_values(const Ctx& ctx, std::span<const double> vals) {
  std::vector<T> out;
  out.reserve(vals.size());
  for (double v : vals) out.push_back(ctx.make_const(v));
  return out;
}

std::size_t product(std::span<const int> ext) {
  std::size_t n = 1;
  for (int e : ext) n *= static_cast<std::size_t>(e);
  return n;
}

std::vector<double> unit_coords(const std::vector<int>& extents, std::size_t flat) {
  const int d = static_cast<int>(extents.size());
  std::vector<double> x(d);
  for (int k = d - 1; k >= 0; --k) {
    x[k] = static_cast<double>(flat % extents[k]) / extents[k];
    flat /= extents[k];
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// FCNN operator
// ---------------------------------------------------------------------------

MlpArchitecture FcnnOperatorSpec::arch() const {
  const int io = static_cast<int>(product(extents));
  std::vector<int> widths;
  widths.push_back(io);
  for (int h : hidden) widths.push_back(h);
  widths.push_back(io);
  return MlpArchitecture(widths, activation);
}

template <class Ctx, class T = typename Ctx::value_type>
static std::vector<T> fcnn_core(const FcnnOperatorSpec& spec, const Ctx& ctx,
                                std::span<const T> theta, const GridFunction& in) {
  if (in.extents != spec.extents) throw ConfigError("fcnn: input extents mismatch");
  const MlpArchitecture arch = spec.arch();
  std::vector<T> x = lift_values(ctx, in.values.values());
  std::vector<T> out;
  mlp_eval<T, T>(arch, theta, std::span<const T>(x), out);
  return out;
}

GridFunction fcnn_operator_apply(const FcnnOperatorSpec& spec, std::span<const double> theta,
                                 const GridFunction& in) {
  auto vals = fcnn_core(spec, PlainCtx{}, theta, in);
  return GridFunction(in.extents, in.lengths, Tensor(in.extents, std::move(vals)));
}

std::vector<Var> fcnn_operator_apply_traced(const FcnnOperatorSpec& spec, Tape& tape,
                                            std::span<const Var> theta,
                                            const GridFunction& in) {
  return fcnn_core(spec, TracedCtx{&tape}, theta, in);
}

// ---------------------------------------------------------------------------
// Periodic CNN operator
// ---------------------------------------------------------------------------

void PeriodicCnnSpec::validate() const {
  if (channels.size() < 2 || channels.front() != 1 || channels.back() != 1)
    throw ConfigError("pcnn: channel structure must start and end with 1");
  if (half_widths.size() + 1 != channels.size())
    throw ConfigError("pcnn: one kernel shape per layer required");
  for (const auto& hw : half_widths) {
    if (hw.size() != extents.size()) throw ConfigError("pcnn: kernel rank mismatch");
    for (std::size_t k = 0; k < hw.size(); ++k)
      if (extents[k] < 2 * hw[k] + 1)
        throw ConfigError("pcnn: kernel larger than grid (need a_k >= 2w_k+1)");
  }
}

std::size_t PeriodicCnnSpec::param_count() const {
  validate();
  std::size_t count = 0;
  for (std::size_t l = 1; l < channels.size(); ++l) {
    std::size_t taps = 1;
    for (int w : half_widths[l - 1]) taps *= static_cast<std::size_t>(2 * w + 1);
    count += static_cast<std::size_t>(channels[l]) * channels[l - 1] * taps + channels[l];
  }
  return count;
}

template <class Ctx, class T = typename Ctx::value_type>
static std::vector<T> pcnn_core(const PeriodicCnnSpec& spec, const Ctx& ctx,
                                std::span<const T> theta, const GridFunction& in) {
  spec.validate();
  if (in.extents != spec.extents) throw ConfigError("pcnn: input extents mismatch");
  if (theta.size() != spec.param_count()) throw ConfigError("pcnn: parameter count mismatch");

  const std::size_t nodes = in.size();
  const int L = static_cast<int>(spec.channels.size()) - 1;
  std::vector<std::vector<T>> cur(1);
  cur[0] = lift_values(ctx, in.values.values());

  std::size_t off = 0;
  std::vector<T> convbuf(nodes);
  for (int l = 1; l <= L; ++l) {
    const int n_out = spec.channels[l];
    const int n_in = spec.channels[l - 1];
    const auto& hw = spec.half_widths[l - 1];
    std::size_t taps = 1;
    for (int w : hw) taps *= static_cast<std::size_t>(2 * w + 1);
    const std::size_t bias_off = off + static_cast<std::size_t>(n_out) * n_in * taps;

    std::vector<std::vector<T>> next(n_out);
    for (int n = 0; n < n_out; ++n) {
      std::vector<T> acc(nodes, theta[bias_off + n]);  // bias broadcast over the one tensor
      for (int m = 0; m < n_in; ++m) {
        const std::size_t koff = off + (static_cast<std::size_t>(n) * n_in + m) * taps;
        detail::pconv_impl<T>(std::span<const T>(cur[m]), spec.extents,
                              theta.subspan(koff, taps), hw, std::span<T>(convbuf));
        for (std::size_t i = 0; i < nodes; ++i) acc[i] = acc[i] + convbuf[i];
      }
      if (l < L)
        for (T& v : acc) v = act_value(spec.activation, v);
      next[n] = std::move(acc);
    }
    off = bias_off + n_out;
    cur = std::move(next);
  }
  return std::move(cur[0]);
}

GridFunction pcnn_operator_apply(const PeriodicCnnSpec& spec, std::span<const double> theta,
                                 const GridFunction& in) {
  auto vals = pcnn_core(spec, PlainCtx{}, theta, in);
  return GridFunction(in.extents, in.lengths, Tensor(in.extents, std::move(vals)));
}

std::vector<Var> pcnn_operator_apply_traced(const PeriodicCnnSpec& spec, Tape& tape,
                                            std::span<const Var> theta,
                                            const GridFunction& in) {
  return pcnn_core(spec, TracedCtx{&tape}, theta, in);
}

// ---------------------------------------------------------------------------
// Encoder-decoder CNN operator
// ---------------------------------------------------------------------------

void EncDecCnnSpec::validate() const {
  if (channels.size() < 2 || channels.front() != 1)
    throw ConfigError("encdec: channel structure must start with 1");
  if (kernel.size() + 1 != channels.size())
    throw ConfigError("encdec: one kernel shape per level required");
  std::vector<int> a = extents;
  for (const auto& w : kernel) {
    if (w.size() != extents.size()) throw ConfigError("encdec: kernel rank mismatch");
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (w[k] <= 0 || a[k] % w[k] != 0)
        throw ConfigError("encdec: stride must divide the current extent");
      a[k] /= w[k];
    }
  }
}

std::vector<std::vector<int>> EncDecCnnSpec::level_extents() const {
  std::vector<std::vector<int>> levels{extents};
  std::vector<int> a = extents;
  for (const auto& w : kernel) {
    for (std::size_t k = 0; k < w.size(); ++k) a[k] /= w[k];
    levels.push_back(a);
  }
  return levels;
}

std::size_t EncDecCnnSpec::param_count() const {
  validate();
  std::size_t count = 0;
  for (std::size_t l = 1; l < channels.size(); ++l) {
    std::size_t taps = 1;
    for (int w : kernel[l - 1]) taps *= static_cast<std::size_t>(w);
    // encoder layer l and decoder layer l have transposed channel shapes
    count += static_cast<std::size_t>(channels[l]) * channels[l - 1] * taps + channels[l];
    count += static_cast<std::size_t>(channels[l - 1]) * channels[l] * taps + channels[l - 1];
  }
  return count;
}

template <class Ctx, class T = typename Ctx::value_type>
static std::vector<T> encdec_core(const EncDecCnnSpec& spec, const Ctx& ctx,
                                  std::span<const T> theta, const GridFunction& in) {
  spec.validate();
  if (in.extents != spec.extents) throw ConfigError("encdec: input extents mismatch");
  if (theta.size() != spec.param_count())
    throw ConfigError("encdec: parameter count mismatch");

  const int L = static_cast<int>(spec.channels.size()) - 1;
  const auto levels = spec.level_extents();

  // encoder parameter block comes first, then the decoder block
  std::vector<std::size_t> enc_off(L), dec_off(L);
  std::size_t off = 0;
  for (int l = 1; l <= L; ++l) {
    std::size_t taps = 1;
    for (int w : spec.kernel[l - 1]) taps *= static_cast<std::size_t>(w);
    enc_off[l - 1] = off;
    off += static_cast<std::size_t>(spec.channels[l]) * spec.channels[l - 1] * taps +
           spec.channels[l];
  }
  for (int l = 1; l <= L; ++l) {
    std::size_t taps = 1;
    for (int w : spec.kernel[l - 1]) taps *= static_cast<std::size_t>(w);
    dec_off[l - 1] = off;
    off += static_cast<std::size_t>(spec.channels[l - 1]) * spec.channels[l] * taps +
           spec.channels[l - 1];
  }

  std::vector<std::vector<T>> cur(1);
  cur[0] = lift_values(ctx, in.values.values());

  // encoder: strided convolutions, activation on every layer
  for (int l = 1; l <= L; ++l) {
    const int n_out = spec.channels[l], n_in = spec.channels[l - 1];
    const auto& w = spec.kernel[l - 1];
    std::size_t taps = 1;
    for (int wk : w) taps *= static_cast<std::size_t>(wk);
    const std::size_t out_nodes = product(levels[l]);
    const std::size_t bias_off = enc_off[l - 1] + static_cast<std::size_t>(n_out) * n_in * taps;

    std::vector<T> convbuf(out_nodes);
    std::vector<std::vector<T>> next(n_out);
    for (int n = 0; n < n_out; ++n) {
      std::vector<T> acc(out_nodes, theta[bias_off + n]);
      for (int m = 0; m < n_in; ++m) {
        const std::size_t koff = enc_off[l - 1] + (static_cast<std::size_t>(n) * n_in + m) * taps;
        detail::sconv_impl<T>(std::span<const T>(cur[m]), levels[l - 1],
                              theta.subspan(koff, taps), w, std::span<T>(convbuf));
        for (std::size_t i = 0; i < out_nodes; ++i) acc[i] = acc[i] + convbuf[i];
      }
      for (T& v : acc) v = act_value(spec.activation, v);
      next[n] = std::move(acc);
    }
    cur = std::move(next);
  }

  // decoder: transposed convolutions, identity activation on the last layer
  for (int l = L; l >= 1; --l) {
    const int n_out = spec.channels[l - 1], n_in = spec.channels[l];
    const auto& w = spec.kernel[l - 1];
    std::size_t taps = 1;
    for (int wk : w) taps *= static_cast<std::size_t>(wk);
    const std::size_t out_nodes = product(levels[l - 1]);
    const std::size_t bias_off = dec_off[l - 1] + static_cast<std::size_t>(n_out) * n_in * taps;

    std::vector<T> convbuf(out_nodes);
    std::vector<std::vector<T>> next(n_out);
    for (int n = 0; n < n_out; ++n) {
      std::vector<T> acc(out_nodes, theta[bias_off + n]);
      for (int m = 0; m < n_in; ++m) {
        const std::size_t koff = dec_off[l - 1] + (static_cast<std::size_t>(n) * n_in + m) * taps;
        detail::tconv_impl<T>(std::span<const T>(cur[m]), levels[l],
                              theta.subspan(koff, taps), w, std::span<T>(convbuf));
        for (std::size_t i = 0; i < out_nodes; ++i) acc[i] = acc[i] + convbuf[i];
      }
      if (l > 1)
        for (T& v : acc) v = act_value(spec.activation, v);
      next[n] = std::move(acc);
    }
    cur = std::move(next);
  }
  return std::move(cur[0]);
}

GridFunction encdec_operator_apply(const EncDecCnnSpec& spec, std::span<const double> theta,
                                   const GridFunction& in) {
  auto vals = encdec_core(spec, PlainCtx{}, theta, in);
  return GridFunction(in.extents, in.lengths, Tensor(in.extents, std::move(vals)));
}

std::vector<Var> encdec_operator_apply_traced(const EncDecCnnSpec& spec, Tape& tape,
                                              std::span<const Var> theta,
                                              const GridFunction& in) {
  return encdec_core(spec, TracedCtx{&tape}, theta, in);
}

// ---------------------------------------------------------------------------
// FNO
// ---------------------------------------------------------------------------

void FnoSpec::validate() const {
  if (dim < 1 || channels < 1 || length < 1 || modes < 1)
    throw ConfigError("fno: dim, channels, length, modes must be positive");
  if (!is_pow2(grid_n) || grid_n < 2 * modes)
    throw ConfigError("fno: grid_n must be a power of two with grid_n >= 2*modes");
}

MlpArchitecture FnoSpec::lift_arch() const {
  std::vector<int> w{dim + 1};
  for (int h : lift_hidden) w.push_back(h);
  w.push_back(real_constrained ? channels : 2 * channels);
  return MlpArchitecture(w, activation);
}

MlpArchitecture FnoSpec::proj_arch() const {
  std::vector<int> w{real_constrained ? channels : 2 * channels};
  for (int h : proj_hidden) w.push_back(h);
  w.push_back(1);
  return MlpArchitecture(w, activation);
}

std::size_t FnoSpec::slot_count() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(2 * modes);
  return n;
}

namespace {

// Signed frequencies per slot axis: index s in [0, 2K) maps to sigma = s - K.
// Conjugation within the slot grid wraps sigma = -K onto itself.
int conj_axis(int sigma, int modes) {
  const int neg = -sigma;
  return neg == modes ? -modes : neg;
}

void slot_sigma(std::size_t flat, int dim, int modes, std::vector<int>& sigma) {
  sigma.resize(dim);
  for (int k = dim - 1; k >= 0; --k) {
    sigma[k] = static_cast<int>(flat % (2 * modes)) - modes;
    flat /= static_cast<std::size_t>(2 * modes);
  }
}

std::size_t sigma_flat(std::span<const int> sigma, int modes) {
  std::size_t f = 0;
  for (int s : sigma) f = f * (2 * modes) + static_cast<std::size_t>(s + modes);
  return f;
}

bool slot_self_conjugate(std::span<const int> sigma, int modes) {
  for (int s : sigma)
    if (s != conj_axis(s, modes)) return false;
  return true;
}

std::size_t conj_flat(std::span<const int> sigma, int modes) {
  std::vector<int> c(sigma.size());
  for (std::size_t k = 0; k < sigma.size(); ++k) c[k] = conj_axis(sigma[k], modes);
  return sigma_flat(c, modes);
}

}  // namespace

std::size_t FnoSpec::spectral_reals_per_layer() const {
  const std::size_t nn = static_cast<std::size_t>(channels) * channels;
  if (!real_constrained) return 2 * nn * slot_count();
  // Self-conjugate slots carry real matrices; conjugate pairs share one
  // complex matrix. Total: nn per self slot + 2*nn per pair = nn * slot_count.
  return nn * slot_count();
}

std::size_t FnoSpec::param_count() const {
  validate();
  const std::size_t nn = static_cast<std::size_t>(channels) * channels;
  const std::size_t w_reals = real_constrained ? nn : 2 * nn;
  return lift_arch().param_count() +
         static_cast<std::size_t>(length) * (w_reals + spectral_reals_per_layer()) +
         proj_arch().param_count();
}

namespace {

// Spectral weight table for one layer: per slot an n x n complex matrix.
template <class T>
struct SlotTable {
  std::vector<Cplx<T>> m;  // [slot][i][j] row-major
  int n = 0;
  std::size_t slots = 0;
  Cplx<T>* at(std::size_t slot) { return m.data() + slot * n * n; }
  const Cplx<T>* at(std::size_t slot) const { return m.data() + slot * n * n; }
};

template <class T, class Neg>
SlotTable<T> unpack_slots(const FnoSpec& spec, std::span<const T> block, Neg&& neg) {
  const int n = spec.channels;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  SlotTable<T> table;
  table.n = n;
  table.slots = spec.slot_count();
  table.m.resize(table.slots * nn);

  std::vector<int> sigma;
  std::size_t off = 0;
  if (!spec.real_constrained) {
    for (std::size_t s = 0; s < table.slots; ++s) {
      Cplx<T>* mat = table.at(s);
      for (std::size_t e = 0; e < nn; ++e) mat[e] = {block[off + 2 * e], block[off + 2 * e + 1]};
      off += 2 * nn;
    }
    return table;
  }
  for (std::size_t s = 0; s < table.slots; ++s) {
    slot_sigma(s, spec.dim, spec.modes, sigma);
    if (slot_self_conjugate(sigma, spec.modes)) {
      Cplx<T>* mat = table.at(s);
      for (std::size_t e = 0; e < nn; ++e) mat[e] = {block[off + e], neg(block[off + e], true)};
      off += nn;
    } else {
      const std::size_t partner = conj_flat(sigma, spec.modes);
      if (partner < s) continue;  // filled together with the canonical slot
      Cplx<T>* mat = table.at(s);
      Cplx<T>* pm = table.at(partner);
      for (std::size_t e = 0; e < nn; ++e) {
        const T re = block[off + e];
        const T im = block[off + nn + e];
        mat[e] = {re, im};
        pm[e] = {re, neg(im, false)};
      }
      off += 2 * nn;
    }
  }
  return table;
}

// T-negation helpers; the self-conjugate branch needs a typed zero.
inline double fno_neg(double v, bool zero) { return zero ? 0.0 : -v; }

struct FnoState {
  double imag_residue = 0.0;
};

template <class Ctx, class T = typename Ctx::value_type>
std::vector<T> fno_core(const FnoSpec& spec, const Ctx& ctx, std::span<const T> theta,
                        const GridFunction& in, FnoState* state) {
  spec.validate();
  const int d = spec.dim;
  if (in.dims() != d) throw ConfigError("fno: input rank mismatch");
  const int m_res = in.extents[0];
  for (int e : in.extents)
    if (e != m_res) throw ConfigError("fno: grid extents must be equal per axis");
  if (!is_pow2(m_res) || m_res < 2 * spec.modes)
    throw ConfigError("fno: mode-shape mismatch (need power-of-two extent >= 2*modes)");

  const int n = spec.channels;
  const std::size_t nodes = in.size();
  const MlpArchitecture lift = spec.lift_arch();
  const MlpArchitecture proj = spec.proj_arch();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const std::size_t w_reals = spec.real_constrained ? nn : 2 * nn;
  const std::size_t r_reals = spec.spectral_reals_per_layer();

  std::size_t off = 0;
  std::span<const T> lift_theta = theta.subspan(off, lift.param_count());
  off += lift.param_count();
  std::vector<std::span<const T>> w_blocks(spec.length), r_blocks(spec.length);
  for (int l = 0; l < spec.length; ++l) {
    w_blocks[l] = theta.subspan(off, w_reals);
    off += w_reals;
    r_blocks[l] = theta.subspan(off, r_reals);
    off += r_reals;
  }
  std::span<const T> proj_theta = theta.subspan(off, proj.param_count());
  off += proj.param_count();
  if (off != theta.size()) throw ConfigError("fno: parameter count mismatch");

  const int hidden = spec.real_constrained ? n : 2 * n;

  // lifting: per-point MLP on (unit coords, input value)
  std::vector<std::vector<T>> v(hidden, std::vector<T>());
  for (auto& ch : v) ch.reserve(nodes);
  {
    std::vector<T> point(d + 1, ctx.make_const(0.0));
    std::vector<T> out;
    for (std::size_t p = 0; p < nodes; ++p) {
      const auto coords = unit_coords(in.extents, p);
      for (int k = 0; k < d; ++k) point[k] = ctx.make_const(coords[k]);
      point[d] = ctx.make_const(in.values[p]);
      mlp_eval<T, T>(lift, lift_theta, std::span<const T>(point), out);
      for (int c = 0; c < hidden; ++c) v[c].push_back(out[c]);
    }
  }

  // active slots at this resolution: k index per axis from sigma
  struct Active {
    std::size_t slot;
    std::size_t k_flat;
  };
  std::vector<Active> actives;
  {
    std::vector<int> sigma;
    for (std::size_t s = 0; s < spec.slot_count(); ++s) {
      slot_sigma(s, d, spec.modes, sigma);
      bool usable = true;
      std::size_t kf = 0;
      for (int k = 0; k < d; ++k) {
        if (sigma[k] == -spec.modes && m_res != 2 * spec.modes && spec.real_constrained) {
          usable = false;  // unpaired Nyquist-style slot would break symmetry
          break;
        }
        const int kk = sigma[k] >= 0 ? sigma[k] : sigma[k] + m_res;
        kf = kf * m_res + static_cast<std::size_t>(kk);
      }
      if (usable) actives.push_back({s, kf});
    }
  }

  std::vector<int> res_ext(d, m_res);
  const double scale = 1.0 / static_cast<double>(nodes);

  for (int l = 0; l < spec.length; ++l) {
    SlotTable<T> table;
    if constexpr (std::is_same_v<T, double>) {
      table = unpack_slots<double>(spec, r_blocks[l], fno_neg);
    } else {
      auto neg = [&](Var x, bool zero) -> Var {
        return zero ? ctx.tape->constant(0.0) : -x;
      };
      table = unpack_slots<Var>(spec, r_blocks[l], neg);
    }

    // forward DFT of every hidden channel (complex plane per channel)
    const int ch_complex = n;  // spectral path always runs on n complex channels
    std::vector<std::vector<Cplx<T>>> spec_in(ch_complex);
    for (int c = 0; c < ch_complex; ++c) {
      spec_in[c].resize(nodes);
      if (spec.real_constrained) {
        for (std::size_t p = 0; p < nodes; ++p)
          spec_in[c][p] = {v[c][p], ctx.make_const(0.0)};
      } else {
        for (std::size_t p = 0; p < nodes; ++p) spec_in[c][p] = {v[c][p], v[n + c][p]};
      }
      fft_nd(spec_in[c], res_ext, -1);
      for (auto& z : spec_in[c]) z = {z.re * scale, z.im * scale};
    }

    // multiply kept modes, zero the rest
    std::vector<std::vector<Cplx<T>>> spec_out(ch_complex);
    for (int c = 0; c < ch_complex; ++c)
      spec_out[c].assign(nodes, Cplx<T>{ctx.make_const(0.0), ctx.make_const(0.0)});
    for (const Active& a : actives) {
      const Cplx<T>* mat = table.at(a.slot);
      for (int i = 0; i < n; ++i) {
        Cplx<T> acc = mat[static_cast<std::size_t>(i) * n] * spec_in[0][a.k_flat];
        for (int j = 1; j < n; ++j)
          acc = acc + mat[static_cast<std::size_t>(i) * n + j] * spec_in[j][a.k_flat];
        spec_out[i][a.k_flat] = acc;
      }
    }
    for (int c = 0; c < ch_complex; ++c) fft_nd(spec_out[c], res_ext, +1);

    if (state != nullptr && spec.real_constrained) {
      if constexpr (std::is_same_v<T, double>) {
        for (int c = 0; c < ch_complex; ++c)
          for (const auto& z : spec_out[c])
            state->imag_residue = std::max(state->imag_residue, std::abs(z.im));
      }
    }

    // pointwise linear path plus spectral path, then activation
    std::vector<std::vector<T>> next(hidden);
    for (auto& ch : next) ch.reserve(nodes);
    if (spec.real_constrained) {
      std::span<const T> w = w_blocks[l];
      for (std::size_t p = 0; p < nodes; ++p) {
        for (int i = 0; i < n; ++i) {
          T acc = v[0][p] * w[static_cast<std::size_t>(i) * n];
          for (int j = 1; j < n; ++j)
            acc = acc + v[j][p] * w[static_cast<std::size_t>(i) * n + j];
          acc = acc + spec_out[i][p].re;  // imaginary residue dropped
          next[i].push_back(act_value(spec.activation, acc));
        }
      }
    } else {
      std::span<const T> w = w_blocks[l];
      for (std::size_t p = 0; p < nodes; ++p) {
        for (int i = 0; i < n; ++i) {
          // complex W: entries (re, im) interleaved row-major
          Cplx<T> acc{ctx.make_const(0.0), ctx.make_const(0.0)};
          for (int j = 0; j < n; ++j) {
            const std::size_t e = 2 * (static_cast<std::size_t>(i) * n + j);
            Cplx<T> wij{w[e], w[e + 1]};
            Cplx<T> vj{v[j][p], v[n + j][p]};
            acc = acc + wij * vj;
          }
          acc = acc + spec_out[i][p];
          // componentwise complex activation
          next[i].push_back(act_value(spec.activation, acc.re));
          next[n + i].push_back(act_value(spec.activation, acc.im));
        }
      }
    }
    v = std::move(next);
  }

  // projection: per-point MLP back to a scalar field
  std::vector<T> result;
  result.reserve(nodes);
  {
    std::vector<T> point(hidden, ctx.make_const(0.0));
    std::vector<T> out;
    for (std::size_t p = 0; p < nodes; ++p) {
      for (int c = 0; c < hidden; ++c) point[c] = v[c][p];
      mlp_eval<T, T>(proj, proj_theta, std::span<const T>(point), out);
      result.push_back(out[0]);
    }
  }
  return result;
}

}  // namespace

GridFunction fno_apply(const FnoSpec& spec, std::span<const double> theta,
                       const GridFunction& in) {
  auto vals = fno_core(spec, PlainCtx{}, theta, in, nullptr);
  return GridFunction(in.extents, in.lengths, Tensor(in.extents, std::move(vals)));
}

std::vector<Var> fno_apply_traced(const FnoSpec& spec, Tape& tape,
                                  std::span<const Var> theta, const GridFunction& in) {
  return fno_core(spec, TracedCtx{&tape}, theta, in, nullptr);
}

double fno_imag_residue(const FnoSpec& spec, std::span<const double> theta,
                        const GridFunction& in) {
  FnoState state;
  fno_core(spec, PlainCtx{}, theta, in, &state);
  return state.imag_residue;
}

std::vector<std::complex<double>> fno_unpack_spectral(const FnoSpec& spec,
                                                      std::span<const double> layer_block) {
  if (layer_block.size() != spec.spectral_reals_per_layer())
    throw ConfigError("fno_unpack_spectral: block size mismatch");
  SlotTable<double> table = unpack_slots<double>(spec, layer_block, fno_neg);
  std::vector<std::complex<double>> out(table.m.size());
  for (std::size_t i = 0; i < table.m.size(); ++i) out[i] = {table.m[i].re, table.m[i].im};
  return out;
}

std::size_t fno_conjugate_slot(const FnoSpec& spec, std::size_t slot) {
  std::vector<int> sigma;
  slot_sigma(slot, spec.dim, spec.modes, sigma);
  return conj_flat(sigma, spec.modes);
}

// ---------------------------------------------------------------------------
// DeepONet
// ---------------------------------------------------------------------------

MlpArchitecture DeepOnetSpec::branch_arch() const {
  std::vector<int> w{static_cast<int>(sensors.size())};
  for (int h : branch_hidden) w.push_back(h);
  w.push_back(latent);
  return MlpArchitecture(w, activation);
}

MlpArchitecture DeepOnetSpec::trunk_arch() const {
  std::vector<int> w{coord_dim};
  for (int h : trunk_hidden) w.push_back(h);
  w.push_back(latent);
  return MlpArchitecture(w, activation);
}

std::vector<std::vector<double>> DeepOnetSpec::grid_sensors(
    const std::vector<int>& extents, const std::vector<double>& lengths) {
  const int d = static_cast<int>(extents.size());
  std::vector<std::vector<double>> pts;
  pts.reserve(product(extents));
  std::vector<int> idx(d, 0);
  for (std::size_t flat = 0; flat < product(extents); ++flat) {
    std::vector<double> p(d);
    for (int k = 0; k < d; ++k)
      p[k] = lengths[k] * static_cast<double>(idx[k]) / extents[k];
    pts.push_back(std::move(p));
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < extents[k]) break;
      idx[k] = 0;
    }
  }
  return pts;
}

namespace {

std::vector<double> sensor_values(const DeepOnetSpec& spec, const GridFunction& u) {
  std::vector<double> vals(spec.sensors.size());
  for (std::size_t i = 0; i < spec.sensors.size(); ++i)
    vals[i] = u.interpolate(spec.sensors[i]);
  return vals;
}

}  // namespace

double deeponet_apply(const DeepOnetSpec& spec, std::span<const double> theta,
                      const GridFunction& u, std::span<const double> y) {
  if (static_cast<int>(y.size()) != spec.coord_dim)
    throw ConfigError("deeponet: query dimension mismatch");
  const MlpArchitecture ba = spec.branch_arch();
  const MlpArchitecture ta = spec.trunk_arch();
  const std::size_t bd = ba.param_count();
  if (theta.size() != spec.param_count())
    throw ConfigError("deeponet: parameter count mismatch");
  const auto uvals = sensor_values(spec, u);
  const auto b = mlp_apply(ba, theta.subspan(0, bd), uvals);
  const auto t = mlp_apply(ta, theta.subspan(bd), y);
  double acc = 0.0;
  for (int i = 0; i < spec.latent; ++i) acc += b[i] * t[i];
  return acc;
}

GridFunction deeponet_apply_grid(const DeepOnetSpec& spec, std::span<const double> theta,
                                 const GridFunction& u) {
  const MlpArchitecture ba = spec.branch_arch();
  const MlpArchitecture ta = spec.trunk_arch();
  const std::size_t bd = ba.param_count();
  if (theta.size() != spec.param_count())
    throw ConfigError("deeponet: parameter count mismatch");
  const auto uvals = sensor_values(spec, u);
  const auto b = mlp_apply(ba, theta.subspan(0, bd), uvals);

  GridFunction out(u.extents, u.lengths);
  const auto queries = DeepOnetSpec::grid_sensors(u.extents, u.lengths);
  for (std::size_t p = 0; p < queries.size(); ++p) {
    const auto t = mlp_apply(ta, theta.subspan(bd), queries[p]);
    double acc = 0.0;
    for (int i = 0; i < spec.latent; ++i) acc += b[i] * t[i];
    out.values[p] = acc;
  }
  return out;
}

std::vector<Var> deeponet_apply_traced(const DeepOnetSpec& spec, Tape& tape,
                                       std::span<const Var> theta, const GridFunction& u) {
  const MlpArchitecture ba = spec.branch_arch();
  const MlpArchitecture ta = spec.trunk_arch();
  const std::size_t bd = ba.param_count();
  if (theta.size() != spec.param_count())
    throw ConfigError("deeponet: parameter count mismatch");
  const auto uvals = sensor_values(spec, u);
  const auto b = mlp_eval_traced(tape, ba, theta.subspan(0, bd), uvals);

  std::vector<Var> out;
  const auto queries = DeepOnetSpec::grid_sensors(u.extents, u.lengths);
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const auto t = mlp_eval_traced(tape, ta, theta.subspan(bd), q);
    Var acc = b[0] * t[0];
    for (int i = 1; i < spec.latent; ++i) acc = acc + b[i] * t[i];
    out.push_back(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Integral kernel neural operator
// ---------------------------------------------------------------------------

void IkNoSpec::validate() const {
  if (extents.empty() || extents.size() != lengths.size())
    throw ConfigError("ikno: extents/lengths mismatch");
  if (channels < 1 || length < 1) throw ConfigError("ikno: channels/length must be positive");
  double min_h = lengths[0] / extents[0];
  for (std::size_t k = 0; k < extents.size(); ++k)
    min_h = std::min(min_h, lengths[k] / extents[k]);
  if (!(radius >= min_h))
    throw ConfigError("ikno: quadrature radius below one grid cell (empty stencil)");
}

MlpArchitecture IkNoSpec::lift_arch() const {
  std::vector<int> w{static_cast<int>(extents.size()) + 1};
  for (int h : lift_hidden) w.push_back(h);
  w.push_back(channels);
  return MlpArchitecture(w, activation);
}

MlpArchitecture IkNoSpec::kernel_arch() const {
  std::vector<int> w{2 * static_cast<int>(extents.size()) + 2};
  for (int h : kernel_hidden) w.push_back(h);
  w.push_back(channels * channels);
  return MlpArchitecture(w, activation);
}

MlpArchitecture IkNoSpec::proj_arch() const {
  std::vector<int> w{channels};
  for (int h : proj_hidden) w.push_back(h);
  w.push_back(1);
  return MlpArchitecture(w, activation);
}

std::size_t IkNoSpec::param_count() const {
  validate();
  const std::size_t nn = static_cast<std::size_t>(channels) * channels;
  return lift_arch().param_count() +
         static_cast<std::size_t>(length) * (nn + kernel_arch().param_count()) +
         proj_arch().param_count();
}

namespace {

// Relative index offsets whose periodic distance stays within the radius.
std::vector<std::vector<int>> ikno_stencil(const IkNoSpec& spec) {
  const int d = static_cast<int>(spec.extents.size());
  std::vector<std::vector<int>> stencil;
  std::vector<int> u(d, 0);
  const std::size_t nodes = product(spec.extents);
  for (std::size_t flat = 0; flat < nodes; ++flat) {
    double dist2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double h = spec.lengths[k] / spec.extents[k];
      const double wrapped = std::min(u[k], spec.extents[k] - u[k]) * h;
      dist2 += wrapped * wrapped;
    }
    if (dist2 <= spec.radius * spec.radius) stencil.push_back(u);
    for (int k = d - 1; k >= 0; --k) {
      if (++u[k] < spec.extents[k]) break;
      u[k] = 0;
    }
  }
  return stencil;
}

template <class Ctx, class T = typename Ctx::value_type>
std::vector<T> ikno_core(const IkNoSpec& spec, const Ctx& ctx, std::span<const T> theta,
                         const GridFunction& in) {
  spec.validate();
  if (in.extents != spec.extents) throw ConfigError("ikno: input extents mismatch");
  if (theta.size() != spec.param_count()) throw ConfigError("ikno: parameter count mismatch");

  const int d = static_cast<int>(spec.extents.size());
  const int n = spec.channels;
  const std::size_t nodes = in.size();
  const MlpArchitecture lift = spec.lift_arch();
  const MlpArchitecture kern = spec.kernel_arch();
  const MlpArchitecture proj = spec.proj_arch();
  const std::size_t nn = static_cast<std::size_t>(n) * n;

  std::size_t off = 0;
  std::span<const T> lift_theta = theta.subspan(off, lift.param_count());
  off += lift.param_count();
  std::vector<std::span<const T>> w_blocks(spec.length), k_blocks(spec.length);
  for (int l = 0; l < spec.length; ++l) {
    w_blocks[l] = theta.subspan(off, nn);
    off += nn;
    k_blocks[l] = theta.subspan(off, kern.param_count());
    off += kern.param_count();
  }
  std::span<const T> proj_theta = theta.subspan(off, proj.param_count());

  // physical node coordinates
  std::vector<std::vector<double>> coords(nodes);
  {
    std::vector<int> idx(d, 0);
    for (std::size_t p = 0; p < nodes; ++p) {
      coords[p].resize(d);
      for (int k = 0; k < d; ++k) coords[p][k] = in.node(k, idx[k]);
      for (int k = d - 1; k >= 0; --k) {
        if (++idx[k] < spec.extents[k]) break;
        idx[k] = 0;
      }
    }
  }

  const auto stencil = ikno_stencil(spec);
  const double cellvol = in.cell_volume();

  // lifting
  std::vector<std::vector<T>> v(nodes);
  {
    std::vector<T> point(d + 1, ctx.make_const(0.0));
    for (std::size_t p = 0; p < nodes; ++p) {
      for (int k = 0; k < d; ++k) point[k] = ctx.make_const(coords[p][k]);
      point[d] = ctx.make_const(in.values[p]);
      mlp_eval<T, T>(lift, lift_theta, std::span<const T>(point), v[p]);
    }
  }

  std::vector<int> idx(d), jdx(d);
  std::vector<T> kin(2 * d + 2, ctx.make_const(0.0)), kout;
  for (int l = 0; l < spec.length; ++l) {
    std::vector<std::vector<T>> next(nodes);
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t p = 0; p < nodes; ++p) {
      std::vector<T> acc(n, ctx.make_const(0.0));
      // pointwise linear part
      std::span<const T> w = w_blocks[l];
      for (int i = 0; i < n; ++i) {
        T a = v[p][0] * w[static_cast<std::size_t>(i) * n];
        for (int j = 1; j < n; ++j)
          a = a + v[p][j] * w[static_cast<std::size_t>(i) * n + j];
        acc[i] = a;
      }
      // kernel quadrature over the ball
      for (const auto& u : stencil) {
        std::size_t q = 0;
        for (int k = 0; k < d; ++k) {
          jdx[k] = mod_index(spec.extents[k], idx[k] + u[k]);
          q = q * spec.extents[k] + static_cast<std::size_t>(jdx[k]);
        }
        for (int k = 0; k < d; ++k) {
          kin[k] = ctx.make_const(coords[p][k]);
          kin[d + k] = ctx.make_const(coords[q][k]);
        }
        kin[2 * d] = ctx.make_const(in.values[p]);
        kin[2 * d + 1] = ctx.make_const(in.values[q]);
        mlp_eval<T, T>(kern, k_blocks[l], std::span<const T>(kin), kout);
        for (int i = 0; i < n; ++i) {
          T a = kout[static_cast<std::size_t>(i) * n] * v[q][0];
          for (int j = 1; j < n; ++j)
            a = a + kout[static_cast<std::size_t>(i) * n + j] * v[q][j];
          acc[i] = acc[i] + a * cellvol;
        }
      }
      next[p].resize(n, ctx.make_const(0.0));
      for (int i = 0; i < n; ++i) next[p][i] = act_value(spec.activation, acc[i]);
      for (int k = d - 1; k >= 0; --k) {
        if (++idx[k] < spec.extents[k]) break;
        idx[k] = 0;
      }
    }
    v = std::move(next);
  }

  std::vector<T> result;
  result.reserve(nodes);
  std::vector<T> out;
  for (std::size_t p = 0; p < nodes; ++p) {
    mlp_eval<T, T>(proj, proj_theta, std::span<const T>(v[p]), out);
    result.push_back(out[0]);
  }
  return result;
}

}  // namespace

GridFunction ikno_apply(const IkNoSpec& spec, std::span<const double> theta,
                        const GridFunction& in) {
  auto vals = ikno_core(spec, PlainCtx{}, theta, in);
  return GridFunction(in.extents, in.lengths, Tensor(in.extents, std::move(vals)));
}

std::vector<Var> ikno_apply_traced(const IkNoSpec& spec, Tape& tape,
                                   std::span<const Var> theta, const GridFunction& in) {
  return ikno_core(spec, TracedCtx{&tape}, theta, in);
}


// ---------------------------------------------------------------------------
// JSON round trips for the spec structs (checkpoint descriptors, CLI configs)
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const FcnnOperatorSpec& s) {
  j = {{"type", "fcnn"},
       {"extents", s.extents},
       {"hidden", s.hidden},
       {"activation", to_string(s.activation)}};
}
void from_json(const nlohmann::json& j, FcnnOperatorSpec& s) {
  s.extents = j.at("extents").get<std::vector<int>>();
  s.hidden = j.at("hidden").get<std::vector<int>>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
}

void to_json(nlohmann::json& j, const PeriodicCnnSpec& s) {
  j = {{"type", "pcnn"},
       {"extents", s.extents},
       {"channels", s.channels},
       {"half_widths", s.half_widths},
       {"activation", to_string(s.activation)}};
}
void from_json(const nlohmann::json& j, PeriodicCnnSpec& s) {
  s.extents = j.at("extents").get<std::vector<int>>();
  s.channels = j.at("channels").get<std::vector<int>>();
  s.half_widths = j.at("half_widths").get<std::vector<std::vector<int>>>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
}

void to_json(nlohmann::json& j, const EncDecCnnSpec& s) {
  j = {{"type", "encdec"},
       {"extents", s.extents},
       {"channels", s.channels},
       {"kernel", s.kernel},
       {"activation", to_string(s.activation)}};
}
void from_json(const nlohmann::json& j, EncDecCnnSpec& s) {
  s.extents = j.at("extents").get<std::vector<int>>();
  s.channels = j.at("channels").get<std::vector<int>>();
  s.kernel = j.at("kernel").get<std::vector<std::vector<int>>>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
}

void to_json(nlohmann::json& j, const FnoSpec& s) {
  j = {{"type", "fno"},
       {"dim", s.dim},
       {"grid_n", s.grid_n},
       {"channels", s.channels},
       {"length", s.length},
       {"modes", s.modes},
       {"lift_hidden", s.lift_hidden},
       {"proj_hidden", s.proj_hidden},
       {"real_constrained", s.real_constrained},
       {"activation", to_string(s.activation)}};
}
void from_json(const nlohmann::json& j, FnoSpec& s) {
  s.dim = j.at("dim").get<int>();
  s.grid_n = j.at("grid_n").get<int>();
  s.channels = j.at("channels").get<int>();
  s.length = j.at("length").get<int>();
  s.modes = j.at("modes").get<int>();
  s.lift_hidden = j.at("lift_hidden").get<std::vector<int>>();
  s.proj_hidden = j.at("proj_hidden").get<std::vector<int>>();
  s.real_constrained = j.at("real_constrained").get<bool>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
}

void to_json(nlohmann::json& j, const DeepOnetSpec& s) {
  j = {{"type", "deeponet"},
       {"sensors", s.sensors},
       {"coord_dim", s.coord_dim},
       {"latent", s.latent},
       {"branch_hidden", s.branch_hidden},
       {"trunk_hidden", s.trunk_hidden},
       {"activation", to_string(s.activation)}};
}
void from_json(const nlohmann::json& j, DeepOnetSpec& s) {
  s.sensors = j.at("sensors").get<std::vector<std::vector<double>>>();
  s.coord_dim = j.at("coord_dim").get<int>();
  s.latent = j.at("latent").get<int>();
  s.branch_hidden = j.at("branch_hidden").get<std::vector<int>>();
  s.trunk_hidden = j.at("trunk_hidden").get<std::vector<int>>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
}

void to_json(nlohmann::json& j, const IkNoSpec& s) {
  j = {{"type", "ikno"},
       {"extents", s.extents},
       {"lengths", s.lengths},
       {"channels", s.channels},
       {"length", s.length},
       {"radius", s.radius},
       {"lift_hidden", s.lift_hidden},
       {"kernel_hidden", s.kernel_hidden},
       {"proj_hidden", s.proj_hidden},
       {"activation", to_string(s.activation)}};
}
void from_json(const nlohmann::json& j, IkNoSpec& s) {
  s.extents = j.at("extents").get<std::vector<int>>();
  s.lengths = j.at("lengths").get<std::vector<double>>();
  s.channels = j.at("channels").get<int>();
  s.length = j.at("length").get<int>();
  s.radius = j.at("radius").get<double>();
  s.lift_hidden = j.at("lift_hidden").get<std::vector<int>>();
  s.kernel_hidden = j.at("kernel_hidden").get<std::vector<int>>();
  s.proj_hidden = j.at("proj_hidden").get<std::vector<int>>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
}

// ---------------------------------------------------------------------------
// Model handles
// ---------------------------------------------------------------------------

namespace {

void init_uniform(std::span<double> block, double bound, RngState& rng) {
  for (double& v : block) v = rng.next_uniform(-bound, bound);
}

class FcnnModel final : public OperatorModel {
 public:
  explicit FcnnModel(FcnnOperatorSpec s) : spec_(std::move(s)) {}
  std::string name() const override { return "ANN"; }
  std::size_t param_count() const override { return spec_.param_count(); }
  ParamVector init_params(RngState& rng) const override {
    return mlp_init(spec_.arch(), rng);
  }
  GridFunction apply(std::span<const double> theta, const GridFunction& in) const override {
    return fcnn_operator_apply(spec_, theta, in);
  }
  std::vector<Var> apply_traced(Tape& tape, std::span<const Var> theta,
                                const GridFunction& in) const override {
    return fcnn_operator_apply_traced(spec_, tape, theta, in);
  }
  nlohmann::json descriptor() const override { return nlohmann::json(spec_); }
  const FcnnOperatorSpec& spec() const { return spec_; }

 private:
  FcnnOperatorSpec spec_;
};

class PcnnModel final : public OperatorModel {
 public:
  explicit PcnnModel(PeriodicCnnSpec s) : spec_(std::move(s)) { spec_.validate(); }
  std::string name() const override { return "Periodic-CNN"; }
  std::size_t param_count() const override { return spec_.param_count(); }
  ParamVector init_params(RngState& rng) const override {
    ParamVector theta(spec_.param_count(), 0.0);
    std::size_t off = 0;
    for (std::size_t l = 1; l < spec_.channels.size(); ++l) {
      std::size_t taps = 1;
      for (int w : spec_.half_widths[l - 1]) taps *= static_cast<std::size_t>(2 * w + 1);
      const std::size_t nk = static_cast<std::size_t>(spec_.channels[l]) *
                             spec_.channels[l - 1] * taps;
      const double bound =
          std::sqrt(6.0 / ((spec_.channels[l] + spec_.channels[l - 1]) * taps));
      init_uniform(std::span<double>(theta).subspan(off, nk), bound, rng);
      off += nk + spec_.channels[l];  // biases stay zero
    }
    return theta;
  }
  GridFunction apply(std::span<const double> theta, const GridFunction& in) const override {
    return pcnn_operator_apply(spec_, theta, in);
  }
  std::vector<Var> apply_traced(Tape& tape, std::span<const Var> theta,
                                const GridFunction& in) const override {
    return pcnn_operator_apply_traced(spec_, tape, theta, in);
  }
  nlohmann::json descriptor() const override { return nlohmann::json(spec_); }

 private:
  PeriodicCnnSpec spec_;
};

class EncDecModel final : public OperatorModel {
 public:
  explicit EncDecModel(EncDecCnnSpec s) : spec_(std::move(s)) { spec_.validate(); }
  std::string name() const override { return "Enc.-Dec.-CNN"; }
  std::size_t param_count() const override { return spec_.param_count(); }
  ParamVector init_params(RngState& rng) const override {
    ParamVector theta(spec_.param_count(), 0.0);
    std::size_t off = 0;
    const int L = static_cast<int>(spec_.channels.size()) - 1;
    for (int pass = 0; pass < 2; ++pass) {
      for (int l = 1; l <= L; ++l) {
        std::size_t taps = 1;
        for (int w : spec_.kernel[l - 1]) taps *= static_cast<std::size_t>(w);
        const int n_out = pass == 0 ? spec_.channels[l] : spec_.channels[l - 1];
        const int n_in = pass == 0 ? spec_.channels[l - 1] : spec_.channels[l];
        const std::size_t nk = static_cast<std::size_t>(n_out) * n_in * taps;
        const double bound = std::sqrt(6.0 / ((n_out + n_in) * taps));
        init_uniform(std::span<double>(theta).subspan(off, nk), bound, rng);
        off += nk + n_out;
      }
    }
    return theta;
  }
  GridFunction apply(std::span<const double> theta, const GridFunction& in) const override {
    return encdec_operator_apply(spec_, theta, in);
  }
  std::vector<Var> apply_traced(Tape& tape, std::span<const Var> theta,
                                const GridFunction& in) const override {
    return encdec_operator_apply_traced(spec_, tape, theta, in);
  }
  nlohmann::json descriptor() const override { return nlohmann::json(spec_); }

 private:
  EncDecCnnSpec spec_;
};

class FnoModel final : public OperatorModel {
 public:
  explicit FnoModel(FnoSpec s) : spec_(std::move(s)) { spec_.validate(); }
  std::string name() const override { return "FNO"; }
  std::size_t param_count() const override { return spec_.param_count(); }
  ParamVector init_params(RngState& rng) const override {
    ParamVector theta(spec_.param_count(), 0.0);
    std::size_t off = 0;
    {
      ParamVector lift = mlp_init(spec_.lift_arch(), rng);
      std::copy(lift.begin(), lift.end(), theta.begin());
      off += lift.size();
    }
    const int n = spec_.channels;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const std::size_t w_reals = spec_.real_constrained ? nn : 2 * nn;
    const double w_bound = std::sqrt(6.0 / (2.0 * n));
    const double r_bound = 1.0 / n;
    for (int l = 0; l < spec_.length; ++l) {
      init_uniform(std::span<double>(theta).subspan(off, w_reals), w_bound, rng);
      off += w_reals;
      init_uniform(std::span<double>(theta).subspan(off, spec_.spectral_reals_per_layer()),
                   r_bound, rng);
      off += spec_.spectral_reals_per_layer();
    }
    {
      ParamVector proj = mlp_init(spec_.proj_arch(), rng);
      std::copy(proj.begin(), proj.end(), theta.begin() + off);
    }
    return theta;
  }
  GridFunction apply(std::span<const double> theta, const GridFunction& in) const override {
    return fno_apply(spec_, theta, in);
  }
  std::vector<Var> apply_traced(Tape& tape, std::span<const Var> theta,
                                const GridFunction& in) const override {
    return fno_apply_traced(spec_, tape, theta, in);
  }
  nlohmann::json descriptor() const override { return nlohmann::json(spec_); }

 private:
  FnoSpec spec_;
};

class DeepOnetModel final : public OperatorModel {
 public:
  explicit DeepOnetModel(DeepOnetSpec s) : spec_(std::move(s)) {}
  std::string name() const override { return "DeepONet"; }
  std::size_t param_count() const override { return spec_.param_count(); }
  ParamVector init_params(RngState& rng) const override {
    ParamVector theta = mlp_init(spec_.branch_arch(), rng);
    ParamVector trunk = mlp_init(spec_.trunk_arch(), rng);
    theta.insert(theta.end(), trunk.begin(), trunk.end());
    return theta;
  }
  GridFunction apply(std::span<const double> theta, const GridFunction& in) const override {
    return deeponet_apply_grid(spec_, theta, in);
  }
  std::vector<Var> apply_traced(Tape& tape, std::span<const Var> theta,
                                const GridFunction& in) const override {
    return deeponet_apply_traced(spec_, tape, theta, in);
  }
  nlohmann::json descriptor() const override { return nlohmann::json(spec_); }

 private:
  DeepOnetSpec spec_;
};

class IkNoModel final : public OperatorModel {
 public:
  explicit IkNoModel(IkNoSpec s) : spec_(std::move(s)) { spec_.validate(); }
  std::string name() const override { return "IKNO"; }
  std::size_t param_count() const override { return spec_.param_count(); }
  ParamVector init_params(RngState& rng) const override {
    ParamVector theta(spec_.param_count(), 0.0);
    std::size_t off = 0;
    ParamVector lift = mlp_init(spec_.lift_arch(), rng);
    std::copy(lift.begin(), lift.end(), theta.begin());
    off += lift.size();
    const int n = spec_.channels;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const double w_bound = std::sqrt(6.0 / (2.0 * n));
    for (int l = 0; l < spec_.length; ++l) {
      init_uniform(std::span<double>(theta).subspan(off, nn), w_bound, rng);
      off += nn;
      ParamVector kern = mlp_init(spec_.kernel_arch(), rng);
      std::copy(kern.begin(), kern.end(), theta.begin() + off);
      off += kern.size();
    }
    ParamVector proj = mlp_init(spec_.proj_arch(), rng);
    std::copy(proj.begin(), proj.end(), theta.begin() + off);
    return theta;
  }
  GridFunction apply(std::span<const double> theta, const GridFunction& in) const override {
    return ikno_apply(spec_, theta, in);
  }
  std::vector<Var> apply_traced(Tape& tape, std::span<const Var> theta,
                                const GridFunction& in) const override {
    return ikno_apply_traced(spec_, tape, theta, in);
  }
  nlohmann::json descriptor() const override { return nlohmann::json(spec_); }

 private:
  IkNoSpec spec_;
};

}  // namespace

std::unique_ptr<OperatorModel> make_model(const FcnnOperatorSpec& s) {
  return std::make_unique<FcnnModel>(s);
}
std::unique_ptr<OperatorModel> make_model(const PeriodicCnnSpec& s) {
  return std::make_unique<PcnnModel>(s);
}
std::unique_ptr<OperatorModel> make_model(const EncDecCnnSpec& s) {
  return std::make_unique<EncDecModel>(s);
}
std::unique_ptr<OperatorModel> make_model(const FnoSpec& s) {
  return std::make_unique<FnoModel>(s);
}
std::unique_ptr<OperatorModel> make_model(const DeepOnetSpec& s) {
  return std::make_unique<DeepOnetModel>(s);
}
std::unique_ptr<OperatorModel> make_model(const IkNoSpec& s) {
  return std::make_unique<IkNoModel>(s);
}

std::unique_ptr<OperatorModel> OperatorModel::from_descriptor(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "fcnn") return make_model(j.get<FcnnOperatorSpec>());
  if (type == "pcnn") return make_model(j.get<PeriodicCnnSpec>());
  if (type == "encdec") return make_model(j.get<EncDecCnnSpec>());
  if (type == "fno") return make_model(j.get<FnoSpec>());
  if (type == "deeponet") return make_model(j.get<DeepOnetSpec>());
  if (type == "ikno") return make_model(j.get<IkNoSpec>());
  throw ConfigError("unknown model type: " + type);
}

}  // namespace deeppde
