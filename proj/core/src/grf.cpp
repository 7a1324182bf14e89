#include "deeppde/pde.hpp"

#include <cmath>
#include <complex>

#include "deeppde/errors.hpp"
#include "deeppde/fourier.hpp"

namespace deeppde {

void GrfSpec::validate() const {
  if (!(variance > 0.0)) throw ConfigError("grf: variance must be positive");
  if (!(offset > 0.0)) throw ConfigError("grf: offset must be positive");
  if (!(decay > 0.0)) throw ConfigError("grf: decay must be positive");
}

double GrfSpec::mode_variance(double lambda) const {
  const double raw = variance * std::pow(offset + lambda, -decay) - shift;
  if (raw < 0.0) {
    if (!clamp) throw ConfigError("grf: negative mode variance without clamp");
    return 0.0;
  }
  return raw;
}

void to_json(nlohmann::json& j, const GrfSpec& s) {
  j = {{"variance", s.variance},
       {"offset", s.offset},
       {"decay", s.decay},
       {"shift", s.shift},
       {"clamp", s.clamp}};
}

void from_json(const nlohmann::json& j, GrfSpec& s) {
  s.variance = j.at("variance").get<double>();
  s.offset = j.at("offset").get<double>();
  s.decay = j.at("decay").get<double>();
  s.shift = j.value("shift", 0.0);
  s.clamp = j.value("clamp", true);
}

GridFunction grf_sample(const GrfSpec& spec, const std::vector<int>& extents,
                        const std::vector<double>& lengths, RngState& rng) {
  spec.validate();
  if (extents.empty() || extents.size() != lengths.size())
    throw ConfigError("grf_sample: extents/lengths mismatch");
  const int d = static_cast<int>(extents.size());
  std::size_t nodes = 1;
  for (int e : extents) nodes *= static_cast<std::size_t>(e);

  std::vector<std::complex<double>> coeff(nodes, {0.0, 0.0});
  std::vector<int> kidx(d, 0), cidx(d);
  for (std::size_t f = 0; f < nodes; ++f) {
    // conjugate partner index (N - k) mod N per axis
    std::size_t cf = 0;
    for (int a = 0; a < d; ++a) {
      cidx[a] = (extents[a] - kidx[a]) % extents[a];
      cf = cf * extents[a] + static_cast<std::size_t>(cidx[a]);
    }
    if (f <= cf) {  // canonical representative draws the randomness
      double lambda = 0.0;
      for (int a = 0; a < d; ++a) {
        const int sk = kidx[a] <= extents[a] / 2 ? kidx[a] : kidx[a] - extents[a];
        const double w = 2.0 * M_PI * sk / lengths[a];
        lambda += w * w;
      }
      const double v = spec.mode_variance(lambda);
      if (f == cf) {
        coeff[f] = {rng.next_gaussian() * std::sqrt(v), 0.0};
      } else {
        const double s = std::sqrt(0.5 * v);
        const double re = rng.next_gaussian() * s;
        const double im = rng.next_gaussian() * s;
        coeff[f] = {re, im};
        coeff[cf] = {re, -im};
      }
    }
    for (int a = d - 1; a >= 0; --a) {
      if (++kidx[a] < extents[a]) break;
      kidx[a] = 0;
    }
  }

  // field(x_r) = sum_k c_k exp(+2 pi i <k,r>/N): plain inverse transform
  fft_nd(coeff, extents, +1);
  GridFunction g(extents, lengths);
  for (std::size_t i = 0; i < nodes; ++i) g.values[i] = coeff[i].real();
  return g;
}

}  // namespace deeppde
