#pragma once

#include <span>
#include <vector>

#include "deeppde/errors.hpp"
#include "deeppde/grid.hpp"
#include "deeppde/tensor.hpp"

namespace deeppde {

namespace detail {

inline std::size_t total(std::span<const int> extents) {
  std::size_t n = 1;
  for (int e : extents) n *= static_cast<std::size_t>(e);
  return n;
}

inline bool next_index(std::span<int> idx, std::span<const int> extents) {
  for (int k = static_cast<int>(extents.size()) - 1; k >= 0; --k) {
    if (++idx[k] < extents[k]) return true;
    idx[k] = 0;
  }
  return false;
}

// Periodic convolution, kernel indices j_k in [-w_k, w_k], wrap-around input
// indexing. Generic over the value type so the same kernel serves plain and
// taped evaluation.
template <class T>
void pconv_impl(std::span<const T> a, std::span<const int> ext,
                std::span<const T> w, std::span<const int> halfw, std::span<T> out) {
  const int d = static_cast<int>(ext.size());
  std::vector<int> kext(d);
  for (int k = 0; k < d; ++k) {
    kext[k] = 2 * halfw[k] + 1;
    if (ext[k] < kext[k]) throw ConfigError("pconv: kernel larger than input");
  }
  std::vector<int> i(d, 0), j(d, 0);
  std::size_t oi = 0;
  do {
    std::fill(j.begin(), j.end(), 0);
    bool first = true;
    T acc{};
    do {
      std::size_t ai = 0, wi = 0;
      for (int k = 0; k < d; ++k) {
        ai = ai * ext[k] + mod_index(ext[k], i[k] + (j[k] - halfw[k]));
        wi = wi * kext[k] + j[k];
      }
      if (first) {
        acc = a[ai] * w[wi];
        first = false;
      } else {
        acc = acc + a[ai] * w[wi];
      }
    } while (next_index(j, kext));
    out[oi++] = acc;
  } while (next_index(i, ext));
}

// Full-stride convolution: non-overlapping blocks, output extent b_k = a_k/w_k.
template <class T>
void sconv_impl(std::span<const T> a, std::span<const int> ext,
                std::span<const T> w, std::span<const int> kext, std::span<T> out) {
  const int d = static_cast<int>(ext.size());
  std::vector<int> bext(d);
  for (int k = 0; k < d; ++k) {
    if (kext[k] <= 0 || ext[k] % kext[k] != 0)
      throw ConfigError("sconv: kernel extent must divide input extent");
    bext[k] = ext[k] / kext[k];
  }
  std::vector<int> i(d, 0), j(d, 0);
  std::size_t oi = 0;
  do {
    std::fill(j.begin(), j.end(), 0);
    bool first = true;
    T acc{};
    do {
      std::size_t ai = 0, wi = 0;
      for (int k = 0; k < d; ++k) {
        ai = ai * ext[k] + (i[k] * kext[k] + j[k]);
        wi = wi * kext[k] + j[k];
      }
      if (first) {
        acc = a[ai] * w[wi];
        first = false;
      } else {
        acc = acc + a[ai] * w[wi];
      }
    } while (next_index(j, kext));
    out[oi++] = acc;
  } while (next_index(i, bext));
}

// Transposed full-stride convolution: (B tconv W)_{i*w+j} = B_i W_j.
template <class T>
void tconv_impl(std::span<const T> b, std::span<const int> bext,
                std::span<const T> w, std::span<const int> kext, std::span<T> out) {
  const int d = static_cast<int>(bext.size());
  std::vector<int> i(d, 0), j(d, 0);
  std::size_t bi = 0;
  do {
    std::fill(j.begin(), j.end(), 0);
    std::size_t wi = 0;
    do {
      std::size_t oi = 0;
      wi = 0;
      for (int k = 0; k < d; ++k) {
        oi = oi * (bext[k] * kext[k]) + (i[k] * kext[k] + j[k]);
        wi = wi * kext[k] + j[k];
      }
      out[oi] = b[bi] * w[wi];
    } while (next_index(j, kext));
    ++bi;
  } while (next_index(i, bext));
}

}  // namespace detail

/// Discrete periodic convolution; output shape equals input shape. The kernel
/// tensor has odd extents 2*w_k+1 with index 0 at the centre.
Tensor pconv(const Tensor& a, const Tensor& kernel);

/// All-ones tensor.
Tensor one_tensor(std::vector<int> extents);

/// Discrete convolution with full stride; kernel extents must divide the
/// input extents, output extent is the quotient.
Tensor sconv(const Tensor& a, const Tensor& kernel);

/// Discrete transposed convolution with full stride; output extent is the
/// product of input and kernel extents.
Tensor tconv(const Tensor& b, const Tensor& kernel);

}  // namespace deeppde
