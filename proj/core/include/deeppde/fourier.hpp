#pragma once

#include <complex>
#include <span>
#include <vector>

#include "deeppde/errors.hpp"
#include "deeppde/tensor.hpp"

namespace deeppde {

/// Complex value over a generic scalar (double or Var).
template <class T>
struct Cplx {
  T re{};
  T im{};
};

template <class T>
Cplx<T> operator+(const Cplx<T>& a, const Cplx<T>& b) {
  return {a.re + b.re, a.im + b.im};
}
template <class T>
Cplx<T> operator-(const Cplx<T>& a, const Cplx<T>& b) {
  return {a.re - b.re, a.im - b.im};
}
template <class T>
Cplx<T> operator*(const Cplx<T>& a, const Cplx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline std::complex<double> mul_tw(const std::complex<double>& a, double wr, double wi) {
  return {a.real() * wr - a.imag() * wi, a.real() * wi + a.imag() * wr};
}
template <class T>
Cplx<T> mul_tw(const Cplx<T>& a, double wr, double wi) {
  return {a.re * wr - a.im * wi, a.re * wi + a.im * wr};
}

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place radix-2 FFT for power-of-two lengths.
/// sign = -1: sum_r a_r exp(-2 pi i k r / N); sign = +1: conjugate kernel.
/// No normalization on either direction.
template <class C>
void fft_pow2(std::span<C> a, int sign) {
  const std::size_t n = a.size();
  // bit reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const double wr0 = std::cos(ang), wi0 = std::sin(ang);
    for (std::size_t i = 0; i < n; i += len) {
      double wr = 1.0, wi = 0.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        C u = a[i + k];
        C v = mul_tw(a[i + k + len / 2], wr, wi);
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        const double nwr = wr * wr0 - wi * wi0;
        wi = wr * wi0 + wi * wr0;
        wr = nwr;
      }
    }
  }
}

/// Direct O(N^2) transform along a vector; oracle for the FFT fast path and
/// fallback for non-power-of-two lengths.
template <class C>
std::vector<C> dft_naive_1d(std::span<const C> a, int sign) {
  const std::size_t n = a.size();
  std::vector<C> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    C acc = a[0];  // r = 0 term, unit twiddle
    for (std::size_t r = 1; r < n; ++r) {
      const double ang = sign * 2.0 * M_PI * static_cast<double>(k * r % n) /
                         static_cast<double>(n);
      acc = acc + mul_tw(a[r], std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

/// Separable d-dimensional transform over row-major data (no normalization).
template <class C>
void fft_nd(std::vector<C>& data, std::span<const int> extents, int sign) {
  const int d = static_cast<int>(extents.size());
  std::size_t total = 1;
  for (int e : extents) total *= static_cast<std::size_t>(e);
  if (data.size() != total) throw ConfigError("fft_nd: data size mismatch");

  std::size_t inner = 1;  // product of extents after the axis
  for (int axis = d - 1; axis >= 0; --axis) {
    const int n = extents[axis];
    const std::size_t stride = inner;
    const std::size_t block = stride * static_cast<std::size_t>(n);
    std::vector<C> line(static_cast<std::size_t>(n));
    for (std::size_t start = 0; start < total; start += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        for (int k = 0; k < n; ++k) line[k] = data[start + off + stride * k];
        if (is_pow2(n)) {
          fft_pow2(std::span<C>(line), sign);
        } else {
          auto out = dft_naive_1d(std::span<const C>(line), sign);
          line = std::move(out);
        }
        for (int k = 0; k < n; ++k) data[start + off + stride * k] = line[k];
      }
    }
    inner *= static_cast<std::size_t>(n);
  }
}

/// Complex coefficients on {0,...,N-1}^d stored as paired real/imag tensors.
struct FourierCoeffs {
  Tensor re;
  Tensor im;

  FourierCoeffs() = default;
  explicit FourierCoeffs(std::vector<int> extents) : re(extents), im(std::move(extents)) {}

  const std::vector<int>& extents() const { return re.shape(); }
  std::size_t size() const { return re.size(); }
  std::complex<double> at_flat(std::size_t i) const { return {re[i], im[i]}; }
  void set_flat(std::size_t i, std::complex<double> v) {
    re[i] = v.real();
    im[i] = v.imag();
  }
};

/// Normalized discretized Fourier transform of grid samples:
/// c(k) = N^-d sum_r f(r/N) exp(-2 pi i <k,r> / N). Requires extent N on
/// every axis. Power-of-two N uses the FFT path.
FourierCoeffs dft_n(const Tensor& values, int n);

/// Direct-sum evaluation of the same transform (test oracle).
FourierCoeffs dft_n_naive(const Tensor& values, int n);

/// Trig-polynomial evaluation sum_k v(k) exp(2 pi i <k,x>) at one point.
std::complex<double> idft_point(const FourierCoeffs& v, std::span<const double> x);

/// Grid fast path: values at x = r/N for all r, via inverse FFT (plain sum,
/// no normalization).
std::vector<std::complex<double>> idft_grid(const FourierCoeffs& v);

}  // namespace deeppde
