#include "deeppde/fourier.hpp"

#include <cmath>

namespace deeppde {

namespace {

void check_cubic(const Tensor& values, int n) {
  for (int e : values.shape())
    if (e != n) throw ConfigError("dft_n: grid extent does not match N");
  if (values.dims() == 0) throw ConfigError("dft_n: scalar input");
}

}  // namespace

FourierCoeffs dft_n(const Tensor& values, int n) {
  check_cubic(values, n);
  std::vector<std::complex<double>> data(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) data[i] = {values[i], 0.0};
  fft_nd(data, values.shape(), -1);
  const double scale = 1.0 / static_cast<double>(values.size());  // N^-d
  FourierCoeffs out(values.shape());
  for (std::size_t i = 0; i < data.size(); ++i) out.set_flat(i, data[i] * scale);
  return out;
}

FourierCoeffs dft_n_naive(const Tensor& values, int n) {
  check_cubic(values, n);
  const int d = values.dims();
  const std::size_t total = values.size();
  FourierCoeffs out(values.shape());
  std::vector<int> k(d, 0), r(d);
  for (std::size_t ki = 0; ki < total; ++ki) {
    std::fill(r.begin(), r.end(), 0);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t ri = 0; ri < total; ++ri) {
      long long dot = 0;
      for (int a = 0; a < d; ++a) dot += static_cast<long long>(k[a]) * r[a];
      const double ang = -2.0 * M_PI * static_cast<double>(dot % n) / n;
      acc += values[ri] * std::complex<double>(std::cos(ang), std::sin(ang));
      for (int a = d - 1; a >= 0; --a) {
        if (++r[a] < n) break;
        r[a] = 0;
      }
    }
    out.set_flat(ki, acc / static_cast<double>(total));
    for (int a = d - 1; a >= 0; --a) {
      if (++k[a] < n) break;
      k[a] = 0;
    }
  }
  return out;
}

std::complex<double> idft_point(const FourierCoeffs& v, std::span<const double> x) {
  const auto& ext = v.extents();
  const int d = static_cast<int>(ext.size());
  if (static_cast<int>(x.size()) != d) throw ConfigError("idft_point: dimension mismatch");
  std::vector<int> k(d, 0);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t ki = 0; ki < v.size(); ++ki) {
    double dot = 0.0;
    for (int a = 0; a < d; ++a) dot += static_cast<double>(k[a]) * x[a];
    const double ang = 2.0 * M_PI * dot;
    acc += v.at_flat(ki) * std::complex<double>(std::cos(ang), std::sin(ang));
    for (int a = d - 1; a >= 0; --a) {
      if (++k[a] < ext[a]) break;
      k[a] = 0;
    }
  }
  return acc;
}

std::vector<std::complex<double>> idft_grid(const FourierCoeffs& v) {
  std::vector<std::complex<double>> data(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) data[i] = v.at_flat(i);
  fft_nd(data, v.extents(), +1);
  return data;
}

}  // namespace deeppde
