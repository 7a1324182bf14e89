#include "deeppde/conv.hpp"

namespace deeppde {

Tensor pconv(const Tensor& a, const Tensor& kernel) {
  const int d = a.dims();
  if (kernel.dims() != d) throw ConfigError("pconv: rank mismatch");
  std::vector<int> halfw(d);
  for (int k = 0; k < d; ++k) {
    if (kernel.shape()[k] % 2 == 0) throw ConfigError("pconv: kernel extents must be odd");
    halfw[k] = (kernel.shape()[k] - 1) / 2;
  }
  Tensor out(a.shape());
  detail::pconv_impl<double>(a.values(), a.shape(), kernel.values(), halfw, out.values());
  return out;
}

Tensor one_tensor(std::vector<int> extents) { return Tensor(std::move(extents), 1.0); }

Tensor sconv(const Tensor& a, const Tensor& kernel) {
  const int d = a.dims();
  if (kernel.dims() != d) throw ConfigError("sconv: rank mismatch");
  std::vector<int> bext(d);
  for (int k = 0; k < d; ++k) {
    if (a.shape()[k] % kernel.shape()[k] != 0)
      throw ConfigError("sconv: kernel extent must divide input extent");
    bext[k] = a.shape()[k] / kernel.shape()[k];
  }
  Tensor out(bext);
  detail::sconv_impl<double>(a.values(), a.shape(), kernel.values(), kernel.shape(),
                             out.values());
  return out;
}

Tensor tconv(const Tensor& b, const Tensor& kernel) {
  const int d = b.dims();
  if (kernel.dims() != d) throw ConfigError("tconv: rank mismatch");
  std::vector<int> aext(d);
  for (int k = 0; k < d; ++k) aext[k] = b.shape()[k] * kernel.shape()[k];
  Tensor out(aext);
  detail::tconv_impl<double>(b.values(), b.shape(), kernel.values(), kernel.shape(),
                             out.values());
  return out;
}

}  // namespace deeppde
