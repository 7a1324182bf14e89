#include "deeppde/grid.hpp"

#include <cmath>

#include "deeppde/errors.hpp"

namespace deeppde {

double mod_value(int a, double b) {
  if (a < 1) throw ConfigError("mod_value: modulus must be >= 1");
  double r = b - std::floor(b / a) * a;
  if (r >= a) r -= a;  // guards the rounding case b/a just below an integer
  if (r < 0.0) r = 0.0;
  return r;
}

int mod_index(int a, long long i) {
  long long r = i % a;
  if (r < 0) r += a;
  return static_cast<int>(r);
}

GridFunction::GridFunction(std::vector<int> ext, std::vector<double> len)
    : extents(std::move(ext)), lengths(std::move(len)), values(Tensor(extents)) {
  if (extents.size() != lengths.size())
    throw ConfigError("GridFunction: extents/lengths rank mismatch");
  for (double s : lengths)
    if (!(s > 0.0)) throw ConfigError("GridFunction: domain lengths must be positive");
}

GridFunction::GridFunction(std::vector<int> ext, std::vector<double> len, Tensor vals)
    : GridFunction(std::move(ext), std::move(len)) {
  if (vals.shape() != extents) throw ConfigError("GridFunction: value shape mismatch");
  values = std::move(vals);
}

double GridFunction::cell_volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < extents.size(); ++k) v *= lengths[k] / extents[k];
  return v;
}

double GridFunction::domain_volume() const {
  double v = 1.0;
  for (double s : lengths) v *= s;
  return v;
}

double interp_eval(const GridFunction& g, std::span<const double> unit_point) {
  const int d = g.dims();
  if (static_cast<int>(unit_point.size()) != d)
    throw ConfigError("interp_eval: point dimension mismatch");
  for (double y : unit_point)
    if (y < 0.0 || y > 1.0) throw ConfigError("interp_eval: point outside the unit cube");

  // Along each axis only the floor cell and its right neighbour carry weight.
  std::vector<int> base(d);
  std::vector<double> frac(d);
  for (int k = 0; k < d; ++k) {
    const double t = g.extents[k] * unit_point[k];
    const double fl = std::floor(t);
    base[k] = static_cast<int>(fl);  // y == 1 lands on the ghost node, wrapped below
    frac[k] = t - fl;
  }

  double acc = 0.0;
  std::vector<int> idx(d);
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const bool hi = (c >> k) & 1;
      w *= hi ? frac[k] : (1.0 - frac[k]);
      idx[k] = mod_index(g.extents[k], base[k] + (hi ? 1 : 0));
    }
    if (w != 0.0) acc += w * g.values.at(idx);
  }
  return acc;
}

double GridFunction::interpolate(std::span<const double> point) const {
  std::vector<double> unit(point.size());
  for (std::size_t k = 0; k < point.size(); ++k) unit[k] = point[k] / lengths[k];
  return interp_eval(*this, unit);
}

std::vector<double> flatten(const Tensor& a) { return a.values(); }

Tensor unflatten(std::span<const double> x, const std::vector<int>& shape) {
  if (x.size() != Tensor::checked_size(shape))
    throw ConfigError("unflatten: length does not match shape");
  return Tensor(shape, std::vector<double>(x.begin(), x.end()));
}

GridFunction grid_sample(const std::function<double(std::span<const double>)>& f,
                         std::vector<int> extents, std::vector<double> lengths) {
  GridFunction g(std::move(extents), std::move(lengths));
  const int d = g.dims();
  std::vector<int> idx(d, 0);
  std::vector<double> pt(d);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    for (int k = 0; k < d; ++k) pt[k] = g.node(k, idx[k]);
    g.values[flat] = f(pt);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < g.extents[k]) break;
      idx[k] = 0;
    }
  }
  if (!g.values.all_finite()) throw NumericalError("grid_sample: non-finite sample");
  return g;
}

double discrete_l2_seminorm(const GridFunction& h) {
  double acc = 0.0;
  for (double v : h.values.values()) acc += v * v;
  return std::sqrt(h.cell_volume() * acc);
}

double l2_error_mc(const OperatorEvaluable& a, const OperatorEvaluable& b,
                   std::span<const GridFunction> test_inputs) {
  if (test_inputs.empty()) throw ConfigError("l2_error_mc: empty test set");
  double acc = 0.0;
  for (const GridFunction& in : test_inputs) {
    GridFunction fa = a(in);
    GridFunction fb = b(in);
    if (fa.extents != fb.extents) throw ConfigError("l2_error_mc: extent mismatch");
    GridFunction diff = fa;
    for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= fb.values[i];
    const double s = discrete_l2_seminorm(diff);
    acc += s * s;
  }
  return std::sqrt(acc / static_cast<double>(test_inputs.size()));
}

double l2_error_mc(std::span<const GridFunction> a_outputs,
                   std::span<const GridFunction> b_outputs) {
  if (a_outputs.empty() || a_outputs.size() != b_outputs.size())
    throw ConfigError("l2_error_mc: empty or mismatched output lists");
  double acc = 0.0;
  for (std::size_t s = 0; s < a_outputs.size(); ++s) {
    if (a_outputs[s].extents != b_outputs[s].extents)
      throw ConfigError("l2_error_mc: extent mismatch");
    GridFunction diff = a_outputs[s];
    for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= b_outputs[s].values[i];
    const double e = discrete_l2_seminorm(diff);
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(a_outputs.size()));
}

GridFunction grid_restrict(const GridFunction& fine, const std::vector<int>& coarse_extents) {
  if (coarse_extents.size() != fine.extents.size())
    throw ConfigError("grid_restrict: rank mismatch");
  const int d = fine.dims();
  std::vector<int> stride(d);
  for (int k = 0; k < d; ++k) {
    if (coarse_extents[k] <= 0 || fine.extents[k] % coarse_extents[k] != 0)
      throw ConfigError("grid_restrict: coarse extents must divide fine extents");
    stride[k] = fine.extents[k] / coarse_extents[k];
  }
  GridFunction g(coarse_extents, fine.lengths);
  std::vector<int> idx(d, 0), fidx(d);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    for (int k = 0; k < d; ++k) fidx[k] = idx[k] * stride[k];
    g.values[flat] = fine.values.at(fidx);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < g.extents[k]) break;
      idx[k] = 0;
    }
  }
  return g;
}

}  // namespace deeppde
