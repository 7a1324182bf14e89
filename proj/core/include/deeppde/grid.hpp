#pragma once

#include <functional>
#include <span>
#include <vector>

#include "deeppde/tensor.hpp"

namespace deeppde {

/// Unique representative of b mod a in [0, a).
double mod_value(int a, double b);
int mod_index(int a, long long i);

/// Periodic scalar field sampled on an equidistant grid, left-closed per axis
/// (nodes k/extent * length for k = 0..extent-1).
struct GridFunction {
  std::vector<int> extents;
  std::vector<double> lengths;  // physical domain lengths per axis
  Tensor values;

  GridFunction() = default;
  GridFunction(std::vector<int> ext, std::vector<double> len);
  GridFunction(std::vector<int> ext, std::vector<double> len, Tensor vals);

  int dims() const { return static_cast<int>(extents.size()); }
  std::size_t size() const { return values.size(); }
  double cell_volume() const;
  double domain_volume() const;

  /// Periodic multi-linear interpolation at a physical point (rescaled to the
  /// unit cube internally).
  double interpolate(std::span<const double> point) const;

  /// Node coordinate of grid index along one axis.
  double node(int axis, int index) const {
    return lengths[axis] * static_cast<double>(index) / extents[axis];
  }
};

/// Hat-function sum of the periodic multi-linear interpolator on [0,1]^d.
double interp_eval(const GridFunction& g, std::span<const double> unit_point);

/// Row-major flattening and its inverse.
std::vector<double> flatten(const Tensor& a);
Tensor unflatten(std::span<const double> x, const std::vector<int>& shape);

/// Samples f at the left-closed grid (i_1/d_1*S_1, ..., i_d/d_d*S_d).
GridFunction grid_sample(const std::function<double(std::span<const double>)>& f,
                         std::vector<int> extents, std::vector<double> lengths);

/// sqrt( cell_volume * sum of squared node values ): quadrature of the L2 norm.
double discrete_l2_seminorm(const GridFunction& h);

/// Monte Carlo L2 operator error over a test set:
/// sqrt of mean of discrete_l2_seminorm(A(i) - B(i))^2.
using OperatorEvaluable = std::function<GridFunction(const GridFunction&)>;
double l2_error_mc(const OperatorEvaluable& a, const OperatorEvaluable& b,
                   std::span<const GridFunction> test_inputs);

/// Same, with the two output lists already computed.
double l2_error_mc(std::span<const GridFunction> a_outputs,
                   std::span<const GridFunction> b_outputs);

/// Restriction onto a coarser grid whose extents divide the fine extents
/// (stride subsampling; exact for left-closed equidistant grids).
GridFunction grid_restrict(const GridFunction& fine, const std::vector<int>& coarse_extents);

}  // namespace deeppde
