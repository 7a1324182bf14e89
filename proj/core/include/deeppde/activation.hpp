#pragma once

#include <cmath>
#include <string>

#include "deeppde/dual.hpp"
#include "deeppde/errors.hpp"
#include "deeppde/tape.hpp"

namespace deeppde {

enum class Activation { identity, relu, tanh, gelu };

inline bool is_smooth(Activation a) {
  return a == Activation::identity || a == Activation::tanh || a == Activation::gelu;
}

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Scalar helpers shared by the double and Var instantiations below.
inline double norm_pdf(double x) { return norm_pdf_value(x); }
inline double norm_cdf(double x) { return norm_cdf_value(x); }
inline Var norm_pdf(Var x) { return exp(x * x * -0.5) * 0.3989422804014326779; }
inline double tanh_of(double x) { return std::tanh(x); }
inline Var tanh_of(Var x) { return tanh(x); }

// Plain evaluation and first/second derivatives on doubles.
inline double act_value(Activation a, double x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::gelu: return x * norm_cdf_value(x);
  }
  return x;
}

inline double act_deriv(Activation a, double x) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::gelu: return norm_cdf_value(x) + x * norm_pdf_value(x);
  }
  return 1.0;
}

inline double act_second(Activation a, double x) {
  switch (a) {
    case Activation::identity: return 0.0;
    case Activation::relu: throw ConfigError("relu has no second derivative");
    case Activation::tanh: {
      const double t = std::tanh(x);
      return -2.0 * t * (1.0 - t * t);
    }
    case Activation::gelu: return (2.0 - x * x) * norm_pdf_value(x);
  }
  return 0.0;
}

inline Var act_value(Activation a, Var x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return relu(x);
    case Activation::tanh: return tanh(x);
    case Activation::gelu: return gelu(x);
  }
  return x;
}

template <class T>
Dual1<T> act_value(Activation a, const Dual1<T>& x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: throw ConfigError("relu is not differentiable; use tanh or gelu");
    case Activation::tanh: {
      T t = tanh_of(x.v);
      T df = 1.0 - t * t;
      return chain(x, t, df);
    }
    case Activation::gelu: {
      T c = norm_cdf(x.v);
      T p = norm_pdf(x.v);
      T f = x.v * c;
      T df = c + x.v * p;
      return chain(x, f, df);
    }
  }
  return x;
}

template <class T>
Dual2<T> act_value(Activation a, const Dual2<T>& x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: throw ConfigError("relu is not twice differentiable");
    case Activation::tanh: {
      T t = tanh_of(x.v);
      T df = 1.0 - t * t;
      T ddf = -2.0 * t * df;
      return chain(x, t, df, ddf);
    }
    case Activation::gelu: {
      T c = norm_cdf(x.v);
      T p = norm_pdf(x.v);
      T f = x.v * c;
      T df = c + x.v * p;
      T ddf = (2.0 - x.v * x.v) * p;
      return chain(x, f, df, ddf);
    }
  }
  return x;
}

}  // namespace deeppde
