#pragma once

#include <concepts>

#include "deeppde/tape.hpp"

namespace deeppde {

// Plain coefficient types allowed on the right of mixed dual ops.
template <class S>
concept DualCoeff = std::same_as<S, double> || std::same_as<S, Var>;

/// First-order truncated Taylor value (v + eps d) over scalar type T.
/// T is double for plain evaluation or Var when the computation is also
/// traced for parameter gradients.
template <class T>
struct Dual1 {
  T v;
  T d;
};

/// Second-order truncated Taylor value (v + eps d + eps^2/2 * ...); dd is the
/// plain second directional derivative, with the usual product rule
/// (uw)'' = u'' w + 2 u' w' + u w''.
template <class T>
struct Dual2 {
  T v;
  T d;
  T dd;
};

// -- Dual1 arithmetic -------------------------------------------------------

template <class T>
Dual1<T> operator+(const Dual1<T>& x, const Dual1<T>& y) {
  return {x.v + y.v, x.d + y.d};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& x, const Dual1<T>& y) {
  return {x.v - y.v, x.d - y.d};
}
template <class T>
Dual1<T> operator*(const Dual1<T>& x, const Dual1<T>& y) {
  return {x.v * y.v, x.d * y.v + x.v * y.d};
}
template <class T, DualCoeff S>
Dual1<T> operator*(const Dual1<T>& x, const S& c) {
  return {x.v * c, x.d * c};
}
template <class T, DualCoeff S>
Dual1<T> operator+(const Dual1<T>& x, const S& c) {
  return {x.v + c, x.d};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& x) {
  return {-x.v, -x.d};
}

// -- Dual2 arithmetic -------------------------------------------------------

template <class T>
Dual2<T> operator+(const Dual2<T>& x, const Dual2<T>& y) {
  return {x.v + y.v, x.d + y.d, x.dd + y.dd};
}
template <class T>
Dual2<T> operator-(const Dual2<T>& x, const Dual2<T>& y) {
  return {x.v - y.v, x.d - y.d, x.dd - y.dd};
}
template <class T>
Dual2<T> operator*(const Dual2<T>& x, const Dual2<T>& y) {
  return {x.v * y.v, x.d * y.v + x.v * y.d, x.dd * y.v + (x.d * y.d) * 2.0 + x.v * y.dd};
}
template <class T, DualCoeff S>
Dual2<T> operator*(const Dual2<T>& x, const S& c) {
  return {x.v * c, x.d * c, x.dd * c};
}
template <class T, DualCoeff S>
Dual2<T> operator+(const Dual2<T>& x, const S& c) {
  return {x.v + c, x.d, x.dd};
}
template <class T>
Dual2<T> operator-(const Dual2<T>& x) {
  return {-x.v, -x.d, -x.dd};
}

// Chain rule through a scalar function given (psi(v), psi'(v), psi''(v)).
template <class T>
Dual1<T> chain(const Dual1<T>& x, const T& f, const T& df) {
  return {f, df * x.d};
}
template <class T>
Dual2<T> chain(const Dual2<T>& x, const T& f, const T& df, const T& ddf) {
  return {f, df * x.d, ddf * (x.d * x.d) + df * x.dd};
}

}  // namespace deeppde
