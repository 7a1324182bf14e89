#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "deeppde/errors.hpp"

namespace deeppde {

class Tape;

/// Handle to a scalar node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::int32_t idx = -1;

  double value() const;
};

/// Reverse-mode tape over scalar nodes, recorded in topological order.
///
/// Every node stores its value and the local partials w.r.t. its (up to two)
/// parents. With tangent tracking enabled, each node additionally carries the
/// directional derivative of its value and of its local partials along the
/// input tangent, so a single reverse sweep yields both the gradient and the
/// Hessian-vector product (forward-over-reverse).
class Tape {
 public:
  struct Node {
    double v;             // value
    double da, db;        // local partials w.r.t. parents
    std::int32_t a, b;    // parent indices, -1 if absent
  };

  Tape() = default;

  void reserve(std::size_t n) {
    nodes_.reserve(n);
    if (tangents_) {
      dot_.reserve(n);
      dadot_.reserve(n);
      dbdot_.reserve(n);
    }
  }

  void clear() {
    nodes_.clear();
    dot_.clear();
    dadot_.clear();
    dbdot_.clear();
  }

  /// Enables the tangent overlay; call before recording.
  void enable_tangents() {
    if (!nodes_.empty()) throw ConfigError("Tape: enable_tangents on non-empty tape");
    tangents_ = true;
  }
  bool tangents_enabled() const { return tangents_; }

  std::size_t size() const { return nodes_.size(); }

  Var input(double value, double tangent = 0.0) { return push0(value, tangent); }
  Var constant(double value) { return push0(value, 0.0); }

  double value(Var x) const { return nodes_[x.idx].v; }
  double tangent(Var x) const { return dot_[x.idx]; }

  /// Reverse sweep: d(output)/d(wrt_i). Reuses internal scratch; the tape
  /// itself is single-threaded.
  void gradient(Var output, std::span<const Var> wrt, std::span<double> grad);
  std::vector<double> gradient(Var output, std::span<const Var> wrt);

  /// Reverse sweep with tangent propagation: grad = nabla f, hv = (Hess f) v
  /// where v is the tangent loaded on the inputs. Requires tangent mode.
  void gradient_with_hv(Var output, std::span<const Var> wrt,
                        std::span<double> grad, std::span<double> hv);

  // -- recording primitives ---------------------------------------------

  Var push0(double v, double dot) {
    nodes_.push_back({v, 0.0, 0.0, -1, -1});
    if (tangents_) {
      dot_.push_back(dot);
      dadot_.push_back(0.0);
      dbdot_.push_back(0.0);
    }
    return {this, static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  Var push1(double v, std::int32_t a, double da, double dvdot = 0.0, double dadot = 0.0) {
    nodes_.push_back({v, da, 0.0, a, -1});
    if (tangents_) {
      dot_.push_back(dvdot);
      dadot_.push_back(dadot);
      dbdot_.push_back(0.0);
    }
    return {this, static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  Var push2(double v, std::int32_t a, double da, std::int32_t b, double db,
            double dvdot = 0.0, double dadot = 0.0, double dbdot = 0.0) {
    nodes_.push_back({v, da, db, a, b});
    if (tangents_) {
      dot_.push_back(dvdot);
      dadot_.push_back(dadot);
      dbdot_.push_back(dbdot);
    }
    return {this, static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  double dot_of(std::int32_t i) const { return tangents_ ? dot_[i] : 0.0; }

  void check_owns(Var x) const {
    if (x.tape != this || x.idx < 0 || static_cast<std::size_t>(x.idx) >= nodes_.size())
      throw ConfigError("Tape: node does not belong to this tape");
  }

 private:
  std::vector<Node> nodes_;
  bool tangents_ = false;
  std::vector<double> dot_, dadot_, dbdot_;
  std::vector<double> adj_, adjdot_;  // sweep scratch
};

inline double Var::value() const { return tape->value(*this); }

namespace detail {
inline Tape* same_tape(Var x, Var y) {
  if (x.tape != y.tape) throw ConfigError("Tape: operands live on different tapes");
  return x.tape;
}
}  // namespace detail

// -- arithmetic ----------------------------------------------------------

inline Var operator+(Var x, Var y) {
  Tape* t = detail::same_tape(x, y);
  return t->push2(x.value() + y.value(), x.idx, 1.0, y.idx, 1.0,
                  t->dot_of(x.idx) + t->dot_of(y.idx));
}

inline Var operator-(Var x, Var y) {
  Tape* t = detail::same_tape(x, y);
  return t->push2(x.value() - y.value(), x.idx, 1.0, y.idx, -1.0,
                  t->dot_of(x.idx) - t->dot_of(y.idx));
}

inline Var operator*(Var x, Var y) {
  Tape* t = detail::same_tape(x, y);
  const double xd = t->dot_of(x.idx), yd = t->dot_of(y.idx);
  return t->push2(x.value() * y.value(), x.idx, y.value(), y.idx, x.value(),
                  x.value() * yd + xd * y.value(), yd, xd);
}

inline Var operator/(Var x, Var y) {
  Tape* t = detail::same_tape(x, y);
  const double yv = y.value(), xv = x.value();
  const double inv = 1.0 / yv;
  const double xd = t->dot_of(x.idx), yd = t->dot_of(y.idx);
  // d/dx = 1/y, d/dy = -x/y^2
  return t->push2(xv * inv, x.idx, inv, y.idx, -xv * inv * inv,
                  (xd - xv * inv * yd) * inv,
                  -yd * inv * inv,
                  -xd * inv * inv + 2.0 * xv * yd * inv * inv * inv);
}

inline Var operator-(Var x) {
  return x.tape->push1(-x.value(), x.idx, -1.0, -x.tape->dot_of(x.idx));
}

inline Var operator+(Var x, double c) {
  return x.tape->push1(x.value() + c, x.idx, 1.0, x.tape->dot_of(x.idx));
}
inline Var operator+(double c, Var x) { return x + c; }
inline Var operator-(Var x, double c) { return x + (-c); }
inline Var operator-(double c, Var x) {
  return x.tape->push1(c - x.value(), x.idx, -1.0, -x.tape->dot_of(x.idx));
}
inline Var operator*(Var x, double c) {
  return x.tape->push1(x.value() * c, x.idx, c, x.tape->dot_of(x.idx) * c);
}
inline Var operator*(double c, Var x) { return x * c; }
inline Var operator/(Var x, double c) { return x * (1.0 / c); }
inline Var operator/(double c, Var x) { return x.tape->constant(c) / x; }

inline Var& operator+=(Var& x, Var y) { x = x + y; return x; }
inline Var& operator-=(Var& x, Var y) { x = x - y; return x; }
inline Var& operator*=(Var& x, Var y) { x = x * y; return x; }

// -- elementary functions --------------------------------------------------

inline Var tanh(Var x) {
  Tape* t = x.tape;
  const double tv = std::tanh(x.value());
  const double d = 1.0 - tv * tv;
  const double xd = t->dot_of(x.idx);
  return t->push1(tv, x.idx, d, d * xd, -2.0 * tv * d * xd);
}

inline Var exp(Var x) {
  Tape* t = x.tape;
  const double e = std::exp(x.value());
  const double xd = t->dot_of(x.idx);
  return t->push1(e, x.idx, e, e * xd, e * xd);
}

inline Var log(Var x) {
  Tape* t = x.tape;
  const double xv = x.value();
  const double xd = t->dot_of(x.idx);
  return t->push1(std::log(xv), x.idx, 1.0 / xv, xd / xv, -xd / (xv * xv));
}

inline Var sin(Var x) {
  Tape* t = x.tape;
  const double s = std::sin(x.value()), c = std::cos(x.value());
  const double xd = t->dot_of(x.idx);
  return t->push1(s, x.idx, c, c * xd, -s * xd);
}

inline Var cos(Var x) {
  Tape* t = x.tape;
  const double s = std::sin(x.value()), c = std::cos(x.value());
  const double xd = t->dot_of(x.idx);
  return t->push1(c, x.idx, -s, -s * xd, -c * xd);
}

inline Var sqrt(Var x) {
  Tape* t = x.tape;
  const double s = std::sqrt(x.value());
  const double d = 0.5 / s;
  const double xd = t->dot_of(x.idx);
  return t->push1(s, x.idx, d, d * xd, -0.25 / (s * s * s) * xd);
}

inline double norm_pdf_value(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014326779;  // 1/sqrt(2 pi)
}
inline double norm_cdf_value(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal CDF as a primitive node (derivative is the density).
inline Var norm_cdf(Var x) {
  Tape* t = x.tape;
  const double xv = x.value();
  const double pdf = norm_pdf_value(xv);
  const double xd = t->dot_of(x.idx);
  return t->push1(norm_cdf_value(xv), x.idx, pdf, pdf * xd, -xv * pdf * xd);
}

/// Rectifier; not twice differentiable, so tangent-of-partial is zero and
/// second-order uses must be guarded by the caller.
inline Var relu(Var x) {
  Tape* t = x.tape;
  const double xv = x.value();
  const double d = xv > 0.0 ? 1.0 : 0.0;
  return t->push1(xv > 0.0 ? xv : 0.0, x.idx, d, d * t->dot_of(x.idx), 0.0);
}

inline Var sqr(Var x) { return x * x; }

/// Exact GELU, x * Phi(x).
inline Var gelu(Var x) { return x * norm_cdf(x); }

/// Scalar twice-differentiable function traced on a fresh tangent-mode tape.
/// Returns v' (Hess f)(x) v computed by one tangent-propagated reverse sweep.
template <class F>
double input_directional_second(F&& f, std::span<const double> x,
                                std::span<const double> v) {
  if (x.size() != v.size())
    throw ConfigError("input_directional_second: direction size mismatch");
  Tape tape;
  tape.enable_tangents();
  std::vector<Var> in(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) in[i] = tape.input(x[i], v[i]);
  Var out = f(tape, std::span<const Var>(in));
  std::vector<double> grad(in.size()), hv(in.size());
  tape.gradient_with_hv(out, in, grad, hv);
  double acc = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) acc += v[i] * hv[i];
  return acc;
}

}  // namespace deeppde
