#ifndef BSYNTH_AD_HPP
#define BSYNTH_AD_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <type_traits>
#include <vector>

#include "bsynth/error.hpp"

/// Reverse-mode automatic differentiation on a flat tape.
///
/// Every node stores its primal value and the (operand, local partial)
/// pairs needed for the adjoint sweep. N-ary nodes (sum, dot, vectorized
/// normal kernels) keep the tape short for the model's inner loops.
namespace bsynth::ad {

enum class Op : std::uint8_t {
  input,
  constant,
  add,
  sub,
  mul,
  div,
  neg,
  exp,
  log,
  log1p,
  tan,
  square,
  inv_logit,
  log_inv_logit,
  log1m_inv_logit,
  sum,
  dot,
  normal_lpdf,
};

class Tape;

/// Handle to a tape node. Cheap to copy; only valid while its tape is not cleared.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t index = 0;

  inline double value() const;
};

class Tape {
public:
  Tape() { offsets_.push_back(0); }

  Var input(double v) { return push(Op::input, v, {}, {}); }
  Var constant(double v) { return push(Op::constant, v, {}, {}); }

  std::size_t size() const { return values_.size(); }
  double value(std::uint32_t i) const { return values_[i]; }
  Op op(std::uint32_t i) const { return ops_[i]; }

  /// Drops all nodes but keeps the allocations for the next recording.
  void clear() {
    values_.clear();
    ops_.clear();
    offsets_.resize(1);
    operands_.clear();
    partials_.clear();
    adjoints_.clear();
    visits_ = 0;
  }

  /// Seeds d(out)/d(out) = 1 and sweeps every node once in reverse order.
  void backward(Var out) {
    adjoints_.assign(values_.size(), 0.0);
    adjoints_[out.index] = 1.0;
    visits_ = 0;
    for (std::size_t n = values_.size(); n-- > 0;) {
      ++visits_;
      const double a = adjoints_[n];
      if (a == 0.0) continue;
      for (std::uint32_t k = offsets_[n]; k < offsets_[n + 1]; ++k)
        adjoints_[operands_[k]] += a * partials_[k];
    }
  }

  double adjoint(Var v) const { return adjoints_.empty() ? 0.0 : adjoints_[v.index]; }

  /// Nodes touched by the most recent backward sweep.
  std::size_t backward_visits() const { return visits_; }

  Var push(Op op, double value, std::initializer_list<std::uint32_t> operands,
           std::initializer_list<double> partials) {
    values_.push_back(value);
    ops_.push_back(op);
    operands_.insert(operands_.end(), operands.begin(), operands.end());
    partials_.insert(partials_.end(), partials.begin(), partials.end());
    offsets_.push_back(static_cast<std::uint32_t>(operands_.size()));
    return Var{this, static_cast<std::uint32_t>(values_.size() - 1)};
  }

  /// N-ary nodes: append operands with `add_operand`, then seal with `close_node`.
  void add_operand(std::uint32_t index, double partial) {
    operands_.push_back(index);
    partials_.push_back(partial);
  }
  Var close_node(Op op, double value) {
    values_.push_back(value);
    ops_.push_back(op);
    offsets_.push_back(static_cast<std::uint32_t>(operands_.size()));
    return Var{this, static_cast<std::uint32_t>(values_.size() - 1)};
  }

private:
  std::vector<double> values_;
  std::vector<Op> ops_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> operands_;
  std::vector<double> partials_;
  std::vector<double> adjoints_;
  std::size_t visits_ = 0;
};

inline double Var::value() const { return tape->value(index); }

template <class T>
inline constexpr bool is_var_v = std::is_same_v<std::remove_cvref_t<T>, Var>;

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

// Binary arithmetic

inline Var operator+(Var a, Var b) { return a.tape->push(Op::add, a.value() + b.value(), {a.index, b.index}, {1.0, 1.0}); }
inline Var operator+(Var a, double b) { return a.tape->push(Op::add, a.value() + b, {a.index}, {1.0}); }
inline Var operator+(double a, Var b) { return b + a; }

inline Var operator-(Var a, Var b) { return a.tape->push(Op::sub, a.value() - b.value(), {a.index, b.index}, {1.0, -1.0}); }
inline Var operator-(Var a, double b) { return a.tape->push(Op::sub, a.value() - b, {a.index}, {1.0}); }
inline Var operator-(double a, Var b) { return b.tape->push(Op::sub, a - b.value(), {b.index}, {-1.0}); }
inline Var operator-(Var a) { return a.tape->push(Op::neg, -a.value(), {a.index}, {-1.0}); }

inline Var operator*(Var a, Var b) {
  return a.tape->push(Op::mul, a.value() * b.value(), {a.index, b.index}, {b.value(), a.value()});
}
inline Var operator*(Var a, double b) { return a.tape->push(Op::mul, a.value() * b, {a.index}, {b}); }
inline Var operator*(double a, Var b) { return b * a; }

inline Var operator/(Var a, Var b) {
  const double q = a.value() / b.value();
  return a.tape->push(Op::div, q, {a.index, b.index}, {1.0 / b.value(), -q / b.value()});
}
inline Var operator/(Var a, double b) { return a.tape->push(Op::div, a.value() / b, {a.index}, {1.0 / b}); }
inline Var operator/(double a, Var b) {
  const double q = a / b.value();
  return b.tape->push(Op::div, q, {b.index}, {-q / b.value()});
}

// Unary functions. Each has a plain double overload so generic code can
// call `ad::f(x)` for either scalar type.

inline double exp(double x) { return std::exp(x); }
inline Var exp(Var x) {
  const double v = std::exp(x.value());
  return x.tape->push(Op::exp, v, {x.index}, {v});
}

inline double log(double x) { return std::log(x); }
inline Var log(Var x) { return x.tape->push(Op::log, std::log(x.value()), {x.index}, {1.0 / x.value()}); }

inline double log1p(double x) { return std::log1p(x); }
inline Var log1p(Var x) {
  return x.tape->push(Op::log1p, std::log1p(x.value()), {x.index}, {1.0 / (1.0 + x.value())});
}

inline double tan(double x) { return std::tan(x); }
inline Var tan(Var x) {
  const double v = std::tan(x.value());
  return x.tape->push(Op::tan, v, {x.index}, {1.0 + v * v});
}

inline double square(double x) { return x * x; }
inline Var square(Var x) {
  const double v = x.value();
  return x.tape->push(Op::square, v * v, {x.index}, {2.0 * v});
}

/// Logistic map 1 / (1 + e^-x).
inline double inv_logit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
inline Var inv_logit(Var x) {
  const double u = inv_logit(x.value());
  return x.tape->push(Op::inv_logit, u, {x.index}, {u * (1.0 - u)});
}

/// log(inv_logit(x)) without cancellation.
inline double log_inv_logit(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}
inline Var log_inv_logit(Var x) {
  return x.tape->push(Op::log_inv_logit, log_inv_logit(x.value()), {x.index}, {1.0 - inv_logit(x.value())});
}

/// log(1 - inv_logit(x)).
inline double log1m_inv_logit(double x) { return log_inv_logit(-x); }
inline Var log1m_inv_logit(Var x) {
  return x.tape->push(Op::log1m_inv_logit, log1m_inv_logit(x.value()), {x.index}, {-inv_logit(x.value())});
}

// N-ary nodes

inline double sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}
inline Var sum(std::span<const Var> xs) {
  if (xs.empty()) throw Error(ErrorKind::model, "ad::sum of an empty span needs a tape");
  Tape& tape = *xs.front().tape;
  double s = 0.0;
  for (const Var& x : xs) {
    s += x.value();
    tape.add_operand(x.index, 1.0);
  }
  return tape.close_node(Op::sum, s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline Var dot(std::span<const Var> a, std::span<const Var> b) {
  Tape& tape = *a.front().tape;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double av = a[i].value(), bv = b[i].value();
    s += av * bv;
    tape.add_operand(a[i].index, bv);
    tape.add_operand(b[i].index, av);
  }
  return tape.close_node(Op::dot, s);
}
inline Var dot(std::span<const Var> a, std::span<const double> b) {
  Tape& tape = *a.front().tape;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i].value() * b[i];
    tape.add_operand(a[i].index, b[i]);
  }
  return tape.close_node(Op::dot, s);
}

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

/// Normal log-density, including the normalizing constant. Any argument may be a Var.
template <class Y, class M, class S>
auto normal_lpdf(const Y& y, const M& mu, const S& sigma) {
  const double yv = value_of(y), mv = value_of(mu), sv = value_of(sigma);
  const double z = (yv - mv) / sv;
  const double lp = -0.5 * z * z - std::log(sv) - kHalfLog2Pi;
  if constexpr (!is_var_v<Y> && !is_var_v<M> && !is_var_v<S>) {
    return lp;
  } else {
    Tape* tape = nullptr;
    if constexpr (is_var_v<Y>) tape = y.tape;
    if constexpr (is_var_v<M>) tape = mu.tape;
    if constexpr (is_var_v<S>) tape = sigma.tape;
    if constexpr (is_var_v<Y>) tape->add_operand(y.index, -z / sv);
    if constexpr (is_var_v<M>) tape->add_operand(mu.index, z / sv);
    if constexpr (is_var_v<S>) tape->add_operand(sigma.index, (z * z - 1.0) / sv);
    return tape->close_node(Op::normal_lpdf, lp);
  }
}

/// Sum of iid normal log-densities of `ys` under fixed location and scale.
inline double normal_lpdf(std::span<const double> ys, double mu, double sigma) {
  double ss = 0.0;
  for (double y : ys) ss += (y - mu) * (y - mu);
  const double n = static_cast<double>(ys.size());
  return -0.5 * ss / (sigma * sigma) - n * (std::log(sigma) + kHalfLog2Pi);
}
inline Var normal_lpdf(std::span<const Var> ys, double mu, double sigma) {
  Tape& tape = *ys.front().tape;
  const double inv_var = 1.0 / (sigma * sigma);
  double ss = 0.0;
  for (const Var& y : ys) {
    const double r = y.value() - mu;
    ss += r * r;
    tape.add_operand(y.index, -r * inv_var);
  }
  const double n = static_cast<double>(ys.size());
  return tape.close_node(Op::normal_lpdf, -0.5 * ss * inv_var - n * (std::log(sigma) + kHalfLog2Pi));
}

/**
 * Fused kernel for y ~ N(mu, sigma) with
 * mu = dot(a, b) + sum(offsets) + dot(coef, x).
 * `S` is double or Var; `x` is fixed data. One tape node per call.
 */
template <class S, class Y>
auto normal_linear_lpdf(const Y& y, std::span<const S> a, std::span<const S> b,
                        std::span<const S> offsets, std::span<const S> coef,
                        std::span<const double> x, const S& sigma) {
  double mu = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mu += value_of(a[i]) * value_of(b[i]);
  for (const S& o : offsets) mu += value_of(o);
  for (std::size_t i = 0; i < coef.size(); ++i) mu += value_of(coef[i]) * x[i];
  const double sv = value_of(sigma);
  const double z = (value_of(y) - mu) / sv;
  const double lp = -0.5 * z * z - std::log(sv) - kHalfLog2Pi;
  if constexpr (!is_var_v<S>) {
    return lp;
  } else {
    Tape& tape = *sigma.tape;
    const double g = z / sv;  // d lp / d mu
    for (std::size_t i = 0; i < a.size(); ++i) {
      tape.add_operand(a[i].index, g * b[i].value());
      tape.add_operand(b[i].index, g * a[i].value());
    }
    for (const Var& o : offsets) tape.add_operand(o.index, g);
    for (std::size_t i = 0; i < coef.size(); ++i) tape.add_operand(coef[i].index, g * x[i]);
    if constexpr (is_var_v<Y>) tape.add_operand(y.index, -g);
    tape.add_operand(sigma.index, (z * z - 1.0) / sv);
    return tape.close_node(Op::normal_lpdf, lp);
  }
}

/// Value and gradient of a scalar function recorded on `tape`.
struct Gradient {
  double value = 0.0;
  std::vector<double> grad;
};

/**
 * Records `f` over fresh input slots holding `x`, then runs one backward
 * sweep. `f` receives `std::span<const Var>` and returns a Var. The tape is
 * cleared first, so its storage is reused across calls.
 */
template <class F>
Gradient gradient(Tape& tape, std::span<const double> x, F&& f) {
  tape.clear();
  std::vector<Var> inputs;
  inputs.reserve(x.size());
  for (double v : x) inputs.push_back(tape.input(v));
  Var out = f(std::span<const Var>(inputs));
  tape.backward(out);
  Gradient g;
  g.value = out.value();
  g.grad.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g.grad[i] = tape.adjoint(inputs[i]);
  return g;
}

}  // namespace bsynth::ad

#endif  // BSYNTH_AD_HPP
