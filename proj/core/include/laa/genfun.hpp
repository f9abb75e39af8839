#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>

#include "laa/scenario.hpp"

namespace laa {

/// A value together with its derivative along one direction (forward-mode pair).
struct Dual {
  double value = 0.0;
  double slope = 0.0;

  static constexpr Dual constant(double v) { return {v, 0.0}; }
  static constexpr Dual variable(double v) { return {v, 1.0}; }
};

inline Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.slope + b.slope}; }
inline Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.slope - b.slope}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.value * b.value, a.slope * b.value + a.value * b.slope};
}
inline Dual operator/(Dual a, Dual b) {
  return {a.value / b.value, (a.slope * b.value - a.value * b.slope) / (b.value * b.value)};
}
inline Dual operator*(double s, Dual a) { return {s * a.value, s * a.slope}; }
inline Dual operator+(double s, Dual a) { return {s + a.value, a.slope}; }
inline Dual operator-(double s, Dual a) { return {s - a.value, -a.slope}; }

inline Dual exp(Dual a) {
  const double e = std::exp(a.value);
  return {e, e * a.slope};
}
inline Dual log(Dual a) { return {std::log(a.value), a.slope / a.value}; }

/// a^p for real p and a > 0.
inline Dual pow(Dual a, double p) {
  if (p == 0.0) return {1.0, 0.0};
  const double v = std::pow(a.value, p);
  return {v, p * std::pow(a.value, p - 1.0) * a.slope};
}

/// Evaluable generating function z -> E[z^X] with exact first derivative.
///
/// Exponents are real (durations in microseconds), so the transform is held as
/// a closure rather than a coefficient array. Evaluating on a Dual argument
/// propagates the chain rule, which is how compositions such as
/// eta(tau(z)) stay differentiable without finite differences.
class GenFun {
 public:
  using Eval = std::function<Dual(const Dual&)>;

  GenFun() = default;
  GenFun(std::string tag, Eval eval) : tag_(std::move(tag)), eval_(std::move(eval)) {}

  Dual operator()(const Dual& z) const { return eval_(z); }
  Dual at(double z) const { return eval_(Dual::variable(z)); }
  double value(double z) const { return eval_(Dual::constant(z)).value; }
  double derivative(double z) const { return at(z).slope; }

  /// this(inner(z)).
  GenFun after(const GenFun& inner) const;

  const std::string& tag() const { return tag_; }
  explicit operator bool() const { return static_cast<bool>(eval_); }

 private:
  std::string tag_;
  Eval eval_;
};

/// PGF of the uniform distribution on {0, ..., window-1}, evaluated on a Dual.
/// Uses a series expansion around the removable singularity at 1.
Dual uniform_backoff_pgf(const Dual& y, int window);

GenFun uniform_backoff(int window);

/// Contention window of LAA retry stage j: W_L (FCW) or 2^j W_L (VCW).
int laa_window(int stage, const SystemParams& params);
/// WiFi window of retry stage j, 2^j W_0.
int wifi_window(int stage, const SystemParams& params);

/// Backoff-slot count PGF of LAA retry stage j.
GenFun eta_hat(int stage, const SystemParams& params);

struct Atom {
  double duration_us = 0.0;
  double probability = 0.0;
};

/// sum_i p_i z^{d_i}.
GenFun atoms_pgf(std::span<const Atom> atoms, std::string tag);

}  // namespace laa
