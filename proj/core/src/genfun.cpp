#include "laa/genfun.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "laa/errors.hpp"

namespace laa {

GenFun GenFun::after(const GenFun& inner) const {
  Eval outer = eval_;
  Eval in = inner.eval_;
  return GenFun(tag_ + "(" + inner.tag_ + ")",
                [outer, in](const Dual& z) { return outer(in(z)); });
}

Dual uniform_backoff_pgf(const Dual& y, int window) {
  const double w = window;
  const double h = y.value - 1.0;
  double value = 0.0;
  double deriv = 0.0;
  if (std::abs(h) < 1e-7) {
    value = 1.0 + 0.5 * (w - 1.0) * h + (w - 1.0) * (w - 2.0) / 6.0 * h * h;
    deriv = 0.5 * (w - 1.0) + (w - 1.0) * (w - 2.0) / 3.0 * h;
  } else {
    const double log_y = std::log1p(h);
    value = std::expm1(w * log_y) / (w * h);
    if (!std::isfinite(value)) {
      constexpr double inf = std::numeric_limits<double>::infinity();
      return {inf, y.slope == 0.0 ? 0.0 : inf};
    }
    // W (y-1) g(y) = y^W - 1  =>  g' = (y^{W-1} - g) / (y - 1)
    deriv = (std::exp((w - 1.0) * log_y) - value) / h;
  }
  return {value, deriv * y.slope};
}

GenFun uniform_backoff(int window) {
  if (window < 1) throw DomainError("uniform_backoff: window must be >= 1");
  return GenFun("U[0," + std::to_string(window) + ")",
                [window](const Dual& y) { return uniform_backoff_pgf(y, window); });
}

int laa_window(int stage, const SystemParams& params) {
  if (stage < 0 || stage >= params.k_retry_laa) {
    throw DomainError("LAA retry stage " + std::to_string(stage) + " outside [0, " +
                      std::to_string(params.k_retry_laa) + ")");
  }
  return params.mode == CwMode::kFixed ? params.w_laa : (params.w_laa << stage);
}

int wifi_window(int stage, const SystemParams& params) {
  if (stage < 0 || stage >= params.k_retry_wifi) {
    throw DomainError("WiFi retry stage " + std::to_string(stage) + " outside [0, " +
                      std::to_string(params.k_retry_wifi) + ")");
  }
  return params.w_wifi << stage;
}

GenFun eta_hat(int stage, const SystemParams& params) {
  return uniform_backoff(laa_window(stage, params));
}

GenFun atoms_pgf(std::span<const Atom> atoms, std::string tag) {
  std::vector<Atom> owned(atoms.begin(), atoms.end());
  return GenFun(std::move(tag), [owned](const Dual& z) {
    Dual sum{0.0, 0.0};
    for (const Atom& a : owned) {
      if (a.probability == 0.0) continue;
      sum = sum + a.probability * pow(z, a.duration_us);
    }
    return sum;
  });
}

}  // namespace laa
