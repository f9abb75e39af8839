#include "laa/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "laa/errors.hpp"

namespace laa {

namespace {

constexpr double kUsPerS = 1e6;
constexpr double kSPerUs = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBisection = 400;

void check_theta(double theta, double rate) {
  if (!(theta > 0.0)) throw DomainError("effective capacity needs theta > 0");
  if (!(rate >= 0.0)) throw DomainError("effective capacity needs rate >= 0");
}

// Flagged when the root is pinned against the edge of the t3 convergence region
// and F there still falls short of the target. Far from the edge a mismatch only
// reflects rounding in F.
bool precision_limited(double x, double target, const ServiceModel& model) {
  if (x <= 0.0 || !std::isfinite(model.x_max())) return false;
  if (x < model.x_max() * (1.0 - 1e-9)) return false;
  if (!model.in_domain(x)) return true;
  return model.big_f(x).value < target * (1.0 - 1e-10);
}

bool narrow_enough(double lo, double hi) {
  return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi;
}

}  // namespace

const char* to_string(EcMethod method) {
  return method == EcMethod::kFourState ? "four-state" : "two-state";
}

EcSolution ec_two_state(double theta, double rate, const ServiceModel& model) {
  check_theta(theta, rate);
  EcSolution sol;
  sol.theta = theta;
  sol.rate = rate;
  sol.method = EcMethod::kTwoState;
  if (rate == 0.0) return sol;

  const double target = rate * theta * model.t_f_us() * kSPerUs;
  // F(x) >= x T_f, so the root lies below R theta (per microsecond).
  const double x_cap = rate * theta * kSPerUs;
  const double hi_start = std::min(x_cap, model.x_max());
  auto at_or_above = [&](double x) {
    if (!model.in_domain(x)) return true;
    const double f = model.big_f(x).value;
    return !(f < target);
  };

  double lo = 0.0;
  double hi = hi_start;
  for (int it = 0; it < kMaxBisection && !narrow_enough(lo, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (at_or_above(mid) ? hi : lo) = mid;
  }
  sol.ec = lo / theta * kUsPerS;
  sol.bracket = {lo / theta * kUsPerS, hi / theta * kUsPerS};
  sol.domain_limited = precision_limited(lo, target, model);
  return sol;
}

EcSolution ec_two_state(double theta, double rate, const SystemParams& params,
                        const ContentionPoint& cp) {
  return ec_two_state(theta, rate, ServiceModel(params, cp));
}

double four_state_lhs(double theta, double rate, double c, const ServiceModel& model) {
  const double z = std::exp(theta * c * kSPerUs);
  const double t_f = model.t_f_us() * kSPerUs;
  const double q = model.drop_probability();
  const double per = model.per();
  double on_terms = std::exp((-rate * theta + theta * c) * t_f) * (1.0 - per);
  if (per > 0.0) on_terms += std::exp(theta * c * t_f) * per;
  double lhs = (1.0 - q) * model.t1().value(z) * on_terms;
  if (q > 0.0) lhs += q * model.t2().value(z);
  return lhs;
}

EcSolution ec_four_state(double theta, double rate, const ServiceModel& model) {
  check_theta(theta, rate);
  EcSolution sol;
  sol.theta = theta;
  sol.rate = rate;
  sol.method = EcMethod::kFourState;
  if (rate == 0.0) return sol;

  double lo = 0.0;
  double hi = rate;
  for (int it = 0; it < kMaxBisection && !narrow_enough(lo, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double lhs = four_state_lhs(theta, rate, mid, model);
    (!(lhs < 1.0) ? hi : lo) = mid;
  }
  sol.ec = lo;
  sol.bracket = {lo, hi};
  sol.domain_limited =
      precision_limited(theta * lo * kSPerUs, rate * theta * model.t_f_us() * kSPerUs, model);
  return sol;
}

EcSolution ec_four_state(double theta, double rate, const SystemParams& params,
                         const ContentionPoint& cp) {
  return ec_four_state(theta, rate, ServiceModel(params, cp));
}

Matrix4 transition_mgf_matrix(double theta, double c, double rate, const ServiceModel& model) {
  const double z = std::exp(theta * c * kSPerUs);
  const double t_f = model.t_f_us() * kSPerUs;
  const double q = model.drop_probability();
  const double per = model.per();
  const double m1 = model.t1().value(z);
  const double m2 = q > 0.0 ? model.t2().value(z) : 0.0;
  const double m_off1 = std::exp(theta * c * t_f);
  const double m_on = std::exp((theta * c - rate * theta) * t_f);

  Matrix4 h{};
  // OFF2 -> OFF1 / ON.
  h[0][2] = per * m_off1;
  h[0][3] = (1.0 - per) * m_on;
  // OFF3, OFF1, ON -> OFF2 / OFF3.
  for (std::size_t r = 1; r < 4; ++r) {
    h[r][0] = (1.0 - q) * m1;
    h[r][1] = q * m2;
  }
  return h;
}

double spectral_radius(const Matrix4& h) {
  std::array<double, 4> v{1.0, 1.0, 1.0, 1.0};
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    std::array<double, 4> w{};
    for (std::size_t r = 0; r < 4; ++r) {
      w[r] = v[r];
      for (std::size_t c = 0; c < 4; ++c) w[r] += h[r][c] * v[c];
    }
    const double norm = *std::max_element(w.begin(), w.end());
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ConvergenceError("spectral_radius: iterate lost finiteness");
    }
    for (std::size_t r = 0; r < 4; ++r) v[r] = w[r] / norm;
    if (it > 2 && std::abs(norm - lambda) <= 1e-15 * norm) return norm - 1.0;
    lambda = norm;
  }
  std::ostringstream os;
  os.precision(17);
  os << "spectral_radius: power iteration did not settle, last estimate " << lambda - 1.0;
  throw ConvergenceError(os.str());
}

double spectral_check(const EcSolution& sol, const ServiceModel& model) {
  const Matrix4 h = transition_mgf_matrix(sol.theta, sol.ec, sol.rate, model);
  return std::abs(spectral_radius(h) - 1.0);
}

double spectral_check(const EcSolution& sol, const SystemParams& params,
                      const ContentionPoint& cp) {
  return spectral_check(sol, ServiceModel(params, cp));
}

double mean_service_rate(const ServiceModel& model, double rate) {
  const double t_f = model.t_f_us();
  return rate * t_f / (t_f + model.mean_t3_us());
}

double mean_service_rate(const SystemParams& params, const ContentionPoint& cp, double rate) {
  return mean_service_rate(ServiceModel(params, cp), rate);
}

DelayMapping theta_of_delay(double d_max_s, double p_th, double arrival, const ServiceModel& model,
                            double rate) {
  if (!(p_th > 0.0 && p_th < 1.0)) throw DomainError("theta_of_delay: p_th must lie in (0, 1)");
  if (!(d_max_s > 0.0)) throw DomainError("theta_of_delay: d_max must be > 0");
  DelayMapping out;
  out.eta = arrival / mean_service_rate(model, rate);
  if (p_th >= out.eta) {
    out.feasible = false;
    return out;
  }
  // theta C(theta) is increasing in theta; match it to log(eta / p_th) / D.
  const double needed = std::log(out.eta / p_th) / d_max_s;
  if (!std::isfinite(d_max_s) || needed == 0.0) return out;
  if (needed * kSPerUs >= model.x_max()) {
    out.feasible = false;
    out.theta = kInf;
    return out;
  }
  auto exponent = [&](double theta) { return theta * ec_two_state(theta, rate, model).ec; };

  double hi = 1e-9;
  while (exponent(hi) < needed) {
    hi *= 10.0;
    if (hi > 1e6) {
      out.feasible = false;
      out.theta = kInf;
      return out;
    }
  }
  double lo = hi / 10.0;
  while (lo > 1e-300 && exponent(lo) >= needed) lo /= 10.0;
  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  for (int it = 0; it < 200 && log_hi - log_lo > 1e-14; ++it) {
    const double mid = 0.5 * (log_lo + log_hi);
    (exponent(std::exp(mid)) >= needed ? log_hi : log_lo) = mid;
  }
  out.theta = std::exp(0.5 * (log_lo + log_hi));
  out.ec = ec_two_state(out.theta, rate, model).ec;
  return out;
}

DelayMapping theta_of_delay(double d_max_s, double p_th, double arrival, const SystemParams& params,
                            const ContentionPoint& cp, double rate) {
  return theta_of_delay(d_max_s, p_th, arrival, ServiceModel(params, cp), rate);
}

}  // namespace laa
