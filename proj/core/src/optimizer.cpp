#include "laa/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>

#include "laa/errors.hpp"
#include "laa/genfun.hpp"

namespace laa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSPerUs = 1e-6;

bool narrow_enough(double lo, double hi) {
  return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi);
}

void check_inputs(const ChannelSet& channels, const SystemParams& params) {
  if (channels.gains.empty()) throw DomainError("power allocation needs at least one user");
  if (!(params.p_tot_w > 0.0)) throw DomainError("power allocation needs P_tot > 0");
  for (double g : channels.gains) {
    if (!(g > 0.0)) throw DomainError("channel gains must be positive");
  }
}

// One ServiceModel per distinct PER value; users point into it.
struct UserCurves {
  std::vector<std::unique_ptr<ServiceModel>> models;
  std::vector<CapacityPowerCurve> curves;

  UserCurves(const ChannelSet& channels, double theta, const SystemParams& params,
             const ContentionPoint& cp) {
    std::vector<double> pers;
    for (std::size_t k = 0; k < channels.gains.size(); ++k) {
      const double per = params.per_of(static_cast<int>(k));
      auto it = std::find(pers.begin(), pers.end(), per);
      std::size_t idx = static_cast<std::size_t>(it - pers.begin());
      if (it == pers.end()) {
        pers.push_back(per);
        models.push_back(std::make_unique<ServiceModel>(params, cp, per));
      }
      curves.emplace_back(*models[idx], channels.gains[k], theta);
    }
  }
};

struct InnerResult {
  std::vector<double> capacities;
  std::vector<double> powers;
  double total_power = 0.0;
};

InnerResult solve_users(const UserCurves& users, double lambda) {
  InnerResult out;
  for (const auto& curve : users.curves) {
    const double c = curve.kkt_capacity(lambda);
    const double p = curve.power(c).value;
    out.capacities.push_back(c);
    out.powers.push_back(p);
    out.total_power += p;
  }
  return out;
}

double kkt_residual(const UserCurves& users, const InnerResult& r, double lambda) {
  double worst = 0.0;
  for (std::size_t k = 0; k < users.curves.size(); ++k) {
    if (!(r.capacities[k] > 0.0)) continue;
    const double slope = users.curves[k].power(r.capacities[k]).slope;
    worst = std::max(worst, std::abs(lambda * slope - 1.0));
  }
  return worst;
}

struct DualResult {
  InnerResult inner;
  double mu = 0.0;
  int iterations = 0;
  bool converged = true;
};

// Smallest mu >= 0 such that the users' KKT points under lambda = mu + base fit
// the budget; the returned iterate is always feasible.
DualResult bisect_mu(const UserCurves& users, double base, double p_tot, const OptimizerOptions& opts) {
  DualResult res;
  if (base > 0.0) {
    res.inner = solve_users(users, base);
    res.iterations = 1;
    if (res.inner.total_power <= p_tot) return res;
  }
  auto total = [&](double mu) { return solve_users(users, base + mu).total_power; };

  double hi = 1.0;  // feasible side: large mu, small powers
  while (total(hi) > p_tot) {
    hi *= 10.0;
    if (hi > 1e300) throw ConvergenceError("maximize_ec: no multiplier satisfies the budget");
  }
  double lo = hi / 10.0;
  while (lo > 1e-300 && total(lo) <= p_tot) lo /= 10.0;
  if (lo <= 1e-300) {
    // Budget never binds.
    res.inner = solve_users(users, base + lo);
    res.mu = lo;
    return res;
  }
  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  res.inner = solve_users(users, base + hi);
  for (int it = 0; it < opts.max_dual_iterations; ++it) {
    ++res.iterations;
    if (p_tot - res.inner.total_power <= opts.budget_tolerance * p_tot) break;
    if (narrow_enough(log_lo, log_hi)) break;
    const double mid = 0.5 * (log_lo + log_hi);
    InnerResult r = solve_users(users, base + std::exp(mid));
    if (r.total_power <= p_tot) {
      log_hi = mid;
      res.inner = std::move(r);
    } else {
      log_lo = mid;
    }
  }
  res.mu = std::exp(log_hi);
  return res;
}

DualResult subgradient_mu(const UserCurves& users, double base, double p_tot,
                          const OptimizerOptions& opts) {
  DualResult res;
  res.converged = false;
  // Scale-aware start: marginal cost of an equal split.
  const double share = p_tot / static_cast<double>(users.curves.size());
  double slope_sum = 0.0;
  for (const auto& curve : users.curves) {
    slope_sum += curve.power(curve.capacity_of_power(share)).slope;
  }
  const double mu0 = static_cast<double>(users.curves.size()) / slope_sum;
  const double delta0 = 0.1 * mu0 / p_tot;
  double mu = mu0;
  double best = -kInf;
  for (int t = 1; t <= opts.max_dual_iterations; ++t) {
    InnerResult r = solve_users(users, base + mu);
    res.iterations = t;
    const double sum_c = std::accumulate(r.capacities.begin(), r.capacities.end(), 0.0);
    const bool feasible = r.total_power <= p_tot;
    if (feasible && sum_c > best) {
      best = sum_c;
      res.inner = r;
      res.mu = mu;
    }
    if (std::abs(r.total_power - p_tot) <= opts.subgradient_tolerance * p_tot && feasible) {
      res.converged = true;
      break;
    }
    mu = std::max(mu + delta0 / std::sqrt(static_cast<double>(t)) * (r.total_power - p_tot), 0.0);
  }
  if (best == -kInf) {
    DualResult fallback = bisect_mu(users, base, p_tot, opts);
    fallback.converged = false;
    fallback.iterations += res.iterations;
    return fallback;
  }
  return res;
}

DualResult solve_dual(const UserCurves& users, double base, double p_tot, const OptimizerOptions& opts) {
  if (opts.dual_update == DualUpdate::kSubgradient && base == 0.0) {
    return subgradient_mu(users, base, p_tot, opts);
  }
  return bisect_mu(users, base, p_tot, opts);
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

PowerAllocation evaluate_powers(std::string method, std::vector<double> powers,
                                const ChannelSet& channels, double theta,
                                const SystemParams& params, const ContentionPoint& cp) {
  UserCurves users(channels, theta, params, cp);
  PowerAllocation out;
  out.method = std::move(method);
  for (std::size_t k = 0; k < powers.size(); ++k) {
    const double rate = rate_of_power(powers[k], channels.gains[k], params);
    out.rates.push_back(rate);
    out.capacities.push_back(users.curves[k].capacity_of_power(powers[k]));
  }
  out.powers = std::move(powers);
  out.objective = out.total_capacity();
  return out;
}

}  // namespace

double PowerAllocation::total_power() const { return sum(powers); }
double PowerAllocation::total_capacity() const { return sum(capacities); }

CapacityPowerCurve::CapacityPowerCurve(const ServiceModel& model, double gain, double theta)
    : model_(&model), gain_(gain), theta_(theta) {
  if (!(theta > 0.0)) throw DomainError("power curve needs theta > 0");
  if (!(gain > 0.0)) throw DomainError("power curve needs a positive channel gain");
  c_max_ = model.x_max() / (theta * kSPerUs);
}

Dual CapacityPowerCurve::power(double capacity) const {
  if (!(capacity >= 0.0)) throw DomainError("power of a negative capacity");
  const SystemParams& params = model_->params();
  const double sub = params.subband_hz();
  const double a = params.noise_w() / gain_;
  const double t_f = model_->t_f_us();
  const double x = theta_ * capacity * kSPerUs;
  Dual f{0.0, 0.0};
  if (capacity > 0.0) {
    if (!model_->in_domain(x)) throw DomainError("capacity beyond the t3 convergence region");
    f = model_->big_f(x);
  } else {
    f = model_->big_f(0.0);
    f.value = 0.0;
  }
  const double rate = f.value / (theta_ * t_f * kSPerUs);
  const double e = rate * std::numbers::ln2 / sub;
  const double drate_dc = f.slope / t_f;
  return {a * std::expm1(e), a * std::exp(e) * std::numbers::ln2 / sub * drate_dc};
}

Dual CapacityPowerCurve::power_or_inf(double capacity) const {
  try {
    const Dual p = power(capacity);
    if (std::isfinite(p.value) && std::isfinite(p.slope)) return p;
  } catch (const DomainError&) {
  }
  return {kInf, kInf};
}

double CapacityPowerCurve::capacity_of_power(double power_w) const {
  const double rate = rate_of_power(power_w, gain_, model_->params());
  if (rate == 0.0) return 0.0;
  return ec_two_state(theta_, rate, *model_).ec;
}

double CapacityPowerCurve::kkt_capacity(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("kkt_capacity needs lambda > 0");
  auto above = [&](double c) { return !(lambda * power_or_inf(c).slope < 1.0); };
  if (above(0.0)) return 0.0;
  double lo = 0.0;
  double hi = std::min(1e6, c_max_);
  while (!above(hi)) {
    lo = hi;
    hi = std::min(2.0 * hi, c_max_);
    if (hi == lo) return lo;
  }
  while (!narrow_enough(lo, hi)) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? hi : lo) = mid;
  }
  return lo;
}

Dual power_of_capacity(double capacity, double theta, double gain, const SystemParams&,
                       const ServiceModel& model) {
  return CapacityPowerCurve(model, gain, theta).power(capacity);
}

PowerModel power_model(const SystemParams& params, const ContentionPoint& cp) {
  const double p = cp.p_laa;
  if (!(p < 1.0)) throw DomainError("energy model diverges at p_L = 1");
  PowerModel m;
  m.i_bar = p / ((1.0 - p) * (1.0 - p));
  if (params.mode == CwMode::kFixed) {
    m.I_bar = (params.w_laa + 1.0) / (2.0 * (1.0 - p));
  } else {
    // Stage-weighted mean backoff of one delivered-or-dropped cycle.
    const int k = params.k_retry_laa;
    double acc = 0.0;
    double pj = 1.0;
    for (int j = 0; j < k; ++j) {
      acc += pj * (laa_window(j, params) + 1.0) / 2.0;
      pj *= p;
    }
    m.I_bar = acc / (1.0 - pj);
  }
  m.tau_bar_us = slot_mean(slot_distribution(cp, params));
  const double t_c = params.laa_collision_us();
  const double t_f = params.laa_success_us();
  const double denom = m.pi1 * (m.I_bar * m.tau_bar_us + m.i_bar * t_c) + m.pi2 * t_f;
  m.p_static_eff = params.p_static_w + m.pi1 * params.p_idle_w * m.I_bar * m.tau_bar_us / denom;
  m.xi_eff = params.xi * denom / (m.pi1 * m.i_bar * t_c + m.pi2 * t_f);
  return m;
}

std::pair<double, PowerModel> average_power(const PowerAllocation& alloc, const SystemParams& params,
                                            const ContentionPoint& cp) {
  const PowerModel m = power_model(params, cp);
  return {m.average_power(alloc.total_power()), m};
}

double effective_energy_efficiency(const PowerAllocation& alloc, const PowerModel& model) {
  return alloc.total_capacity() / model.average_power(alloc.total_power());
}

PowerAllocation maximize_ec(const ChannelSet& channels, double theta, const SystemParams& params,
                            const ContentionPoint& cp, const OptimizerOptions& opts) {
  check_inputs(channels, params);
  UserCurves users(channels, theta, params, cp);
  DualResult d = solve_dual(users, 0.0, params.p_tot_w, opts);

  PowerAllocation out;
  out.method = "proposed";
  out.powers = d.inner.powers;
  out.capacities = d.inner.capacities;
  for (std::size_t k = 0; k < out.powers.size(); ++k) {
    out.rates.push_back(rate_of_power(out.powers[k], channels.gains[k], params));
  }
  out.mu = d.mu;
  out.objective = out.total_capacity();
  out.duality_gap = d.mu * (params.p_tot_w - d.inner.total_power) / out.objective;
  out.kkt_residual = d.mu > 0.0 ? kkt_residual(users, d.inner, d.mu) : 0.0;
  out.iterations = d.iterations;
  out.converged = d.converged;
  return out;
}

PowerAllocation maximize_eee(const ChannelSet& channels, double theta, const SystemParams& params,
                             const ContentionPoint& cp, const OptimizerOptions& opts) {
  check_inputs(channels, params);
  const PowerModel pm = power_model(params, cp);
  UserCurves users(channels, theta, params, cp);

  double omega = 0.0;
  PowerAllocation out;
  out.method = "proposed";
  out.converged = false;
  int total_iterations = 0;
  for (int it = 0; it < opts.max_dinkelbach_iterations; ++it) {
    const double base = omega / pm.xi_eff;
    OptimizerOptions inner_opts = opts;
    inner_opts.dual_update = DualUpdate::kBisection;
    DualResult d = solve_dual(users, base, params.p_tot_w, inner_opts);
    total_iterations += d.iterations;

    const double sum_c = sum(d.inner.capacities);
    const double p_avg = pm.average_power(d.inner.total_power);
    const double h = sum_c - omega * p_avg;

    out.powers = d.inner.powers;
    out.capacities = d.inner.capacities;
    out.mu = d.mu;
    out.omega = omega;
    out.duality_gap = d.mu * (params.p_tot_w - d.inner.total_power) / sum_c;
    out.kkt_residual = kkt_residual(users, d.inner, d.mu + base);
    out.omega_history.push_back(omega);

    if (std::abs(h) <= opts.dinkelbach_tolerance * sum_c) {
      out.converged = true;
      break;
    }
    const double next = sum_c / p_avg;
    if (next < omega * (1.0 - 1e-12)) out.omega_monotone = false;
    omega = next;
  }
  out.rates.clear();
  for (std::size_t k = 0; k < out.powers.size(); ++k) {
    out.rates.push_back(rate_of_power(out.powers[k], channels.gains[k], params));
  }
  out.iterations = total_iterations;
  out.objective = effective_energy_efficiency(out, pm);
  return out;
}

std::vector<double> water_filling_powers(const ChannelSet& channels, double p_tot) {
  const std::size_t k = channels.gains.size();
  if (k == 0) throw DomainError("water filling needs at least one user");
  std::vector<double> floor(k);
  for (std::size_t i = 0; i < k; ++i) floor[i] = channels.noise_w / channels.gains[i];
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return floor[a] < floor[b]; });

  // Grow the active set while the water level stays above the next floor.
  double level = 0.0;
  double acc = 0.0;
  std::size_t active = 0;
  for (std::size_t n = 1; n <= k; ++n) {
    acc += floor[order[n - 1]];
    const double candidate = (p_tot + acc) / static_cast<double>(n);
    if (candidate <= floor[order[n - 1]]) break;
    level = candidate;
    active = n;
  }
  std::vector<double> powers(k, 0.0);
  for (std::size_t n = 0; n < active; ++n) {
    powers[order[n]] = std::max(level - floor[order[n]], 0.0);
  }
  return powers;
}

std::vector<double> channel_inversion_powers(const ChannelSet& channels, double p_tot) {
  if (channels.gains.empty()) throw DomainError("channel inversion needs at least one user");
  double inv_sum = 0.0;
  for (double g : channels.gains) inv_sum += 1.0 / g;
  std::vector<double> powers;
  for (double g : channels.gains) powers.push_back(p_tot * (1.0 / g) / inv_sum);
  return powers;
}

PowerAllocation water_filling(const ChannelSet& channels, double theta, const SystemParams& params,
                              const ContentionPoint& cp) {
  check_inputs(channels, params);
  return evaluate_powers("water-filling", water_filling_powers(channels, params.p_tot_w), channels,
                         theta, params, cp);
}

PowerAllocation channel_inversion(const ChannelSet& channels, double theta,
                                  const SystemParams& params, const ContentionPoint& cp) {
  check_inputs(channels, params);
  return evaluate_powers("channel-inversion", channel_inversion_powers(channels, params.p_tot_w),
                         channels, theta, params, cp);
}

}  // namespace laa
