#include "laa/contention.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "laa/errors.hpp"

namespace laa {

const char* to_string(SlotKind kind) {
  switch (kind) {
    case SlotKind::kIdle: return "idle";
    case SlotKind::kWifiCollision: return "wifi_collision";
    case SlotKind::kLaaCollision: return "laa_collision";
    case SlotKind::kWifiSuccess: return "wifi_success";
    case SlotKind::kLaaSuccess: return "laa_success";
    case SlotKind::kCrossCollision: return "cross_collision";
  }
  return "unknown";
}

double mean_backoff_laa(int stage, const SystemParams& params) {
  return (laa_window(stage, params) + 1.0) / 2.0;
}

double mean_backoff_wifi(int stage, const SystemParams& params) {
  return (wifi_window(stage, params) + 1.0) / 2.0;
}

double laa_tx_prob(double p_laa, const SystemParams& params) {
  if (params.mode == CwMode::kFixed) return 1.0 / mean_backoff_laa(0, params);
  double attempts = 0.0;
  double slots = 0.0;
  double weight = 1.0;
  for (int j = 0; j < params.k_retry_laa; ++j) {
    attempts += weight;
    slots += weight * mean_backoff_laa(j, params);
    weight *= p_laa;
  }
  return attempts / slots;
}

double wifi_tx_prob(double p_wifi, const SystemParams& params) {
  double attempts = 0.0;
  double slots = 0.0;
  double weight = 1.0;
  for (int j = 0; j < params.k_retry_wifi; ++j) {
    attempts += weight;
    slots += weight * mean_backoff_wifi(j, params);
    weight *= p_wifi;
  }
  return attempts / slots;
}

namespace {

struct Collisions {
  double p_laa;
  double p_wifi;
};

Collisions collision_probs(double v_laa, double v_wifi, double factor, const SystemParams& p) {
  const double p_laa = 1.0 - std::pow(1.0 - v_wifi, p.m_wifi) *
                                 std::pow(1.0 - v_laa, p.n_laa - 1) * factor;
  // No WiFi node exists to collide when M = 0; report 0.
  const double p_wifi = p.m_wifi == 0 ? 0.0
                                      : 1.0 - std::pow(1.0 - v_wifi, p.m_wifi - 1) *
                                                  std::pow(1.0 - v_laa, p.n_laa) * factor;
  return {p_laa, p_wifi};
}

std::array<double, kSlotKinds> slot_probabilities(double v_l, double v_w, const SystemParams& p) {
  const int n = p.n_laa;
  const int m = p.m_wifi;
  const double others_laa_silent = std::pow(1.0 - v_l, n - 1);
  const double wifi_silent = std::pow(1.0 - v_w, m);
  const double one_wifi = m >= 1 ? m * v_w * std::pow(1.0 - v_w, m - 1) : 0.0;
  const double one_laa = n >= 2 ? (n - 1) * v_l * std::pow(1.0 - v_l, n - 2) : 0.0;

  std::array<double, kSlotKinds> pr{};
  pr[0] = others_laa_silent * wifi_silent;
  pr[1] = (1.0 - wifi_silent - one_wifi) * others_laa_silent;
  pr[2] = wifi_silent * (1.0 - others_laa_silent - one_laa);
  pr[3] = others_laa_silent * one_wifi;
  pr[4] = wifi_silent * one_laa;
  pr[5] = 1.0 - pr[0] - pr[1] - pr[2] - pr[3] - pr[4];
  // Cancellation can leave -1e-17 where an atom is structurally zero.
  for (double& x : pr) {
    if (x < 0.0 && x > -1e-12) x = 0.0;
  }
  return pr;
}

double mean_slot(double v_l, double v_w, const SystemParams& p) {
  const auto pr = slot_probabilities(v_l, v_w, p);
  double mean = 0.0;
  for (std::size_t i = 0; i < kSlotKinds; ++i) {
    mean += pr[i] * slot_duration_us(static_cast<SlotKind>(i), p);
  }
  return mean;
}

bool has_hidden(const SystemParams& p) {
  return p.hidden && (p.hidden->laa > 0 || p.hidden->wifi > 0);
}

std::string describe(const ContentionPoint& cp) {
  std::ostringstream os;
  os.precision(17);
  os << "v_L=" << cp.v_laa << " v_W=" << cp.v_wifi << " p_L=" << cp.p_laa
     << " p_W=" << cp.p_wifi << " residual=" << cp.residual;
  return os.str();
}

ContentionPoint assemble(double p_laa, double p_wifi, int iterations, const SystemParams& params) {
  ContentionPoint cp;
  cp.p_laa = p_laa;
  cp.p_wifi = p_wifi;
  cp.v_laa = laa_tx_prob(p_laa, params);
  cp.v_wifi = params.m_wifi == 0 ? 0.0 : wifi_tx_prob(p_wifi, params);
  cp.iterations = iterations;
  cp.residual = fixed_point_residual(cp, params);
  return cp;
}

// Picard map on (p_L, p_W).
Collisions picard_step(const Collisions& c, const SystemParams& params, bool hidden) {
  const double v_l = laa_tx_prob(c.p_laa, params);
  const double v_w = params.m_wifi == 0 ? 0.0 : wifi_tx_prob(c.p_wifi, params);
  const double factor = hidden ? hidden_factor(v_l, v_w, params) : 1.0;
  return collision_probs(v_l, v_w, factor, params);
}

// For fixed v_L, the WiFi sub-problem p_W = 1 - (1-v_W(p_W))^{M-1}(1-v_L)^N [* factor]
// has a strictly increasing defect in p_W.
double solve_wifi_given_laa(double v_l, const SystemParams& params, bool hidden) {
  if (params.m_wifi == 0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v_w = wifi_tx_prob(mid, params);
    const double factor = hidden ? hidden_factor(v_l, v_w, params) : 1.0;
    const double rhs = collision_probs(v_l, v_w, factor, params).p_wifi;
    (mid - rhs > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

ContentionPoint bisection_fallback(const SystemParams& params, bool hidden) {
  auto laa_defect = [&](double v_l) {
    const double p_w = solve_wifi_given_laa(v_l, params, hidden);
    const double v_w = params.m_wifi == 0 ? 0.0 : wifi_tx_prob(p_w, params);
    const double factor = hidden ? hidden_factor(v_l, v_w, params) : 1.0;
    const double p_l = collision_probs(v_l, v_w, factor, params).p_laa;
    return v_l - laa_tx_prob(p_l, params);
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    (laa_defect(mid) > 0.0 ? hi : lo) = mid;
  }
  const double v_l = 0.5 * (lo + hi);
  const double p_w = solve_wifi_given_laa(v_l, params, hidden);
  const double v_w = params.m_wifi == 0 ? 0.0 : wifi_tx_prob(p_w, params);
  const double factor = hidden ? hidden_factor(v_l, v_w, params) : 1.0;
  const Collisions c = collision_probs(v_l, v_w, factor, params);
  return assemble(c.p_laa, c.p_wifi, 400, params);
}

ContentionPoint solve(const SystemParams& params, const FixedPointOptions& opts, bool hidden,
                      double accept) {
  params.validate();
  Collisions c{0.0, 0.0};
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Collisions next = picard_step(c, params, hidden);
    const double step = std::max(std::abs(next.p_laa - c.p_laa), std::abs(next.p_wifi - c.p_wifi));
    if (step <= opts.tolerance) {
      c = next;
      break;
    }
    c.p_laa = opts.damping * c.p_laa + (1.0 - opts.damping) * next.p_laa;
    c.p_wifi = opts.damping * c.p_wifi + (1.0 - opts.damping) * next.p_wifi;
  }
  ContentionPoint cp = assemble(c.p_laa, c.p_wifi, it + 1, params);
  if (cp.residual <= accept) return cp;

  ContentionPoint fallback = bisection_fallback(params, hidden);
  if (fallback.residual <= accept) return fallback;
  throw ConvergenceError("contention fixed point did not converge; last iterate " +
                         describe(cp.residual < fallback.residual ? cp : fallback));
}

}  // namespace

double hidden_factor(double v_laa, double v_wifi, const SystemParams& params) {
  if (!has_hidden(params)) return 1.0;
  const double base = std::pow(1.0 - v_laa, params.hidden->laa) *
                      std::pow(1.0 - v_wifi, params.hidden->wifi);
  // T_s taken as the LAA transmission duration.
  const double exponent = 2.0 * params.laa_success_us() / mean_slot(v_laa, v_wifi, params);
  return std::pow(base, exponent);
}

double fixed_point_residual(const ContentionPoint& cp, const SystemParams& params) {
  const double factor = hidden_factor(cp.v_laa, cp.v_wifi, params);
  const Collisions c = collision_probs(cp.v_laa, cp.v_wifi, factor, params);
  double r = std::abs(cp.v_laa - laa_tx_prob(cp.p_laa, params));
  r = std::max(r, std::abs(cp.p_laa - c.p_laa));
  if (params.m_wifi > 0) {
    r = std::max(r, std::abs(cp.v_wifi - wifi_tx_prob(cp.p_wifi, params)));
    r = std::max(r, std::abs(cp.p_wifi - c.p_wifi));
  }
  return r;
}

ContentionPoint solve_fixed_point(const SystemParams& params, const FixedPointOptions& opts) {
  if (params.n_laa < 1 || params.m_wifi < 0) {
    throw DomainError("solve_fixed_point: need N >= 1 and M >= 0");
  }
  return solve(params, opts, /*hidden=*/false, 1e-12);
}

ContentionPoint solve_fixed_point_hidden(const SystemParams& params,
                                         const FixedPointOptions& opts) {
  if (!params.hidden) throw DomainError("solve_fixed_point_hidden: hidden-node counts not set");
  return solve(params, opts, has_hidden(params), 1e-10);
}

ContentionPoint solve_contention(const SystemParams& params) {
  return params.hidden ? solve_fixed_point_hidden(params) : solve_fixed_point(params);
}

double slot_duration_us(SlotKind kind, const SystemParams& params) {
  switch (kind) {
    case SlotKind::kIdle: return params.idle_us();
    case SlotKind::kWifiCollision: return params.wifi_collision_us();
    case SlotKind::kLaaCollision: return params.laa_collision_us();
    case SlotKind::kWifiSuccess: return params.wifi_success_us();
    case SlotKind::kLaaSuccess: return params.laa_success_us();
    case SlotKind::kCrossCollision: return params.cross_collision_us();
  }
  return 0.0;
}

SlotDistribution slot_distribution(const ContentionPoint& cp, const SystemParams& params) {
  const auto pr = slot_probabilities(cp.v_laa, cp.v_wifi, params);
  SlotDistribution sd;
  for (std::size_t i = 0; i < kSlotKinds; ++i) {
    if (!(pr[i] >= 0.0 && pr[i] <= 1.0 + 1e-12)) {
      throw DomainError("slot_distribution: atom " + std::string(to_string(static_cast<SlotKind>(i))) +
                        " has probability " + std::to_string(pr[i]) + " (invalid contention point)");
    }
    sd.atoms[i] = {slot_duration_us(static_cast<SlotKind>(i), params), std::min(pr[i], 1.0)};
  }
  return sd;
}

GenFun slot_pgf(const SlotDistribution& sd) { return atoms_pgf(sd.atoms, "tau"); }

double slot_mean(const SlotDistribution& sd) {
  double mean = 0.0;
  for (const Atom& a : sd.atoms) mean += a.probability * a.duration_us;
  return mean;
}

}  // namespace laa
