#include "laa/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "laa/errors.hpp"
#include "laa/genfun.hpp"

namespace laa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kErrorStreamBase = 1u << 20;

// 97.5% Student-t quantiles for small batch counts, df = 1..30.
double t_quantile(int df) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                     2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                     2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                     2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return kInf;
  if (df <= 30) return table[df - 1];
  return 1.96;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double half_width_of(const std::vector<double>& batch_values) {
  if (batch_values.size() < 2) return kInf;
  const int df = static_cast<int>(batch_values.size()) - 1;
  return t_quantile(df) * sd_of(batch_values) / std::sqrt(static_cast<double>(batch_values.size()));
}

// log(mean(exp(v))) without overflow.
double log_mean_exp(const double* first, const double* last) {
  const double top = *std::max_element(first, last);
  double acc = 0.0;
  for (const double* it = first; it != last; ++it) acc += std::exp(*it - top);
  return top + std::log(acc / static_cast<double>(last - first));
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

int window_of(const NodeState& n, const SystemParams& params) {
  return n.kind == NodeKind::kLaa ? laa_window(n.retry_stage, params)
                                  : wifi_window(n.retry_stage, params);
}

std::vector<double> block_increments(const ServiceTrace& trace, double block_s) {
  const double block_us = block_s * 1e6;
  const auto n = static_cast<std::size_t>(std::floor(trace.total_us / block_us));
  std::vector<double> out;
  out.reserve(n);
  double prev = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double s = trace.delivered_bits(static_cast<double>(i) * block_us);
    out.push_back(s - prev);
    prev = s;
  }
  return out;
}

double block_estimate(const std::vector<double>& ds, std::size_t first, std::size_t last,
                      double theta, double block_s) {
  std::vector<double> e;
  e.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) e.push_back(-theta * ds[i]);
  return -log_mean_exp(e.data(), e.data() + e.size()) / (theta * block_s);
}

EcEstimate estimate_from_blocks(const std::vector<double>& ds, double theta, double block_s,
                                int batches) {
  if (!(theta > 0.0)) throw DomainError("estimate_ec needs theta > 0");
  if (ds.size() < 100) throw DomainError("estimate_ec needs at least 100 blocks");
  EcEstimate out;
  out.blocks = static_cast<int>(ds.size());
  out.ec = block_estimate(ds, 0, ds.size(), theta, block_s);
  std::vector<double> per_batch;
  const std::size_t b = static_cast<std::size_t>(std::max(batches, 2));
  for (std::size_t i = 0; i < b; ++i) {
    per_batch.push_back(
        block_estimate(ds, i * ds.size() / b, (i + 1) * ds.size() / b, theta, block_s));
  }
  out.half_width = half_width_of(per_batch);
  return out;
}

// Root of log mean exp(theta C l_i) = theta R T_f over cycle lengths l_i (seconds).
double cycle_root(const double* first, const double* last, double theta, double rate, double t_f_s) {
  const double target = theta * rate * t_f_s;
  std::vector<double> e(static_cast<std::size_t>(last - first));
  auto g = [&](double c) {
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = theta * c * first[i];
    return log_mean_exp(e.data(), e.data() + e.size()) - target;
  };
  double lo = 0.0;
  double hi = rate;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct TailPoint {
  double q;
  double log_survival;
};

// Least-squares decay rate of the empirical survival over [p0 1e-3, p0].
double tail_slope(std::vector<double> q, std::size_t min_count) {
  const std::size_t n = q.size();
  std::sort(q.begin(), q.end(), std::greater<>());
  std::size_t positive = 0;
  while (positive < n && q[positive] > 0.0) ++positive;
  if (positive < min_count) return kInf;
  const double p0 = static_cast<double>(positive) / static_cast<double>(n);
  std::vector<TailPoint> pts;
  constexpr int kLevels = 31;
  for (int j = 0; j < kLevels; ++j) {
    const double s = p0 * std::pow(10.0, -3.0 * j / (kLevels - 1));
    const auto count = static_cast<std::size_t>(std::ceil(s * static_cast<double>(n)));
    if (count < min_count || count > positive) continue;
    // Pr{Q > q} = count / n at the count-th largest sample.
    pts.push_back({q[count - 1], std::log(static_cast<double>(count) / static_cast<double>(n))});
  }
  if (pts.size() < 3) return kInf;
  double mq = 0.0, ml = 0.0;
  for (const auto& p : pts) {
    mq += p.q;
    ml += p.log_survival;
  }
  mq /= static_cast<double>(pts.size());
  ml /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : pts) {
    sxy += (p.q - mq) * (p.log_survival - ml);
    sxx += (p.q - mq) * (p.q - mq);
  }
  if (!(sxx > 0.0)) return kInf;
  return -sxy / sxx;
}

}  // namespace

const char* to_string(SlotOutcome outcome) {
  switch (outcome) {
    case SlotOutcome::kNone: return "none";
    case SlotOutcome::kSuccess: return "success";
    case SlotOutcome::kChannelError: return "channel_error";
    case SlotOutcome::kCollision: return "collision";
  }
  return "?";
}

double ServiceTrace::delivered_bits(double t_us) const {
  const auto it = std::upper_bound(on_starts_us.begin(), on_starts_us.end(), t_us);
  const auto n = static_cast<std::size_t>(it - on_starts_us.begin());
  if (n == 0) return 0.0;
  const double last = std::min(t_us - on_starts_us[n - 1], t_f_us);
  return rate * 1e-6 * (t_f_us * static_cast<double>(n - 1) + last);
}

std::vector<double> ServiceTrace::off_periods_us() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < on_starts_us.size(); ++i) {
    out.push_back(on_starts_us[i] - on_starts_us[i - 1] - t_f_us);
  }
  return out;
}

ServiceTrace simulate(const SystemParams& params, double rate, double duration_s, std::uint64_t seed,
                      const SimOptions& opts) {
  params.validate();
  if (!(duration_s > 0.0)) throw DomainError("simulate needs a positive duration");
  if (!(rate >= 0.0)) throw DomainError("simulate needs rate >= 0");
  if (params.hidden) throw ConfigError("the simulator models a fully connected channel only");
  if (opts.tagged_user < 0 || opts.tagged_user >= params.k_users) {
    throw ConfigError("tagged user out of range");
  }

  const auto n_laa = static_cast<std::size_t>(params.n_laa);
  const std::size_t n_nodes = n_laa + static_cast<std::size_t>(params.m_wifi);
  ServiceTrace trace;
  trace.rate = rate;
  trace.t_f_us = params.laa_success_us();
  trace.nodes.resize(n_nodes);

  std::vector<std::mt19937_64> backoff_rng;
  std::vector<std::mt19937_64> error_rng;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    backoff_rng.push_back(make_stream(seed, i));
    error_rng.push_back(make_stream(seed, kErrorStreamBase + i));
  }
  auto redraw = [&](std::size_t i) {
    NodeState& n = trace.nodes[i];
    n.cw = window_of(n, params);
    n.backoff_timer = std::uniform_int_distribution<int>(0, n.cw - 1)(backoff_rng[i]);
  };
  for (std::size_t i = 0; i < n_nodes; ++i) {
    trace.nodes[i].kind = i < n_laa ? NodeKind::kLaa : NodeKind::kWifi;
    redraw(i);
  }

  std::bernoulli_distribution tagged_error(params.per_of(opts.tagged_user));
  std::bernoulli_distribution other_error(params.per);
  const double end_us = duration_s * 1e6;
  std::vector<std::size_t> tx;
  tx.reserve(n_nodes);
  trace.tagged_view.reserve(static_cast<std::size_t>(end_us / 100.0));

  while (trace.total_us < end_us) {
    tx.clear();
    std::size_t laa_tx = 0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (trace.nodes[i].backoff_timer == 0) {
        tx.push_back(i);
        if (i < n_laa) ++laa_tx;
      }
    }
    const std::size_t wifi_tx = tx.size() - laa_tx;

    SlotKind kind = SlotKind::kIdle;
    if (tx.size() == 1) {
      kind = laa_tx == 1 ? SlotKind::kLaaSuccess : SlotKind::kWifiSuccess;
    } else if (tx.size() > 1) {
      kind = wifi_tx == 0   ? SlotKind::kLaaCollision
             : laa_tx == 0 ? SlotKind::kWifiCollision
                           : SlotKind::kCrossCollision;
    }
    const double duration = slot_duration_us(kind, params);
    const bool tagged_tx = !tx.empty() && tx.front() == 0 && n_laa > 0;

    SlotOutcome outcome = SlotOutcome::kNone;
    if (tx.size() == 1) {
      const std::size_t i = tx.front();
      NodeState& n = trace.nodes[i];
      ++n.stats.transmissions;
      bool lost = false;
      if (n.kind == NodeKind::kLaa) {
        lost = i == 0 ? tagged_error(error_rng[i]) : other_error(error_rng[i]);
      }
      if (lost) {
        ++n.stats.channel_errors;
        outcome = SlotOutcome::kChannelError;
      } else {
        ++n.stats.successes;
        outcome = SlotOutcome::kSuccess;
        if (i == 0 && n.kind == NodeKind::kLaa) trace.on_starts_us.push_back(trace.total_us);
      }
      // Collision-free: next packet starts from the first stage either way.
      n.retry_stage = 0;
    } else if (tx.size() > 1) {
      outcome = SlotOutcome::kCollision;
      for (std::size_t i : tx) {
        NodeState& n = trace.nodes[i];
        ++n.stats.transmissions;
        ++n.stats.collisions;
        ++n.retry_stage;
        const int limit = n.kind == NodeKind::kLaa ? params.k_retry_laa : params.k_retry_wifi;
        if (n.retry_stage >= limit) {
          ++n.stats.drops;
          n.retry_stage = 0;
        }
      }
    }

    if (n_laa > 0) {
      if (tagged_tx) {
        trace.tagged_view.push_back(tx.size() == 1 ? ServiceTrace::kTaggedClear
                                                   : ServiceTrace::kTaggedCollided);
      } else {
        trace.tagged_view.push_back(static_cast<std::uint8_t>(kind));
        ++trace.tagged_backoff_counts[static_cast<std::size_t>(kind)];
      }
    }
    ++trace.channel_counts[static_cast<std::size_t>(kind)];
    if (opts.record_events) {
      trace.events.push_back({trace.slots, kind, duration,
                              tx.size() == 1 ? static_cast<int>(tx.front()) : -1, outcome});
    }

    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (trace.nodes[i].backoff_timer == 0) {
        redraw(i);
      } else {
        --trace.nodes[i].backoff_timer;
      }
    }
    trace.total_us += duration;
    ++trace.slots;
  }
  return trace;
}

ServiceTrace simulate(const SystemParams& params, const ChannelSet& channels, double duration_s,
                      std::uint64_t seed, const SimOptions& opts) {
  const auto k = static_cast<std::size_t>(opts.tagged_user);
  if (k >= channels.gains.size()) throw ConfigError("tagged user has no channel gain");
  const double rate =
      rate_of_power(params.p_tot_w / params.k_users, channels.gains[k], params);
  return simulate(params, rate, duration_s, seed, opts);
}

void write_events_csv(std::ostream& out, const ServiceTrace& trace) {
  out << "slot_index,kind,duration_us,winner_id,outcome\n";
  for (const auto& e : trace.events) {
    out << e.slot_index << ',' << to_string(e.kind) << ',' << e.duration_us << ',' << e.winner
        << ',' << to_string(e.outcome) << '\n';
  }
}

EcEstimate estimate_ec(const ServiceTrace& trace, double theta, double block_s, int batches) {
  return estimate_from_blocks(block_increments(trace, block_s), theta, block_s, batches);
}

EcEstimate estimate_ec(const std::vector<ServiceTrace>& traces, double theta, double block_s,
                       int batches) {
  std::vector<double> ds;
  for (const auto& t : traces) {
    auto part = block_increments(t, block_s);
    ds.insert(ds.end(), part.begin(), part.end());
  }
  return estimate_from_blocks(ds, theta, block_s, batches);
}

EcEstimate estimate_ec_cycles(const std::vector<ServiceTrace>& traces, double theta, int batches) {
  if (!(theta > 0.0)) throw DomainError("estimate_ec_cycles needs theta > 0");
  if (traces.empty()) throw DomainError("estimate_ec_cycles needs a trace");
  std::vector<double> cycles_s;
  for (const auto& t : traces) {
    for (std::size_t i = 1; i < t.on_starts_us.size(); ++i) {
      cycles_s.push_back((t.on_starts_us[i] - t.on_starts_us[i - 1]) * 1e-6);
    }
  }
  if (cycles_s.size() < 100) throw DomainError("estimate_ec_cycles needs at least 100 cycles");
  const double rate = traces.front().rate;
  const double t_f_s = traces.front().t_f_us * 1e-6;
  EcEstimate out;
  out.blocks = static_cast<int>(cycles_s.size());
  const double* data = cycles_s.data();
  out.ec = cycle_root(data, data + cycles_s.size(), theta, rate, t_f_s);
  std::vector<double> per_batch;
  const std::size_t b = static_cast<std::size_t>(std::max(batches, 2));
  for (std::size_t i = 0; i < b; ++i) {
    per_batch.push_back(cycle_root(data + i * cycles_s.size() / b,
                                   data + (i + 1) * cycles_s.size() / b, theta, rate, t_f_s));
  }
  out.half_width = half_width_of(per_batch);
  return out;
}

QueueFit fit_queue_tail(const ServiceTrace& trace, double arrival, double sample_s, int batches) {
  if (!(arrival >= 0.0)) throw DomainError("fit_queue_tail needs arrival >= 0");
  if (!(arrival < trace.throughput())) {
    throw InstabilityError("queue arrival rate is not below the service throughput");
  }
  const double step_us = sample_s * 1e6;
  const auto n = static_cast<std::size_t>(std::floor(trace.total_us / step_us));
  std::vector<double> q;
  q.reserve(n);
  double queue = 0.0;
  double prev = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double s = trace.delivered_bits(static_cast<double>(i) * step_us);
    queue = std::max(queue + arrival * sample_s - (s - prev), 0.0);
    prev = s;
    q.push_back(queue);
  }
  QueueFit out;
  out.samples = q.size();
  out.p_nonempty = static_cast<double>(std::count_if(q.begin(), q.end(), [](double v) {
                     return v > 0.0;
                   })) /
                   static_cast<double>(q.size());
  constexpr std::size_t kMinCount = 20;
  out.theta = tail_slope(q, kMinCount);
  if (!std::isfinite(out.theta)) {
    out.half_width = kInf;
    return out;
  }
  std::vector<double> per_batch;
  const std::size_t b = static_cast<std::size_t>(std::max(batches, 2));
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<double> part(q.begin() + static_cast<std::ptrdiff_t>(i * q.size() / b),
                             q.begin() + static_cast<std::ptrdiff_t>((i + 1) * q.size() / b));
    const double th = tail_slope(std::move(part), kMinCount);
    if (std::isfinite(th)) per_batch.push_back(th);
  }
  out.half_width = per_batch.size() == b ? half_width_of(per_batch) : kInf;
  return out;
}

EcEstimate estimate_ec_queue(const std::vector<ServiceTrace>& traces, double theta,
                             double sample_s) {
  if (!(theta > 0.0)) throw DomainError("estimate_ec_queue needs theta > 0");
  if (traces.empty()) throw DomainError("estimate_ec_queue needs a trace");
  double floor_thr = kInf;
  for (const auto& t : traces) floor_thr = std::min(floor_thr, t.throughput());
  const double step_us = sample_s * 1e6;
  std::vector<std::vector<double>> increments;
  for (const auto& t : traces) {
    const auto n = static_cast<std::size_t>(std::floor(t.total_us / step_us));
    std::vector<double> ds(n);
    double prev = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double s = t.delivered_bits(static_cast<double>(i) * step_us);
      ds[i - 1] = s - prev;
      prev = s;
    }
    increments.push_back(std::move(ds));
  }
  auto fit_all = [&](const std::vector<std::size_t>& subset, double arrival) {
    std::vector<double> q;
    const double inflow = arrival * sample_s;
    for (std::size_t idx : subset) {
      double queue = 0.0;
      for (double ds : increments[idx]) {
        queue = std::max(queue + inflow - ds, 0.0);
        q.push_back(queue);
      }
    }
    return tail_slope(std::move(q), 20);
  };
  // Decay rate falls as the arrival rate grows; bisect on the arrival.
  auto invert = [&](const std::vector<std::size_t>& subset) {
    double lo = 0.0;
    double hi = floor_thr;
    for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fit_all(subset, mid) > theta ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  std::vector<std::size_t> all(traces.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  EcEstimate out;
  out.blocks = static_cast<int>(traces.size());
  out.ec = invert(all);
  if (traces.size() >= 2) {
    std::vector<double> per_trace;
    for (std::size_t i = 0; i < traces.size(); ++i) per_trace.push_back(invert({i}));
    out.half_width = half_width_of(per_trace);
  } else {
    out.half_width = kInf;
  }
  return out;
}

QueueFit estimate_theta_from_queue(const SystemParams& params, double rate, double arrival,
                                   double duration_s, std::uint64_t seed) {
  return fit_queue_tail(simulate(params, rate, duration_s, seed), arrival);
}

EmpiricalContention empirical_contention(const ServiceTrace& trace, int batches) {
  const auto& view = trace.tagged_view;
  if (view.empty()) throw DomainError("empirical_contention needs a trace with a tagged LAA BS");
  struct Counts {
    double slots = 0, clear = 0, collided = 0;
    std::array<double, kSlotKinds> kinds{};
  };
  auto count = [&](std::size_t first, std::size_t last) {
    Counts c;
    for (std::size_t i = first; i < last; ++i) {
      ++c.slots;
      if (view[i] == ServiceTrace::kTaggedClear) {
        ++c.clear;
      } else if (view[i] == ServiceTrace::kTaggedCollided) {
        ++c.collided;
      } else {
        ++c.kinds[view[i]];
      }
    }
    return c;
  };
  auto v_of = [](const Counts& c) { return (c.clear + c.collided) / c.slots; };
  auto p_of = [](const Counts& c) {
    const double tx = c.clear + c.collided;
    return tx > 0 ? c.collided / tx : 0.0;
  };
  auto freq_of = [](const Counts& c, std::size_t k) {
    const double idle = c.slots - c.clear - c.collided;
    return idle > 0 ? c.kinds[k] / idle : 0.0;
  };

  EmpiricalContention out;
  const Counts all = count(0, view.size());
  out.v_laa = v_of(all);
  out.p_laa = p_of(all);
  for (std::size_t k = 0; k < kSlotKinds; ++k) out.slot_freq[k] = freq_of(all, k);

  const std::size_t b = static_cast<std::size_t>(std::max(batches, 2));
  std::vector<double> vs, ps;
  std::array<std::vector<double>, kSlotKinds> fs;
  for (std::size_t i = 0; i < b; ++i) {
    const Counts c = count(i * view.size() / b, (i + 1) * view.size() / b);
    vs.push_back(v_of(c));
    ps.push_back(p_of(c));
    for (std::size_t k = 0; k < kSlotKinds; ++k) fs[k].push_back(freq_of(c, k));
  }
  const double root_b = std::sqrt(static_cast<double>(b));
  out.v_laa_se = sd_of(vs) / root_b;
  out.p_laa_se = sd_of(ps) / root_b;
  for (std::size_t k = 0; k < kSlotKinds; ++k) out.slot_freq_se[k] = sd_of(fs[k]) / root_b;
  return out;
}

}  // namespace laa
