#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "laa/contention.hpp"
#include "laa/scenario.hpp"

namespace laa {

enum class NodeKind { kLaa, kWifi };

struct NodeStats {
  std::uint64_t transmissions = 0;
  std::uint64_t collisions = 0;
  std::uint64_t successes = 0;  // collision-free and error-free
  std::uint64_t channel_errors = 0;
  std::uint64_t drops = 0;
};

struct NodeState {
  NodeKind kind = NodeKind::kLaa;
  int backoff_timer = 0;  // slots left before the next attempt
  int retry_stage = 0;
  int cw = 0;
  NodeStats stats;
};

enum class SlotOutcome { kNone, kSuccess, kChannelError, kCollision };

const char* to_string(SlotOutcome outcome);

struct SlotEvent {
  std::uint64_t slot_index = 0;
  SlotKind kind = SlotKind::kIdle;
  double duration_us = 0.0;
  int winner = -1;  // node index of a lone transmitter, -1 otherwise
  SlotOutcome outcome = SlotOutcome::kNone;
};

/// Output of one run. Node 0 is the tagged LAA BS; its tagged user receives
/// `rate` bit/s during each delivered ON period.
struct ServiceTrace {
  double rate = 0.0;      // bit/s
  double t_f_us = 0.0;    // ON period length
  double total_us = 0.0;  // sum of all slot durations
  std::uint64_t slots = 0;
  std::vector<double> on_starts_us;  // start of every delivered ON period, increasing
  std::vector<NodeState> nodes;
  std::array<std::uint64_t, kSlotKinds> channel_counts{};  // every slot by kind
  // Slots the tagged BS spends counting down, classified as in the slot model.
  std::array<std::uint64_t, kSlotKinds> tagged_backoff_counts{};
  // Per slot as seen by the tagged BS: the SlotKind index while it counts down,
  // kTaggedClear when it transmits without collision, kTaggedCollided otherwise.
  std::vector<std::uint8_t> tagged_view;
  std::vector<SlotEvent> events;  // only with SimOptions::record_events

  static constexpr std::uint8_t kTaggedClear = 6;
  static constexpr std::uint8_t kTaggedCollided = 7;

  const NodeStats& tagged() const { return nodes.front().stats; }
  /// Bits delivered by time t (microseconds); linear inside ON periods.
  double delivered_bits(double t_us) const;
  double throughput() const { return delivered_bits(total_us) / (total_us * 1e-6); }
  /// Gaps between consecutive deliveries minus T_f, in microseconds.
  std::vector<double> off_periods_us() const;
};

struct SimOptions {
  int tagged_user = 0;
  bool record_events = false;
};

/// Slot-synchronous saturated contention of N LAA BSs and M WiFi nodes.
ServiceTrace simulate(const SystemParams& params, double rate, double duration_s, std::uint64_t seed,
                      const SimOptions& opts = {});
/// Rate of the tagged user taken from the channel at an equal power split.
ServiceTrace simulate(const SystemParams& params, const ChannelSet& channels, double duration_s,
                      std::uint64_t seed, const SimOptions& opts = {});

/// CSV with columns slot_index,kind,duration_us,winner_id,outcome.
void write_events_csv(std::ostream& out, const ServiceTrace& trace);

struct EcEstimate {
  double ec = 0.0;          // bit/s
  double half_width = 0.0;  // 95% batch-means half-width
  int blocks = 0;
};

/// -(1/(theta T_b)) log mean exp(-theta dS) over blocks of length T_b.
EcEstimate estimate_ec(const ServiceTrace& trace, double theta, double block_s = 0.5,
                       int batches = 10);
/// Same over several independent traces pooled block-wise.
EcEstimate estimate_ec(const std::vector<ServiceTrace>& traces, double theta, double block_s = 0.5,
                       int batches = 10);

/// Solves mean_i exp(theta C (T_f + t3_i)) = exp(theta R T_f) over the observed
/// delivery cycles.
EcEstimate estimate_ec_cycles(const std::vector<ServiceTrace>& traces, double theta,
                              int batches = 10);

struct QueueFit {
  double theta = 0.0;  // fitted decay rate, 1/bit; +inf when the queue stays empty
  double half_width = 0.0;
  double p_nonempty = 0.0;
  std::size_t samples = 0;
};

/// Constant-rate fluid queue served by the trace, sampled every `sample_s`;
/// fits -log Pr{Q > q} against q over the upper tail.
QueueFit fit_queue_tail(const ServiceTrace& trace, double arrival, double sample_s = 2e-3,
                        int batches = 10);
/// Arrival rate whose pooled queue-tail fit decays at `theta`: the empirical
/// effective capacity read off the queue rather than off the service MGF.
EcEstimate estimate_ec_queue(const std::vector<ServiceTrace>& traces, double theta,
                             double sample_s = 2e-3);
QueueFit estimate_theta_from_queue(const SystemParams& params, double rate, double arrival,
                                   double duration_s, std::uint64_t seed);

/// Observed per-slot attempt probability, collision probability and slot mix of
/// the tagged BS. Standard errors are batch means over contiguous slot ranges.
struct EmpiricalContention {
  double v_laa = 0.0, v_laa_se = 0.0;
  double p_laa = 0.0, p_laa_se = 0.0;
  std::array<double, kSlotKinds> slot_freq{};
  std::array<double, kSlotKinds> slot_freq_se{};
};

EmpiricalContention empirical_contention(const ServiceTrace& trace, int batches = 20);

}  // namespace laa
