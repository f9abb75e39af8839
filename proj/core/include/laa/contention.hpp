#pragma once

#include <array>
#include <cstddef>

#include "laa/genfun.hpp"
#include "laa/scenario.hpp"

namespace laa {

/// Saturation operating point: per-slot transmission and collision probabilities.
struct ContentionPoint {
  double v_laa = 0.0;
  double v_wifi = 0.0;
  double p_laa = 0.0;
  double p_wifi = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

struct FixedPointOptions {
  double damping = 0.5;
  double tolerance = 1e-14;
  int max_iterations = 20000;
};

/// Mean number of slots consumed by one LAA attempt at stage j, backoff
/// included: (W_j + 1) / 2.
double mean_backoff_laa(int stage, const SystemParams& params);
double mean_backoff_wifi(int stage, const SystemParams& params);

/// Attempt probability of a saturated LAA BS given its collision probability.
double laa_tx_prob(double p_laa, const SystemParams& params);
/// Attempt probability of a saturated WiFi node given its collision probability.
double wifi_tx_prob(double p_wifi, const SystemParams& params);

/// Factor [(1-v_L)^{h_L} (1-v_W)^{h_W}]^{2 T_s / mean_slot}; 1 without hidden nodes.
double hidden_factor(double v_laa, double v_wifi, const SystemParams& params);

/// Largest defect of the four defining equations at `cp`, hidden nodes included
/// when configured.
double fixed_point_residual(const ContentionPoint& cp, const SystemParams& params);

/// Solves the decoupled saturation equations without hidden nodes. Damped
/// Picard iteration, falling back to bisection on the scalar map in v_L.
ContentionPoint solve_fixed_point(const SystemParams& params, const FixedPointOptions& opts = {});

/// Same with hidden-node factors; iterates jointly with the mean slot length.
ContentionPoint solve_fixed_point_hidden(const SystemParams& params,
                                         const FixedPointOptions& opts = {});

/// Dispatches on `params.hidden`.
ContentionPoint solve_contention(const SystemParams& params);

/// Slot types seen by a tagged LAA BS while it counts down (and on the channel).
enum class SlotKind : int {
  kIdle = 0,
  kWifiCollision = 1,
  kLaaCollision = 2,
  kWifiSuccess = 3,
  kLaaSuccess = 4,
  kCrossCollision = 5,
};

inline constexpr std::size_t kSlotKinds = 6;
const char* to_string(SlotKind kind);

struct SlotDistribution {
  std::array<Atom, kSlotKinds> atoms{};

  const Atom& operator[](SlotKind k) const { return atoms[static_cast<std::size_t>(k)]; }
};

double slot_duration_us(SlotKind kind, const SystemParams& params);

/// Duration PMF of a slot observed by a tagged LAA BS during backoff.
SlotDistribution slot_distribution(const ContentionPoint& cp, const SystemParams& params);
GenFun slot_pgf(const SlotDistribution& sd);
double slot_mean(const SlotDistribution& sd);

}  // namespace laa
