#pragma once

#include <string>
#include <utility>
#include <vector>

#include "laa/capacity.hpp"
#include "laa/contention.hpp"
#include "laa/intervals.hpp"
#include "laa/scenario.hpp"

namespace laa {

struct PowerAllocation {
  std::string method;
  std::vector<double> powers;      // W
  std::vector<double> rates;       // bit/s at those powers
  std::vector<double> capacities;  // effective capacity per user, bit/s
  double mu = 0.0;                 // power-budget multiplier
  double omega = 0.0;              // Dinkelbach parameter, bit/J
  double objective = 0.0;          // sum C_k, or EEE for maximize_eee
  double duality_gap = 0.0;        // relative
  double kkt_residual = 0.0;       // max |lambda dP/dC - 1| over interior users
  int iterations = 0;
  bool converged = true;
  bool omega_monotone = true;      // Dinkelbach iterates non-decreasing
  std::vector<double> omega_history;

  double total_power() const;
  double total_capacity() const;
};

/// Energy model of the two-state ON/OFF description.
struct PowerModel {
  double pi1 = 0.5;
  double pi2 = 0.5;
  double i_bar = 0.0;  // mean collisions between consecutive successes
  double I_bar = 0.0;  // mean backoff slots between consecutive successes
  double tau_bar_us = 0.0;
  double p_static_eff = 0.0;
  double xi_eff = 0.0;

  /// P'_static + sum P_k / xi'.
  double average_power(double total_tx_w) const { return p_static_eff + total_tx_w / xi_eff; }
};

PowerModel power_model(const SystemParams& params, const ContentionPoint& cp);
std::pair<double, PowerModel> average_power(const PowerAllocation& alloc, const SystemParams& params,
                                            const ContentionPoint& cp);

/// One user's transmit power as a function of its effective capacity and the
/// derivative dP/dC; `value` is +inf outside the t3 domain.
class CapacityPowerCurve {
 public:
  CapacityPowerCurve(const ServiceModel& model, double gain, double theta);

  /// P(C) and dP/dC. Throws DomainError when theta C leaves the t3 domain.
  Dual power(double capacity) const;
  /// Same, returning +inf instead of throwing.
  Dual power_or_inf(double capacity) const;
  double capacity_of_power(double power_w) const;
  /// Largest capacity with finite power.
  double capacity_limit() const { return c_max_; }
  /// C >= 0 with lambda dP/dC = 1 (0 when lambda dP/dC(0) >= 1).
  double kkt_capacity(double lambda) const;

  double gain() const { return gain_; }
  double theta() const { return theta_; }

 private:
  const ServiceModel* model_;
  double gain_;
  double theta_;
  double c_max_;
};

/// P(C) = (sigma^2/G)(exp(F(C theta) K ln2 / (B theta T_f)) - 1), with dP/dC.
Dual power_of_capacity(double capacity, double theta, double gain, const SystemParams& params,
                       const ServiceModel& model);

enum class DualUpdate {
  kBisection,   // sign of the subgradient drives a bracket on log(mu)
  kSubgradient  // projected step mu <- [mu + d_t (sum P - P_tot)]^+, d_t = d_0 / sqrt(t)
};

struct OptimizerOptions {
  DualUpdate dual_update = DualUpdate::kBisection;
  int max_dual_iterations = 10000;
  double budget_tolerance = 1e-12;  // relative, bisection update
  double subgradient_tolerance = 1e-6;
  int max_dinkelbach_iterations = 100;
  double dinkelbach_tolerance = 1e-8;
};

/// Maximizes sum_k C_k subject to sum_k P_k <= P_tot by dual decomposition.
PowerAllocation maximize_ec(const ChannelSet& channels, double theta, const SystemParams& params,
                            const ContentionPoint& cp, const OptimizerOptions& opts = {});

/// Maximizes sum_k C_k / P_avg by Dinkelbach iterations over the same machinery.
PowerAllocation maximize_eee(const ChannelSet& channels, double theta, const SystemParams& params,
                             const ContentionPoint& cp, const OptimizerOptions& opts = {});

/// Baselines; capacities are filled in by the two-state solver at `theta`.
PowerAllocation water_filling(const ChannelSet& channels, double theta, const SystemParams& params,
                              const ContentionPoint& cp);
PowerAllocation channel_inversion(const ChannelSet& channels, double theta,
                                  const SystemParams& params, const ContentionPoint& cp);

/// Power split only.
std::vector<double> water_filling_powers(const ChannelSet& channels, double p_tot);
std::vector<double> channel_inversion_powers(const ChannelSet& channels, double p_tot);

/// sum C_k / P_avg for an allocation.
double effective_energy_efficiency(const PowerAllocation& alloc, const PowerModel& model);

}  // namespace laa
