#pragma once

#include <array>
#include <utility>

#include "laa/contention.hpp"
#include "laa/intervals.hpp"
#include "laa/scenario.hpp"

namespace laa {

enum class EcMethod { kFourState, kTwoState };

const char* to_string(EcMethod method);

/// Effective capacity at one (theta, rate) point.
struct EcSolution {
  double theta = 0.0;  // 1/bit
  double rate = 0.0;   // bit/s
  double ec = 0.0;     // bit/s
  EcMethod method = EcMethod::kTwoState;
  std::pair<double, double> bracket{0.0, 0.0};  // final root interval, bit/s
  double spectral_defect = -1.0;                // |rho(H) - 1|, negative when not checked
  // Root sits on the edge of the t3 convergence region (precision exhausted).
  bool domain_limited = false;
};

/// Solves F(theta C) = R theta T_f for C by bisection (two-state ON/OFF model).
EcSolution ec_two_state(double theta, double rate, const ServiceModel& model);
EcSolution ec_two_state(double theta, double rate, const SystemParams& params,
                        const ContentionPoint& cp);

/// Solves the scalar four-state condition for C on [0, R] by bisection.
EcSolution ec_four_state(double theta, double rate, const ServiceModel& model);
EcSolution ec_four_state(double theta, double rate, const SystemParams& params,
                         const ContentionPoint& cp);

/// Left-hand side of the four-state condition at capacity c (equals 1 at the root).
double four_state_lhs(double theta, double rate, double c, const ServiceModel& model);

using Matrix4 = std::array<std::array<double, 4>, 4>;

/// H(-theta, -theta c) = P Gamma with states ordered OFF2, OFF3, OFF1, ON.
Matrix4 transition_mgf_matrix(double theta, double c, double rate, const ServiceModel& model);

/// Perron root of a non-negative matrix by power iteration on H + I (H itself is
/// periodic, so the unshifted iteration oscillates).
double spectral_radius(const Matrix4& h);

/// |rho(H(-theta, -theta C)) - 1| at a solved point.
double spectral_check(const EcSolution& sol, const ServiceModel& model);
double spectral_check(const EcSolution& sol, const SystemParams& params, const ContentionPoint& cp);

/// theta -> 0 limit, R T_f / (T_f + E[t3]).
double mean_service_rate(const ServiceModel& model, double rate);
double mean_service_rate(const SystemParams& params, const ContentionPoint& cp, double rate);

struct DelayMapping {
  double theta = 0.0;
  double ec = 0.0;
  double eta = 0.0;  // non-empty buffer probability estimate
  bool feasible = true;
};

/// theta such that p_th = eta exp(-theta C(theta) d_max), eta = arrival / mean rate.
/// Returns theta = 0 with feasible = false when p_th >= eta, and theta = +inf with
/// feasible = false when the bound cannot be met inside the t3 domain.
DelayMapping theta_of_delay(double d_max_s, double p_th, double arrival, const ServiceModel& model,
                            double rate);
DelayMapping theta_of_delay(double d_max_s, double p_th, double arrival, const SystemParams& params,
                            const ContentionPoint& cp, double rate);

}  // namespace laa
