#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace laa {

enum class CwMode { kFixed, kVariable };

const char* to_string(CwMode mode);
CwMode cw_mode_from_string(const std::string& name);

struct HiddenNodes {
  int laa = 0;
  int wifi = 0;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// MAC, PHY and energy configuration of one deployment. All durations in
/// microseconds, all powers in watts.
struct SystemParams {
  int n_laa = 5;
  int m_wifi = 5;
  int k_users = 1;
  double bandwidth_hz = 5e6;

  int w_laa = 16;
  int w_wifi = 32;
  int k_retry_laa = 6;
  int k_retry_wifi = 6;
  CwMode mode = CwMode::kFixed;

  double sigma_idle_us = 10.0;
  double t_f_us = 1000.0;
  double t_c_us = 1000.0;
  double t_sw_us = 1000.0;
  double t_cw_us = 1000.0;
  double t_wl_us = 1000.0;
  double cca_us = 34.0;
  double difs_us = 50.0;
  // When set, CCA is added to LAA slot durations and DIFS to WiFi ones.
  bool sensing_in_slots = false;

  double p_tot_w = 0.19952623149688797;  // 23 dBm
  double noise_psd_dbm_hz = -174.0;

  double per = 0.0;
  std::vector<double> per_user;  // overrides `per` when non-empty

  double p_static_w = 0.1;
  double p_idle_w = 0.1;
  double xi = 0.1;

  std::optional<HiddenNodes> hidden;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  double per_of(int user) const;
  double subband_hz() const { return bandwidth_hz / k_users; }
  /// Noise power in one user's subband, PSD x B/K.
  double noise_w() const;

  double idle_us() const { return sigma_idle_us; }
  double laa_success_us() const;
  double laa_collision_us() const;
  double wifi_success_us() const;
  double wifi_collision_us() const;
  double cross_collision_us() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Channel realization for the tagged base station (index 0) and its users.
struct ChannelSet {
  std::vector<double> gains;  // linear power gain per user of BS 0
  double noise_w = 0.0;       // per-subband noise power
  std::vector<Point> bs_positions;
  std::vector<Point> ue_positions;  // K per BS, BS-major
  std::vector<Point> wifi_positions;
};

/// Log-distance urban-micro surrogate, PL(dB) = 22.7 + 36.7 log10(d) + 26 log10(f_GHz).
double path_loss_db(double distance_m, double freq_ghz = 5.0);
double path_gain(double distance_m, double freq_ghz = 5.0);

inline constexpr double kAreaSideM = 500.0;
inline constexpr double kMinDistanceM = 1.0;

ChannelSet generate_scenario(const SystemParams& params, std::uint64_t seed);

/// Shannon rate of one user, (B/K) log2(1 + G p / sigma^2), in bit/s.
double rate_of_power(double power_w, double gain, const SystemParams& params);

}  // namespace laa
