#include "laa/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "laa/errors.hpp"

namespace laa {

const char* to_string(CwMode mode) { return mode == CwMode::kFixed ? "FCW" : "VCW"; }

CwMode cw_mode_from_string(const std::string& name) {
  if (name == "FCW" || name == "fcw") return CwMode::kFixed;
  if (name == "VCW" || name == "vcw") return CwMode::kVariable;
  throw ConfigError("unknown contention-window mode '" + name + "' (expected FCW or VCW)");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid SystemParams: ") + what);
}

}  // namespace

void SystemParams::validate() const {
  require(n_laa >= 1, "n_laa >= 1");
  require(m_wifi >= 0, "m_wifi >= 0");
  require(k_users >= 1, "k_users >= 1");
  require(bandwidth_hz > 0.0, "bandwidth_hz > 0");
  require(w_laa >= 2 && w_wifi >= 2, "w_laa >= 2 and w_wifi >= 2");
  require(k_retry_laa >= 1 && k_retry_wifi >= 1, "k_retry_* >= 1");
  require(k_retry_laa <= 30 && k_retry_wifi <= 30, "k_retry_* <= 30");
  require(sigma_idle_us > 0 && t_f_us > 0 && t_c_us > 0 && t_sw_us > 0 && t_cw_us > 0 &&
              t_wl_us > 0 && cca_us > 0 && difs_us > 0,
          "all durations > 0");
  require(per >= 0.0 && per < 1.0, "per in [0, 1)");
  for (double e : per_user) require(e >= 0.0 && e < 1.0, "per_user entries in [0, 1)");
  require(per_user.empty() || static_cast<int>(per_user.size()) == k_users,
          "per_user has k_users entries");
  require(p_tot_w > 0.0, "p_tot_w > 0");
  require(xi > 0.0 && xi <= 1.0, "xi in (0, 1]");
  require(p_static_w >= 0.0 && p_idle_w >= 0.0, "static and idle powers >= 0");
  if (hidden) require(hidden->laa >= 0 && hidden->wifi >= 0, "hidden counts >= 0");
}

double SystemParams::per_of(int user) const {
  if (per_user.empty()) return per;
  return per_user.at(static_cast<std::size_t>(user));
}

double SystemParams::noise_w() const {
  return dbm_to_watts(noise_psd_dbm_hz) * subband_hz();
}

double SystemParams::laa_success_us() const { return t_f_us + (sensing_in_slots ? cca_us : 0.0); }
double SystemParams::laa_collision_us() const {
  return t_c_us + (sensing_in_slots ? cca_us : 0.0);
}
double SystemParams::wifi_success_us() const {
  return t_sw_us + (sensing_in_slots ? difs_us : 0.0);
}
double SystemParams::wifi_collision_us() const {
  return t_cw_us + (sensing_in_slots ? difs_us : 0.0);
}
double SystemParams::cross_collision_us() const {
  return t_wl_us + (sensing_in_slots ? std::max(cca_us, difs_us) : 0.0);
}

double path_loss_db(double distance_m, double freq_ghz) {
  const double d = std::max(distance_m, kMinDistanceM);
  return 22.7 + 36.7 * std::log10(d) + 26.0 * std::log10(freq_ghz);
}

double path_gain(double distance_m, double freq_ghz) {
  return std::pow(10.0, -path_loss_db(distance_m, freq_ghz) / 10.0);
}

ChannelSet generate_scenario(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ChannelSet out;
  out.noise_w = params.noise_w();
  const double ue_side = kAreaSideM / std::sqrt(static_cast<double>(params.n_laa));

  for (int b = 0; b < params.n_laa; ++b) {
    out.bs_positions.push_back({kAreaSideM * unit(rng), kAreaSideM * unit(rng)});
  }
  for (int b = 0; b < params.n_laa; ++b) {
    const Point bs = out.bs_positions[static_cast<std::size_t>(b)];
    for (int k = 0; k < params.k_users; ++k) {
      const Point ue{bs.x + ue_side * (unit(rng) - 0.5), bs.y + ue_side * (unit(rng) - 0.5)};
      out.ue_positions.push_back(ue);
      if (b == 0) {
        const double d = std::hypot(ue.x - bs.x, ue.y - bs.y);
        out.gains.push_back(path_gain(d));
      }
    }
  }
  for (int m = 0; m < params.m_wifi; ++m) {
    out.wifi_positions.push_back({kAreaSideM * unit(rng), kAreaSideM * unit(rng)});
  }
  return out;
}

double rate_of_power(double power_w, double gain, const SystemParams& params) {
  if (!(power_w >= 0.0)) throw DomainError("rate_of_power: negative transmit power");
  return params.subband_hz() * std::log1p(gain * power_w / params.noise_w()) / std::numbers::ln2;
}

}  // namespace laa
