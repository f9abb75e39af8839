#include "laa/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "laa/errors.hpp"

namespace laa {

namespace {

using nlohmann::json;

template <typename T>
void read(const json& doc, const char* key, T& out) {
  if (auto it = doc.find(key); it != doc.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("scenario key '") + key + "': " + e.what());
    }
  }
}

// Power fields accept either "<name>_w" or "<name>_dbm".
void read_power(const json& doc, const std::string& stem, double& watts) {
  const bool has_w = doc.contains(stem + "_w");
  const bool has_dbm = doc.contains(stem + "_dbm");
  if (has_w && has_dbm) throw ConfigError("scenario gives both " + stem + "_w and " + stem + "_dbm");
  if (has_w) read(doc, (stem + "_w").c_str(), watts);
  if (has_dbm) {
    double dbm = 0.0;
    read(doc, (stem + "_dbm").c_str(), dbm);
    watts = dbm_to_watts(dbm);
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "n_laa", "m_wifi", "k_users", "bandwidth_hz", "w_laa", "w_wifi", "k_retry_laa",
      "k_retry_wifi", "mode", "sigma_idle_us", "t_f_us", "t_c_us", "t_sw_us", "t_cw_us",
      "t_wl_us", "cca_us", "difs_us", "sensing_in_slots", "p_tot_w", "p_tot_dbm",
      "noise_psd_dbm_hz", "per", "per_user", "p_static_w", "p_static_dbm", "p_idle_w",
      "p_idle_dbm", "xi", "hidden"};
  return keys;
}

}  // namespace

SystemParams params_from_json(const json& doc, SystemParams base) {
  if (!doc.is_object()) throw ConfigError("scenario document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown scenario key '" + key + "'");
  }
  SystemParams p = std::move(base);
  read(doc, "n_laa", p.n_laa);
  read(doc, "m_wifi", p.m_wifi);
  read(doc, "k_users", p.k_users);
  read(doc, "bandwidth_hz", p.bandwidth_hz);
  read(doc, "w_laa", p.w_laa);
  read(doc, "w_wifi", p.w_wifi);
  read(doc, "k_retry_laa", p.k_retry_laa);
  read(doc, "k_retry_wifi", p.k_retry_wifi);
  if (doc.contains("mode")) p.mode = cw_mode_from_string(doc.at("mode").get<std::string>());
  read(doc, "sigma_idle_us", p.sigma_idle_us);
  read(doc, "t_f_us", p.t_f_us);
  read(doc, "t_c_us", p.t_c_us);
  read(doc, "t_sw_us", p.t_sw_us);
  read(doc, "t_cw_us", p.t_cw_us);
  read(doc, "t_wl_us", p.t_wl_us);
  read(doc, "cca_us", p.cca_us);
  read(doc, "difs_us", p.difs_us);
  read(doc, "sensing_in_slots", p.sensing_in_slots);
  read_power(doc, "p_tot", p.p_tot_w);
  read(doc, "noise_psd_dbm_hz", p.noise_psd_dbm_hz);
  read(doc, "per", p.per);
  read(doc, "per_user", p.per_user);
  read_power(doc, "p_static", p.p_static_w);
  read_power(doc, "p_idle", p.p_idle_w);
  read(doc, "xi", p.xi);
  if (auto it = doc.find("hidden"); it != doc.end() && !it->is_null()) {
    HiddenNodes h;
    read(*it, "laa", h.laa);
    read(*it, "wifi", h.wifi);
    p.hidden = h;
  }
  p.validate();
  return p;
}

json params_to_json(const SystemParams& p) {
  json doc = {
      {"n_laa", p.n_laa},
      {"m_wifi", p.m_wifi},
      {"k_users", p.k_users},
      {"bandwidth_hz", p.bandwidth_hz},
      {"w_laa", p.w_laa},
      {"w_wifi", p.w_wifi},
      {"k_retry_laa", p.k_retry_laa},
      {"k_retry_wifi", p.k_retry_wifi},
      {"mode", to_string(p.mode)},
      {"sigma_idle_us", p.sigma_idle_us},
      {"t_f_us", p.t_f_us},
      {"t_c_us", p.t_c_us},
      {"t_sw_us", p.t_sw_us},
      {"t_cw_us", p.t_cw_us},
      {"t_wl_us", p.t_wl_us},
      {"cca_us", p.cca_us},
      {"difs_us", p.difs_us},
      {"sensing_in_slots", p.sensing_in_slots},
      {"p_tot_dbm", watts_to_dbm(p.p_tot_w)},
      {"noise_psd_dbm_hz", p.noise_psd_dbm_hz},
      {"per", p.per},
      {"p_static_w", p.p_static_w},
      {"p_idle_w", p.p_idle_w},
      {"xi", p.xi},
  };
  if (!p.per_user.empty()) doc["per_user"] = p.per_user;
  if (p.hidden) doc["hidden"] = {{"laa", p.hidden->laa}, {"wifi", p.hidden->wifi}};
  return doc;
}

SystemParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("scenario file " + path.string() + ": " + e.what());
  }
  return params_from_json(doc);
}

}  // namespace laa
