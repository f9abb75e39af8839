#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "laa/scenario.hpp"

namespace laa {

/// Reads a scenario document. Keys mirror SystemParams field names; powers may
/// be given in watts (`*_w`) or dBm (`*_dbm`), e.g. "p_tot_dbm": 23. Unknown keys
/// are rejected so typos surface as ConfigError.
SystemParams params_from_json(const nlohmann::json& doc, SystemParams base = {});
nlohmann::json params_to_json(const SystemParams& params);

SystemParams load_params(const std::filesystem::path& path);

}  // namespace laa
