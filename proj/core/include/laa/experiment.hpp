#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "laa/scenario.hpp"

namespace laa {

enum class Command { kAnalyze, kSimulate, kSweep, kOptimizeEc, kOptimizeEee, kValidate };

const char* to_string(Command c);
Command command_from_string(const std::string& name);

/// One batch job read from a JSON file.
///
///   {"command": "analyze", "scenario": {...}, "grid": {"theta": [1e-6, 1e-5],
///    "n_laa": [5], "m_wifi": [5], "mode": ["FCW", "VCW"]}, "rate_bps": 2e7}
///
/// Grid axes left out fall back to the scenario value. `rate_bps` absent means
/// the tagged user's rate comes from a channel drawn with `seed`.
struct ExperimentSpec {
  Command command = Command::kAnalyze;
  SystemParams base;
  std::vector<double> theta{1e-5};
  std::vector<int> n_laa;
  std::vector<int> m_wifi;
  std::vector<CwMode> modes;
  std::vector<double> per;
  std::vector<double> d_max_s;  // sweep only
  std::optional<double> rate_bps;
  std::uint64_t seed = 1;
  int replications = 1;
  double duration_s = 100.0;
  double p_th = 0.1;                   // sweep
  std::optional<double> arrival_bps;   // sweep; defaults to half the mean service rate
  double tolerance = 0.10;             // validate
  int workers = 1;

  void validate() const;
};

ExperimentSpec spec_from_json(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::string& path);

/// A CSV table; `rows` hold already formatted cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  bool all_passed = true;  // validate only
};

Table run_experiment(const ExperimentSpec& spec);

/// Writes "# generated <UTC time> <command>" then the header and rows.
void write_csv(std::ostream& out, const Table& table, const std::string& comment);

/// Full round-trip formatting of a double.
std::string format_number(double v);

}  // namespace laa
