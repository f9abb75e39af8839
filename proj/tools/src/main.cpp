// laa-ec: batch front-end for the effective-capacity library.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "laa/errors.hpp"
#include "laa/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 2;
constexpr int kExitConfig = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective capacity of LAA under LBT contention: analysis, simulation, "
               "power allocation"};
  std::string spec_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> tolerance;
  app.add_option("--spec", spec_path, "experiment JSON file")->required();
  app.add_option("--out", out_dir, "output directory (CSV goes to stdout when omitted)");
  app.add_option("--seed", seed, "override the experiment seed");
  app.add_option("--workers", workers, "worker threads for grid points")->check(CLI::PositiveNumber);
  app.add_option("--tolerance", tolerance, "relative tolerance for validate");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    laa::ExperimentSpec spec = laa::load_spec(spec_path);
    if (seed) spec.seed = *seed;
    if (workers) spec.workers = *workers;
    if (tolerance) spec.tolerance = *tolerance;
    spec.validate();

    const laa::Table table = laa::run_experiment(spec);
    const std::string comment = std::string(laa::to_string(spec.command)) + " spec=" +
                                std::filesystem::path(spec_path).filename().string();
    if (out_dir.empty()) {
      laa::write_csv(std::cout, table, comment);
    } else {
      std::filesystem::create_directories(out_dir);
      const auto path = std::filesystem::path(out_dir) / (std::string(laa::to_string(spec.command)) + ".csv");
      std::ofstream out(path);
      if (!out) throw laa::ConfigError("cannot write " + path.string());
      laa::write_csv(out, table, comment);
      std::cerr << "wrote " << table.rows.size() << " rows to " << path.string() << '\n';
    }
    if (spec.command == laa::Command::kValidate && !table.all_passed) {
      std::cerr << "validation failed: at least one row outside tolerance\n";
      return kExitValidationFailed;
    }
  } catch (const laa::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
