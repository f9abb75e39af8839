#include "laa/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <thread>

#include "laa/capacity.hpp"
#include "laa/config.hpp"
#include "laa/contention.hpp"
#include "laa/errors.hpp"
#include "laa/intervals.hpp"
#include "laa/optimizer.hpp"
#include "laa/simulator.hpp"

namespace laa {

namespace {

using nlohmann::json;
using Row = std::vector<std::string>;

struct GridPoint {
  SystemParams params;
  double theta = 0.0;
  double d_max_s = 0.0;
  int replication = 0;
};

template <typename T>
std::vector<T> read_list(const json& grid, const char* key) {
  std::vector<T> out;
  if (auto it = grid.find(key); it != grid.end()) {
    try {
      if (it->is_array()) {
        out = it->get<std::vector<T>>();
      } else {
        out.push_back(it->get<T>());
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("grid axis '") + key + "': " + e.what());
    }
    if (out.empty()) throw ConfigError(std::string("grid axis '") + key + "' is empty");
  }
  return out;
}

template <typename T>
void read_opt(const json& doc, const char* key, T& out) {
  if (auto it = doc.find(key); it != doc.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("experiment key '") + key + "': " + e.what());
    }
  }
}

std::string fmt_int(long long v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

// Every row opens with the parameter tuple that produced it.
Row point_prefix(const GridPoint& pt, double rate, std::uint64_t seed) {
  const SystemParams& p = pt.params;
  return {fmt_int(p.n_laa), fmt_int(p.m_wifi), to_string(p.mode), format_number(p.per),
          fmt_int(p.k_users), format_number(p.bandwidth_hz), format_number(rate),
          std::to_string(seed)};
}

const std::vector<std::string> kPrefixColumns = {"n_laa", "m_wifi", "mode", "per", "k_users",
                                                 "bandwidth_hz", "rate_bps", "seed"};

Row join(Row a, const Row& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> columns_with(std::vector<std::string> tail) {
  std::vector<std::string> out = kPrefixColumns;
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

double rate_for(const ExperimentSpec& spec, const SystemParams& params) {
  if (spec.rate_bps) return *spec.rate_bps;
  const ChannelSet ch = generate_scenario(params, spec.seed);
  return rate_of_power(params.p_tot_w / params.k_users, ch.gains.front(), params);
}

// Cartesian product over the scenario axes, optionally crossed with theta,
// d_max or replications.
std::vector<GridPoint> expand(const ExperimentSpec& spec, bool with_theta, bool with_dmax,
                          bool with_replications) {
  const std::vector<int> ns = spec.n_laa.empty() ? std::vector<int>{spec.base.n_laa} : spec.n_laa;
  const std::vector<int> ms =
      spec.m_wifi.empty() ? std::vector<int>{spec.base.m_wifi} : spec.m_wifi;
  const std::vector<CwMode> modes =
      spec.modes.empty() ? std::vector<CwMode>{spec.base.mode} : spec.modes;
  const std::vector<double> pers = spec.per.empty() ? std::vector<double>{spec.base.per} : spec.per;
  const std::vector<double> thetas = with_theta ? spec.theta : std::vector<double>{0.0};
  const std::vector<double> dmaxes = with_dmax ? spec.d_max_s : std::vector<double>{0.0};
  const int reps = with_replications ? spec.replications : 1;

  std::vector<GridPoint> out;
  for (int n : ns) {
    for (int m : ms) {
      for (CwMode mode : modes) {
        for (double per : pers) {
          for (double dmax : dmaxes) {
            for (double theta : thetas) {
              for (int r = 0; r < reps; ++r) {
                GridPoint pt;
                pt.params = spec.base;
                pt.params.n_laa = n;
                pt.params.m_wifi = m;
                pt.params.mode = mode;
                pt.params.per = per;
                pt.params.validate();
                pt.theta = theta;
                pt.d_max_s = dmax;
                pt.replication = r;
                out.push_back(pt);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

// Runs fn on every point with a fixed-size pool; output keeps grid order.
std::vector<std::vector<Row>> run_pool(const std::vector<GridPoint>& points, int workers,
                                       const std::function<std::vector<Row>(const GridPoint&)>& fn) {
  std::vector<std::vector<Row>> out(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        out[i] = fn(points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n, points.size()); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Table collect(std::vector<std::string> columns, const std::vector<std::vector<Row>>& parts) {
  Table t;
  t.columns = std::move(columns);
  for (const auto& part : parts) t.rows.insert(t.rows.end(), part.begin(), part.end());
  return t;
}

Table run_analyze(const ExperimentSpec& spec) {
  auto points = expand(spec, true, false, false);
  auto parts = run_pool(points, spec.workers, [&](const GridPoint& pt) -> std::vector<Row> {
    const double rate = rate_for(spec, pt.params);
    Row prefix = point_prefix(pt, rate, spec.seed);
    prefix.push_back(format_number(pt.theta));
    try {
      const ContentionPoint cp = solve_contention(pt.params);
      const ServiceModel model(pt.params, cp);
      const EcSolution four = ec_four_state(pt.theta, rate, model);
      const EcSolution two = ec_two_state(pt.theta, rate, model);
      const double defect = spectral_check(four, model);
      const double rel = two.ec > 0.0 ? std::abs(four.ec - two.ec) / two.ec : 0.0;
      return {join(prefix, {format_number(four.ec), format_number(two.ec), format_number(rel),
                            format_number(defect), fmt_bool(two.domain_limited), ""})};
    } catch (const std::exception& e) {
      return {join(prefix, {"", "", "", "", "", e.what()})};
    }
  });
  return collect(columns_with({"theta", "c_four_state", "c_two_state", "rel_diff",
                               "spectral_defect", "domain_limited", "error"}),
                 parts);
}

Table run_simulate(const ExperimentSpec& spec) {
  auto points = expand(spec, false, false, true);
  auto parts = run_pool(points, spec.workers, [&](const GridPoint& pt) -> std::vector<Row> {
    const double rate = rate_for(spec, pt.params);
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(pt.replication);
    const ServiceTrace trace = simulate(pt.params, rate, spec.duration_s, seed);
    const ContentionPoint cp = solve_contention(pt.params);
    const ServiceModel model(pt.params, cp);
    const EmpiricalContention emp = empirical_contention(trace);
    const auto off = trace.off_periods_us();
    double mean_off = 0.0;
    for (double v : off) mean_off += v;
    mean_off = off.empty() ? 0.0 : mean_off / static_cast<double>(off.size());

    std::vector<Row> rows;
    for (double theta : spec.theta) {
      Row r = point_prefix(pt, rate, seed);
      std::string block_ec, block_hw;
      try {
        const EcEstimate est = estimate_ec(trace, theta);
        block_ec = format_number(est.ec);
        block_hw = format_number(est.half_width);
      } catch (const DomainError&) {
        // Trace too short for the block estimator; leave the cells empty.
      }
      rows.push_back(join(
          r, {fmt_int(pt.replication), format_number(spec.duration_s),
              format_number(trace.throughput()), format_number(emp.v_laa), format_number(emp.p_laa),
              format_number(mean_off), format_number(theta), block_ec, block_hw,
              format_number(ec_two_state(theta, rate, model).ec)}));
    }
    return rows;
  });
  return collect(columns_with({"replication", "duration_s", "throughput_bps", "v_laa", "p_laa",
                               "mean_t3_us", "theta", "ec_block", "ec_block_half_width",
                               "ec_two_state"}),
                 parts);
}

Table run_sweep(const ExperimentSpec& spec) {
  auto points = expand(spec, false, true, false);
  auto parts = run_pool(points, spec.workers, [&](const GridPoint& pt) -> std::vector<Row> {
    const double rate = rate_for(spec, pt.params);
    const ContentionPoint cp = solve_contention(pt.params);
    const ServiceModel model(pt.params, cp);
    const double arrival = spec.arrival_bps ? *spec.arrival_bps : 0.5 * mean_service_rate(model, rate);
    const DelayMapping dm = theta_of_delay(pt.d_max_s, spec.p_th, arrival, model, rate);
    return {join(point_prefix(pt, rate, spec.seed),
                 {format_number(pt.d_max_s), format_number(spec.p_th), format_number(arrival),
                  format_number(dm.theta), format_number(dm.ec), format_number(dm.eta),
                  fmt_bool(dm.feasible)})};
  });
  return collect(columns_with({"d_max_s", "p_th", "arrival_bps", "theta", "ec", "eta", "feasible"}),
                 parts);
}

Table run_optimize(const ExperimentSpec& spec, bool energy) {
  auto points = expand(spec, true, false, false);
  auto parts = run_pool(points, spec.workers, [&](const GridPoint& pt) -> std::vector<Row> {
    const ChannelSet channels = generate_scenario(pt.params, spec.seed);
    const ContentionPoint cp = solve_contention(pt.params);
    const PowerModel pm = power_model(pt.params, cp);
    const PowerAllocation best = energy ? maximize_eee(channels, pt.theta, pt.params, cp)
                                        : maximize_ec(channels, pt.theta, pt.params, cp);
    const PowerAllocation wf = water_filling(channels, pt.theta, pt.params, cp);
    const PowerAllocation ci = channel_inversion(channels, pt.theta, pt.params, cp);
    std::vector<Row> rows;
    for (const PowerAllocation* a : {&best, &wf, &ci}) {
      Row r = point_prefix(pt, 0.0, spec.seed);
      r[6] = "";  // per-user rates differ; see powers
      const double p_avg = pm.average_power(a->total_power());
      rows.push_back(join(
          r, {format_number(pt.theta), a->method, format_number(a->total_capacity()),
              format_number(a->total_power()), format_number(p_avg),
              format_number(a->total_capacity() / p_avg), format_number(a->duality_gap),
              format_number(a->kkt_residual), fmt_int(a->iterations), fmt_bool(a->converged)}));
    }
    return rows;
  });
  return collect(columns_with({"theta", "method", "sum_ec_bps", "total_power_w", "avg_power_w",
                               "eee_bit_per_j", "duality_gap", "kkt_residual", "iterations",
                               "converged"}),
                 parts);
}

Table run_validate(const ExperimentSpec& spec) {
  auto points = expand(spec, false, false, false);
  auto parts = run_pool(points, spec.workers, [&](const GridPoint& pt) -> std::vector<Row> {
    const double rate = rate_for(spec, pt.params);
    const ContentionPoint cp = solve_contention(pt.params);
    const ServiceModel model(pt.params, cp);
    std::vector<ServiceTrace> traces;
    for (int r = 0; r < spec.replications; ++r) {
      traces.push_back(simulate(pt.params, rate, spec.duration_s,
                                spec.seed + static_cast<std::uint64_t>(r)));
    }
    double thr = 0.0;
    for (const auto& t : traces) thr += t.throughput();
    thr /= static_cast<double>(traces.size());

    std::vector<Row> rows;
    auto add = [&](const std::string& metric, double analytic, double simulated) {
      const double rel = std::abs(simulated - analytic) / std::abs(analytic);
      const bool pass = rel <= spec.tolerance;
      rows.push_back(join(point_prefix(pt, rate, spec.seed),
                          {fmt_int(spec.replications), format_number(spec.duration_s), metric,
                           format_number(analytic), format_number(simulated), format_number(rel),
                           format_number(spec.tolerance), pass ? "pass" : "fail"}));
    };
    add("throughput", mean_service_rate(model, rate), thr);
    const EmpiricalContention emp = empirical_contention(traces.front());
    add("v_laa", cp.v_laa, emp.v_laa);
    if (cp.p_laa > 0.0) add("p_laa", cp.p_laa, emp.p_laa);
    for (double theta : spec.theta) {
      add("ec_queue@" + format_number(theta), ec_two_state(theta, rate, model).ec,
          estimate_ec_queue(traces, theta).ec);
    }
    return rows;
  });
  Table t = collect(columns_with({"replications", "duration_s", "metric", "analytic", "simulated",
                                  "rel_error", "tolerance", "result"}),
                    parts);
  for (const auto& r : t.rows) {
    if (r.back() != "pass") t.all_passed = false;
  }
  return t;
}

const std::set<std::string>& known_spec_keys() {
  static const std::set<std::string> keys = {
      "command", "scenario", "grid", "rate_bps", "seed", "replications", "duration_s",
      "p_th", "arrival_bps", "tolerance", "workers"};
  return keys;
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::kAnalyze: return "analyze";
    case Command::kSimulate: return "simulate";
    case Command::kSweep: return "sweep";
    case Command::kOptimizeEc: return "optimize-ec";
    case Command::kOptimizeEee: return "optimize-eee";
    case Command::kValidate: return "validate";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::kAnalyze, Command::kSimulate, Command::kSweep, Command::kOptimizeEc,
                    Command::kOptimizeEee, Command::kValidate}) {
    if (name == to_string(c)) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

void ExperimentSpec::validate() const {
  base.validate();
  if (theta.empty()) throw ConfigError("theta grid is empty");
  for (double t : theta) {
    if (!(t > 0.0)) throw ConfigError("theta values must be > 0");
  }
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (!(duration_s > 0.0)) throw ConfigError("duration_s must be > 0");
  if (!(p_th > 0.0 && p_th < 1.0)) throw ConfigError("p_th must lie in (0, 1)");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (rate_bps && !(*rate_bps >= 0.0)) throw ConfigError("rate_bps must be >= 0");
  if (command == Command::kSweep && d_max_s.empty()) throw ConfigError("sweep needs grid.d_max_s");
  for (double d : d_max_s) {
    if (!(d > 0.0)) throw ConfigError("d_max_s values must be > 0");
  }
}

ExperimentSpec spec_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_spec_keys().contains(key)) throw ConfigError("unknown experiment key '" + key + "'");
  }
  ExperimentSpec spec;
  if (!doc.contains("command")) throw ConfigError("experiment needs a command");
  spec.command = command_from_string(doc.at("command").get<std::string>());
  if (auto it = doc.find("scenario"); it != doc.end()) spec.base = params_from_json(*it);
  if (auto it = doc.find("grid"); it != doc.end()) {
    static const std::set<std::string> axes = {"theta", "n_laa", "m_wifi", "mode", "per", "d_max_s"};
    for (const auto& [key, value] : it->items()) {
      if (!axes.contains(key)) throw ConfigError("unknown grid axis '" + key + "'");
    }
    if (it->contains("theta")) spec.theta = read_list<double>(*it, "theta");
    spec.n_laa = read_list<int>(*it, "n_laa");
    spec.m_wifi = read_list<int>(*it, "m_wifi");
    for (const auto& name : read_list<std::string>(*it, "mode")) {
      spec.modes.push_back(cw_mode_from_string(name));
    }
    spec.per = read_list<double>(*it, "per");
    spec.d_max_s = read_list<double>(*it, "d_max_s");
  }
  if (doc.contains("rate_bps") && !doc.at("rate_bps").is_null()) {
    spec.rate_bps = doc.at("rate_bps").get<double>();
  }
  if (doc.contains("arrival_bps") && !doc.at("arrival_bps").is_null()) {
    spec.arrival_bps = doc.at("arrival_bps").get<double>();
  }
  read_opt(doc, "seed", spec.seed);
  read_opt(doc, "replications", spec.replications);
  read_opt(doc, "duration_s", spec.duration_s);
  read_opt(doc, "p_th", spec.p_th);
  read_opt(doc, "tolerance", spec.tolerance);
  read_opt(doc, "workers", spec.workers);
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("experiment file " + path + ": " + e.what());
  }
  return spec_from_json(doc);
}

Table run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  switch (spec.command) {
    case Command::kAnalyze: return run_analyze(spec);
    case Command::kSimulate: return run_simulate(spec);
    case Command::kSweep: return run_sweep(spec);
    case Command::kOptimizeEc: return run_optimize(spec, false);
    case Command::kOptimizeEee: return run_optimize(spec, true);
    case Command::kValidate: return run_validate(spec);
  }
  throw ConfigError("unhandled command");
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const Table& table, const std::string& comment) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  out << "# generated " << stamp << ' ' << comment << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      // Error messages may carry commas.
      const bool quote = row[i].find_first_of(",\"") != std::string::npos;
      out << (i ? "," : "");
      if (quote) {
        out << '"';
        for (char c : row[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
        out << '"';
      } else {
        out << row[i];
      }
    }
    out << '\n';
  }
}

}  // namespace laa
