// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "laa/capacity.hpp"
#include "laa/contention.hpp"
#include "laa/intervals.hpp"
#include "laa/optimizer.hpp"
#include "laa/simulator.hpp"
#include "support/oracles.hpp"

using namespace laa;

namespace {

constexpr double kRate = oracle::kRate;

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)) {}

  // Records a check; prints it when it fails or when `always` is set.
  bool check(bool ok, const std::string& what, bool always = false) {
    if (!ok) ++failures_;
    ++checks_;
    if (!ok || always) std::printf("    %s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    return ok;
  }
  void note(const std::string& what) { std::printf("    %s\n", what.c_str()); }

  int failures() const { return failures_; }
  int checks() const { return checks_; }
  const std::string& title() const { return title_; }

 private:
  std::string title_;
  int failures_ = 0;
  int checks_ = 0;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

SystemParams config(int n, int m, CwMode mode, double per = 0.0) {
  SystemParams p;
  p.n_laa = n;
  p.m_wifi = m;
  p.mode = mode;
  p.per = per;
  return p;
}

const char* mode_name(CwMode m) { return to_string(m); }

// 1 and 2 share the solved grid.
void solver_grid(Criterion& c1, Criterion& c2) {
  const auto start = std::chrono::steady_clock::now();
  double worst_rel = 0.0;
  double worst_defect = 0.0;
  int points = 0;
  for (CwMode mode : {CwMode::kFixed, CwMode::kVariable})
    for (int n : {1, 5, 10})
      for (int m : {1, 5, 10})
        for (double per : {0.0, 0.05}) {
          const SystemParams p = config(n, m, mode, per);
          const ServiceModel model(p, solve_fixed_point(p));
          for (double theta : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
            const auto four = ec_four_state(theta, kRate, model);
            const auto two = ec_two_state(theta, kRate, model);
            const double r = rel(four.ec, two.ec);
            const double d = spectral_check(four, model);
            const std::string where =
                fmt("%s N=%d M=%d per=%g theta=%g", mode_name(mode), n, m, per, theta);
            c1.check(r <= 1e-8, fmt("%s: four-state %.10g two-state %.10g rel %.2e", where.c_str(),
                                    four.ec, two.ec, r));
            c2.check(d <= 1e-6, fmt("%s: |rho - 1| = %.2e", where.c_str(), d));
            worst_rel = std::max(worst_rel, r);
            worst_defect = std::max(worst_defect, d);
            ++points;
          }
        }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c1.check(secs < 10.0, fmt("%d points, worst relative difference %.2e, %.2f s", points, worst_rel, secs),
           true);
  c2.check(true, fmt("%d points, worst spectral defect %.2e", points, worst_defect), true);
}

std::vector<ServiceTrace> runs(const SystemParams& p, double rate, int seeds, double duration_s,
                               std::uint64_t first_seed) {
  std::vector<ServiceTrace> out;
  for (int s = 0; s < seeds; ++s) {
    out.push_back(simulate(p, rate, duration_s, first_seed + static_cast<std::uint64_t>(s)));
  }
  return out;
}

void analysis_vs_simulation(Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  for (CwMode mode : {CwMode::kFixed, CwMode::kVariable}) {
    const SystemParams p = config(5, 5, mode);
    const ServiceModel model(p, solve_fixed_point(p));
    const auto traces = runs(p, kRate, 10, 100.0, 1000);
    for (double theta : {1e-6, 3e-6, 1e-5, 3e-5, 1e-4}) {
      const double analytic = ec_two_state(theta, kRate, model).ec;
      const EcEstimate queue = estimate_ec_queue(traces, theta);
      const EcEstimate block = estimate_ec(traces, theta);
      const double r = (queue.ec - analytic) / analytic;
      c.check(std::abs(r) <= 0.10,
              fmt("%s theta=%g: analytic %.6g, queue-tail %.6g +- %.2g (%+.1f%%), block %.6g (%+.1f%%)",
                  mode_name(mode), theta, analytic, queue.ec, queue.half_width, 100.0 * r, block.ec,
                  100.0 * (block.ec - analytic) / analytic),
              true);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.check(secs < 120.0, fmt("10 seeds x 100 s per mode, %.1f s", secs), true);
}

void trends(Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> thetas{1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  const std::vector<int> counts{1, 2, 3, 5, 7, 10};
  auto ec = [](const SystemParams& p, double theta) {
    return ec_two_state(theta, kRate, p, solve_fixed_point(p)).ec;
  };
  const double slack = 1e-10;
  for (CwMode mode : {CwMode::kFixed, CwMode::kVariable}) {
    for (int n : counts)
      for (int m : {1, 5, 10}) {
        const SystemParams p = config(n, m, mode);
        const ServiceModel model(p, solve_fixed_point(p));
        double last = kRate;
        for (double theta : thetas) {
          const double v = ec_two_state(theta, kRate, model).ec;
          c.check(v <= last * (1.0 + slack),
                  fmt("%s N=%d M=%d: C(%g) = %.10g rises", mode_name(mode), n, m, theta, v));
          last = v;
        }
      }
    for (double theta : {1e-6, 1e-4}) {
      for (int fixed : {1, 5, 10}) {
        double last_n = kRate;
        double last_m = kRate;
        for (int k : counts) {
          const double vn = ec(config(k, fixed, mode), theta);
          const double vm = ec(config(fixed, k, mode), theta);
          c.check(vn <= last_n * (1.0 + slack),
                  fmt("%s theta=%g M=%d: C rises at N=%d", mode_name(mode), theta, fixed, k));
          c.check(vm <= last_m * (1.0 + slack),
                  fmt("%s theta=%g N=%d: C rises at M=%d", mode_name(mode), theta, fixed, k));
          last_n = vn;
          last_m = vm;
        }
      }
    }
  }
  const double f15 = ec(config(1, 5, CwMode::kFixed), 1e-6);
  const double v15 = ec(config(1, 5, CwMode::kVariable), 1e-6);
  const double f101 = ec(config(10, 1, CwMode::kFixed), 1e-6);
  const double v101 = ec(config(10, 1, CwMode::kVariable), 1e-6);
  c.check(f15 >= v15, fmt("N=1 M=5: FCW %.6g >= VCW %.6g", f15, v15), true);
  c.check(v101 >= f101, fmt("N=10 M=1: VCW %.6g >= FCW %.6g", v101, f101), true);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.check(secs < 30.0, fmt("%d checks, %.2f s", c.checks(), secs), true);
}

void small_exponent(Criterion& c) {
  for (CwMode mode : {CwMode::kFixed, CwMode::kVariable}) {
    const SystemParams p = config(5, 5, mode);
    const ServiceModel model(p, solve_fixed_point(p));
    const double ec = ec_two_state(1e-9, kRate, model).ec;
    const double mean = mean_service_rate(model, kRate);
    const auto traces = runs(p, kRate, 10, 100.0, 500);
    double bits = 0.0;
    double time_s = 0.0;
    for (const auto& t : traces) {
      bits += t.delivered_bits(t.total_us);
      time_s += t.total_us * 1e-6;
    }
    const double thr = bits / time_s;
    c.check(rel(ec, mean) <= 0.005,
            fmt("%s: C(1e-9) %.8g vs mean rate %.8g (rel %.2e)", mode_name(mode), ec, mean,
                rel(ec, mean)),
            true);
    c.check(rel(ec, thr) <= 0.02,
            fmt("%s: C(1e-9) %.8g vs simulated throughput %.8g (rel %.2e)", mode_name(mode), ec, thr,
                rel(ec, thr)),
            true);
  }
}

void concavity(Criterion& c) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 10);
  std::uniform_int_distribution<int> wifi(0, 10);
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
  };
  int concave_fail = 0;
  int convex_fail = 0;
  int monotone_fail = 0;
  int f_checks = 0;
  for (int i = 0; i < 1000; ++i) {
    const SystemParams p =
        config(count(rng), wifi(rng), unit(rng) < 0.5 ? CwMode::kFixed : CwMode::kVariable,
               unit(rng) < 0.5 ? 0.0 : 0.1 * unit(rng));
    const ServiceModel model(p, solve_fixed_point(p));
    const double theta = log_uniform(1e-7, 1e-3);
    const double r1 = log_uniform(1e5, 1e8);
    const double r2 = log_uniform(1e5, 1e8);
    const double c1 = ec_two_state(theta, r1, model).ec;
    const double c2 = ec_two_state(theta, r2, model).ec;
    const double cm = ec_two_state(theta, 0.5 * (r1 + r2), model).ec;
    const std::string where = fmt("tuple %d (N=%d M=%d %s per=%.3g theta=%.3g R=%.4g,%.4g)", i,
                                  p.n_laa, p.m_wifi, mode_name(p.mode), p.per, theta, r1, r2);
    if (!c.check(cm >= 0.5 * (c1 + c2) - 1e-9 * cm,
                 fmt("%s: C(mid) %.12g < mean %.12g", where.c_str(), cm, 0.5 * (c1 + c2)))) {
      ++concave_fail;
    }
    // F on the exponents reached by the two solutions, kept inside the domain.
    const double x1 = std::min(theta * c1 * 1e-6, 0.999 * model.x_max());
    const double x2 = std::min(theta * c2 * 1e-6, 0.999 * model.x_max());
    if (std::abs(x1 - x2) <= 1e-9 * std::max(x1, x2)) continue;
    ++f_checks;
    const double f1 = model.big_f(x1).value;
    const double f2 = model.big_f(x2).value;
    const Dual fm = model.big_f(0.5 * (x1 + x2));
    const double fmean = 0.5 * (f1 + f2);
    // F is evaluated through z = e^x, so x is only resolved to about one ulp of 1.
    const double floor = 4.0 * fm.slope * std::numeric_limits<double>::epsilon();
    if (!c.check(fm.value <= fmean + 1e-9 * std::abs(fmean) + floor,
                 fmt("%s: F not convex, F(mid) %.15g > %.15g", where.c_str(), fm.value, fmean))) {
      ++convex_fail;
    }
    const bool increasing = (x1 < x2) == (f1 < f2) && fm.slope > 0.0;
    if (!c.check(increasing, fmt("%s: F not increasing", where.c_str()))) ++monotone_fail;
  }
  c.check(true,
          fmt("1000 tuples: %d concavity, %d convexity (of %d), %d monotonicity failures",
              concave_fail, convex_fail, f_checks, monotone_fail),
          true);
}

void pgf_suite(Criterion& c) {
  for (CwMode mode : {CwMode::kFixed, CwMode::kVariable})
    for (double per : {0.0, 0.05}) {
      const SystemParams p = config(5, 5, mode, per);
      const ContentionPoint cp = solve_fixed_point(p);
      const ServiceModel model(p, cp);
      const std::string where = fmt("%s per=%g", mode_name(mode), per);
      const std::pair<const char*, const GenFun*> fns[] = {
          {"t1", &model.t1()}, {"t2", &model.t2()}, {"t3", &model.t3()}};

      double worst_unit = 0.0;
      double worst_fd = 0.0;
      for (const auto& [name, g] : fns) {
        worst_unit = std::max(worst_unit, std::abs(g->value(1.0) - 1.0));
        for (double x : {-1e-3, -1e-4, 1e-6, 0.5 * model.x_max()}) {
          const double z = std::exp(x);
          // Richardson-extrapolated central difference; t2 bends sharply near the edge.
          const double h = 2e-9 * z;
          auto central = [&](double step) {
            return (g->value(z + step) - g->value(z - step)) / (2.0 * step);
          };
          const double fd = (4.0 * central(0.5 * h) - central(h)) / 3.0;
          const double r = rel(g->derivative(z), fd);
          worst_fd = std::max(worst_fd, r);
          c.check(r <= 1e-5, fmt("%s %s'(%.8g): %.10g vs difference %.10g", where.c_str(), name, z,
                                 g->derivative(z), fd));
        }
      }
      c.check(worst_unit <= 1e-12, fmt("%s: max |t(1) - 1| = %.2e, worst derivative rel %.2e",
                                       where.c_str(), worst_unit, worst_fd),
              true);

      oracle::IntervalSampler sampler(p, cp, per, 4242 + static_cast<std::uint64_t>(per * 100) +
                                                      (mode == CwMode::kVariable ? 7 : 0));
      constexpr int kSamples = 200000;
      std::vector<double> t1s(kSamples), t3s(kSamples);
      for (int i = 0; i < kSamples; ++i) {
        t1s[i] = sampler.t1();
        t3s[i] = sampler.t3();
      }
      const auto mean_t3 = oracle::moments(t3s);
      const double want_t3 = model.mean_t3_us();
      c.check(std::abs(mean_t3.mean - want_t3) <= 3.0 * mean_t3.se,
              fmt("%s: E[t3] analytic %.6g, Monte Carlo %.6g +- %.3g", where.c_str(), want_t3,
                  mean_t3.mean, mean_t3.se),
              true);
      for (double x : {-2e-4, -5e-5, 0.3 * model.x_max()}) {
        const double z = std::exp(x);
        for (const auto& [name, samples, g] :
             {std::tuple{"t1", &t1s, &model.t1()}, std::tuple{"t3", &t3s, &model.t3()}}) {
          std::vector<double> powers(samples->size());
          std::transform(samples->begin(), samples->end(), powers.begin(),
                         [&](double t) { return std::exp(x * t); });
          const auto mc = oracle::moments(powers);
          const double want = g->value(z);
          c.check(std::abs(mc.mean - want) <= 3.0 * mc.se,
                  fmt("%s: %s(e^%.3g) analytic %.8g, Monte Carlo %.8g +- %.2g", where.c_str(), name,
                      x, want, mc.mean, mc.se),
                  true);
        }
      }
    }
}

void fixed_point(Criterion& c) {
  const struct {
    CwMode mode;
    double v_laa, v_wifi, p_laa, p_wifi;
  } refs[] = {
      {CwMode::kFixed, oracle::kFcwVLaa, oracle::kFcwVWifi, oracle::kFcwPLaa, oracle::kFcwPWifi},
      {CwMode::kVariable, oracle::kVcwVLaa, oracle::kVcwVWifi, oracle::kVcwPLaa, oracle::kVcwPWifi},
  };
  for (const auto& r : refs) {
    const SystemParams p = config(5, 5, r.mode);
    const auto cp = solve_fixed_point(p);
    const double worst = std::max({rel(cp.v_laa, r.v_laa), rel(cp.v_wifi, r.v_wifi),
                                   rel(cp.p_laa, r.p_laa), rel(cp.p_wifi, r.p_wifi)});
    c.check(worst <= 1e-10, fmt("%s N=M=5 against the high-precision Picard reference: rel %.2e",
                                mode_name(r.mode), worst),
            true);
  }
  SystemParams hidden = config(2, 2, CwMode::kFixed);
  hidden.hidden = HiddenNodes{1, 1};
  const auto hcp = solve_contention(hidden);
  const double hworst = std::max({rel(hcp.v_wifi, oracle::kHiddenVWifi),
                                  rel(hcp.p_laa, oracle::kHiddenPLaa),
                                  rel(hcp.p_wifi, oracle::kHiddenPWifi)});
  c.check(hworst <= 1e-8 && hcp.residual <= 1e-12,
          fmt("hidden nodes N=M=2: rel %.2e, residual %.2e", hworst, hcp.residual), true);

  int compared = 0;
  int outside = 0;
  double worst_z = 0.0;
  double worst_residual = 0.0;
  std::uint64_t seed = 9000;
  for (CwMode mode : {CwMode::kFixed, CwMode::kVariable})
    for (int n : {1, 5, 10})
      for (int m : {1, 5, 10}) {
        const SystemParams p = config(n, m, mode);
        const auto cp = solve_fixed_point(p);
        const double residual = fixed_point_residual(cp, p);
        worst_residual = std::max(worst_residual, residual);
        const std::string where = fmt("%s N=%d M=%d", mode_name(mode), n, m);
        c.check(residual <= 1e-12, fmt("%s: residual %.2e", where.c_str(), residual));

        const auto trace = simulate(p, kRate, 100.0, seed++);
        const auto emp = empirical_contention(trace);
        const auto sd = slot_distribution(cp, p);
        auto compare = [&](const char* what, double sim, double se, double want) {
          ++compared;
          const double z = se > 0.0 ? std::abs(sim - want) / se : (sim == want ? 0.0 : INFINITY);
          if (se > 0.0) worst_z = std::max(worst_z, z);
          if (!c.check(z <= 3.0 || std::abs(sim - want) <= 1e-12,
                       fmt("%s: %s simulated %.6g +- %.2g, analytic %.6g (%.1f sigma)",
                           where.c_str(), what, sim, se, want, z))) {
            ++outside;
          }
        };
        compare("v_L", emp.v_laa, emp.v_laa_se, cp.v_laa);
        compare("p_L", emp.p_laa, emp.p_laa_se, cp.p_laa);
        for (std::size_t k = 0; k < kSlotKinds; ++k) {
          compare(to_string(static_cast<SlotKind>(k)), emp.slot_freq[k], emp.slot_freq_se[k],
                  sd.atoms[k].probability);
        }
      }
  c.check(true,
          fmt("18 configurations, worst residual %.2e; %d of %d simulated quantities outside 3 sigma "
              "(worst %.1f sigma)",
              worst_residual, outside, compared, worst_z),
          true);
}

void optimizer(Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  SystemParams p;
  p.k_users = 20;
  p.n_laa = 1;
  p.m_wifi = 4;
  p.bandwidth_hz = 20e6;
  p.mode = CwMode::kVariable;
  const auto cp = solve_fixed_point(p);
  const auto ch = generate_scenario(p, 7);
  const PowerModel pm = power_model(p, cp);

  auto dual_ok = [&](const PowerAllocation& a, const std::string& where) {
    c.check(a.duality_gap <= 1e-6, fmt("%s: duality gap %.2e", where.c_str(), a.duality_gap));
    c.check(a.kkt_residual <= 1e-6, fmt("%s: KKT residual %.2e", where.c_str(), a.kkt_residual));
    c.check(a.total_power() <= p.p_tot_w * (1.0 + 1e-9),
            fmt("%s: power %.10g over budget", where.c_str(), a.total_power()));
  };

  for (double theta : {1e-5, 1e-4, 1e-3, 1e-2}) {
    const auto ec = maximize_ec(ch, theta, p, cp);
    const auto eee = maximize_eee(ch, theta, p, cp);
    const auto wf = water_filling(ch, theta, p, cp);
    const auto ci = channel_inversion(ch, theta, p, cp);
    dual_ok(ec, fmt("maximize_ec theta=%g", theta));
    dual_ok(eee, fmt("maximize_eee theta=%g", theta));
    c.check(ec.total_capacity() >= wf.total_capacity() && ec.total_capacity() >= ci.total_capacity(),
            fmt("theta=%g: sum C proposed %.10g, water-filling %.10g, inversion %.10g", theta,
                ec.total_capacity(), wf.total_capacity(), ci.total_capacity()),
            true);
    const double e_wf = effective_energy_efficiency(wf, pm);
    const double e_ci = effective_energy_efficiency(ci, pm);
    c.check(eee.objective >= e_wf && eee.objective >= e_ci,
            fmt("theta=%g: EEE proposed %.10g, water-filling %.10g, inversion %.10g", theta,
                eee.objective, e_wf, e_ci),
            true);
  }
  const auto low = maximize_ec(ch, 1e-9, p, cp);
  const auto low_wf = water_filling(ch, 1e-9, p, cp);
  c.check(rel(low.total_capacity(), low_wf.total_capacity()) <= 0.01,
          fmt("theta=1e-9: proposed %.10g, water-filling %.10g", low.total_capacity(),
              low_wf.total_capacity()),
          true);

  // Regression pins for this scenario.
  const double pin_ec = maximize_ec(ch, 1e-3, p, cp).total_capacity();
  const double pin_eee = maximize_eee(ch, 1e-3, p, cp).objective;
  c.check(rel(pin_ec, 1378391.31281397) <= 1e-9, fmt("pinned sum C at theta=1e-3: %.15g", pin_ec), true);
  c.check(rel(pin_eee, 3231436.76806133) <= 1e-9, fmt("pinned EEE at theta=1e-3: %.15g", pin_eee), true);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.check(secs < 60.0, fmt("%.2f s", secs), true);
}

void energy_model(Criterion& c) {
  SystemParams p;  // FCW, W_L = 16
  std::mt19937_64 rng(31337);
  for (double pl : {0.1, 0.3, 0.5}) {
    ContentionPoint cp;
    cp.p_laa = pl;
    const PowerModel pm = power_model(p, cp);
    constexpr int kCycles = 400000;
    std::vector<double> collisions(kCycles), slots(kCycles);
    for (int i = 0; i < kCycles; ++i) {
      const auto s = oracle::renewal_cycle(p.w_laa, p.k_retry_laa, pl, 1e-4, rng);
      collisions[i] = s.collisions;
      slots[i] = s.slots;
    }
    const auto mc_i = oracle::moments(collisions);
    const auto mc_I = oracle::moments(slots);
    c.check(std::abs(pm.i_bar - mc_i.mean) <= 3.0 * mc_i.se,
            fmt("p_L=%.1f: mean collisions per success, model %.6g, renewal Monte Carlo %.6g +- %.2g",
                pl, pm.i_bar, mc_i.mean, mc_i.se),
            true);
    c.check(std::abs(pm.I_bar - mc_I.mean) <= 3.0 * mc_I.se,
            fmt("p_L=%.1f: mean backoff slots per success, model %.6g, renewal Monte Carlo %.6g +- %.2g",
                pl, pm.I_bar, mc_I.mean, mc_I.se),
            true);
  }
}

void delay_mapping(Criterion& c) {
  const std::vector<double> bounds{0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  for (CwMode mode : {CwMode::kFixed, CwMode::kVariable}) {
    const SystemParams p = config(5, 5, mode);
    const ServiceModel model(p, solve_fixed_point(p));
    const double arrival = 0.5 * mean_service_rate(model, kRate);
    double last_theta = INFINITY;
    double last_ec = 0.0;
    std::string row;
    for (double d : bounds) {
      const auto m = theta_of_delay(d, 0.1, arrival, model, kRate);
      c.check(m.feasible, fmt("%s D=%g s: infeasible", mode_name(mode), d));
      c.check(m.theta < last_theta, fmt("%s D=%g s: theta %.6g not below %.6g", mode_name(mode), d,
                                        m.theta, last_theta));
      c.check(m.ec > last_ec,
              fmt("%s D=%g s: C %.8g not above %.8g", mode_name(mode), d, m.ec, last_ec));
      row += fmt(" %g:%.3g/%.4g", d, m.theta, m.ec);
      last_theta = m.theta;
      last_ec = m.ec;
    }
    c.note(fmt("%s D[s]:theta/C%s", mode_name(mode), row.c_str()));
  }
}

}  // namespace

int main() {
  struct Entry {
    const char* title;
    std::function<void(Criterion&)> run;
  };
  Criterion c1("1  four-state and two-state solvers agree to 1e-8 on the grid");
  Criterion c2("2  spectral radius equals one at every solved point");

  const Entry entries[] = {
      {"3  simulated effective capacity within 10% of the analysis", analysis_vs_simulation},
      {"4  capacity trends in theta, N, M and window policy", trends},
      {"5  small-exponent limit matches mean rate and simulated throughput", small_exponent},
      {"6  concavity in R, convexity and monotonicity of F", concavity},
      {"7  generating functions: normalization, derivatives, Monte Carlo", pgf_suite},
      {"8  saturation fixed point: reference values and simulation", fixed_point},
      {"9  power allocation: dominance, optimality conditions, pins", optimizer},
      {"10 energy model against a renewal Monte Carlo", energy_model},
      {"11 delay bound mapping is monotone", delay_mapping},
  };

  std::vector<std::pair<std::string, bool>> summary;
  auto finish = [&](const Criterion& c, double secs) {
    const bool ok = c.failures() == 0;
    std::printf("%s %s (%d checks, %d failed, %.1f s)\n", ok ? "PASS" : "FAIL", c.title().c_str(),
                c.checks(), c.failures(), secs);
    std::fflush(stdout);
    summary.emplace_back(c.title(), ok);
  };

  auto t0 = std::chrono::steady_clock::now();
  solver_grid(c1, c2);
  const double grid_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  finish(c1, grid_s);
  finish(c2, grid_s);

  for (const auto& e : entries) {
    Criterion c(e.title);
    t0 = std::chrono::steady_clock::now();
    e.run(c);
    finish(c, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  int failed = 0;
  std::printf("\nsummary\n");
  for (const auto& [title, ok] : summary) {
    std::printf("  %s %s\n", ok ? "PASS" : "FAIL", title.c_str());
    failed += ok ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(summary.size()) - failed, summary.size());
  return failed;
}
