#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "laa/capacity.hpp"
#include "laa/errors.hpp"
#include "laa/simulator.hpp"
#include "support/oracles.hpp"

using namespace laa;

TEST_CASE("runs are reproducible from the seed") {
  const SystemParams p;
  const auto a = simulate(p, 1e7, 2.0, 11);
  const auto b = simulate(p, 1e7, 2.0, 11);
  const auto c = simulate(p, 1e7, 2.0, 12);
  CHECK(a.on_starts_us == b.on_starts_us);
  CHECK(a.slots == b.slots);
  CHECK(a.tagged_view == b.tagged_view);
  CHECK(a.on_starts_us != c.on_starts_us);
}

TEST_CASE("bookkeeping is consistent") {
  SystemParams p;
  p.per = 0.1;
  SimOptions opts;
  opts.record_events = true;
  const auto t = simulate(p, 1e7, 2.0, 3, opts);

  CHECK(std::accumulate(t.channel_counts.begin(), t.channel_counts.end(), std::uint64_t{0}) == t.slots);
  REQUIRE(t.events.size() == t.slots);
  double total = 0.0;
  for (const auto& e : t.events) total += e.duration_us;
  CHECK(total == doctest::Approx(t.total_us).epsilon(1e-12));
  CHECK(t.tagged_view.size() == t.slots);

  for (const auto& n : t.nodes) {
    CHECK(n.stats.successes + n.stats.channel_errors + n.stats.collisions == n.stats.transmissions);
    if (n.kind == NodeKind::kWifi) CHECK(n.stats.channel_errors == 0);
    CHECK(n.backoff_timer >= 0);
    CHECK(n.backoff_timer < n.cw);
  }
  CHECK(t.on_starts_us.size() == t.tagged().successes);
  CHECK(std::is_sorted(t.on_starts_us.begin(), t.on_starts_us.end()));
  const double last_end = t.on_starts_us.back() + t.t_f_us;
  CHECK(t.delivered_bits(last_end) ==
        doctest::Approx(1e7 * t.t_f_us * 1e-6 * static_cast<double>(t.on_starts_us.size())));
  CHECK(t.delivered_bits(0.0) == 0.0);
  CHECK(t.off_periods_us().size() == t.on_starts_us.size() - 1);
}

TEST_CASE("events CSV") {
  SystemParams p;
  SimOptions opts;
  opts.record_events = true;
  const auto t = simulate(p, 1e7, 0.01, 5, opts);
  std::ostringstream out;
  write_events_csv(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "slot_index,kind,duration_us,winner_id,outcome");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
    ++rows;
  }
  CHECK(rows == t.slots);
}

TEST_CASE("lone base station") {
  SystemParams p;
  p.n_laa = 1;
  p.m_wifi = 0;
  const auto t = simulate(p, oracle::kRate, 20.0, 9);
  CHECK(t.tagged().collisions == 0);
  // Uniform backoff on {0..15} costs 7.5 idle slots per packet on average.
  const double want = oracle::kRate * 1000.0 / (1000.0 + 75.0);
  CHECK(t.throughput() == doctest::Approx(want).epsilon(2e-3));
  const auto cp = solve_fixed_point(p);
  CHECK(t.throughput() == doctest::Approx(mean_service_rate(p, cp, oracle::kRate)).epsilon(0.01));
}

TEST_CASE("hidden nodes are rejected") {
  SystemParams p;
  p.hidden = HiddenNodes{1, 1};
  CHECK_THROWS_AS(simulate(p, 1e7, 1.0, 1), ConfigError);
}

TEST_CASE("block estimator") {
  const SystemParams p;
  const auto t = simulate(p, oracle::kRate, 100.0, 21);
  const auto tiny = estimate_ec(t, 1e-12);
  CHECK(tiny.ec == doctest::Approx(t.throughput()).epsilon(1e-3));
  CHECK(tiny.blocks == 200);
  const auto mid = estimate_ec(t, 1e-5);
  CHECK(mid.ec < tiny.ec);
  CHECK(mid.half_width > 0.0);
  CHECK_THROWS_AS(estimate_ec(simulate(p, oracle::kRate, 10.0, 1), 1e-5), DomainError);
  CHECK_THROWS_AS(estimate_ec(t, 0.0), DomainError);

  SUBCASE("longer runs tighten the interval") {
    std::vector<ServiceTrace> four;
    for (std::uint64_t s = 0; s < 4; ++s) four.push_back(simulate(p, oracle::kRate, 100.0, 100 + s));
    const auto pooled = estimate_ec(four, 1e-6);
    const auto single = estimate_ec(four.front(), 1e-6);
    CHECK(pooled.half_width < single.half_width);
    CHECK(pooled.half_width > 0.25 * single.half_width);
  }
}

TEST_CASE("queue tail fit") {
  const SystemParams p;
  const auto t = simulate(p, oracle::kRate, 20.0, 4);
  const auto empty = fit_queue_tail(t, 0.0);
  CHECK(std::isinf(empty.theta));
  CHECK(empty.p_nonempty == 0.0);
  CHECK_THROWS_AS(fit_queue_tail(t, t.throughput() * 1.01), InstabilityError);
  const auto busy = fit_queue_tail(t, 0.6 * t.throughput());
  CHECK(std::isfinite(busy.theta));
  CHECK(busy.theta > 0.0);
  CHECK(busy.p_nonempty > 0.0);
  // Heavier load, slower decay.
  CHECK(fit_queue_tail(t, 0.8 * t.throughput()).theta < busy.theta);
}

TEST_CASE("observed contention matches the fixed point") {
  const SystemParams p;
  const auto t = simulate(p, oracle::kRate, 50.0, 77);
  const auto emp = empirical_contention(t);
  CHECK(std::abs(emp.v_laa - oracle::kFcwVLaa) < 5.0 * emp.v_laa_se);
  CHECK(std::abs(emp.p_laa - oracle::kFcwPLaa) < 5.0 * emp.p_laa_se);
  double total = 0.0;
  for (double f : emp.slot_freq) total += f;
  CHECK(total == doctest::Approx(1.0));
}
