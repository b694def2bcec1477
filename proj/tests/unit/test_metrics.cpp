#include <doctest.h>

#include <algorithm>
#include <random>

#include "blemesh/experiment.hpp"
#include "blemesh/metrics.hpp"

using namespace blemesh;

namespace {

TrialResult with_delays(const std::vector<double>& delays, Algo algo = Algo::scored) {
  TrialResult t;
  t.algo = algo;
  t.joined = true;
  t.hops_at_join = 2;
  t.path_to_sink = {NodeId{2}, kSinkId};
  for (std::size_t i = 0; i < delays.size(); ++i) t.probes.push_back(ProbeRecord{i, 1000.0 * i, 1000.0 * i + delays[i]});
  t.sent = t.delivered = delays.size();
  return t;
}

TrialResult on_branch(double avg, std::uint64_t drops = 0) {
  TrialResult t = with_delays({100});
  t.node_stats = {NodeWindowStats{NodeId{2}, 30, avg, drops}, NodeWindowStats{kSinkId, 30, 30.0, 9}};
  return t;
}

}  // namespace

TEST_CASE("delay statistics") {
  const auto two = delay_stats(with_delays({200, 300}));
  REQUIRE(two.has_value());
  CHECK(two->mu_ms == doctest::Approx(250.0));
  CHECK(two->sigma_ms == doctest::Approx(70.7107).epsilon(1e-5));

  const auto one = delay_stats(with_delays({236}));
  CHECK(one->mu_ms == 236.0);
  CHECK(one->sigma_ms == 0.0);

  CHECK_FALSE(delay_stats(with_delays({})).has_value());
}

TEST_CASE("pdr ratio") {
  TrialResult t = with_delays({1, 2, 3});
  CHECK(*pdr(t) == 1.0);
  t.sent = 0;
  CHECK_FALSE(pdr(t).has_value());
}

TEST_CASE("saturated branch threshold") {
  CHECK(*is_saturated_branch(on_branch(27.0), 0.8));
  CHECK_FALSE(*is_saturated_branch(on_branch(0.0), 0.8));
  CHECK(*is_saturated_branch(on_branch(24.0), 0.8));
  CHECK_FALSE(*is_saturated_branch(on_branch(23.9), 0.8));
  CHECK(*is_saturated_branch(on_branch(0.0, 1), 0.8));

  TrialResult failed;
  CHECK_FALSE(is_saturated_branch(failed, 0.8).has_value());
}

TEST_CASE("saturation from raw traces") {
  TrialResult t = with_delays({100});
  // 30 packets for the first half of the window, none for the second.
  t.path_traces = {BufferTrace{NodeId{2}, 30, 0.0, 100.0, {{0.0, 30}, {50.0, 0}}, 0}};
  CHECK_FALSE(*saturated_from_traces(t, 0.8));
  CHECK(*saturated_from_traces(t, 0.5));
  t.path_traces[0].overflow_drops = 1;
  CHECK(*saturated_from_traces(t, 0.8));
}

TEST_CASE("avoid_sat over eligible trials only") {
  std::vector<TrialResult> trials;
  for (int i = 0; i < 10; ++i) {
    TrialResult t = with_delays({100});
    t.eligible_sat = true;
    t.avoided_sat = i < 7;
    trials.push_back(t);
  }
  for (int i = 0; i < 5; ++i) trials.push_back(with_delays({100}));
  const AggregateReport r = aggregate(trials, 0.8);
  CHECK(r.n_eligible_sat_trials == 10u);
  CHECK(*r.avoid_sat == doctest::Approx(0.7));

  const AggregateReport none = aggregate(std::vector<TrialResult>{with_delays({100})}, 0.8);
  CHECK_FALSE(none.avoid_sat.has_value());
}

TEST_CASE("aggregate of one trial mirrors that trial") {
  TrialResult t = with_delays({120, 180, 150});
  t.sent = 4;
  const AggregateReport r = aggregate(std::vector<TrialResult>{t}, 0.8);
  CHECK(*r.mu_d_ms == delay_stats(t)->mu_ms);
  CHECK(*r.sigma_d_ms == 0.0);
  CHECK(r.mu_pdr == *pdr(t));
  CHECK(r.mean_hops == 2.0);
  CHECK(r.n_joined == 1u);
}

TEST_CASE("aggregate excludes failed joins and rejects bad input") {
  TrialResult failed;
  failed.algo = Algo::scored;
  const AggregateReport r = aggregate(std::vector<TrialResult>{with_delays({100}), failed}, 0.8);
  CHECK(r.n_failed == 1u);
  CHECK(r.n_joined == 1u);
  CHECK_THROWS_AS(aggregate(std::vector<TrialResult>{failed}, 0.8), InvalidInput);
  CHECK_THROWS_AS(aggregate(std::vector<TrialResult>{with_delays({1}), with_delays({1}, Algo::baseline)}, 0.8),
                  InvalidInput);
}

TEST_CASE("aggregate ignores input order") {
  const Scenario s = training11();
  std::vector<TrialResult> trials;
  for (std::uint64_t seed = 0; seed < 20; ++seed) trials.push_back(run_trial(s, Algo::baseline, seed));
  const AggregateReport ref = aggregate(trials, 0.8);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(trials.begin(), trials.end(), rng);
    CHECK(aggregate(trials, 0.8) == ref);
  }
}

TEST_CASE("fractions stay in range") {
  const Scenario s = training11();
  std::vector<TrialResult> trials;
  for (std::uint64_t seed = 0; seed < 20; ++seed) trials.push_back(run_trial(s, Algo::scored, seed));
  const AggregateReport r = aggregate(trials, 0.8);
  for (double f : {r.mu_pdr, r.sigma_pdr, r.pct_sat, r.avoid_sat.value_or(0.0)}) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
  CHECK(*r.sigma_d_ms >= 0.0);
  CHECK(r.avoid_sat.has_value() == (r.n_eligible_sat_trials > 0));
}

TEST_CASE("window statistics and raw traces agree on saturation") {
  const Scenario s = training11();
  std::vector<TrialResult> trials;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (Algo a : {Algo::baseline, Algo::scored}) {
      const TrialResult t = run_trial(s, a, seed);
      CHECK(is_saturated_branch(t, 0.8) == saturated_from_traces(t, 0.8));
      if (a == Algo::baseline) trials.push_back(t);
    }
  CHECK(recount_pct_sat(trials, 0.8) == aggregate(trials, 0.8).pct_sat);
}

TEST_CASE("gains between reports") {
  AggregateReport base;
  AggregateReport prop;
  base.mu_d_ms = 376;
  prop.mu_d_ms = 277;
  base.mu_pdr = 0.82;
  prop.mu_pdr = 0.89;
  base.pct_sat = 0.30;
  prop.pct_sat = 0.06;
  const Improvement g = compare(base, prop);
  CHECK(g.delay_gain == doctest::Approx(0.263).epsilon(1e-3));
  CHECK(g.pdr_gain == doctest::Approx(0.085).epsilon(1e-2));
  CHECK(g.sat_reduction_pp == doctest::Approx(24.0));
  CHECK(compare(base, base) == Improvement{});
}
