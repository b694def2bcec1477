// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <atomic>
#include <chrono>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "blemesh/experiment.hpp"
#include "oracles.hpp"

using namespace blemesh;

namespace {

int failures = 0;

void report(int number, const std::string& title, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << "  [" << number << "] " << title << ": " << detail << std::endl;
}

std::string num(double v, int precision = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

void random_family_gains() {
  const auto start = std::chrono::steady_clock::now();
  const CompareResult r = run_compare(ScenarioSource::random(RandomScenarioParams{}), 100, 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const Improvement& g = r.improvement;
  const bool pass = g.delay_gain >= 0.15 && g.pdr_gain >= 0.03 && g.sat_reduction_pp >= 15.0 && secs < 300.0;
  report(1, "random 16-node family, 100 paired trials", pass,
         "delay_gain " + num(g.delay_gain) + " (>= 0.15), pdr_gain " + num(g.pdr_gain) + " (>= 0.03), sat_reduction " +
             num(g.sat_reduction_pp, 1) + " pp (>= 15), runtime " + num(secs, 1) + " s (< 300)");
}

void training_layout() {
  const CompareResult r = run_compare(ScenarioSource::fixed(training11()), 100, 0);
  const double avoid = r.scored.avoid_sat.value_or(0.0);
  report(2, "training11 saturated-branch avoidance", avoid >= 0.60 && r.scored.pct_sat < r.baseline.pct_sat,
         "scored avoid_sat " + num(avoid) + " (>= 0.60) over " + std::to_string(r.scored.n_eligible_sat_trials) +
             " eligible, pct_sat scored " + num(r.scored.pct_sat) + " < baseline " + num(r.baseline.pct_sat));
  const double s_sig = r.scored.sigma_d_ms.value_or(INFINITY);
  const double b_sig = r.baseline.sigma_d_ms.value_or(INFINITY);
  report(3, "training11 delay deviation", s_sig < b_sig,
         "sigma_d scored " + num(s_sig, 1) + " ms < baseline " + num(b_sig, 1) + " ms");
}

void selection_oracle() {
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto cands = oracle::random_list(rng, 10);
    const ScoreWeights w = i % 2 ? ScoreWeights{} : oracle::random_weights(rng);
    if (select_parent(cands, w) != oracle::select(cands, w)) ++mismatches;
  }
  report(4, "parent selection vs brute force", mismatches == 0,
         std::to_string(mismatches) + " mismatches over 10000 lists");
}

void score_properties() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> step(1, 10);
  int mono_cases = 0;
  int mono_bad = 0;
  for (int i = 0; i < 2000; ++i) {
    const ScoreWeights w = oracle::random_weights(rng);
    CandidateInfo c = oracle::random_candidate(rng, 2);
    if (!c.h) c.h = 0;
    if (!c.rn_dbm) c.rn_dbm = -70.0;
    const double s = score_candidate(c, w);
    auto worse = [&](CandidateInfo d) { ++mono_cases; if (score_candidate(d, w) > s) ++mono_bad; };
    auto better = [&](CandidateInfo d) { ++mono_cases; if (score_candidate(d, w) < s) ++mono_bad; };
    CandidateInfo d = c;
    d.m += static_cast<std::uint32_t>(step(rng));
    worse(d);
    d = c;
    d.h = *c.h + static_cast<std::uint32_t>(step(rng));
    worse(d);
    d = c;
    d.b += static_cast<std::uint32_t>(step(rng));
    worse(d);
    d = c;
    d.ci_ms += 10.0 * step(rng);
    worse(d);
    d = c;
    d.rl_dbm += step(rng);
    better(d);
    d = c;
    d.rn_dbm = *c.rn_dbm + step(rng);
    better(d);
  }

  std::uniform_real_distribution<double> factor(1e-3, 1e3);
  int scale_bad = 0;
  const int scale_cases = 2000;
  for (int i = 0; i < scale_cases; ++i) {
    const auto cands = oracle::random_list(rng, 10);
    const ScoreWeights w = oracle::random_weights(rng);
    if (select_parent(cands, w) != select_parent(cands, w.scaled(factor(rng)))) ++scale_bad;
  }
  report(5, "score monotonicity and scale invariance", mono_bad == 0 && scale_bad == 0,
         std::to_string(mono_bad) + "/" + std::to_string(mono_cases) + " monotonicity violations, " +
             std::to_string(scale_bad) + "/" + std::to_string(scale_cases) + " scaling violations");
}

void build_invariants() {
  std::atomic<long> attaches{0};
  std::atomic<long> violations{0};
  std::atomic<long> unmerged{0};
  parallel_for(1000, 0, [&](std::size_t i) {
    const Scenario s = gen_random_scenario(RandomScenarioParams{}, 5000 + i);
    TrialHooks hooks;
    hooks.after_attach = [&](const Network& net) {
      ++attaches;
      if (!net.invariant_violations().empty()) ++violations;
    };
    const Network net = build_network(s, i % 2 ? Algo::scored : Algo::baseline, i, hooks);
    if (!net.invariant_violations().empty()) ++violations;
    for (const NodeState& n : net.nodes())
      if (n.id != s.new_node_id && !net.in_sink_cluster(n.id)) ++unmerged;
  });
  report(6, "structural invariants over 1000 build-ups", violations == 0,
         std::to_string(violations.load()) + " violations after " + std::to_string(attaches.load()) + " attaches, " +
             std::to_string(unmerged.load()) + " slot-limited nodes left outside the sink tree");
}

void conservation_and_determinism() {
  std::atomic<int> leaks{0};
  std::atomic<int> diverged{0};
  parallel_for(100, 0, [&](std::size_t i) {
    const Scenario s = gen_random_scenario(RandomScenarioParams{}, 9000 + i);
    const Algo algo = i % 2 ? Algo::scored : Algo::baseline;
    const std::uint64_t seed = 31 * i + 7;
    const TrialResult a = run_trial(s, algo, seed);
    const TrialResult b = run_trial(s, algo, seed);
    if (a.sent != a.delivered + a.dropped + a.in_flight) ++leaks;
    if (!(a == b)) ++diverged;
  });
  report(7, "conservation and determinism over 100 triples", leaks == 0 && diverged == 0,
         std::to_string(leaks.load()) + " conservation breaks, " + std::to_string(diverged.load()) +
             " non-identical reruns");
}

void channel_range() {
  const RadioParams p;
  int bad = 0;
  for (int i = 0; i <= 300; ++i) {
    const double d = 0.1 * i;
    const bool heard = hears({0, 0}, {d, 0}, p).heard;
    if (d <= 13.0 + 1e-9 && !heard) ++bad;
    if (d >= 14.0 - 1e-9 && heard) ++bad;
  }
  report(8, "channel range", bad == 0, std::to_string(bad) + " grid points outside heard <= 13.0 m / deaf >= 14.0 m");
}

}  // namespace

int main() {
  try {
    random_family_gains();
    training_layout();
    selection_oracle();
    score_properties();
    build_invariants();
    conservation_and_determinism();
    channel_range();
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
