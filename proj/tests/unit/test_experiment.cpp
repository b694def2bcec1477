#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "blemesh/experiment.hpp"

using namespace blemesh;

TEST_CASE("one-trial compare equals two direct runs") {
  const Scenario s = training11();
  const CompareResult r = run_compare(ScenarioSource::fixed(s), 1, 17, 1);
  REQUIRE(r.rows.size() == 2u);
  CHECK(r.rows[0].result == run_trial(s, Algo::baseline, 17));
  CHECK(r.rows[1].result == run_trial(s, Algo::scored, 17));
}

TEST_CASE("random-family trials use the scenario generated from their seed") {
  RandomScenarioParams p;
  const CompareResult r = run_compare(ScenarioSource::random(p), 2, 40, 1);
  const Scenario s = gen_random_scenario(p, 41);
  CHECK(r.rows[2].trial == 1u);
  CHECK(r.rows[3].result == run_trial(s, Algo::scored, 41));
}

TEST_CASE("compare is reproducible across thread counts") {
  const auto src = ScenarioSource::random({});
  const CompareResult serial = run_compare(src, 8, 0, 1);
  const CompareResult threaded = run_compare(src, 8, 0, 4);
  REQUIRE(serial.rows.size() == threaded.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].trial == threaded.rows[i].trial);
    CHECK(serial.rows[i].result == threaded.rows[i].result);
  }
  CHECK(serial.baseline == threaded.baseline);
  CHECK(serial.scored == threaded.scored);
}

TEST_CASE("compare report has every column populated") {
  const CompareResult r = run_compare(ScenarioSource::fixed(training11()), 50, 0);
  for (const AggregateReport* a : {&r.baseline, &r.scored}) {
    CHECK(a->n_trials == 50u);
    CHECK(a->mu_d_ms.has_value());
    CHECK(a->sigma_d_ms.has_value());
    CHECK(a->avoid_sat.has_value());
    CHECK(a->mu_pdr > 0.0);
    CHECK(a->mean_hops >= 1.0);
  }
  const std::string table = format_table(r);
  CHECK(table.find("avoid_Sat") != std::string::npos);
  CHECK(table.find("delay_gain") != std::string::npos);
}

TEST_CASE("csv layout") {
  const CompareResult r = run_compare(ScenarioSource::fixed(training11()), 2, 0, 1);
  std::ostringstream os;
  write_csv(os, r.rows, r.theta_sat);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "trial,algo,seed,joined,parent_id,hops,mu_d_ms,sigma_d_ms,pdr,sat_branch,eligible_sat,avoided_sat");
  std::getline(in, line);
  CHECK(line.rfind("0,baseline,0,1,", 0) == 0);
  CHECK(std::count(line.begin(), line.end(), ',') == 11);
  std::getline(in, line);
  CHECK(line.rfind("0,scored,0,1,", 0) == 0);
}

TEST_CASE("weight list parsing") {
  const auto w = with_term_weights({}, parse_weight_list("0.1,0.2,0.3,0.2,0.1,0.1"));
  CHECK(w.w_b == 0.3);
  CHECK(w.b_max == 30.0);
  CHECK_THROWS_AS(parse_weight_list("0.1,0.2"), InvalidInput);
  CHECK_THROWS_AS(parse_weight_list("0.1,0.2,0.3,0.2,0.1,x"), InvalidInput);
  CHECK_THROWS_AS(with_term_weights({}, {0, 0, 0, 0, 0, 0}), InvalidInput);
}

TEST_CASE("weight grid is a cartesian product") {
  const auto grid = parse_weight_grid("w_b=0.1,0.25,0.5;w_ci=0.1,0.2", ScoreWeights{});
  REQUIRE(grid.size() == 6u);
  CHECK(grid[0].w_b == 0.1);
  CHECK(grid[0].w_ci == 0.1);
  CHECK(grid[5].w_b == 0.5);
  CHECK(grid[5].w_ci == 0.2);
  CHECK(grid[5].w_m == ScoreWeights{}.w_m);
  CHECK_THROWS_AS(parse_weight_grid("w_q=1", {}), InvalidInput);
  CHECK_THROWS_AS(parse_weight_grid("w_b", {}), InvalidInput);
}

TEST_CASE("sweep reports one row per weight vector") {
  const auto grid = parse_weight_grid("w_b=0.0,0.5", ScoreWeights{});
  const SweepResult r = run_sweep(ScenarioSource::fixed(training11()), 5, 0, grid, 1);
  REQUIRE(r.rows.size() == 2u);
  CHECK(r.rows[1].weights.w_b == 0.5);
  std::ostringstream os;
  write_sweep_csv(os, r);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
