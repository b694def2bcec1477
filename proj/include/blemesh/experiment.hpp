#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blemesh/engine.hpp"
#include "blemesh/metrics.hpp"
#include "blemesh/scenario.hpp"

namespace blemesh {

/// Either one fixed scenario for every trial, or a fresh random scenario per
/// trial generated from the trial's seed.
class ScenarioSource {
 public:
  static ScenarioSource fixed(Scenario s);
  static ScenarioSource random(RandomScenarioParams p);

  Scenario for_seed(std::uint64_t seed) const;
  /// Replaces the six term weights everywhere scenarios come from.
  void override_weights(const ScoreWeights& w);
  double theta_sat() const;

 private:
  std::optional<Scenario> fixed_;
  std::optional<RandomScenarioParams> random_;
};

struct TrialRow {
  std::size_t trial = 0;
  TrialResult result;
};

struct CompareResult {
  AggregateReport baseline;
  AggregateReport scored;
  Improvement improvement;
  /// Sorted by (trial, algo).
  std::vector<TrialRow> rows;
  double theta_sat = 0.8;
};

/// Calls `body(i)` for every i in [0, n) on up to `threads` workers (0 picks
/// the hardware concurrency).
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Paired comparison: trial i runs both algorithms on the same scenario with
/// seed seed_base + i.
CompareResult run_compare(const ScenarioSource& source, std::size_t trials, std::uint64_t seed_base,
                          unsigned threads = 0);

/// Summary table of both reports and the relative gains.
std::string format_table(const CompareResult& result);

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const TrialRow& row, double theta_sat);
void write_csv(std::ostream& os, const std::vector<TrialRow>& rows, double theta_sat);

/// Parses "w_m,w_h,w_b,w_ci,w_rl,w_rn".
std::array<double, 6> parse_weight_list(std::string_view text);
ScoreWeights with_term_weights(ScoreWeights base, const std::array<double, 6>& terms);

/// Parses a grid such as "w_b=0.1,0.25,0.5;w_ci=0.1,0.2" into the cartesian
/// product of the listed values applied on top of `base`.
std::vector<ScoreWeights> parse_weight_grid(std::string_view spec, const ScoreWeights& base);

struct SweepRow {
  ScoreWeights weights;
  AggregateReport scored;
  Improvement vs_baseline;
};

struct SweepResult {
  AggregateReport baseline;
  std::vector<SweepRow> rows;
};

SweepResult run_sweep(const ScenarioSource& source, std::size_t trials, std::uint64_t seed_base,
                      const std::vector<ScoreWeights>& grid, unsigned threads = 0);

void write_sweep_csv(std::ostream& os, const SweepResult& result);

}  // namespace blemesh
