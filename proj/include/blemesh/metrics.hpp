#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "blemesh/engine.hpp"

namespace blemesh {

struct DelayStats {
  double mu_ms = 0.0;
  double sigma_ms = 0.0;

  bool operator==(const DelayStats&) const = default;
};

struct SampleStats {
  double mean = 0.0;
  double deviation = 0.0;
};

/// Sample mean and sample deviation (n - 1) of a set of values; a single
/// value has zero deviation. The values are summed in sorted order so the
/// result does not depend on input order.
SampleStats mean_and_deviation(std::vector<double> values);

/// Delay statistics over the delivered probes; nothing when none arrived.
std::optional<DelayStats> delay_stats(const TrialResult& trial);

/// delivered / sent; nothing when no probe was sent.
std::optional<double> pdr(const TrialResult& trial);

/// Whether a node on the new node's path (sink excluded) averaged at least
/// theta_sat * b_max packets or overflowed during measurement. Nothing for a
/// failed join.
std::optional<bool> is_saturated_branch(const TrialResult& trial, double theta_sat);

/// Same flag recomputed from the raw buffer traces instead of the per-node
/// window statistics.
std::optional<bool> saturated_from_traces(const TrialResult& trial, double theta_sat);

/// Per-algorithm summary over many trials: the seven comparison columns plus
/// bookkeeping counts.
struct AggregateReport {
  Algo algo = Algo::baseline;
  std::size_t n_trials = 0;
  std::size_t n_joined = 0;
  std::size_t n_failed = 0;
  /// Joined trials with no delivered probe, left out of the delay columns.
  std::size_t n_undefined_delay = 0;

  std::optional<double> mu_d_ms;
  std::optional<double> sigma_d_ms;
  double mu_pdr = 0.0;
  double sigma_pdr = 0.0;
  double pct_sat = 0.0;
  std::optional<double> avoid_sat;
  double mean_hops = 0.0;
  std::size_t n_eligible_sat_trials = 0;

  bool operator==(const AggregateReport&) const = default;
};

/// Throws InvalidInput when the trials mix algorithms or none of them joined.
AggregateReport aggregate(std::span<const TrialResult> trials, double theta_sat);

/// Fraction of joined trials on a saturated branch, recomputed from traces.
double recount_pct_sat(std::span<const TrialResult> trials, double theta_sat);

struct Improvement {
  /// Relative delay reduction of the proposal against the baseline.
  double delay_gain = 0.0;
  /// Relative PDR increase.
  double pdr_gain = 0.0;
  /// Drop in saturated-branch probability, in percentage points.
  double sat_reduction_pp = 0.0;

  bool operator==(const Improvement&) const = default;
};

Improvement compare(const AggregateReport& base, const AggregateReport& prop);

}  // namespace blemesh
