#include "blemesh/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace blemesh {

SampleStats mean_and_deviation(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("mean of an empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mu = sum / n;
  if (values.size() == 1) return {mu, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return {mu, std::sqrt(ss / (n - 1.0))};
}

std::optional<DelayStats> delay_stats(const TrialResult& trial) {
  std::vector<double> delays;
  for (const ProbeRecord& p : trial.probes)
    if (p.delivered_at_ms) delays.push_back(*p.delivered_at_ms - p.created_at_ms);
  if (delays.empty()) return std::nullopt;
  const SampleStats s = mean_and_deviation(std::move(delays));
  return DelayStats{s.mean, s.deviation};
}

std::optional<double> pdr(const TrialResult& trial) {
  if (trial.sent == 0) return std::nullopt;
  return static_cast<double>(trial.delivered) / static_cast<double>(trial.sent);
}

namespace {

bool on_path(const TrialResult& trial, NodeId id) {
  if (!trial.path_to_sink.empty() && trial.path_to_sink.back() == id) return false;  // the sink
  return std::find(trial.path_to_sink.begin(), trial.path_to_sink.end(), id) != trial.path_to_sink.end();
}

}  // namespace

std::optional<bool> is_saturated_branch(const TrialResult& trial, double theta_sat) {
  if (!trial.joined) return std::nullopt;
  for (const NodeWindowStats& s : trial.node_stats) {
    if (!on_path(trial, s.id)) continue;
    if (s.overflow_drops > 0 || s.avg_occupancy >= theta_sat * static_cast<double>(s.b_max)) return true;
  }
  return false;
}

std::optional<bool> saturated_from_traces(const TrialResult& trial, double theta_sat) {
  if (!trial.joined) return std::nullopt;
  for (const BufferTrace& t : trial.path_traces) {
    if (t.overflow_drops > 0) return true;
    if (t.samples.empty()) continue;
    double area = 0.0;
    for (std::size_t i = 1; i < t.samples.size(); ++i)
      area += static_cast<double>(t.samples[i - 1].occupancy) * (t.samples[i].t_ms - t.samples[i - 1].t_ms);
    const OccupancySample& last = t.samples.back();
    const double span = t.end_ms - t.start_ms;
    const double avg = span > 0.0 ? (area + static_cast<double>(last.occupancy) * (t.end_ms - last.t_ms)) / span
                                  : static_cast<double>(last.occupancy);
    if (avg >= theta_sat * static_cast<double>(t.b_max)) return true;
  }
  return false;
}

AggregateReport aggregate(std::span<const TrialResult> trials, double theta_sat) {
  AggregateReport r;
  if (trials.empty()) throw InvalidInput("aggregate needs at least one trial");
  r.algo = trials.front().algo;
  r.n_trials = trials.size();

  std::vector<double> delays;
  std::vector<double> pdrs;
  std::vector<double> hops;
  std::size_t saturated = 0;
  std::size_t avoided = 0;
  for (const TrialResult& t : trials) {
    if (t.algo != r.algo) throw InvalidInput("aggregate over trials of different algorithms");
    if (!t.joined) {
      ++r.n_failed;
      continue;
    }
    ++r.n_joined;
    if (const auto d = delay_stats(t))
      delays.push_back(d->mu_ms);
    else
      ++r.n_undefined_delay;
    if (const auto p = pdr(t)) pdrs.push_back(*p);
    hops.push_back(t.hops_at_join);
    if (is_saturated_branch(t, theta_sat).value_or(false)) ++saturated;
    if (t.eligible_sat) {
      ++r.n_eligible_sat_trials;
      if (t.avoided_sat.value_or(false)) ++avoided;
    }
  }
  if (r.n_joined == 0) throw InvalidInput("aggregate: no trial joined the network");

  if (!delays.empty()) {
    const SampleStats d = mean_and_deviation(std::move(delays));
    r.mu_d_ms = d.mean;
    r.sigma_d_ms = d.deviation;
  }
  if (!pdrs.empty()) {
    const SampleStats p = mean_and_deviation(std::move(pdrs));
    r.mu_pdr = p.mean;
    r.sigma_pdr = p.deviation;
  }
  r.mean_hops = mean_and_deviation(std::move(hops)).mean;
  r.pct_sat = static_cast<double>(saturated) / static_cast<double>(r.n_joined);
  if (r.n_eligible_sat_trials > 0)
    r.avoid_sat = static_cast<double>(avoided) / static_cast<double>(r.n_eligible_sat_trials);
  return r;
}

double recount_pct_sat(std::span<const TrialResult> trials, double theta_sat) {
  std::size_t joined = 0;
  std::size_t saturated = 0;
  for (const TrialResult& t : trials) {
    if (!t.joined) continue;
    ++joined;
    if (saturated_from_traces(t, theta_sat).value_or(false)) ++saturated;
  }
  if (joined == 0) throw InvalidInput("recount_pct_sat: no trial joined the network");
  return static_cast<double>(saturated) / static_cast<double>(joined);
}

Improvement compare(const AggregateReport& base, const AggregateReport& prop) {
  Improvement g;
  if (base.mu_d_ms && prop.mu_d_ms && *base.mu_d_ms != 0.0)
    g.delay_gain = (*base.mu_d_ms - *prop.mu_d_ms) / *base.mu_d_ms;
  if (base.mu_pdr != 0.0) g.pdr_gain = (prop.mu_pdr - base.mu_pdr) / base.mu_pdr;
  g.sat_reduction_pp = 100.0 * (base.pct_sat - prop.pct_sat);
  return g;
}

}  // namespace blemesh
