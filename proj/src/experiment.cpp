#include "blemesh/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace blemesh {

ScenarioSource ScenarioSource::fixed(Scenario s) {
  ScenarioSource src;
  src.fixed_ = std::move(s);
  return src;
}

ScenarioSource ScenarioSource::random(RandomScenarioParams p) {
  ScenarioSource src;
  src.random_ = std::move(p);
  return src;
}

Scenario ScenarioSource::for_seed(std::uint64_t seed) const {
  if (fixed_) return *fixed_;
  return gen_random_scenario(*random_, seed);
}

void ScenarioSource::override_weights(const ScoreWeights& w) {
  validate(w);
  if (fixed_) fixed_->weights = w;
  if (random_) random_->base.weights = w;
}

double ScenarioSource::theta_sat() const {
  return fixed_ ? fixed_->thresholds.theta_sat : random_->base.thresholds.theta_sat;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<TrialResult> results_of(const std::vector<TrialRow>& rows, Algo algo) {
  std::vector<TrialResult> out;
  for (const TrialRow& r : rows)
    if (r.result.algo == algo) out.push_back(r.result);
  return out;
}

std::vector<TrialRow> run_rows(const ScenarioSource& source, std::size_t trials, std::uint64_t seed_base,
                               const std::vector<Algo>& algos, unsigned threads) {
  std::vector<TrialRow> rows(trials * algos.size());
  parallel_for(trials, threads, [&](std::size_t i) {
    const std::uint64_t seed = seed_base + i;
    const Scenario scenario = source.for_seed(seed);
    for (std::size_t a = 0; a < algos.size(); ++a) rows[i * algos.size() + a] = TrialRow{i, run_trial(scenario, algos[a], seed)};
  });
  std::sort(rows.begin(), rows.end(), [](const TrialRow& x, const TrialRow& y) {
    return std::tie(x.trial, x.result.algo) < std::tie(y.trial, y.result.algo);
  });
  return rows;
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v, int precision = 3) { return v ? fmt(*v, precision) : "-"; }

}  // namespace

CompareResult run_compare(const ScenarioSource& source, std::size_t trials, std::uint64_t seed_base,
                          unsigned threads) {
  if (trials == 0) throw InvalidInput("compare needs at least one trial");
  CompareResult out;
  out.theta_sat = source.theta_sat();
  out.rows = run_rows(source, trials, seed_base, {Algo::baseline, Algo::scored}, threads);
  const auto base = results_of(out.rows, Algo::baseline);
  const auto prop = results_of(out.rows, Algo::scored);
  out.baseline = aggregate(base, out.theta_sat);
  out.scored = aggregate(prop, out.theta_sat);
  out.improvement = compare(out.baseline, out.scored);
  return out;
}

std::string format_table(const CompareResult& r) {
  std::ostringstream os;
  auto line = [&](const std::string& label, const AggregateReport& a) {
    os << std::left << std::setw(10) << label << std::right << std::setw(9) << fmt(a.mu_d_ms, 1) << std::setw(9)
       << fmt(a.sigma_d_ms, 1) << std::setw(8) << fmt(a.mu_pdr, 3) << std::setw(8) << fmt(a.sigma_pdr, 3)
       << std::setw(7) << fmt(100.0 * a.pct_sat, 0) + "%" << std::setw(11)
       << (a.avoid_sat ? fmt(100.0 * *a.avoid_sat, 0) + "%" : std::string("-")) << std::setw(8) << fmt(a.mean_hops, 2)
       << "   joined " << a.n_joined << "/" << a.n_trials << ", eligible " << a.n_eligible_sat_trials << '\n';
  };
  os << std::left << std::setw(10) << "algo" << std::right << std::setw(9) << "mu_d" << std::setw(9) << "sigma_d"
     << std::setw(8) << "mu_pdr" << std::setw(8) << "sig_pdr" << std::setw(7) << "%Sat" << std::setw(11)
     << "avoid_Sat" << std::setw(8) << "N_hops" << '\n';
  line("scored", r.scored);
  line("baseline", r.baseline);
  os << "delay_gain " << fmt(100.0 * r.improvement.delay_gain, 1) << "%, pdr_gain "
     << fmt(100.0 * r.improvement.pdr_gain, 1) << "%, sat_reduction " << fmt(r.improvement.sat_reduction_pp, 1)
     << " pp\n";
  return os.str();
}

void write_csv_header(std::ostream& os) {
  os << "trial,algo,seed,joined,parent_id,hops,mu_d_ms,sigma_d_ms,pdr,sat_branch,eligible_sat,avoided_sat\n";
}

void write_csv_row(std::ostream& os, const TrialRow& row, double theta_sat) {
  const TrialResult& t = row.result;
  const auto d = delay_stats(t);
  const auto p = pdr(t);
  const auto sat = is_saturated_branch(t, theta_sat);
  os << row.trial << ',' << to_string(t.algo) << ',' << t.seed << ',' << (t.joined ? 1 : 0) << ',';
  if (t.chosen_parent) os << raw(*t.chosen_parent);
  os << ',';
  if (t.joined) os << t.hops_at_join;
  os << ',' << std::setprecision(10);
  if (d) os << d->mu_ms;
  os << ',';
  if (d) os << d->sigma_ms;
  os << ',';
  if (p) os << *p;
  os << ',';
  if (sat) os << (*sat ? 1 : 0);
  os << ',' << (t.eligible_sat ? 1 : 0) << ',';
  if (t.avoided_sat) os << (*t.avoided_sat ? 1 : 0);
  os << '\n';
}

void write_csv(std::ostream& os, const std::vector<TrialRow>& rows, double theta_sat) {
  write_csv_header(os);
  for (const TrialRow& r : rows) write_csv_row(os, r, theta_sat);
}

std::array<double, 6> parse_weight_list(std::string_view text) {
  std::array<double, 6> out{};
  std::size_t count = 0;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (count == out.size()) throw InvalidInput("--weights takes exactly six values");
    try {
      std::size_t used = 0;
      out[count] = std::stod(item, &used);
      if (used != item.size()) throw InvalidInput("");
    } catch (const std::exception&) {
      throw InvalidInput("--weights: '" + item + "' is not a number");
    }
    ++count;
  }
  if (count != out.size()) throw InvalidInput("--weights takes exactly six values: w_m,w_h,w_b,w_ci,w_rl,w_rn");
  return out;
}

ScoreWeights with_term_weights(ScoreWeights base, const std::array<double, 6>& t) {
  base.w_m = t[0];
  base.w_h = t[1];
  base.w_b = t[2];
  base.w_ci = t[3];
  base.w_rl = t[4];
  base.w_rn = t[5];
  validate(base);
  return base;
}

std::vector<ScoreWeights> parse_weight_grid(std::string_view spec, const ScoreWeights& base) {
  static const std::map<std::string, double ScoreWeights::*> fields{
      {"w_m", &ScoreWeights::w_m}, {"w_h", &ScoreWeights::w_h},   {"w_b", &ScoreWeights::w_b},
      {"w_ci", &ScoreWeights::w_ci}, {"w_rl", &ScoreWeights::w_rl}, {"w_rn", &ScoreWeights::w_rn},
  };
  std::vector<ScoreWeights> grid{base};
  std::stringstream ss{std::string(spec)};
  std::string axis;
  while (std::getline(ss, axis, ';')) {
    if (axis.empty()) continue;
    const auto eq = axis.find('=');
    if (eq == std::string::npos) throw InvalidInput("weight grid axis '" + axis + "' lacks '='");
    const auto field = fields.find(axis.substr(0, eq));
    if (field == fields.end()) throw InvalidInput("weight grid: unknown weight '" + axis.substr(0, eq) + "'");

    std::vector<double> values;
    std::stringstream vs{axis.substr(eq + 1)};
    std::string v;
    while (std::getline(vs, v, ',')) {
      try {
        values.push_back(std::stod(v));
      } catch (const std::exception&) {
        throw InvalidInput("weight grid: '" + v + "' is not a number");
      }
    }
    if (values.empty()) throw InvalidInput("weight grid axis '" + axis + "' has no values");

    std::vector<ScoreWeights> next;
    for (const ScoreWeights& w : grid)
      for (double x : values) {
        ScoreWeights copy = w;
        copy.*(field->second) = x;
        next.push_back(copy);
      }
    grid = std::move(next);
  }
  for (const ScoreWeights& w : grid) validate(w);
  return grid;
}

SweepResult run_sweep(const ScenarioSource& source, std::size_t trials, std::uint64_t seed_base,
                      const std::vector<ScoreWeights>& grid, unsigned threads) {
  if (trials == 0) throw InvalidInput("sweep needs at least one trial");
  SweepResult out;
  const double theta = source.theta_sat();
  const auto base_rows = run_rows(source, trials, seed_base, {Algo::baseline}, threads);
  out.baseline = aggregate(results_of(base_rows, Algo::baseline), theta);
  for (const ScoreWeights& w : grid) {
    ScenarioSource weighted = source;
    weighted.override_weights(w);
    const auto rows = run_rows(weighted, trials, seed_base, {Algo::scored}, threads);
    SweepRow row{w, aggregate(results_of(rows, Algo::scored), theta), {}};
    row.vs_baseline = compare(out.baseline, row.scored);
    out.rows.push_back(row);
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "w_m,w_h,w_b,w_ci,w_rl,w_rn,mu_d_ms,sigma_d_ms,mu_pdr,sigma_pdr,pct_sat,avoid_sat,mean_hops,delay_gain,"
        "pdr_gain,sat_reduction_pp\n";
  os << std::setprecision(10);
  for (const SweepRow& row : r.rows) {
    const ScoreWeights& w = row.weights;
    const AggregateReport& a = row.scored;
    os << w.w_m << ',' << w.w_h << ',' << w.w_b << ',' << w.w_ci << ',' << w.w_rl << ',' << w.w_rn << ',';
    if (a.mu_d_ms) os << *a.mu_d_ms;
    os << ',';
    if (a.sigma_d_ms) os << *a.sigma_d_ms;
    os << ',' << a.mu_pdr << ',' << a.sigma_pdr << ',' << a.pct_sat << ',';
    if (a.avoid_sat) os << *a.avoid_sat;
    os << ',' << a.mean_hops << ',' << row.vs_baseline.delay_gain << ',' << row.vs_baseline.pdr_gain << ','
       << row.vs_baseline.sat_reduction_pp << '\n';
  }
}

}  // namespace blemesh
