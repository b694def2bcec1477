#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "blemesh/experiment.hpp"

namespace {

using namespace blemesh;

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

template <typename F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

struct SourceOptions {
  std::string scenario;
  bool random = false;
  std::uint32_t nodes = 16;
  std::string weights;

  ScenarioSource make() const {
    ScenarioSource src = stage("load-scenario", [&] {
      if (random) {
        RandomScenarioParams p;
        p.n_nodes = nodes;
        return ScenarioSource::random(p);
      }
      if (scenario.empty()) throw std::runtime_error("either --scenario or --random is required");
      return ScenarioSource::fixed(load_scenario(scenario));
    });
    if (!weights.empty())
      stage("parse-weights", [&] {
        const ScoreWeights base = src.for_seed(0).weights;
        src.override_weights(with_term_weights(base, parse_weight_list(weights)));
        return 0;
      });
    return src;
  }
};

void add_source_options(CLI::App* cmd, SourceOptions& o, bool allow_random) {
  auto* sc = cmd->add_option("--scenario", o.scenario, "scenario JSON file or built-in name (training11)");
  if (allow_random) {
    auto* rnd = cmd->add_flag("--random", o.random, "fresh random scenario per trial");
    cmd->add_option("--nodes", o.nodes, "node count for --random")->check(CLI::Range(3u, 10000u));
    sc->excludes(rnd);
  }
  cmd->add_option("--weights", o.weights, "term weights w_m,w_h,w_b,w_ci,w_rl,w_rn");
}

void print_trial(const TrialResult& t, double theta) {
  std::cout << "algo " << to_string(t.algo) << ", seed " << t.seed << ": ";
  if (!t.joined) {
    std::cout << "join failed\n";
    return;
  }
  std::cout << "parent " << raw(*t.chosen_parent) << ", hops " << t.hops_at_join << ", join at " << t.join_time_ms
            << " ms\n";
  if (const auto d = delay_stats(t)) std::cout << "  delay mu " << d->mu_ms << " ms, sigma " << d->sigma_ms << " ms\n";
  if (const auto p = pdr(t))
    std::cout << "  pdr " << *p << " (" << t.delivered << "/" << t.sent << ", dropped " << t.dropped << ", in flight "
              << t.in_flight << ")\n";
  std::cout << "  saturated branch " << (is_saturated_branch(t, theta).value_or(false) ? "yes" : "no") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BLE mesh join simulator"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  SourceOptions run_src;
  std::string algo_name = "scored";
  std::uint64_t seed = 0;
  std::string out_path;
  auto* run = app.add_subcommand("run", "one trial");
  add_source_options(run, run_src, false);
  run->add_option("--algo", algo_name)->check(CLI::IsMember({"baseline", "scored"}));
  run->add_option("--seed", seed);
  run->add_option("--out", out_path, "CSV output");

  SourceOptions cmp_src;
  std::size_t trials = 100;
  std::uint64_t seed_base = 0;
  auto* cmp = app.add_subcommand("compare", "paired baseline vs scored trials");
  add_source_options(cmp, cmp_src, true);
  cmp->add_option("--trials", trials)->check(CLI::PositiveNumber);
  cmp->add_option("--seed-base", seed_base);
  cmp->add_option("--out", out_path, "CSV output");

  std::uint32_t gen_nodes = 16;
  auto* gen = app.add_subcommand("gen", "write a random scenario");
  gen->add_option("--nodes", gen_nodes)->check(CLI::Range(3u, 10000u));
  gen->add_option("--seed", seed);
  gen->add_option("--out", out_path)->required();

  SourceOptions sweep_src;
  std::string grid;
  auto* sweep = app.add_subcommand("sweep", "scored algorithm over a weight grid");
  add_source_options(sweep, sweep_src, true);
  sweep->add_option("--trials", trials)->check(CLI::PositiveNumber);
  sweep->add_option("--seed-base", seed_base);
  sweep->add_option("--weights-grid", grid, "e.g. 'w_b=0.1,0.25;w_ci=0.1,0.2'")->required();
  sweep->add_option("--out", out_path, "CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ScenarioSource src = run_src.make();
      const Scenario s = src.for_seed(seed);
      const Algo algo = parse_algo(algo_name);
      const TrialResult t = stage("simulate", [&] { return run_trial(s, algo, seed); });
      print_trial(t, s.thresholds.theta_sat);
      if (!out_path.empty())
        stage("write-output", [&] {
          auto out = open_out(out_path);
          write_csv(out, {TrialRow{0, t}}, s.thresholds.theta_sat);
          return 0;
        });
      return t.joined ? 0 : 3;
    }
    if (*cmp) {
      const ScenarioSource src = cmp_src.make();
      const auto start = std::chrono::steady_clock::now();
      const CompareResult r = stage("simulate", [&] { return run_compare(src, trials, seed_base, threads); });
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << format_table(r) << trials << " paired trials in " << secs << " s\n";
      if (!out_path.empty())
        stage("write-output", [&] {
          auto out = open_out(out_path);
          write_csv(out, r.rows, r.theta_sat);
          return 0;
        });
      return 0;
    }
    if (*gen) {
      RandomScenarioParams p;
      p.n_nodes = gen_nodes;
      const Scenario s = stage("generate", [&] { return gen_random_scenario(p, seed); });
      stage("write-output", [&] {
        save_scenario(s, out_path);
        return 0;
      });
      std::cout << "wrote " << out_path << " (" << s.nodes.size() << " nodes)\n";
      return 0;
    }
    if (*sweep) {
      const ScenarioSource src = sweep_src.make();
      const auto weights = stage("parse-grid", [&] { return parse_weight_grid(grid, src.for_seed(seed_base).weights); });
      const SweepResult r = stage("simulate", [&] { return run_sweep(src, trials, seed_base, weights, threads); });
      if (out_path.empty()) {
        write_sweep_csv(std::cout, r);
      } else {
        stage("write-output", [&] {
          auto out = open_out(out_path);
          write_sweep_csv(out, r);
          return 0;
        });
      }
      std::cout << "baseline mu_d " << r.baseline.mu_d_ms.value_or(0.0) << " ms, mu_pdr " << r.baseline.mu_pdr << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
