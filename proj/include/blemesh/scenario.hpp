#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "blemesh/channel.hpp"
#include "blemesh/join_scored.hpp"
#include "blemesh/network.hpp"

namespace blemesh {

/// Timing constants of one trial.
struct EngineParams {
  double t_adv_ms = 200.0;
  double warmup_ms = 5000.0;
  double measure_ms = 60000.0;
  double probe_rate = 10.0;
  std::uint32_t n_ce = 4;
  double max_wait_ms = 10000.0;

  bool operator==(const EngineParams&) const = default;
};

struct Thresholds {
  double rl_min_dbm = -85.0;
  std::uint32_t b_fair = 1;
  /// Fraction of b_max at which a node's mean occupancy marks its branch saturated.
  double theta_sat = 0.8;

  FilterThresholds filter() const { return {rl_min_dbm, b_fair}; }
  bool operator==(const Thresholds&) const = default;
};

struct Scenario {
  std::string name;
  std::vector<NodeConfig> nodes;
  NodeId sink_id = kSinkId;
  NodeId new_node_id{};
  RadioParams radio;
  EngineParams engine;
  ScoreWeights weights;
  Thresholds thresholds;
  /// Allows a new node that hears nobody; such scenarios always fail to join.
  bool declared_unjoinable = false;

  bool operator==(const Scenario&) const = default;
};

/// Throws ScenarioInvalid naming the offending field.
void validate(const Scenario& s);

/// Parses and validates a JSON scenario document. Omitted optional fields
/// take their defaults; unknown fields are rejected.
Scenario parse_scenario(std::string_view json_text);
std::string to_json(const Scenario& s);

/// Loads a scenario file, or a built-in scenario by name ("training11")
/// when no such file exists.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Eleven-node layout: a sink with two three-hop branches whose tails both
/// reach the new node. Branch A carries a 20 pps generator that overloads
/// its tail; branch B is lightly loaded.
Scenario training11();

struct RandomScenarioParams {
  std::uint32_t n_nodes = 16;
  double area_m = 30.0;
  std::vector<double> ci_tiers_ms{50.0, 100.0, 200.0, 400.0};
  std::vector<double> rate_tiers_pps{0.0, 2.0, 5.0, 20.0};
  std::uint32_t min_new_node_candidates = 2;
  std::uint32_t max_attempts = 10000;
  /// Radio, engine, weight and threshold settings copied into every result.
  Scenario base;
};

/// Uniform placement with resampling until the network (minus the new node)
/// is connected and the new node has enough usable candidates.
/// Throws GenerationFailed when the attempt budget runs out.
Scenario gen_random_scenario(const RandomScenarioParams& params, std::uint64_t seed);

/// Scenario connectivity, ignoring shadowing.
bool hearing_graph_connected(const Scenario& s, bool include_new_node);

}  // namespace blemesh
