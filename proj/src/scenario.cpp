#include "blemesh/scenario.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace blemesh {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw ScenarioInvalid("scenario-invalid: " + field + ": " + why);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) invalid(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || item.key() == a;
    if (!known) invalid(where.empty() ? item.key() : where + "." + item.key(), "unknown field");
  }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid(where.empty() ? key : where + "." + key, e.what());
  }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) invalid(where.empty() ? key : where + "." + key, "missing required field");
  T out{};
  read(obj, key, where, out);
  return out;
}

NodeConfig node_from_json(const json& j, const std::string& where) {
  reject_unknown(j, where, {"id", "pos", "ci_ms", "b_max", "slave_capacity", "traffic_rate_pps"});
  NodeConfig n;
  n.id = NodeId{require<std::uint32_t>(j, "id", where)};
  if (!j.contains("pos")) invalid(where + ".pos", "missing required field");
  const json& pos = j.at("pos");
  reject_unknown(pos, where + ".pos", {"x", "y"});
  n.pos.x = require<double>(pos, "x", where + ".pos");
  n.pos.y = require<double>(pos, "y", where + ".pos");
  read(j, "ci_ms", where, n.ci_ms);
  read(j, "b_max", where, n.b_max);
  read(j, "slave_capacity", where, n.slave_capacity);
  read(j, "traffic_rate_pps", where, n.traffic_rate_pps);
  return n;
}

json node_to_json(const NodeConfig& n) {
  return json{{"id", raw(n.id)},
              {"pos", {{"x", n.pos.x}, {"y", n.pos.y}}},
              {"ci_ms", n.ci_ms},
              {"b_max", n.b_max},
              {"slave_capacity", n.slave_capacity},
              {"traffic_rate_pps", n.traffic_rate_pps}};
}

}  // namespace

bool hearing_graph_connected(const Scenario& s, bool include_new_node) {
  std::vector<const NodeConfig*> nodes;
  for (const NodeConfig& n : s.nodes)
    if (include_new_node || n.id != s.new_node_id) nodes.push_back(&n);
  if (nodes.empty()) return true;

  std::vector<char> seen(nodes.size(), 0);
  std::queue<std::size_t> todo;
  todo.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!todo.empty()) {
    const std::size_t i = todo.front();
    todo.pop();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (seen[j] || !hears(nodes[i]->pos, nodes[j]->pos, s.radio).heard) continue;
      seen[j] = 1;
      ++reached;
      todo.push(j);
    }
  }
  return reached == nodes.size();
}

void validate(const Scenario& s) {
  if (s.nodes.empty()) invalid("nodes", "at least one node is required");
  std::set<NodeId> ids;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const NodeConfig& n = s.nodes[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (raw(n.id) == 0 || raw(n.id) == raw(kSinkClusterId)) invalid(where + ".id", "must be a positive id");
    if (!ids.insert(n.id).second) invalid(where + ".id", "duplicate id " + std::to_string(raw(n.id)));
    if (!std::isfinite(n.pos.x) || !std::isfinite(n.pos.y)) invalid(where + ".pos", "coordinates must be finite");
    if (!(n.ci_ms > 0.0) || !std::isfinite(n.ci_ms)) invalid(where + ".ci_ms", "must be > 0");
    if (n.b_max == 0) invalid(where + ".b_max", "must be >= 1");
    if (!(n.traffic_rate_pps >= 0.0) || !std::isfinite(n.traffic_rate_pps))
      invalid(where + ".traffic_rate_pps", "must be >= 0");
  }
  if (ids.count(s.sink_id) == 0) invalid("sink_id", "no node has id " + std::to_string(raw(s.sink_id)));
  if (ids.count(s.new_node_id) == 0) invalid("new_node_id", "no node has id " + std::to_string(raw(s.new_node_id)));
  if (s.sink_id == s.new_node_id) invalid("new_node_id", "must differ from sink_id");

  try {
    validate(s.radio);
  } catch (const InvalidInput& e) {
    invalid("radio", e.what());
  }
  try {
    validate(s.weights);
  } catch (const InvalidInput& e) {
    invalid("weights", e.what());
  }

  const EngineParams& e = s.engine;
  if (!(e.t_adv_ms > 0.0)) invalid("engine.t_adv_ms", "must be > 0");
  if (!(e.warmup_ms >= 0.0)) invalid("engine.warmup_ms", "must be >= 0");
  if (!(e.measure_ms > 0.0)) invalid("engine.measure_ms", "must be > 0");
  if (!(e.probe_rate > 0.0)) invalid("engine.probe_rate", "must be > 0");
  if (e.n_ce == 0) invalid("engine.n_ce", "must be >= 1");
  if (!(e.max_wait_ms > 0.0)) invalid("engine.max_wait_ms", "must be > 0");

  if (!(s.thresholds.theta_sat > 0.0 && s.thresholds.theta_sat <= 1.0))
    invalid("thresholds.theta_sat", "must lie in (0, 1]");
  if (!std::isfinite(s.thresholds.rl_min_dbm)) invalid("thresholds.rl_min_dbm", "must be finite");

  if (!hearing_graph_connected(s, false)) invalid("nodes", "hearing graph without the new node is disconnected");
  if (!s.declared_unjoinable) {
    const NodeConfig* joiner = nullptr;
    for (const NodeConfig& n : s.nodes)
      if (n.id == s.new_node_id) joiner = &n;
    bool heard = false;
    for (const NodeConfig& n : s.nodes)
      if (n.id != s.new_node_id && hears(joiner->pos, n.pos, s.radio).heard) heard = true;
    if (!heard) invalid("new_node_id", "new node hears no other node (set declared_unjoinable to allow this)");
  }
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioInvalid(std::string("scenario-invalid: parse error: ") + e.what());
  }
  reject_unknown(doc, "",
                 {"name", "nodes", "sink_id", "new_node_id", "radio", "engine", "weights", "thresholds",
                  "declared_unjoinable"});

  Scenario s;
  read(doc, "name", "", s.name);
  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) invalid("nodes", "missing required array");
  const json& nodes = doc.at("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    s.nodes.push_back(node_from_json(nodes[i], "nodes[" + std::to_string(i) + "]"));
  if (!doc.contains("sink_id")) invalid("sink_id", "missing required field");
  s.sink_id = NodeId{require<std::uint32_t>(doc, "sink_id", "")};
  s.new_node_id = NodeId{require<std::uint32_t>(doc, "new_node_id", "")};
  read(doc, "declared_unjoinable", "", s.declared_unjoinable);

  if (doc.contains("radio")) {
    const json& r = doc.at("radio");
    reject_unknown(r, "radio", {"tx_power_dbm", "pl0_db", "exponent", "rx_threshold_dbm", "shadowing_sigma_db"});
    read(r, "tx_power_dbm", "radio", s.radio.tx_power_dbm);
    read(r, "pl0_db", "radio", s.radio.pl0_db);
    read(r, "exponent", "radio", s.radio.exponent);
    read(r, "rx_threshold_dbm", "radio", s.radio.rx_threshold_dbm);
    read(r, "shadowing_sigma_db", "radio", s.radio.shadowing_sigma_db);
  }
  if (doc.contains("engine")) {
    const json& e = doc.at("engine");
    reject_unknown(e, "engine", {"t_adv_ms", "warmup_ms", "measure_ms", "probe_rate", "n_ce", "max_wait_ms"});
    read(e, "t_adv_ms", "engine", s.engine.t_adv_ms);
    read(e, "warmup_ms", "engine", s.engine.warmup_ms);
    read(e, "measure_ms", "engine", s.engine.measure_ms);
    read(e, "probe_rate", "engine", s.engine.probe_rate);
    read(e, "n_ce", "engine", s.engine.n_ce);
    read(e, "max_wait_ms", "engine", s.engine.max_wait_ms);
  }
  if (doc.contains("weights")) {
    const json& w = doc.at("weights");
    reject_unknown(w, "weights",
                   {"w_m", "w_h", "w_b", "w_ci", "w_rl", "w_rn", "m_max", "b_max", "ci_min_ms", "ci_max_ms", "rssi_lo",
                    "rssi_hi"});
    read(w, "w_m", "weights", s.weights.w_m);
    read(w, "w_h", "weights", s.weights.w_h);
    read(w, "w_b", "weights", s.weights.w_b);
    read(w, "w_ci", "weights", s.weights.w_ci);
    read(w, "w_rl", "weights", s.weights.w_rl);
    read(w, "w_rn", "weights", s.weights.w_rn);
    read(w, "m_max", "weights", s.weights.m_max);
    read(w, "b_max", "weights", s.weights.b_max);
    read(w, "ci_min_ms", "weights", s.weights.ci_min_ms);
    read(w, "ci_max_ms", "weights", s.weights.ci_max_ms);
    read(w, "rssi_lo", "weights", s.weights.rssi_lo);
    read(w, "rssi_hi", "weights", s.weights.rssi_hi);
  }
  if (doc.contains("thresholds")) {
    const json& t = doc.at("thresholds");
    reject_unknown(t, "thresholds", {"rl_min_dbm", "b_fair", "theta_sat"});
    read(t, "rl_min_dbm", "thresholds", s.thresholds.rl_min_dbm);
    read(t, "b_fair", "thresholds", s.thresholds.b_fair);
    read(t, "theta_sat", "thresholds", s.thresholds.theta_sat);
  }
  validate(s);
  return s;
}

std::string to_json(const Scenario& s) {
  json nodes = json::array();
  for (const NodeConfig& n : s.nodes) nodes.push_back(node_to_json(n));
  const json doc{
      {"name", s.name},
      {"nodes", nodes},
      {"sink_id", raw(s.sink_id)},
      {"new_node_id", raw(s.new_node_id)},
      {"declared_unjoinable", s.declared_unjoinable},
      {"radio",
       {{"tx_power_dbm", s.radio.tx_power_dbm},
        {"pl0_db", s.radio.pl0_db},
        {"exponent", s.radio.exponent},
        {"rx_threshold_dbm", s.radio.rx_threshold_dbm},
        {"shadowing_sigma_db", s.radio.shadowing_sigma_db}}},
      {"engine",
       {{"t_adv_ms", s.engine.t_adv_ms},
        {"warmup_ms", s.engine.warmup_ms},
        {"measure_ms", s.engine.measure_ms},
        {"probe_rate", s.engine.probe_rate},
        {"n_ce", s.engine.n_ce},
        {"max_wait_ms", s.engine.max_wait_ms}}},
      {"weights",
       {{"w_m", s.weights.w_m},
        {"w_h", s.weights.w_h},
        {"w_b", s.weights.w_b},
        {"w_ci", s.weights.w_ci},
        {"w_rl", s.weights.w_rl},
        {"w_rn", s.weights.w_rn},
        {"m_max", s.weights.m_max},
        {"b_max", s.weights.b_max},
        {"ci_min_ms", s.weights.ci_min_ms},
        {"ci_max_ms", s.weights.ci_max_ms},
        {"rssi_lo", s.weights.rssi_lo},
        {"rssi_hi", s.weights.rssi_hi}}},
      {"thresholds",
       {{"rl_min_dbm", s.thresholds.rl_min_dbm},
        {"b_fair", s.thresholds.b_fair},
        {"theta_sat", s.thresholds.theta_sat}}},
  };
  return doc.dump(2);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    if (path == "training11") return training11();
    throw ScenarioInvalid("scenario-invalid: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(s) << '\n';
}

Scenario training11() {
  Scenario s;
  s.name = "training11";
  // Two branches around a ring of 8 m hops. The tails of both branches sit
  // 8 m from the new node and out of range of each other.
  auto node = [](std::uint32_t id, double x, double y, double ci, double rate) {
    NodeConfig n;
    n.id = NodeId{id};
    n.pos = {x, y};
    n.ci_ms = ci;
    n.traffic_rate_pps = rate;
    return n;
  };
  s.nodes = {
      node(1, 0.0, 0.0, 50.0, 0.0),          // sink
      node(2, 7.39, 3.06, 50.0, 2.0),        // A1
      node(3, 10.45, 10.45, 100.0, 0.0),     // A2
      node(4, 7.39, 17.84, 400.0, 20.0),     // A3, overloaded tail
      node(5, 20.45, 10.45, 100.0, 2.0),     // A4
      node(6, -7.39, 3.06, 50.0, 1.0),       // B1
      node(7, -10.45, 10.45, 100.0, 2.0),    // B2
      node(8, -7.39, 17.84, 100.0, 1.0),     // B3
      node(9, -20.45, 10.45, 100.0, 0.0),    // B4
      node(10, 0.0, -10.0, 100.0, 2.0),      // extra leaf
      node(11, 0.0, 20.91, 100.0, 0.0),      // new node
  };
  s.sink_id = NodeId{1};
  s.new_node_id = NodeId{11};
  s.radio.shadowing_sigma_db = 1.0;
  validate(s);
  return s;
}

Scenario gen_random_scenario(const RandomScenarioParams& p, std::uint64_t seed) {
  if (p.n_nodes < 3) throw InvalidInput("random scenarios need at least 3 nodes");
  if (p.ci_tiers_ms.empty() || p.rate_tiers_pps.empty()) throw InvalidInput("CI and rate tiers must not be empty");
  if (!(p.area_m > 0.0)) throw InvalidInput("area must be > 0");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6e17u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> coord(0.0, p.area_m);
  std::uniform_int_distribution<std::size_t> ci_pick(0, p.ci_tiers_ms.size() - 1);
  std::uniform_int_distribution<std::size_t> rate_pick(0, p.rate_tiers_pps.size() - 1);

  Scenario s = p.base;
  s.name = "random" + std::to_string(p.n_nodes) + "-" + std::to_string(seed);
  s.sink_id = NodeId{1};
  s.new_node_id = NodeId{p.n_nodes};
  s.declared_unjoinable = false;

  for (std::uint32_t attempt = 0; attempt < p.max_attempts; ++attempt) {
    s.nodes.clear();
    for (std::uint32_t id = 1; id <= p.n_nodes; ++id) {
      NodeConfig n;
      n.id = NodeId{id};
      n.pos.x = coord(rng);
      n.pos.y = coord(rng);
      n.ci_ms = p.ci_tiers_ms[ci_pick(rng)];
      const double rate = p.rate_tiers_pps[rate_pick(rng)];
      n.traffic_rate_pps = (id == 1 || id == p.n_nodes) ? 0.0 : rate;
      s.nodes.push_back(n);
    }
    if (!hearing_graph_connected(s, false)) continue;

    const Position joiner = s.nodes.back().pos;
    std::uint32_t usable = 0;
    for (std::size_t i = 0; i + 1 < s.nodes.size(); ++i)
      if (path_loss_rssi(std::max(distance(joiner, s.nodes[i].pos), 1.0), s.radio) >= s.thresholds.rl_min_dbm) ++usable;
    if (usable < p.min_new_node_candidates) continue;

    validate(s);
    return s;
  }
  throw GenerationFailed("generation-failed: no connected placement of " + std::to_string(p.n_nodes) +
                         " nodes in a " + std::to_string(p.area_m) + " m square after " +
                         std::to_string(p.max_attempts) + " attempts; try a smaller area or more nodes");
}

}  // namespace blemesh
