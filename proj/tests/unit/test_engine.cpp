#include <doctest.h>

#include <algorithm>
#include <set>

#include "blemesh/engine.hpp"
#include "blemesh/metrics.hpp"

using namespace blemesh;

namespace {

NodeId id(std::uint32_t v) { return NodeId{v}; }

Network pair_network(std::size_t master_buffer, std::size_t master_b_max = 30) {
  Network net({NodeConfig{id(1), {0, 0}}, NodeConfig{id(2), {5, 0}, 100.0, master_b_max}, NodeConfig{id(3), {10, 0}}},
              kSinkId);
  net.attach(id(2), kSinkId);
  net.attach(id(3), id(2));
  for (std::size_t i = 0; i < master_buffer; ++i) net.node(id(2)).buffer.push_back(DataPacket{1000 + i, id(2), kSinkId});
  return net;
}

/// Sink, `relays` nodes in a straight line 8 m apart, and the new node 8 m
/// past the last relay. No background traffic.
Scenario chain(std::uint32_t relays) {
  Scenario s;
  s.name = "chain";
  for (std::uint32_t i = 0; i <= relays; ++i) s.nodes.push_back(NodeConfig{id(i + 1), {8.0 * i, 0}});
  s.new_node_id = id(relays + 2);
  s.nodes.push_back(NodeConfig{s.new_node_id, {8.0 * (relays + 1), 0}});
  s.engine.measure_ms = 10000;
  return s;
}

}  // namespace

TEST_CASE("connection event moves at most n_ce packets") {
  Network net = pair_network(20);
  for (std::uint64_t i = 0; i < 6; ++i) net.node(id(3)).buffer.push_back(DataPacket{i, id(3), kSinkId});
  const TransferOutcome out = connection_event(net, id(2), id(3), 4);
  CHECK(out.moved == 4u);
  CHECK(out.dropped.empty());
  CHECK(net.node(id(3)).buffer.size() == 2u);
  CHECK(net.node(id(2)).buffer.size() == 24u);
  CHECK(net.node(id(2)).buffer.back().hops_traversed == 1u);
}

TEST_CASE("full receiver drops packets") {
  Network net = pair_network(30);
  for (std::uint64_t i = 0; i < 3; ++i) net.node(id(3)).buffer.push_back(DataPacket{i, id(3), kSinkId});
  const TransferOutcome out = connection_event(net, id(2), id(3), 4);
  CHECK(out.dropped.size() == 3u);
  CHECK(net.node(id(3)).buffer.empty());
  CHECK(net.node(id(2)).buffer.size() == 30u);
}

TEST_CASE("sink consumes what it receives") {
  Network net = pair_network(3);
  const TransferOutcome out = connection_event(net, kSinkId, id(2), 4);
  CHECK(out.delivered.size() == 3u);
  CHECK(out.delivered.front().hops_traversed == 1u);
  CHECK(net.node(kSinkId).buffer.empty());
  CHECK(net.node(id(2)).buffer.empty());
}

TEST_CASE("zero-rate source generates nothing") {
  CHECK(generate_traffic(0.0, 0.0, 60000.0, 1, id(2)).empty());
  PoissonSource src(0.0, 1, id(2));
  CHECK_FALSE(src.next_after(0.0).has_value());
}

TEST_CASE("ten packets per second over a minute") {
  const auto times = generate_traffic(10.0, 0.0, 60000.0, 42, id(2));
  // Frozen from the seeded generator.
  CHECK(times.size() == 587u);
  CHECK(times.size() > 500u);
  CHECK(times.size() < 700u);
  CHECK(std::is_sorted(times.begin(), times.end()));
  CHECK(generate_traffic(10.0, 0.0, 60000.0, 42, id(2)) == times);
}

TEST_CASE("per-node streams are distinct") {
  const auto a = generate_traffic(10.0, 0.0, 60000.0, 42, id(2));
  const auto b = generate_traffic(10.0, 0.0, 60000.0, 42, id(3));
  std::set<double> shared;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(shared, shared.begin()));
  CHECK(shared.empty());
  CHECK(a != b);
}

TEST_CASE("status broadcast reaches every hearer") {
  const std::vector<NodeConfig> cfg{NodeConfig{id(1), {0, 0}}, NodeConfig{id(2), {5, 0}}, NodeConfig{id(3), {-5, 0}},
                                    NodeConfig{id(4), {60, 0}}};
  const Network net(cfg, kSinkId);
  std::vector<Position> pos;
  for (const auto& c : cfg) pos.push_back(c.pos);
  const LinkTable links(pos, RadioParams{}, {});
  const auto out = broadcast_status(kSinkId, net, links);
  CHECK(out.size() == 2u);
  for (const auto& d : out) CHECK(d.advert.sender == kSinkId);
  CHECK(broadcast_status(id(4), net, links).empty());
}

TEST_CASE("events order by time, kind, node, then insertion") {
  const EventLater later;
  CHECK(later(Event{2.0, EventKind::status_broadcast, 0, 0, 0}, Event{1.0, EventKind::measurement_end, 9, 0, 9}));
  CHECK(later(Event{1.0, EventKind::packet_gen, 0, 0, 0}, Event{1.0, EventKind::connection_event, 5, 0, 5}));
  CHECK(later(Event{1.0, EventKind::packet_gen, 3, 0, 0}, Event{1.0, EventKind::packet_gen, 2, 0, 5}));
  CHECK(later(Event{1.0, EventKind::packet_gen, 2, 0, 6}, Event{1.0, EventKind::packet_gen, 2, 0, 5}));
}

TEST_CASE("algorithm names") {
  CHECK(parse_algo("baseline") == Algo::baseline);
  CHECK(to_string(Algo::scored) == "scored");
  CHECK_THROWS_AS(parse_algo("random"), InvalidInput);
}

TEST_CASE("identical inputs give identical trials") {
  const Scenario s = training11();
  CHECK(run_trial(s, Algo::scored, 42) == run_trial(s, Algo::scored, 42));
  CHECK(run_trial(s, Algo::baseline, 7) == run_trial(s, Algo::baseline, 7));
}

TEST_CASE("packet accounting is conserved") {
  const Scenario s = training11();
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (Algo a : {Algo::baseline, Algo::scored}) {
      const TrialResult t = run_trial(s, a, seed);
      REQUIRE(t.joined);
      CHECK(t.sent == t.delivered + t.dropped + t.in_flight);
      CHECK(t.sent == t.probes.size());
      for (const auto& p : t.probes)
        if (p.delivered_at_ms) CHECK(*p.delivered_at_ms >= p.created_at_ms);
    }
}

TEST_CASE("probe pdr is delivered over sent") {
  TrialResult t;
  t.joined = true;
  t.sent = 600;
  t.delivered = 546;
  CHECK(*pdr(t) == doctest::Approx(0.91));
}

TEST_CASE("a new node far from everyone fails to join") {
  Scenario s = chain(1);
  s.nodes.back().pos = {50.0, 50.0};
  s.declared_unjoinable = true;
  const TrialResult t = run_trial(s, Algo::scored, 1);
  CHECK_FALSE(t.joined);
  CHECK_FALSE(t.chosen_parent.has_value());
  CHECK(t.probes.empty());
}

TEST_CASE("delivered probes crossed exactly the join depth") {
  const Scenario s = training11();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TrialResult t = run_trial(s, Algo::scored, seed);
    REQUIRE(t.joined);
    CHECK(t.path_to_sink.size() == t.hops_at_join);
    for (const auto& p : t.probes)
      if (p.delivered_at_ms) CHECK(p.hops_traversed == t.hops_at_join);
  }
}

TEST_CASE("idle-network delay grows with hop count") {
  std::vector<double> medians;
  for (std::uint32_t relays = 0; relays < 3; ++relays) {
    const TrialResult t = run_trial(chain(relays), Algo::baseline, 3);
    REQUIRE(t.joined);
    CHECK(t.hops_at_join == relays + 1);
    std::vector<double> delays;
    for (const auto& p : t.probes)
      if (p.delivered_at_ms) delays.push_back(*p.delivered_at_ms - p.created_at_ms);
    REQUIRE_FALSE(delays.empty());
    std::sort(delays.begin(), delays.end());
    for (double d : delays) CHECK(d >= 0.0);
    medians.push_back(delays[delays.size() / 2]);
  }
  CHECK(medians[0] < medians[1]);
  CHECK(medians[1] < medians[2]);
}

TEST_CASE("build-up leaves one tree rooted at the sink") {
  const Scenario s = training11();
  for (Algo a : {Algo::baseline, Algo::scored}) {
    std::size_t attaches = 0;
    TrialHooks hooks;
    hooks.after_attach = [&](const Network& net) {
      ++attaches;
      const auto v = net.invariant_violations();
      CHECK_MESSAGE(v.empty(), (v.empty() ? "" : v.front()));
    };
    const Network net = build_network(s, a, 5, hooks);
    CHECK(attaches >= s.nodes.size() - 2);
    for (const NodeState& n : net.nodes())
      if (n.id != s.new_node_id) CHECK(net.in_sink_cluster(n.id));
  }
}
