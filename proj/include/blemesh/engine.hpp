#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "blemesh/network.hpp"
#include "blemesh/scenario.hpp"

namespace blemesh {

enum class Algo { baseline, scored };

std::string_view to_string(Algo algo);
/// Accepts "baseline" or "scored"; throws InvalidInput otherwise.
Algo parse_algo(std::string_view name);

enum class EventKind : std::uint8_t {
  status_broadcast = 0,
  joinme_broadcast = 1,
  connection_event = 2,
  packet_gen = 3,
  measurement_end = 4,
};

struct Event {
  double at_ms = 0.0;
  EventKind kind = EventKind::status_broadcast;
  /// Node index; for connection events this is the slave side of the link.
  std::uint32_t node = 0;
  /// Link generation for connection events; stale generations are skipped.
  std::uint32_t epoch = 0;
  /// Insertion order, the last tie-break.
  std::uint64_t seq = 0;
};

/// Orders events by (time, kind, node, insertion order).
struct EventLater {
  bool operator()(const Event& a, const Event& b) const;
};

struct ProbeRecord {
  std::uint64_t seq = 0;
  double created_at_ms = 0.0;
  std::optional<double> delivered_at_ms;
  bool dropped = false;
  std::uint32_t hops_traversed = 0;

  bool operator==(const ProbeRecord&) const = default;
};

struct OccupancySample {
  double t_ms = 0.0;
  std::uint32_t occupancy = 0;

  bool operator==(const OccupancySample&) const = default;
};

/// Raw buffer-occupancy history of one node over the measurement window.
struct BufferTrace {
  NodeId id{};
  std::size_t b_max = 0;
  double start_ms = 0.0;
  double end_ms = 0.0;
  std::vector<OccupancySample> samples;
  std::uint64_t overflow_drops = 0;

  bool operator==(const BufferTrace&) const = default;
};

struct NodeWindowStats {
  NodeId id{};
  std::size_t b_max = 0;
  double avg_occupancy = 0.0;
  std::uint64_t overflow_drops = 0;

  bool operator==(const NodeWindowStats&) const = default;
};

struct TrialResult {
  std::uint64_t seed = 0;
  Algo algo = Algo::baseline;
  bool joined = false;
  std::optional<NodeId> chosen_parent;
  double join_time_ms = 0.0;
  std::uint32_t hops_at_join = 0;

  std::vector<ProbeRecord> probes;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;

  /// Every node, time-averaged over the measurement window.
  std::vector<NodeWindowStats> node_stats;
  /// Parent first, sink last.
  std::vector<NodeId> path_to_sink;
  /// Path nodes except the sink.
  std::vector<BufferTrace> path_traces;

  /// At decision time both a saturated and an unsaturated branch were on offer.
  bool eligible_sat = false;
  /// Set only for eligible trials: whether the chosen branch was the unsaturated kind.
  std::optional<bool> avoided_sat;

  /// Clusters left after build-up, excluding the new node.
  std::uint32_t clusters_after_build = 0;

  bool operator==(const TrialResult&) const = default;
};

/// Result of one connection event on a slave -> master link.
struct TransferOutcome {
  std::uint32_t moved = 0;
  std::vector<DataPacket> delivered;
  std::vector<DataPacket> dropped;
};

/// Moves up to `n_ce` packets from the slave's buffer head toward its master.
/// Packets reaching the sink are consumed; packets meeting a full master
/// buffer are dropped.
TransferOutcome connection_event(Network& net, NodeId master, NodeId slave, std::uint32_t n_ce);

/// Poisson arrival process for one node.
class PoissonSource {
 public:
  PoissonSource(double rate_pps, std::uint64_t seed, NodeId node);

  /// Next arrival strictly after `t_ms`, or nothing for a zero rate.
  std::optional<double> next_after(double t_ms);
  double rate_pps() const { return rate_pps_; }

 private:
  double rate_pps_;
  std::mt19937_64 rng_;
};

/// All arrivals of `node`'s stream in [t0_ms, t1_ms).
std::vector<double> generate_traffic(double rate_pps, double t0_ms, double t1_ms, std::uint64_t seed, NodeId node);

/// Copies of the status advert `sender` emits right now, one per hearer.
struct AdvertDelivery {
  NodeId receiver{};
  StatusAdvert advert;
  double rl_dbm = 0.0;
};
std::vector<AdvertDelivery> broadcast_status(NodeId sender, const Network& net, const LinkTable& links);

struct TrialHooks {
  /// Invoked after every successful attach, including the new node's.
  std::function<void(const Network&)> after_attach;
};

/// Forms the network from the scenario's existing nodes with the given
/// algorithm. The returned network still holds the new node as a singleton.
Network build_network(const Scenario& scenario, Algo algo, std::uint64_t seed, const TrialHooks& hooks = {});

/// One full trial: build-up, warm-up under background traffic, the new
/// node's join, then probe measurement. Deterministic in its arguments.
TrialResult run_trial(const Scenario& scenario, Algo algo, std::uint64_t seed, const TrialHooks& hooks = {});

}  // namespace blemesh
