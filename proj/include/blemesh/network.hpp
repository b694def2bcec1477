#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "blemesh/channel.hpp"
#include "blemesh/ids.hpp"

namespace blemesh {

struct DataPacket {
  std::uint64_t seq = 0;
  NodeId src{};
  NodeId dst{};
  double created_at_ms = 0.0;
  std::uint32_t hops_traversed = 0;
  bool probe = false;

  bool operator==(const DataPacket&) const = default;
};

/// Static per-device configuration, as read from a scenario.
struct NodeConfig {
  NodeId id{};
  Position pos{};
  double ci_ms = 100.0;
  std::size_t b_max = 30;
  std::uint32_t slave_capacity = 3;
  double traffic_rate_pps = 0.0;

  bool operator==(const NodeConfig&) const = default;
};

struct NodeState {
  NodeId id{};
  Position pos{};
  ClusterId cluster_id{};
  std::uint32_t cluster_size = 1;
  std::optional<NodeId> master;
  std::vector<NodeId> slaves;
  /// Tree depth below the sink; unknown while outside the sink's cluster.
  std::optional<std::uint32_t> hops_to_sink;
  std::deque<DataPacket> buffer;
  std::size_t b_max = 30;
  double ci_ms = 100.0;
  std::uint32_t slave_capacity = 3;
  double traffic_rate_pps = 0.0;

  std::uint32_t free_out() const {
    return slaves.size() >= slave_capacity ? 0 : slave_capacity - static_cast<std::uint32_t>(slaves.size());
  }
  std::uint32_t free_in() const { return master ? 0 : 1; }
  bool is_root() const { return !master.has_value(); }
  bool buffer_full() const { return buffer.size() >= b_max; }
};

/// Periodic status broadcast carrying the scoring inputs of its sender.
struct StatusAdvert {
  NodeId sender{};
  ClusterId cluster_id{};
  std::uint32_t cluster_size = 0;
  std::uint32_t m_slaves = 0;
  std::optional<std::uint32_t> h_hops;
  std::uint32_t b_occupancy = 0;
  double ci_ms = 0.0;
  std::optional<double> rn_dbm;
  std::uint32_t free_out = 0;
  std::vector<NodeId> children;

  bool operator==(const StatusAdvert&) const = default;
};

struct JoinMePacket {
  NodeId sender{};
  ClusterId cluster_id{};
  std::uint32_t cluster_size = 0;
  std::uint32_t free_in = 0;
  std::uint32_t free_out = 0;
  /// Set by a joiner to name the one node it wants as parent.
  std::optional<NodeId> ack_field;

  bool operator==(const JoinMePacket&) const = default;
};

/// Owns every node of one trial and keeps the cluster forest consistent.
///
/// Every node starts as a singleton cluster. The sink's cluster id is
/// kSinkClusterId; everyone else starts with a cluster id equal to their node
/// id. Master links always point toward a cluster root, and in the sink's
/// cluster that root is the sink.
class Network {
 public:
  Network(const std::vector<NodeConfig>& nodes, NodeId sink);

  std::size_t size() const { return nodes_.size(); }
  NodeId sink() const { return sink_; }
  bool contains(NodeId id) const { return index_.count(id) != 0; }
  std::size_t index_of(NodeId id) const;

  const NodeState& node(NodeId id) const { return nodes_[index_of(id)]; }
  NodeState& node(NodeId id) { return nodes_[index_of(id)]; }
  const NodeState& at(std::size_t index) const { return nodes_[index]; }
  NodeState& at(std::size_t index) { return nodes_[index]; }
  const std::vector<NodeState>& nodes() const { return nodes_; }

  /// Makes `child` (a cluster root) a slave of `parent` and merges the two
  /// clusters under the parent's cluster id.
  /// Throws SlotExhausted when the parent has no free slave slot and
  /// TopologyError when the link would not keep the forest a forest.
  void attach(NodeId child, NodeId parent);

  /// Reverses master links so `new_root` becomes the root of its cluster.
  /// The sink's cluster cannot be re-rooted. `new_root` needs a free slave
  /// slot to take its former master as a slave.
  void reroot(NodeId new_root);

  /// Drops every link inside `cluster`; each member becomes a singleton
  /// cluster under its own id. The sink's cluster cannot be dissolved.
  void dissolve(ClusterId cluster);

  std::vector<NodeId> cluster_members(ClusterId cluster) const;
  bool in_sink_cluster(NodeId id) const { return node(id).cluster_id == node(sink_).cluster_id; }

  /// Masters from `id` up to and including the sink. Empty when `id` is the
  /// sink or not connected to it.
  std::vector<NodeId> path_to_sink(NodeId id) const;

  /// Human-readable descriptions of every broken structural invariant.
  std::vector<std::string> invariant_violations() const;

 private:
  void recompute_hops_below(NodeId root);

  std::vector<NodeState> nodes_;
  std::unordered_map<NodeId, std::size_t> index_;
  NodeId sink_;
};

StatusAdvert make_status_advert(const NodeState& node, std::optional<double> rn_measured);

JoinMePacket make_joinme(const NodeState& node, std::optional<NodeId> ack_field = std::nullopt);

}  // namespace blemesh
