#pragma once

#include <optional>
#include <vector>

#include "blemesh/network.hpp"

namespace blemesh {

struct JoinDecision {
  enum class Kind { connect_as_child, wait, none };

  Kind kind = Kind::none;
  std::optional<NodeId> parent;

  static JoinDecision connect(NodeId parent) { return {Kind::connect_as_child, parent}; }
  static JoinDecision wait() { return {Kind::wait, std::nullopt}; }
  static JoinDecision none() { return {Kind::none, std::nullopt}; }

  bool operator==(const JoinDecision&) const = default;
};

/// A joinMe packet together with the RSSI it was received at.
struct HeardJoinMe {
  JoinMePacket packet;
  double rl_dbm = 0.0;
};

/// Reference cluster-merging choice: join the biggest cluster that is at
/// least as big as ours (equal sizes go to the higher cluster id), and inside
/// it take the strongest link, lowest sender id on ties. Buffer, CI, hops and
/// link quality upstream are deliberately ignored.
///
/// Returns none for a node that is not a root or is the sink.
JoinDecision baseline_select(const std::vector<HeardJoinMe>& adverts, const NodeState& self, NodeId sink);

}  // namespace blemesh
