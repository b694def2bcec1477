#include "blemesh/network.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace blemesh {

namespace {

std::string describe(NodeId id) {
  std::ostringstream os;
  os << "node " << id;
  return os.str();
}

}  // namespace

Network::Network(const std::vector<NodeConfig>& nodes, NodeId sink) : sink_(sink) {
  nodes_.reserve(nodes.size());
  for (const NodeConfig& cfg : nodes) {
    if (raw(cfg.id) == 0 || cfg.id == NodeId{raw(kSinkClusterId)})
      throw InvalidInput("node ids must be positive and below the reserved sink cluster id");
    if (index_.count(cfg.id) != 0) throw InvalidInput("duplicate " + describe(cfg.id));
    NodeState s;
    s.id = cfg.id;
    s.pos = cfg.pos;
    s.cluster_id = cfg.id == sink ? kSinkClusterId : ClusterId{raw(cfg.id)};
    s.hops_to_sink = cfg.id == sink ? std::optional<std::uint32_t>{0} : std::nullopt;
    s.b_max = cfg.b_max;
    s.ci_ms = cfg.ci_ms;
    s.slave_capacity = cfg.slave_capacity;
    s.traffic_rate_pps = cfg.traffic_rate_pps;
    index_.emplace(cfg.id, nodes_.size());
    nodes_.push_back(std::move(s));
  }
  if (!contains(sink)) throw InvalidInput("sink " + describe(sink) + " is not in the node list");
}

std::size_t Network::index_of(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw InvalidInput("unknown " + describe(id));
  return it->second;
}

std::vector<NodeId> Network::cluster_members(ClusterId cluster) const {
  std::vector<NodeId> out;
  for (const NodeState& n : nodes_)
    if (n.cluster_id == cluster) out.push_back(n.id);
  return out;
}

void Network::attach(NodeId child_id, NodeId parent_id) {
  if (child_id == parent_id) throw TopologyError(describe(child_id) + " cannot attach to itself");
  NodeState& child = node(child_id);
  NodeState& parent = node(parent_id);
  if (child_id == sink_) throw TopologyError("the sink never takes a master");
  if (!child.is_root()) throw TopologyError(describe(child_id) + " already has a master");
  if (parent.cluster_id == child.cluster_id)
    throw TopologyError("attaching " + describe(child_id) + " to " + describe(parent_id) + " would close a cycle");
  if (parent.free_out() == 0) throw SlotExhausted(describe(parent_id) + " has no free slave slot");

  const ClusterId absorbed = child.cluster_id;
  const ClusterId surviving = parent.cluster_id;
  const std::uint32_t merged = child.cluster_size + parent.cluster_size;

  child.master = parent_id;
  parent.slaves.push_back(child_id);
  for (NodeState& n : nodes_) {
    if (n.cluster_id == absorbed) n.cluster_id = surviving;
    if (n.cluster_id == surviving) n.cluster_size = merged;
  }
  recompute_hops_below(child_id);
}

void Network::recompute_hops_below(NodeId root) {
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    NodeState& n = node(stack.back());
    stack.pop_back();
    if (n.master) {
      const auto& up = node(*n.master).hops_to_sink;
      n.hops_to_sink = up ? std::optional<std::uint32_t>{*up + 1} : std::nullopt;
    }
    for (NodeId s : n.slaves) stack.push_back(s);
  }
}

void Network::reroot(NodeId new_root) {
  if (in_sink_cluster(new_root)) throw TopologyError("the sink's cluster is always rooted at the sink");
  std::vector<NodeId> chain{new_root};
  while (const auto& up = node(chain.back()).master) chain.push_back(*up);
  if (chain.size() == 1) return;
  if (node(new_root).free_out() == 0)
    throw SlotExhausted(describe(new_root) + " has no slot for its former master");

  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    NodeState& lower = node(chain[i]);
    NodeState& upper = node(chain[i + 1]);
    std::erase(upper.slaves, lower.id);
    lower.slaves.push_back(upper.id);
  }
  // Second pass so every master pointer is flipped after the slave lists.
  node(chain.front()).master.reset();
  for (std::size_t i = 1; i < chain.size(); ++i) node(chain[i]).master = chain[i - 1];
}

void Network::dissolve(ClusterId cluster) {
  if (cluster == node(sink_).cluster_id) throw TopologyError("the sink's cluster cannot be dissolved");
  for (NodeState& n : nodes_) {
    if (n.cluster_id != cluster) continue;
    n.master.reset();
    n.slaves.clear();
    n.cluster_id = ClusterId{raw(n.id)};
    n.cluster_size = 1;
    n.hops_to_sink.reset();
  }
}

std::vector<NodeId> Network::path_to_sink(NodeId id) const {
  std::vector<NodeId> path;
  if (!in_sink_cluster(id)) return path;
  const NodeState* n = &node(id);
  while (n->master) {
    path.push_back(*n->master);
    n = &node(*n->master);
  }
  return path;
}

std::vector<std::string> Network::invariant_violations() const {
  std::vector<std::string> out;
  std::map<ClusterId, std::uint32_t> member_count;
  std::map<ClusterId, std::uint32_t> edge_count;
  std::map<ClusterId, std::uint32_t> root_count;

  for (const NodeState& n : nodes_) {
    ++member_count[n.cluster_id];
    if (n.master) {
      ++edge_count[n.cluster_id];
      if (!contains(*n.master)) {
        out.push_back(describe(n.id) + " points at an unknown master");
        continue;
      }
      const NodeState& m = node(*n.master);
      if (std::count(m.slaves.begin(), m.slaves.end(), n.id) != 1)
        out.push_back(describe(n.id) + " is not listed exactly once among its master's slaves");
      if (m.cluster_id != n.cluster_id) out.push_back(describe(n.id) + " and its master are in different clusters");
    } else {
      ++root_count[n.cluster_id];
    }
    for (NodeId s : n.slaves) {
      if (!contains(s) || node(s).master != n.id)
        out.push_back(describe(s) + " is a slave of " + describe(n.id) + " but does not point back");
    }
    if (n.slaves.size() > n.slave_capacity) out.push_back(describe(n.id) + " exceeds its slave capacity");
    if (n.buffer.size() > n.b_max) out.push_back(describe(n.id) + " buffer exceeds b_max");
  }

  std::uint32_t total = 0;
  for (const auto& [cluster, count] : member_count) {
    total += count;
    if (root_count[cluster] != 1) out.push_back("cluster " + std::to_string(raw(cluster)) + " does not have exactly one root");
    if (edge_count[cluster] + 1 != count)
      out.push_back("cluster " + std::to_string(raw(cluster)) + " edge count is not size - 1");
  }
  if (total != nodes_.size()) out.push_back("cluster sizes do not sum to the node count");

  for (const NodeState& n : nodes_) {
    if (n.cluster_size != member_count[n.cluster_id])
      out.push_back(describe(n.id) + " reports a stale cluster_size");

    // Walk to the root; more steps than nodes means a cycle.
    const NodeState* cur = &n;
    std::size_t steps = 0;
    while (cur->master && steps <= nodes_.size() && contains(*cur->master)) {
      cur = &node(*cur->master);
      ++steps;
    }
    if (steps > nodes_.size()) {
      out.push_back(describe(n.id) + " sits on a master cycle");
      continue;
    }

    const bool sink_cluster = n.cluster_id == node(sink_).cluster_id;
    if (sink_cluster) {
      if (cur->id != sink_) out.push_back(describe(n.id) + " does not reach the sink through its masters");
      if (!n.hops_to_sink || *n.hops_to_sink != steps)
        out.push_back(describe(n.id) + " hops_to_sink disagrees with its master chain");
      if (n.master && n.hops_to_sink && node(*n.master).hops_to_sink &&
          *n.hops_to_sink != *node(*n.master).hops_to_sink + 1)
        out.push_back(describe(n.id) + " hops_to_sink is not master + 1");
    } else if (n.hops_to_sink) {
      out.push_back(describe(n.id) + " has hops_to_sink outside the sink's cluster");
    }
  }
  return out;
}

StatusAdvert make_status_advert(const NodeState& node, std::optional<double> rn_measured) {
  StatusAdvert a;
  a.sender = node.id;
  a.cluster_id = node.cluster_id;
  a.cluster_size = node.cluster_size;
  a.m_slaves = static_cast<std::uint32_t>(node.slaves.size());
  a.h_hops = node.hops_to_sink;
  a.b_occupancy = static_cast<std::uint32_t>(node.buffer.size());
  a.ci_ms = node.ci_ms;
  a.rn_dbm = node.master ? rn_measured : std::nullopt;
  a.free_out = node.free_out();
  a.children = node.slaves;
  return a;
}

JoinMePacket make_joinme(const NodeState& node, std::optional<NodeId> ack_field) {
  return JoinMePacket{node.id, node.cluster_id, node.cluster_size, node.free_in(), node.free_out(), ack_field};
}

}  // namespace blemesh
