#include "blemesh/join_baseline.hpp"

namespace blemesh {

namespace {

bool outranks(const JoinMePacket& p, const NodeState& self) {
  if (p.cluster_size != self.cluster_size) return p.cluster_size > self.cluster_size;
  return raw(p.cluster_id) > raw(self.cluster_id);
}

}  // namespace

JoinDecision baseline_select(const std::vector<HeardJoinMe>& adverts, const NodeState& self, NodeId sink) {
  if (self.id == sink || !self.is_root()) return JoinDecision::none();

  const HeardJoinMe* best = nullptr;
  for (const HeardJoinMe& h : adverts) {
    const JoinMePacket& p = h.packet;
    if (p.sender == self.id || p.cluster_id == self.cluster_id) continue;
    if (p.free_out < 1 || !outranks(p, self)) continue;
    if (best == nullptr) {
      best = &h;
      continue;
    }
    const JoinMePacket& b = best->packet;
    if (p.cluster_size != b.cluster_size) {
      if (p.cluster_size > b.cluster_size) best = &h;
    } else if (h.rl_dbm != best->rl_dbm) {
      if (h.rl_dbm > best->rl_dbm) best = &h;
    } else if (raw(p.sender) < raw(b.sender)) {
      best = &h;
    }
  }
  if (best == nullptr) return JoinDecision::wait();
  return JoinDecision::connect(best->packet.sender);
}

}  // namespace blemesh
