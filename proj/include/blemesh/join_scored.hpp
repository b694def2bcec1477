#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "blemesh/network.hpp"

namespace blemesh {

/// One neighbour as seen by a joining node: its last status advert plus the
/// RSSI the joiner measured when receiving it.
struct CandidateInfo {
  NodeId id{};
  ClusterId cluster_id{};
  std::uint32_t cluster_size = 0;
  std::uint32_t m = 0;
  /// Absent while the candidate has no route to the sink.
  std::optional<std::uint32_t> h;
  std::uint32_t b = 0;
  double ci_ms = 0.0;
  double rl_dbm = 0.0;
  std::optional<double> rn_dbm;
  std::uint32_t free_out = 0;
  std::vector<NodeId> children;

  bool operator==(const CandidateInfo&) const = default;
};

CandidateInfo to_candidate(const StatusAdvert& advert, double rl_dbm);

/// Term weights and the bounds used to normalise each scoring input into [0, 1].
struct ScoreWeights {
  double w_m = 0.10;
  double w_h = 0.20;
  double w_b = 0.25;
  double w_ci = 0.20;
  double w_rl = 0.15;
  double w_rn = 0.10;

  double m_max = 3.0;
  double b_max = 30.0;
  double ci_min_ms = 7.5;
  double ci_max_ms = 400.0;
  double rssi_lo = -90.0;
  double rssi_hi = -50.0;

  double sum() const { return w_m + w_h + w_b + w_ci + w_rl + w_rn; }
  ScoreWeights scaled(double factor) const;

  bool operator==(const ScoreWeights&) const = default;
};

/// Throws InvalidInput if any weight is negative, all weights are zero, or a
/// normalisation range is empty.
void validate(const ScoreWeights& w);

struct FilterThresholds {
  double rl_min_dbm = -85.0;
  /// Buffer occupancy at which a candidate is passed over for a heard child.
  std::uint32_t b_fair = 1;

  bool operator==(const FilterThresholds&) const = default;
};

/// Drops full candidates and weak links, then hands a busy candidate's slot to
/// one of its heard children when such a child survives. A busy candidate
/// with no eligible child is kept so the joiner is never stranded.
/// Expects one entry per candidate id. Output is sorted by ascending id.
std::vector<CandidateInfo> filter_candidates(std::vector<CandidateInfo> cands, const FilterThresholds& thresholds);

double score_candidate(const CandidateInfo& c, const ScoreWeights& w);

/// Relative score difference (scaled by the weight sum) below which two
/// candidates are treated as tied.
inline constexpr double kScoreTieTolerance = 1e-9;

/// Highest score within the biggest cluster present. Ties go to the stronger
/// link, then the lower id.
std::optional<NodeId> select_parent(const std::vector<CandidateInfo>& filtered, const ScoreWeights& w);

/// The joinMe a joiner emits to request `parent`; nothing is emitted without one.
std::optional<JoinMePacket> make_joinme_ack(const NodeState& self, std::optional<NodeId> parent);

/// Only the node named in the ACK field answers the handshake.
inline bool responds_to(const JoinMePacket& packet, NodeId receiver) {
  return packet.ack_field.has_value() && *packet.ack_field == receiver;
}

}  // namespace blemesh
