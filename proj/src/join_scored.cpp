#include "blemesh/join_scored.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace blemesh {

namespace {

double clamp01(double x) { return std::min(std::max(x, 0.0), 1.0); }

double rssi_term(double rssi, const ScoreWeights& w) { return clamp01((rssi - w.rssi_lo) / (w.rssi_hi - w.rssi_lo)); }

}  // namespace

CandidateInfo to_candidate(const StatusAdvert& a, double rl_dbm) {
  CandidateInfo c;
  c.id = a.sender;
  c.cluster_id = a.cluster_id;
  c.cluster_size = a.cluster_size;
  c.m = a.m_slaves;
  c.h = a.h_hops;
  c.b = a.b_occupancy;
  c.ci_ms = a.ci_ms;
  c.rl_dbm = rl_dbm;
  c.rn_dbm = a.rn_dbm;
  c.free_out = a.free_out;
  c.children = a.children;
  return c;
}

ScoreWeights ScoreWeights::scaled(double factor) const {
  ScoreWeights w = *this;
  w.w_m *= factor;
  w.w_h *= factor;
  w.w_b *= factor;
  w.w_ci *= factor;
  w.w_rl *= factor;
  w.w_rn *= factor;
  return w;
}

void validate(const ScoreWeights& w) {
  for (double x : {w.w_m, w.w_h, w.w_b, w.w_ci, w.w_rl, w.w_rn})
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("score weights must be finite and >= 0");
  if (!(w.sum() > 0.0)) throw InvalidInput("score weights must not all be zero");
  if (!(w.m_max > 0.0)) throw InvalidInput("weights.m_max must be > 0");
  if (!(w.b_max > 0.0)) throw InvalidInput("weights.b_max must be > 0");
  if (!(w.ci_min_ms < w.ci_max_ms)) throw InvalidInput("weights.ci_min_ms must be below weights.ci_max_ms");
  if (!(w.rssi_lo < w.rssi_hi)) throw InvalidInput("weights.rssi_lo must be below weights.rssi_hi");
}

std::vector<CandidateInfo> filter_candidates(std::vector<CandidateInfo> cands, const FilterThresholds& t) {
  std::erase_if(cands, [&](const CandidateInfo& c) { return c.free_out == 0 || c.rl_dbm < t.rl_min_dbm; });

  std::set<NodeId> eligible;
  for (const CandidateInfo& c : cands) eligible.insert(c.id);

  std::erase_if(cands, [&](const CandidateInfo& c) {
    if (c.b < t.b_fair) return false;
    return std::any_of(c.children.begin(), c.children.end(), [&](NodeId child) { return eligible.count(child) != 0; });
  });

  std::sort(cands.begin(), cands.end(), [](const CandidateInfo& a, const CandidateInfo& b) { return raw(a.id) < raw(b.id); });
  return cands;
}

double score_candidate(const CandidateInfo& c, const ScoreWeights& w) {
  const double m_term = 1.0 - std::min(static_cast<double>(c.m), w.m_max) / w.m_max;
  const double h_term = c.h ? 1.0 / (1.0 + *c.h) : 0.0;
  const double b_term = 1.0 - std::min(static_cast<double>(c.b), w.b_max) / w.b_max;
  const double ci_term = 1.0 - clamp01((c.ci_ms - w.ci_min_ms) / (w.ci_max_ms - w.ci_min_ms));
  const double rl_term = rssi_term(c.rl_dbm, w);
  // A root has no upstream link that could be the weak one.
  const double rn_term = c.rn_dbm ? rssi_term(*c.rn_dbm, w) : 1.0;
  return w.w_m * m_term + w.w_h * h_term + w.w_b * b_term + w.w_ci * ci_term + w.w_rl * rl_term + w.w_rn * rn_term;
}

std::optional<NodeId> select_parent(const std::vector<CandidateInfo>& filtered, const ScoreWeights& w) {
  if (filtered.empty()) return std::nullopt;
  std::uint32_t biggest = 0;
  for (const CandidateInfo& c : filtered) biggest = std::max(biggest, c.cluster_size);

  std::vector<std::pair<const CandidateInfo*, double>> scored;
  double top = 0.0;
  for (const CandidateInfo& c : filtered) {
    if (c.cluster_size != biggest) continue;
    const double s = score_candidate(c, w);
    top = scored.empty() ? s : std::max(top, s);
    scored.emplace_back(&c, s);
  }

  // Scores this close to the top count as equal, so a uniform rescaling of
  // the weights cannot flip a tie through rounding.
  const double tie = kScoreTieTolerance * w.sum();
  const CandidateInfo* best = nullptr;
  for (const auto& [c, s] : scored) {
    if (s < top - tie) continue;
    if (best == nullptr || c->rl_dbm > best->rl_dbm || (c->rl_dbm == best->rl_dbm && raw(c->id) < raw(best->id)))
      best = c;
  }
  return best->id;
}

std::optional<JoinMePacket> make_joinme_ack(const NodeState& self, std::optional<NodeId> parent) {
  if (!parent) return std::nullopt;
  return make_joinme(self, parent);
}

}  // namespace blemesh
