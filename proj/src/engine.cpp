#include "blemesh/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <tuple>

#include "blemesh/join_baseline.hpp"
#include "blemesh/join_scored.hpp"

namespace blemesh {

std::string_view to_string(Algo algo) { return algo == Algo::baseline ? "baseline" : "scored"; }

Algo parse_algo(std::string_view name) {
  if (name == "baseline") return Algo::baseline;
  if (name == "scored") return Algo::scored;
  throw InvalidInput("unknown algorithm '" + std::string(name) + "' (expected baseline or scored)");
}

bool EventLater::operator()(const Event& a, const Event& b) const {
  return std::tie(a.at_ms, a.kind, a.node, a.seq) > std::tie(b.at_ms, b.kind, b.node, b.seq);
}

TransferOutcome connection_event(Network& net, NodeId master, NodeId slave, std::uint32_t n_ce) {
  NodeState& s = net.node(slave);
  if (s.master != master) throw TopologyError("connection event on a link that does not exist");
  NodeState& m = net.node(master);
  const bool into_sink = master == net.sink();

  TransferOutcome out;
  while (out.moved < n_ce && !s.buffer.empty()) {
    DataPacket p = s.buffer.front();
    s.buffer.pop_front();
    ++p.hops_traversed;
    ++out.moved;
    if (into_sink)
      out.delivered.push_back(p);
    else if (m.buffer_full())
      out.dropped.push_back(p);
    else
      m.buffer.push_back(p);
  }
  return out;
}

namespace {

std::seed_seq stream_seed(std::uint64_t seed, std::uint32_t stream, std::uint32_t tag) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, tag};
}

constexpr std::uint32_t kTrafficTag = 0x7aff1cu;
constexpr std::uint32_t kEngineTag = 0xe4619eu;
constexpr std::uint32_t kShadowTag = 0x5ad0u;

}  // namespace

PoissonSource::PoissonSource(double rate_pps, std::uint64_t seed, NodeId node) : rate_pps_(rate_pps) {
  if (!(rate_pps >= 0.0) || !std::isfinite(rate_pps)) throw InvalidInput("traffic rate must be finite and >= 0");
  auto seq = stream_seed(seed, raw(node), kTrafficTag);
  rng_.seed(seq);
}

std::optional<double> PoissonSource::next_after(double t_ms) {
  if (rate_pps_ == 0.0) return std::nullopt;
  std::exponential_distribution<double> gap(rate_pps_);
  return t_ms + 1000.0 * gap(rng_);
}

std::vector<double> generate_traffic(double rate_pps, double t0_ms, double t1_ms, std::uint64_t seed, NodeId node) {
  PoissonSource src(rate_pps, seed, node);
  std::vector<double> out;
  for (auto t = src.next_after(t0_ms); t && *t < t1_ms; t = src.next_after(*t)) out.push_back(*t);
  return out;
}

std::vector<AdvertDelivery> broadcast_status(NodeId sender, const Network& net, const LinkTable& links) {
  const std::size_t from = net.index_of(sender);
  const NodeState& s = net.at(from);
  std::optional<double> rn;
  if (s.master) rn = links.rl(net.index_of(*s.master), from);
  const StatusAdvert advert = make_status_advert(s, rn);

  std::vector<AdvertDelivery> out;
  for (std::size_t to = 0; to < net.size(); ++to)
    if (links.heard(from, to)) out.push_back({net.at(to).id, advert, links.rl(from, to)});
  return out;
}

namespace {

/// Time-weighted buffer occupancy over a window, optionally keeping the raw
/// change history.
class OccupancyMeter {
 public:
  void start(double t, std::uint32_t occ, bool keep_trace) {
    active_ = true;
    start_ = last_ = t;
    occ_ = occ;
    area_ = 0.0;
    drops_ = 0;
    trace_.clear();
    keep_trace_ = keep_trace;
    if (keep_trace_) trace_.push_back({t, occ});
  }

  void update(double t, std::uint32_t occ) {
    if (!active_) return;
    area_ += static_cast<double>(occ_) * (t - last_);
    last_ = t;
    occ_ = occ;
    if (keep_trace_) trace_.push_back({t, occ});
  }

  void drop() {
    if (active_) ++drops_;
  }

  double average(double t_end) const {
    if (!active_) return 0.0;
    if (t_end <= start_) return occ_;
    return (area_ + static_cast<double>(occ_) * (t_end - last_)) / (t_end - start_);
  }

  std::uint64_t drops() const { return drops_; }
  double start_ms() const { return start_; }
  const std::vector<OccupancySample>& trace() const { return trace_; }

 private:
  bool active_ = false;
  bool keep_trace_ = false;
  double start_ = 0.0;
  double last_ = 0.0;
  std::uint32_t occ_ = 0;
  double area_ = 0.0;
  std::uint64_t drops_ = 0;
  std::vector<OccupancySample> trace_;
};

template <class Msg>
struct Heard {
  Msg msg;
  double rl_dbm = 0.0;
  double at_ms = 0.0;
};

bool outranks(std::uint32_t size, ClusterId cluster, const NodeState& self) {
  if (size != self.cluster_size) return size > self.cluster_size;
  return raw(cluster) > raw(self.cluster_id);
}

class Trial {
 public:
  Trial(const Scenario& sc, Algo algo, std::uint64_t seed, const TrialHooks& hooks)
      : sc_(sc), algo_(algo), seed_(seed), hooks_(hooks), net_(sc.nodes, sc.sink_id) {
    validate(sc);
    const std::size_t n = net_.size();
    sink_ = net_.index_of(sc.sink_id);
    new_ = net_.index_of(sc.new_node_id);

    std::vector<Position> positions;
    for (const NodeState& s : net_.nodes()) positions.push_back(s.pos);
    std::vector<double> noise;
    if (sc.radio.shadowing_sigma_db > 0.0) {
      auto seq = stream_seed(seed, 0, kShadowTag);
      std::mt19937_64 shadow_rng(seq);
      std::normal_distribution<double> normal(0.0, 1.0);
      noise.resize(n * n);
      for (double& x : noise) x = normal(shadow_rng);
    }
    links_ = LinkTable(positions, sc.radio, noise);

    auto seq = stream_seed(seed, 0, kEngineTag);
    rng_.seed(seq);
    for (const NodeState& s : net_.nodes()) sources_.emplace_back(s.traffic_rate_pps, seed, s.id);

    status_.assign(n, std::vector<std::optional<Heard<StatusAdvert>>>(n));
    joinme_.assign(n, std::vector<std::optional<Heard<JoinMePacket>>>(n));
    blacklist_.assign(n, {});
    epoch_.assign(n, 0);
    prejoin_.assign(n, {});
    measure_.assign(n, {});

    result_.seed = seed;
    result_.algo = algo;

    const EngineParams& e = sc_.engine;
    std::uniform_real_distribution<double> phase(0.0, e.t_adv_ms);
    for (std::size_t i = 0; i < n; ++i) {
      const double offset = phase(rng_);
      if (i != new_) push(offset, EventKind::status_broadcast, i);
      push(offset, EventKind::joinme_broadcast, i);
    }
  }

  void build() {
    while (phase_ == Phase::build && !queue_.empty()) {
      step();
      if (build_complete()) finish_build();
    }
    if (phase_ == Phase::build) finish_build();
  }

  TrialResult run() {
    build();
    while (phase_ != Phase::done && !queue_.empty()) {
      const double next = queue_.top().at_ms;
      if (phase_ == Phase::warmup && next >= t_active_) {
        now_ = t_active_;
        phase_ = Phase::joining;
      }
      if (phase_ == Phase::joining && next > t_active_ + sc_.engine.max_wait_ms) {
        now_ = t_active_ + sc_.engine.max_wait_ms;
        phase_ = Phase::done;
        break;
      }
      step();
    }
    return std::move(result_);
  }

  const Network& network() const { return net_; }

 private:
  enum class Phase { build, warmup, joining, measuring, done };

  void push(double at, EventKind kind, std::size_t node, std::uint32_t epoch = 0) {
    queue_.push(Event{at, kind, static_cast<std::uint32_t>(node), epoch, next_seq_++});
  }

  void step() {
    const Event ev = queue_.top();
    queue_.pop();
    now_ = ev.at_ms;
    switch (ev.kind) {
      case EventKind::status_broadcast:
        on_status(ev.node);
        break;
      case EventKind::joinme_broadcast:
        on_joinme(ev.node);
        break;
      case EventKind::connection_event:
        on_connection(ev.node, ev.epoch);
        break;
      case EventKind::packet_gen:
        on_packet(ev.node);
        break;
      case EventKind::measurement_end:
        on_measurement_end();
        break;
    }
  }

  bool listening(std::size_t r) const {
    if (r == new_) return !joined_ && (phase_ == Phase::warmup || phase_ == Phase::joining);
    return phase_ == Phase::build && r != sink_ && net_.at(r).is_root();
  }

  bool deciding(std::size_t r) const {
    if (r == new_) return phase_ == Phase::joining && !joined_;
    return phase_ == Phase::build && r != sink_ && net_.at(r).is_root() && now_ >= sc_.engine.t_adv_ms;
  }

  void on_status(std::size_t i) {
    const NodeState& s = net_.at(i);
    std::optional<double> rn;
    if (s.master) rn = links_.rl(net_.index_of(*s.master), i);
    std::optional<StatusAdvert> advert;
    for (std::size_t r = 0; r < net_.size(); ++r) {
      if (!links_.heard(i, r) || !listening(r)) continue;
      if (!advert) advert = make_status_advert(s, rn);
      status_[r][i] = Heard<StatusAdvert>{*advert, links_.rl(i, r), now_};
    }
    push(now_ + sc_.engine.t_adv_ms, EventKind::status_broadcast, i);
  }

  void on_joinme(std::size_t i) {
    if (deciding(i)) decide(i);
    if (i != new_) {
      const JoinMePacket packet = make_joinme(net_.at(i));
      for (std::size_t r = 0; r < net_.size(); ++r)
        if (links_.heard(i, r) && listening(r)) joinme_[r][i] = Heard<JoinMePacket>{packet, links_.rl(i, r), now_};
    }
    push(now_ + sc_.engine.t_adv_ms, EventKind::joinme_broadcast, i);
  }

  template <class Msg>
  bool fresh(const std::optional<Heard<Msg>>& h) const {
    return h && h->at_ms > now_ - sc_.engine.t_adv_ms;
  }

  bool usable_sender(std::size_t self, std::size_t sender) const {
    if (sender == self || sender == new_) return false;
    if (net_.at(sender).cluster_id == net_.at(self).cluster_id) return false;
    return blacklist_[self].count(sender) == 0;
  }

  std::optional<NodeId> choose(std::size_t i) {
    const NodeState& self = net_.at(i);
    if (algo_ == Algo::baseline) {
      std::vector<HeardJoinMe> adverts;
      for (std::size_t j = 0; j < net_.size(); ++j)
        if (fresh(joinme_[i][j]) && usable_sender(i, j)) adverts.push_back({joinme_[i][j]->msg, joinme_[i][j]->rl_dbm});
      const JoinDecision d = baseline_select(adverts, self, net_.sink());
      return d.kind == JoinDecision::Kind::connect_as_child ? d.parent : std::nullopt;
    }
    std::vector<CandidateInfo> cands;
    for (std::size_t j = 0; j < net_.size(); ++j) {
      if (!fresh(status_[i][j]) || !usable_sender(i, j)) continue;
      const StatusAdvert& a = status_[i][j]->msg;
      if (!outranks(a.cluster_size, a.cluster_id, self)) continue;
      cands.push_back(to_candidate(a, status_[i][j]->rl_dbm));
    }
    const auto filtered = filter_candidates(std::move(cands), sc_.thresholds.filter());
    const auto parent = select_parent(filtered, sc_.weights);
    const auto packet = make_joinme_ack(self, parent);
    if (!packet) return std::nullopt;
    return packet->ack_field;
  }

  void decide(std::size_t i) {
    const auto parent = choose(i);
    if (!parent) return;
    const std::size_t p = net_.index_of(*parent);
    // The handshake only closes if both directions of the link are up and the
    // target still has a slot; otherwise this target is not tried again.
    const bool ok = links_.connectable(i, p) && net_.at(p).free_out() > 0 &&
                    net_.at(p).cluster_id != net_.at(i).cluster_id;
    if (!ok) {
      blacklist_[i].insert(p);
      return;
    }
    if (i == new_) classify_branches(p);
    net_.attach(net_.at(i).id, *parent);
    after_attach();
    start_link(i);
    if (i == new_) on_joined(*parent);
  }

  void after_attach() {
    last_attach_ = now_;
    if (hooks_.after_attach) hooks_.after_attach(net_);
  }

  void start_link(std::size_t slave) {
    ++epoch_[slave];
    const NodeState& s = net_.at(slave);
    if (!s.master) return;
    std::uniform_real_distribution<double> phase(0.0, s.ci_ms);
    push(now_ + phase(rng_), EventKind::connection_event, slave, epoch_[slave]);
  }

  std::size_t existing_roots() const {
    std::size_t roots = 0;
    for (std::size_t i = 0; i < net_.size(); ++i)
      if (i != new_ && net_.at(i).is_root()) ++roots;
    return roots;
  }

  bool build_complete() const {
    const double t_adv = sc_.engine.t_adv_ms;
    return existing_roots() == 1 || now_ - last_attach_ >= kQuiescencePeriods * t_adv ||
           now_ >= kBuildCapPeriods * t_adv;
  }

  // Clusters the join rules left apart are merged into the sink's cluster over
  // the strongest available link, re-rooting the stray cluster at its
  // connecting member. A stray cluster whose only bridges are members without
  // a free slot is split into singletons that then join one at a time.
  void merge_stragglers() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t r = 0; r < net_.size(); ++r) {
        if (r == new_ || r == sink_ || !net_.at(r).is_root()) continue;
        const ClusterId stray = net_.at(r).cluster_id;
        std::optional<std::pair<std::size_t, std::size_t>> best;
        double best_rl = 0.0;
        bool blocked_bridge = false;
        for (std::size_t u = 0; u < net_.size(); ++u) {
          if (net_.at(u).cluster_id != stray) continue;
          for (std::size_t v = 0; v < net_.size(); ++v) {
            if (v == new_ || !net_.in_sink_cluster(net_.at(v).id) || net_.at(v).free_out() == 0) continue;
            if (!links_.connectable(u, v)) continue;
            if (u != r && net_.at(u).free_out() == 0) {
              blocked_bridge = true;
              continue;
            }
            const double rl = links_.rl(v, u);
            if (!best || rl > best_rl) {
              best = {u, v};
              best_rl = rl;
            }
          }
        }
        const std::vector<NodeId> members = net_.cluster_members(stray);
        if (!best) {
          if (!blocked_bridge) continue;
          net_.dissolve(stray);
          for (NodeId m : members) start_link(net_.index_of(m));
          progress = true;
          continue;
        }
        const auto [u, v] = *best;
        net_.reroot(net_.at(u).id);
        net_.attach(net_.at(u).id, net_.at(v).id);
        after_attach();
        for (NodeId m : members) start_link(net_.index_of(m));
        progress = true;
      }
    }
  }

  void finish_build() {
    merge_stragglers();
    result_.clusters_after_build = static_cast<std::uint32_t>(existing_roots());
    phase_ = Phase::warmup;
    t_build_end_ = now_;
    t_active_ = now_ + sc_.engine.warmup_ms;
    for (std::size_t i = 0; i < net_.size(); ++i) {
      prejoin_[i].start(now_, occupancy(i), false);
      if (i == sink_ || i == new_) continue;
      if (auto t = sources_[i].next_after(now_)) push(*t, EventKind::packet_gen, i);
    }
  }

  std::uint32_t occupancy(std::size_t i) const { return static_cast<std::uint32_t>(net_.at(i).buffer.size()); }

  void touched(std::size_t i) {
    prejoin_[i].update(now_, occupancy(i));
    measure_[i].update(now_, occupancy(i));
  }

  void overflow(std::size_t i) {
    prejoin_[i].drop();
    measure_[i].drop();
  }

  bool branch_saturated(std::size_t candidate) const {
    std::vector<NodeId> branch{net_.at(candidate).id};
    for (NodeId n : net_.path_to_sink(net_.at(candidate).id))
      if (n != net_.sink()) branch.push_back(n);
    for (NodeId n : branch) {
      const std::size_t k = net_.index_of(n);
      const OccupancyMeter& m = prejoin_[k];
      if (m.drops() > 0 || m.average(now_) >= sc_.thresholds.theta_sat * static_cast<double>(net_.at(k).b_max))
        return true;
    }
    return false;
  }

  // Decision-time view used for the avoided-saturation metric: every fresh,
  // connected neighbour with a free slot counts as an option.
  void classify_branches(std::size_t chosen) {
    bool any_sat = false;
    bool any_clear = false;
    for (std::size_t j = 0; j < net_.size(); ++j) {
      if (!fresh(status_[new_][j]) || status_[new_][j]->msg.free_out == 0) continue;
      if (!net_.in_sink_cluster(net_.at(j).id)) continue;
      (branch_saturated(j) ? any_sat : any_clear) = true;
    }
    result_.eligible_sat = any_sat && any_clear;
    if (result_.eligible_sat) result_.avoided_sat = !branch_saturated(chosen);
  }

  void on_joined(NodeId parent) {
    joined_ = true;
    phase_ = Phase::measuring;
    const NodeState& self = net_.at(new_);
    result_.joined = true;
    result_.chosen_parent = parent;
    result_.join_time_ms = now_;
    result_.hops_at_join = self.hops_to_sink.value_or(0);
    result_.path_to_sink = net_.path_to_sink(self.id);

    std::set<std::size_t> traced;
    for (NodeId n : result_.path_to_sink)
      if (n != net_.sink()) traced.insert(net_.index_of(n));
    for (std::size_t i = 0; i < net_.size(); ++i) measure_[i].start(now_, occupancy(i), traced.count(i) != 0);

    probe_start_ = now_;
    push(now_, EventKind::packet_gen, new_);
    push(now_ + sc_.engine.measure_ms, EventKind::measurement_end, new_);
  }

  void on_connection(std::size_t slave, std::uint32_t epoch) {
    if (epoch != epoch_[slave]) return;
    const NodeState& s = net_.at(slave);
    if (!s.master) return;
    const std::size_t m = net_.index_of(*s.master);
    const TransferOutcome out = connection_event(net_, *s.master, s.id, sc_.engine.n_ce);
    for (const DataPacket& p : out.delivered)
      if (p.probe) {
        result_.probes[p.seq].delivered_at_ms = now_;
        result_.probes[p.seq].hops_traversed = p.hops_traversed;
      }
    for (const DataPacket& p : out.dropped) {
      overflow(m);
      if (p.probe) result_.probes[p.seq].dropped = true;
    }
    if (out.moved > 0) {
      touched(slave);
      touched(m);
    }
    push(now_ + s.ci_ms, EventKind::connection_event, slave, epoch);
  }

  void on_packet(std::size_t i) {
    NodeState& s = net_.at(i);
    DataPacket p;
    p.src = s.id;
    p.dst = net_.sink();
    p.created_at_ms = now_;
    if (i == new_) {
      if (phase_ != Phase::measuring) return;
      p.probe = true;
      p.seq = result_.probes.size();
      result_.probes.push_back(ProbeRecord{p.seq, now_, std::nullopt, false, 0});
    } else {
      p.seq = background_seq_++;
    }

    if (s.buffer_full()) {
      overflow(i);
      if (p.probe) result_.probes.back().dropped = true;
    } else {
      s.buffer.push_back(p);
      touched(i);
    }

    if (i == new_) {
      const double interval = 1000.0 / sc_.engine.probe_rate;
      const double offset = static_cast<double>(result_.probes.size()) * interval;
      if (offset < sc_.engine.measure_ms) push(probe_start_ + offset, EventKind::packet_gen, i);
    } else if (auto t = sources_[i].next_after(now_)) {
      push(*t, EventKind::packet_gen, i);
    }
  }

  void on_measurement_end() {
    for (std::size_t i = 0; i < net_.size(); ++i) {
      const NodeState& s = net_.at(i);
      result_.node_stats.push_back({s.id, s.b_max, measure_[i].average(now_), measure_[i].drops()});
    }
    for (NodeId n : result_.path_to_sink) {
      if (n == net_.sink()) continue;
      const std::size_t k = net_.index_of(n);
      result_.path_traces.push_back(
          BufferTrace{n, net_.at(k).b_max, measure_[k].start_ms(), now_, measure_[k].trace(), measure_[k].drops()});
    }
    for (const ProbeRecord& r : result_.probes) {
      ++result_.sent;
      if (r.delivered_at_ms) ++result_.delivered;
      if (r.dropped) ++result_.dropped;
    }
    for (const NodeState& s : net_.nodes())
      for (const DataPacket& p : s.buffer)
        if (p.probe) ++result_.in_flight;
    phase_ = Phase::done;
  }

  static constexpr double kQuiescencePeriods = 10.0;
  static constexpr double kBuildCapPeriods = 200.0;

  const Scenario& sc_;
  Algo algo_;
  std::uint64_t seed_;
  const TrialHooks& hooks_;
  Network net_;
  LinkTable links_;
  std::size_t sink_ = 0;
  std::size_t new_ = 0;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
  std::mt19937_64 rng_;
  std::vector<PoissonSource> sources_;

  std::vector<std::vector<std::optional<Heard<StatusAdvert>>>> status_;
  std::vector<std::vector<std::optional<Heard<JoinMePacket>>>> joinme_;
  std::vector<std::set<std::size_t>> blacklist_;
  std::vector<std::uint32_t> epoch_;
  std::vector<OccupancyMeter> prejoin_;
  std::vector<OccupancyMeter> measure_;

  Phase phase_ = Phase::build;
  double last_attach_ = 0.0;
  double t_build_end_ = 0.0;
  double t_active_ = 0.0;
  double probe_start_ = 0.0;
  bool joined_ = false;
  std::uint64_t background_seq_ = 0;
  TrialResult result_;
};

}  // namespace

Network build_network(const Scenario& scenario, Algo algo, std::uint64_t seed, const TrialHooks& hooks) {
  Trial trial(scenario, algo, seed, hooks);
  trial.build();
  return trial.network();
}

TrialResult run_trial(const Scenario& scenario, Algo algo, std::uint64_t seed, const TrialHooks& hooks) {
  Trial trial(scenario, algo, seed, hooks);
  return trial.run();
}

}  // namespace blemesh
