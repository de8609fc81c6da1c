#include "geonet/netsim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace geonet::sim {

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::SampleTimer: return "SampleTimer";
    case EventKind::UplinkTx: return "UplinkTx";
    case EventKind::UplinkArrival: return "UplinkArrival";
    case EventKind::DownlinkQueue: return "DownlinkQueue";
    case EventKind::ListenWindow: return "ListenWindow";
    case EventKind::DownlinkExpire: return "DownlinkExpire";
    case EventKind::WatchdogCheck: return "WatchdogCheck";
    case EventKind::HangInjection: return "HangInjection";
    case EventKind::ResetDone: return "ResetDone";
  }
  return "?";
}

const char* ticket_state_name(TicketState state) {
  switch (state) {
    case TicketState::Pending: return "pending";
    case TicketState::Delivered: return "delivered";
    case TicketState::Dropped: return "dropped";
    case TicketState::Expired: return "expired";
  }
  return "?";
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string record_line(const LogRecord& r) {
  return fmt::format("{},{},{},{}\n", r.time_ms, event_kind_name(r.kind), r.node_uid, r.detail);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Forwards to an optional downstream sink and counts what passes through.
class CountingSink final : public backend::TimeSeriesSink {
 public:
  explicit CountingSink(std::shared_ptr<backend::TimeSeriesSink> inner) : inner_(std::move(inner)) {}
  void append(const backend::TimeSeriesRecord& record) override {
    ++count_;
    if (inner_) inner_->append(record);
  }
  std::uint64_t count() const { return count_; }

 private:
  std::shared_ptr<backend::TimeSeriesSink> inner_;
  std::uint64_t count_ = 0;
};

}  // namespace

std::uint64_t RunLog::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& r : records) h = fnv1a64(record_line(r), h);
  return h;
}

std::string RunLog::hash_hex() const { return fmt::format("{:016x}", hash()); }

void RunLog::write(std::ostream& out) const {
  out << "time_ms,event_kind,node_uid,detail\n";
  for (const auto& r : records) out << record_line(r);
  out << '\n';
  write_summary(out);
}

void RunLog::write_summary(std::ostream& out) const {
  out << fmt::format("# horizon_ms={} records={} hash={}\n", horizon_ms, records.size(), hash_hex());
  out << "# node_uid,site,transect,produced,delivered_records,buffered,overwritten,uplinks_attempted,"
         "uplinks_delivered,uplinks_dropped,downlinks_queued,downlinks_delivered,downlinks_dropped,"
         "downlinks_expired,resets,sniffs,charge_c,mean_current_ua,lifetime_years\n";
  for (const auto& n : nodes) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6f},{:.3f},{:.2f}\n", n.uid, n.site_id,
                       n.transect, n.counters.produced, n.counters.delivered_records, n.buffered, n.overwritten,
                       n.counters.uplinks_attempted, n.counters.uplinks_delivered, n.uplinks_dropped,
                       n.downlinks_queued, n.downlinks_delivered, n.downlinks_dropped, n.downlinks_expired,
                       n.counters.resets, n.ledger.sniffs, n.ledger.total_charge_c(),
                       n.ledger.mean_current_a() * 1e6, n.lifetime_years);
  }
  out << fmt::format("# uplinks attempted={} delivered={} ratio={:.4f} sink_records={} quarantined={}\n",
                     uplinks_attempted(), uplinks_delivered(), delivery_ratio(), sink_records, quarantined);
}

std::uint64_t RunLog::uplinks_attempted() const {
  std::uint64_t n = 0;
  for (const auto& s : nodes) n += s.counters.uplinks_attempted;
  return n;
}

std::uint64_t RunLog::uplinks_delivered() const {
  std::uint64_t n = 0;
  for (const auto& s : nodes) n += s.counters.uplinks_delivered;
  return n;
}

double RunLog::delivery_ratio() const {
  const auto a = uplinks_attempted();
  return a == 0 ? 1.0 : static_cast<double>(uplinks_delivered()) / static_cast<double>(a);
}

struct Simulator::NodeRuntime {
  std::unique_ptr<node::Node> node;
  std::size_t site = 0;
  std::string transect;
  std::mt19937_64 rng;
  std::uint64_t scheduled_generation = std::numeric_limits<std::uint64_t>::max();
  bool tx_scheduled = false;
  bool listen_scheduled = false;
  std::deque<std::pair<std::uint64_t, Bytes>> downlinks;  // ticket id, command
  std::uint64_t uplinks_dropped = 0;
  std::uint64_t downlinks_queued = 0;
  std::uint64_t downlinks_delivered = 0;
  std::uint64_t downlinks_dropped = 0;
  std::uint64_t downlinks_expired = 0;
};

struct Simulator::SiteRuntime {
  const SiteSpec* spec = nullptr;
  std::unique_ptr<backend::Gateway> gateway;
  std::size_t subscription = 0;
};

Simulator::Simulator(ScenarioConfig scenario, std::shared_ptr<backend::TimeSeriesSink> sink)
    : scenario_(std::move(scenario)),
      sink_(std::make_shared<CountingSink>(std::move(sink))),
      registry_(std::make_shared<const node::DriverRegistry>(node::DriverRegistry::with_defaults())) {
  validate_scenario(scenario_);
  backend_ = std::make_unique<backend::Backend>(bus_, *sink_);
  backend_->attach_pump(this);

  for (std::size_t si = 0; si < scenario_.sites.size(); ++si) {
    const SiteSpec& spec = scenario_.sites[si];
    auto site = std::make_unique<SiteRuntime>();
    site->spec = &spec;
    site->gateway = std::make_unique<backend::Gateway>(spec.site_id, spec.gateway_id, bus_);
    site->subscription = bus_.subscribe(backend::down_topic(spec.site_id, spec.gateway_id),
                                        [this, id = spec.site_id](const backend::BusMessage& m) {
                                          queue_downlink(id, m.envelope.node_uid, m.payload);
                                        });

    const std::uint64_t site_seed = splitmix64(scenario_.seed ^ splitmix64(fnv1a64(spec.site_id)));
    for (const NodeSpec& ns : spec.nodes) {
      std::shared_ptr<const node::Environment> env;
      if (ns.trace.empty()) {
        env = node::SyntheticEnvironment::for_transect(ns.transect);
      } else {
        env = node::TraceEnvironment::load(resolve_trace_path(scenario_, ns.trace));
      }

      node::NodeParams params;
      params.uid = ns.uid;
      params.config.sensor_type = ns.sensor_type;
      params.config.sensor_address = ns.sensor_address;
      params.config.sensor_action = node::kActionNone;
      params.config.sampling_rate = ns.sampling_rate_s;
      params.config.rtc_time = scenario_.epoch_unix;
      params.buffer_capacity = scenario_.buffer_capacity;
      params.flush_batch = scenario_.flush_batch;
      params.watchdog_period_ms = scenario_.watchdog_period_ms;
      params.max_payload = spec.link.max_payload;

      auto rt = std::make_unique<NodeRuntime>();
      rt->node = std::make_unique<node::Node>(params, registry_, std::move(env), scenario_.power,
                                              scenario_.listen_interval_ms);
      rt->site = si;
      rt->transect = ns.transect;
      rt->rng.seed(splitmix64(site_seed ^ splitmix64(ns.uid)));
      nodes_.emplace(ns.uid, std::move(rt));

      backend_->register_node({ns.uid, spec.site_id, spec.gateway_id, ns.transect});
    }
    sites_.push_back(std::move(site));
  }

  for (auto& [uid, rt] : nodes_) {
    rt->node->boot(0);
    after_activity(*rt);
  }
  for (const auto& h : scenario_.hangs) schedule(h.at_ms, EventKind::HangInjection, h.uid);
  for (const auto& d : scenario_.downlinks) schedule(d.at_ms, EventKind::DownlinkQueue, d.uid, 0, d.command);
}

Simulator::~Simulator() {
  for (auto& s : sites_) bus_.unsubscribe(s->subscription);
}

Simulator::NodeRuntime& Simulator::runtime(std::uint64_t uid) {
  auto it = nodes_.find(uid);
  if (it == nodes_.end()) throw NoSuchNode(fmt::format("NoSuchNode: {}", uid));
  return *it->second;
}

const Simulator::NodeRuntime& Simulator::runtime(std::uint64_t uid) const {
  auto it = nodes_.find(uid);
  if (it == nodes_.end()) throw NoSuchNode(fmt::format("NoSuchNode: {}", uid));
  return *it->second;
}

node::Node& Simulator::node(std::uint64_t uid) { return *runtime(uid).node; }
const node::Node& Simulator::node(std::uint64_t uid) const { return *runtime(uid).node; }

std::vector<std::uint64_t> Simulator::node_uids() const {
  std::vector<std::uint64_t> out;
  out.reserve(nodes_.size());
  for (const auto& [uid, _] : nodes_) out.push_back(uid);
  return out;
}

const DownlinkTicket& Simulator::ticket(std::uint64_t id) const {
  if (id >= tickets_.size()) throw SimError(fmt::format("no downlink ticket {}", id));
  return tickets_[id];
}

void Simulator::schedule(std::int64_t at, EventKind kind, std::uint64_t uid, std::uint64_t tag, Bytes payload) {
  queue_.push(Event{std::max(at, now_ms_), next_seq_++, kind, uid, tag, std::move(payload)});
}

void Simulator::record(EventKind kind, std::uint64_t uid, std::string detail) {
  log_.push_back({now_ms_, kind, uid, std::move(detail)});
}

bool Simulator::draw_loss(NodeRuntime& rt) {
  const double p = scenario_.sites[rt.site].link.loss_probability;
  const double u = static_cast<double>(rt.rng() >> 11) * 0x1.0p-53;
  return u < p;
}

bool Simulator::step() {
  if (finished_ || queue_.empty() || queue_.top().at >= scenario_.duration_ms) return false;
  Event ev = queue_.top();
  queue_.pop();
  now_ms_ = ev.at;
  dispatch(ev);
  return true;
}

void Simulator::run_until(std::int64_t t_ms) {
  const std::int64_t limit = std::min(t_ms, scenario_.duration_ms);
  while (!finished_ && !queue_.empty() && queue_.top().at < limit) step();
  if (limit > now_ms_) now_ms_ = limit;
}

bool Simulator::pump_until(std::int64_t deadline_ms, const std::function<bool()>& done) {
  while (!done()) {
    if (finished_ || queue_.empty()) break;
    const auto at = queue_.top().at;
    if (at > deadline_ms || at >= scenario_.duration_ms) break;
    step();
  }
  if (done()) return true;
  const std::int64_t limit = std::min(deadline_ms, scenario_.duration_ms);
  if (limit > now_ms_) now_ms_ = limit;
  return false;
}

RunLog Simulator::run() {
  run_until(scenario_.duration_ms);
  return finish();
}

void Simulator::dispatch(Event& ev) {
  switch (ev.kind) {
    case EventKind::SampleTimer: on_sample_timer(ev); break;
    case EventKind::UplinkTx: on_uplink_tx(ev); break;
    case EventKind::UplinkArrival: on_uplink_arrival(ev); break;
    case EventKind::DownlinkQueue: on_downlink_queue(ev); break;
    case EventKind::ListenWindow: on_listen_window(ev); break;
    case EventKind::DownlinkExpire: on_downlink_expire(ev); break;
    case EventKind::WatchdogCheck: on_watchdog_check(ev); break;
    case EventKind::HangInjection: on_hang(ev); break;
    case EventKind::ResetDone: on_reset_done(ev); break;
  }
}

void Simulator::after_activity(NodeRuntime& rt) {
  node::Node& n = *rt.node;
  if (n.hung()) return;
  if (n.timer_generation() != rt.scheduled_generation && n.next_sample_at() >= 0) {
    rt.scheduled_generation = n.timer_generation();
    schedule(n.next_sample_at(), EventKind::SampleTimer, n.uid(), n.timer_generation());
  }
  if (n.has_uplink() && !rt.tx_scheduled) {
    rt.tx_scheduled = true;
    schedule(std::max(now_ms_, n.meter().busy_until()), EventKind::UplinkTx, n.uid(), n.life());
  }
}

void Simulator::schedule_listen(NodeRuntime& rt, std::int64_t after_ms) {
  if (rt.listen_scheduled) return;
  const std::int64_t interval = scenario_.listen_interval_ms;
  rt.listen_scheduled = true;
  schedule((after_ms / interval + 1) * interval, EventKind::ListenWindow, rt.node->uid());
}

void Simulator::on_sample_timer(Event& ev) {
  auto& rt = runtime(ev.uid);
  if (!rt.node->on_sample_timer(now_ms_, ev.tag)) return;
  record(EventKind::SampleTimer, ev.uid, fmt::format("produced={}", rt.node->counters().produced));
  after_activity(rt);
}

UplinkResult Simulator::transmit(NodeRuntime& rt, ByteView payload, std::int64_t tx_at_ms) {
  const auto& link = scenario_.sites[rt.site].link;
  if (payload.size() > link.max_payload) {
    throw PayloadTooLarge(fmt::format("PayloadTooLarge: {} bytes exceeds max_payload {}", payload.size(),
                                      link.max_payload));
  }
  if (draw_loss(rt)) return UplinkResult::Dropped;
  schedule(tx_at_ms + link.latency_ms, EventKind::UplinkArrival, rt.node->uid(), 0,
           Bytes(payload.begin(), payload.end()));
  return UplinkResult::Delivered;
}

UplinkResult Simulator::deliver_uplink(const std::string& site_id, std::uint64_t node_uid, ByteView payload) {
  auto& rt = runtime(node_uid);
  if (sites_[rt.site]->spec->site_id != site_id) {
    throw NoSuchNode(fmt::format("NoSuchNode: {} is not at site {}", node_uid, site_id));
  }
  return transmit(rt, payload, now_ms_);
}

void Simulator::on_uplink_tx(Event& ev) {
  auto& rt = runtime(ev.uid);
  rt.tx_scheduled = false;
  node::Node& n = *rt.node;
  if (n.hung() || ev.tag != n.life() || !n.has_uplink()) {
    after_activity(rt);
    return;
  }
  node::Uplink up = n.take_uplink();
  const Bytes bytes = up.encode();
  const auto& profile = scenario_.power;
  const std::int64_t start = n.meter().reserve(Mode::Transmitting, now_ms_, profile.transmit_ms);
  const UplinkResult result = transmit(rt, bytes, start);
  const bool delivered = result == UplinkResult::Delivered;
  if (!delivered) ++rt.uplinks_dropped;
  record(EventKind::UplinkTx, ev.uid,
         fmt::format("result={} at={} bytes={} actions={} records={} flush={}", delivered ? "delivered" : "dropped",
                     start, bytes.size(), up.command.actions.size(), up.records.size(), up.flush ? 1 : 0));
  n.on_uplink_result(up, delivered);
  after_activity(rt);
}

void Simulator::on_uplink_arrival(Event& ev) {
  auto& rt = runtime(ev.uid);
  record(EventKind::UplinkArrival, ev.uid, fmt::format("bytes={}", ev.payload.size()));
  sites_[rt.site]->gateway->forward(ev.payload, ev.uid, now_ms_);
}

std::uint64_t Simulator::queue_downlink(const std::string& site_id, std::uint64_t node_uid, Bytes command) {
  auto it = nodes_.find(node_uid);
  if (it == nodes_.end() || sites_[it->second->site]->spec->site_id != site_id) {
    throw NoSuchNode(fmt::format("NoSuchNode: {} at site {}", node_uid, site_id));
  }
  auto& rt = *it->second;
  const std::uint64_t id = tickets_.size();
  tickets_.push_back({id, node_uid, now_ms_, TicketState::Pending, -1, 0});
  ++rt.downlinks_queued;
  record(EventKind::DownlinkQueue, node_uid, fmt::format("ticket={} bytes={}", id, command.size()));
  rt.downlinks.emplace_back(id, std::move(command));
  schedule(now_ms_ + scenario_.downlink_ttl_ms, EventKind::DownlinkExpire, node_uid, id);
  schedule_listen(rt, now_ms_);
  return id;
}

void Simulator::on_downlink_queue(Event& ev) {
  // Scenario-scripted downlink: enters through the backend like any other.
  backend_->send_raw(ev.uid, ev.payload);
}

void Simulator::on_listen_window(Event& ev) {
  auto& rt = runtime(ev.uid);
  rt.listen_scheduled = false;
  while (!rt.downlinks.empty() && tickets_[rt.downlinks.front().first].state != TicketState::Pending) {
    rt.downlinks.pop_front();
  }
  if (rt.downlinks.empty()) return;

  node::Node& n = *rt.node;
  if (n.hung() || !n.meter().sniffs_at(now_ms_)) {
    schedule_listen(rt, now_ms_);
    return;
  }

  auto [id, command] = rt.downlinks.front();
  DownlinkTicket& t = tickets_[id];
  ++t.attempts;
  if (!draw_loss(rt)) {
    t.state = TicketState::Delivered;
    t.resolved_at_ms = now_ms_;
    ++rt.downlinks_delivered;
    rt.downlinks.pop_front();
    record(EventKind::ListenWindow, ev.uid, fmt::format("ticket={} result=delivered attempts={}", id, t.attempts));
    n.handle_downlink(now_ms_ + scenario_.power.listen_ms, command);
    after_activity(rt);
  } else {
    const auto max_attempts = scenario_.sites[rt.site].link.max_downlink_attempts;
    if (max_attempts > 0 && t.attempts >= max_attempts) {
      t.state = TicketState::Dropped;
      t.resolved_at_ms = now_ms_;
      ++rt.downlinks_dropped;
      rt.downlinks.pop_front();
      record(EventKind::ListenWindow, ev.uid, fmt::format("ticket={} result=dropped attempts={}", id, t.attempts));
    }
  }
  if (!rt.downlinks.empty()) schedule_listen(rt, now_ms_);
}

void Simulator::on_downlink_expire(Event& ev) {
  DownlinkTicket& t = tickets_.at(ev.tag);
  if (t.state != TicketState::Pending) return;
  t.state = TicketState::Expired;
  t.resolved_at_ms = now_ms_;
  ++runtime(ev.uid).downlinks_expired;
  record(EventKind::DownlinkExpire, ev.uid, fmt::format("ticket={} reason=ttl attempts={}", t.id, t.attempts));
}

void Simulator::schedule_hang(std::uint64_t node_uid, std::int64_t at_ms) {
  runtime(node_uid);
  schedule(at_ms, EventKind::HangInjection, node_uid);
}

void Simulator::on_hang(Event& ev) {
  auto& rt = runtime(ev.uid);
  node::Node& n = *rt.node;
  if (n.hung()) return;
  n.inject_hang(now_ms_);
  rt.tx_scheduled = false;
  record(EventKind::HangInjection, ev.uid, fmt::format("deadline={}", n.watchdog_deadline()));
  schedule(n.watchdog_deadline(), EventKind::WatchdogCheck, ev.uid, n.life());
}

void Simulator::on_watchdog_check(Event& ev) {
  auto& rt = runtime(ev.uid);
  node::Node& n = *rt.node;
  if (ev.tag != n.life()) return;
  if (!n.watchdog_step(now_ms_)) {
    if (n.hung()) schedule(n.watchdog_deadline(), EventKind::WatchdogCheck, ev.uid, n.life());
    return;
  }
  record(EventKind::WatchdogCheck, ev.uid, fmt::format("reset={}", n.counters().resets));
  schedule(now_ms_, EventKind::ResetDone, ev.uid, n.life());
}

void Simulator::on_reset_done(Event& ev) {
  auto& rt = runtime(ev.uid);
  node::Node& n = *rt.node;
  if (ev.tag != n.life()) return;
  n.boot(now_ms_);
  record(EventKind::ResetDone, ev.uid, fmt::format("sensor_type=0x{:02X}", n.config().sensor_type));
  after_activity(rt);
  if (!rt.downlinks.empty()) schedule_listen(rt, now_ms_);
}

RunLog Simulator::finish() {
  if (!finished_) {
    finished_ = true;
    for (auto& [uid, rt] : nodes_) rt->node->shutdown();
    for (auto& t : tickets_) {
      if (t.state != TicketState::Pending) continue;
      t.state = TicketState::Expired;
      t.resolved_at_ms = now_ms_;
      ++runtime(t.node_uid).downlinks_expired;
      record(EventKind::DownlinkExpire, t.node_uid, fmt::format("ticket={} reason=horizon attempts={}", t.id, t.attempts));
    }
  }

  RunLog out;
  out.horizon_ms = now_ms_;
  out.records = log_;
  out.sink_records = static_cast<const CountingSink&>(*sink_).count();
  out.quarantined = backend_->quarantine().size();
  for (const auto& [uid, rt] : nodes_) {
    NodeSummary s;
    s.uid = uid;
    s.site_id = sites_[rt->site]->spec->site_id;
    s.transect = rt->transect;
    s.counters = rt->node->counters();
    s.buffered = rt->node->buffer().size();
    s.overwritten = rt->node->buffer().overwritten();
    s.uplinks_dropped = rt->uplinks_dropped;
    s.downlinks_queued = rt->downlinks_queued;
    s.downlinks_delivered = rt->downlinks_delivered;
    s.downlinks_dropped = rt->downlinks_dropped;
    s.downlinks_expired = rt->downlinks_expired;
    s.ledger = rt->node->meter().ledger(now_ms_);
    const double amps = s.ledger.mean_current_a();
    s.lifetime_years = amps > 0 ? scenario_.battery_capacity_ah * 3600.0 / amps / (365.25 * 86400.0)
                                : std::numeric_limits<double>::infinity();
    out.nodes.push_back(std::move(s));
  }
  return out;
}

RunLog run(const ScenarioConfig& scenario, std::shared_ptr<backend::TimeSeriesSink> sink) {
  Simulator sim(scenario, std::move(sink));
  return sim.run();
}

}  // namespace geonet::sim
