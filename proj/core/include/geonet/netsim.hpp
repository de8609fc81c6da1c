#pragma once

#include "geonet/backend.hpp"
#include "geonet/bus.hpp"
#include "geonet/energy_meter.hpp"
#include "geonet/node.hpp"
#include "geonet/scenario.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace geonet::sim {

enum class EventKind : std::uint8_t {
  SampleTimer,
  UplinkTx,
  UplinkArrival,
  DownlinkQueue,
  ListenWindow,
  DownlinkExpire,
  WatchdogCheck,
  HangInjection,
  ResetDone,
};

const char* event_kind_name(EventKind kind);

struct LogRecord {
  std::int64_t time_ms = 0;
  EventKind kind = EventKind::SampleTimer;
  std::uint64_t node_uid = 0;
  std::string detail;  // space separated key=value pairs, no commas
};

struct NodeSummary {
  std::uint64_t uid = 0;
  std::string site_id;
  std::string transect;
  node::NodeCounters counters;
  std::uint64_t buffered = 0;
  std::uint64_t overwritten = 0;
  std::uint64_t uplinks_dropped = 0;
  std::uint64_t downlinks_queued = 0;
  std::uint64_t downlinks_delivered = 0;
  std::uint64_t downlinks_dropped = 0;
  std::uint64_t downlinks_expired = 0;
  EnergyLedger ledger;
  double lifetime_years = 0.0;
};

/// Ordered record of a run. The hash covers the records only and is stable
/// across platforms for identical inputs.
struct RunLog {
  std::int64_t horizon_ms = 0;
  std::vector<LogRecord> records;
  std::vector<NodeSummary> nodes;
  std::uint64_t sink_records = 0;
  std::uint64_t quarantined = 0;

  std::uint64_t hash() const;
  std::string hash_hex() const;
  /// `time_ms,event_kind,node_uid,detail` lines followed by a summary block.
  void write(std::ostream& out) const;
  void write_summary(std::ostream& out) const;

  std::uint64_t uplinks_attempted() const;
  std::uint64_t uplinks_delivered() const;
  double delivery_ratio() const;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

enum class UplinkResult { Delivered, Dropped };
enum class TicketState { Pending, Delivered, Dropped, Expired };
const char* ticket_state_name(TicketState state);

struct DownlinkTicket {
  std::uint64_t id = 0;
  std::uint64_t node_uid = 0;
  std::int64_t queued_at_ms = 0;
  TicketState state = TicketState::Pending;
  std::int64_t resolved_at_ms = -1;
  std::uint32_t attempts = 0;
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PayloadTooLarge : public SimError {
 public:
  using SimError::SimError;
};

class NoSuchNode : public SimError {
 public:
  using SimError::SimError;
};

/// Deterministic discrete-event simulation of one star network per site.
class Simulator final : public backend::EventPump {
 public:
  explicit Simulator(ScenarioConfig scenario, std::shared_ptr<backend::TimeSeriesSink> sink = nullptr);
  ~Simulator() override;
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  std::int64_t now_ms() const override { return now_ms_; }
  std::int64_t horizon_ms() const { return scenario_.duration_ms; }
  bool pump_until(std::int64_t deadline_ms, const std::function<bool()>& done) override;

  /// Processes one event; false when nothing is left before the horizon.
  bool step();
  void run_until(std::int64_t t_ms);
  /// Runs to the horizon and returns the finished log.
  RunLog run();
  /// Closes the run at the current state: flushes node outboxes into flash,
  /// resolves open tickets and computes energy ledgers.
  RunLog finish();

  /// One loss draw on the node's stream; schedules gateway receipt on success.
  UplinkResult deliver_uplink(const std::string& site_id, std::uint64_t node_uid, ByteView payload);
  std::uint64_t queue_downlink(const std::string& site_id, std::uint64_t node_uid, Bytes command);
  const DownlinkTicket& ticket(std::uint64_t id) const;

  void schedule_hang(std::uint64_t node_uid, std::int64_t at_ms);

  node::Node& node(std::uint64_t uid);
  const node::Node& node(std::uint64_t uid) const;
  std::vector<std::uint64_t> node_uids() const;
  backend::Backend& backend() { return *backend_; }
  backend::MessageBus& bus() { return bus_; }
  const ScenarioConfig& scenario() const { return scenario_; }
  const std::vector<LogRecord>& log() const { return log_; }

 private:
  struct Event {
    std::int64_t at = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::SampleTimer;
    std::uint64_t uid = 0;
    std::uint64_t tag = 0;  // timer generation, node life or ticket id
    Bytes payload;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  struct NodeRuntime;
  struct SiteRuntime;

  void schedule(std::int64_t at, EventKind kind, std::uint64_t uid, std::uint64_t tag = 0, Bytes payload = {});
  void dispatch(Event& ev);
  void after_activity(NodeRuntime& rt);
  void schedule_listen(NodeRuntime& rt, std::int64_t after_ms);
  void record(EventKind kind, std::uint64_t uid, std::string detail);
  UplinkResult transmit(NodeRuntime& rt, ByteView payload, std::int64_t tx_at_ms);
  bool draw_loss(NodeRuntime& rt);
  NodeRuntime& runtime(std::uint64_t uid);
  const NodeRuntime& runtime(std::uint64_t uid) const;

  void on_sample_timer(Event& ev);
  void on_uplink_tx(Event& ev);
  void on_uplink_arrival(Event& ev);
  void on_downlink_queue(Event& ev);
  void on_listen_window(Event& ev);
  void on_downlink_expire(Event& ev);
  void on_watchdog_check(Event& ev);
  void on_hang(Event& ev);
  void on_reset_done(Event& ev);

  ScenarioConfig scenario_;
  std::shared_ptr<backend::TimeSeriesSink> sink_;
  backend::InProcessBus bus_;
  std::unique_ptr<backend::Backend> backend_;
  std::shared_ptr<const node::DriverRegistry> registry_;

  std::vector<std::unique_ptr<SiteRuntime>> sites_;
  std::map<std::uint64_t, std::unique_ptr<NodeRuntime>> nodes_;
  std::vector<DownlinkTicket> tickets_;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  std::int64_t now_ms_ = 0;
  std::vector<LogRecord> log_;
  std::uint64_t sink_records_ = 0;
  bool finished_ = false;
};

/// Builds a simulator for `scenario` and runs it to the horizon.
RunLog run(const ScenarioConfig& scenario, std::shared_ptr<backend::TimeSeriesSink> sink = nullptr);

}  // namespace geonet::sim
