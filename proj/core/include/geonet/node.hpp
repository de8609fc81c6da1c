#pragma once

#include "geonet/alp.hpp"
#include "geonet/energy_meter.hpp"
#include "geonet/flash_buffer.hpp"
#include "geonet/node_config.hpp"
#include "geonet/sensors.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace geonet::node {

inline constexpr std::uint32_t kSensorDataFileSize = 64;

struct NodeParams {
  std::uint64_t uid = 0;
  NodeConfig config;
  std::size_t buffer_capacity = 256;
  std::size_t flush_batch = 8;
  std::int64_t watchdog_period_ms = 120'000;
  std::size_t max_payload = 256;
};

/// One radio packet: an encoded ALP command plus the serialized readings it
/// carries (so an undelivered packet can be buffered).
struct Uplink {
  alp::AlpCommand command;
  std::vector<Bytes> records;
  bool flush = false;

  Bytes encode() const { return alp::encode_command(command); }
};

struct NodeCounters {
  std::uint64_t produced = 0;
  std::uint64_t delivered_records = 0;
  std::uint64_t uplinks_attempted = 0;
  std::uint64_t uplinks_delivered = 0;
  std::uint64_t reloads = 0;
  std::uint64_t resets = 0;
  std::uint64_t driver_faults = 0;
  std::uint64_t status_errors = 0;
};

/// Simulated sensor node. Every entry point takes the current virtual time in
/// milliseconds; the node never reads a clock of its own.
class Node {
 public:
  Node(NodeParams params, std::shared_ptr<const DriverRegistry> registry,
       std::shared_ptr<const Environment> env, PowerProfile profile,
       std::int64_t listen_interval_ms);
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  std::uint64_t uid() const { return params_.uid; }
  const NodeParams& params() const { return params_; }
  NodeConfig config() const;
  const alp::FileStore& store() const { return store_; }

  std::optional<SensorKind> bound_kind() const;
  std::uint16_t bound_address() const { return bound_address_; }

  /// Unix time on the node RTC at virtual time `now_ms`.
  std::uint32_t rtc_now(std::int64_t now_ms) const;

  /// Binds the configured driver and arms the sampling timer.
  void boot(std::int64_t now_ms);

  /// Field-granular config write through the file store, followed by a
  /// Sensor Interface Manager reload and any field side effects.
  void apply_config_write(std::int64_t now_ms, std::uint32_t offset, ByteView payload);
  /// Returns false (and queues an error Status) for an unknown sensor type.
  bool sim_reload(std::int64_t now_ms);
  void handle_sensor_action(std::int64_t now_ms, std::uint8_t code);
  std::optional<SensorReading> sample_and_store(std::int64_t now_ms);

  /// Periodic timer expiry; ignored when `generation` is stale.
  bool on_sample_timer(std::int64_t now_ms, std::uint64_t generation);
  /// -1 when periodic sampling is disabled.
  std::int64_t next_sample_at() const { return next_sample_at_; }
  std::uint64_t timer_generation() const { return timer_generation_; }

  void handle_downlink(std::int64_t now_ms, ByteView bytes);

  bool has_uplink() const { return !outbox_.empty(); }
  Uplink take_uplink();
  void on_uplink_result(const Uplink& uplink, bool delivered);

  bool watchdog_step(std::int64_t now_ms);
  void inject_hang(std::int64_t now_ms);
  bool hung() const { return hung_; }
  std::int64_t watchdog_deadline() const { return watchdog_deadline_; }
  /// Changes on every hang or reset; work scheduled for an older life is void.
  std::uint64_t life() const { return life_; }

  /// Moves readings still waiting for transmission into flash.
  void shutdown();

  Mode mode_at(std::int64_t now_ms) const;
  EnergyMeter& meter() { return meter_; }
  const EnergyMeter& meter() const { return meter_; }
  const FlashBuffer& buffer() const { return buffer_; }
  const NodeCounters& counters() const { return counters_; }

 private:
  struct PendingAction {
    alp::AlpAction action;
    std::optional<Bytes> record;
  };

  class ActivityScope;

  void kick(std::int64_t now_ms);
  void arm_timer(std::int64_t now_ms, bool immediate = false);
  void emit(alp::AlpAction action, std::optional<Bytes> record = std::nullopt);
  void emit_status(alp::FileId file, std::uint32_t offset, std::uint32_t length, std::uint8_t code);
  void package();
  void stash_outbox();
  void reset(std::int64_t now_ms);
  std::int64_t sampling_ms(SensorKind kind) const;

  NodeParams params_;
  std::shared_ptr<const DriverRegistry> registry_;
  std::shared_ptr<const Environment> env_;
  alp::FileStore store_;
  EnergyMeter meter_;
  FlashBuffer buffer_;
  NodeCounters counters_;

  std::unique_ptr<SensorDriver> driver_;
  std::uint8_t bound_code_ = 0;
  std::uint16_t bound_address_ = 0;

  std::uint32_t rtc_base_unix_ = 0;
  std::int64_t rtc_set_ms_ = 0;

  std::int64_t next_sample_at_ = -1;
  std::uint64_t timer_generation_ = 0;

  bool hung_ = false;
  std::int64_t hang_at_ = 0;
  std::int64_t watchdog_deadline_ = 0;
  std::uint64_t life_ = 0;

  int activity_depth_ = 0;
  std::vector<PendingAction> collecting_;
  std::optional<Bytes> pending_record_;
  std::deque<Uplink> outbox_;
  bool flush_in_flight_ = false;
};

}  // namespace geonet::node
