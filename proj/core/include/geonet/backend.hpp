#pragma once

#include "geonet/alp.hpp"
#include "geonet/bus.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace geonet::backend {

struct TimeSeriesRecord {
  std::int64_t timestamp = 0;  // Unix seconds from the node RTC
  std::string site_id;
  std::uint64_t node_uid = 0;
  std::string transect;
  std::string channel;
  std::int32_t milli = 0;
  double value = 0.0;  // milli / 1000
  std::string unit;
};

class TimeSeriesSink {
 public:
  virtual ~TimeSeriesSink() = default;
  virtual void append(const TimeSeriesRecord& record) = 0;
};

class MemorySink final : public TimeSeriesSink {
 public:
  void append(const TimeSeriesRecord& record) override { records_.push_back(record); }
  const std::vector<TimeSeriesRecord>& records() const { return records_; }

 private:
  std::vector<TimeSeriesRecord> records_;
};

/// Append-only CSV: `timestamp,site,node_uid,transect,channel,value,unit`.
class CsvSink final : public TimeSeriesSink {
 public:
  explicit CsvSink(std::ostream& out);
  void append(const TimeSeriesRecord& record) override;

 private:
  std::ostream& out_;
};

/// Exact decimal rendering of a milli-unit value ("-1.234").
std::string format_milli(std::int32_t milli);

struct RemoteNodeHandle {
  std::uint64_t node_uid = 0;
  std::string site_id;
  std::string gateway_id;
  std::string transect;
};

enum class RemoteErrc { Timeout, NodeUnknown, Busy, NodeStatus, NoPump };

class RemoteError : public std::runtime_error {
 public:
  RemoteError(RemoteErrc code, const std::string& what, std::uint8_t status = 0)
      : std::runtime_error(what), code_(code), status_(status) {}
  RemoteErrc code() const { return code_; }
  std::uint8_t status() const { return status_; }

 private:
  RemoteErrc code_;
  std::uint8_t status_;
};

/// Whatever drives virtual (or wall) time while the backend waits on a node.
class EventPump {
 public:
  virtual ~EventPump() = default;
  virtual std::int64_t now_ms() const = 0;
  /// Advances until `done()` or `deadline_ms`; returns done().
  virtual bool pump_until(std::int64_t deadline_ms, const std::function<bool()>& done) = 0;
};

struct Ack {
  std::uint8_t status = alp::status::kOk;
  std::int64_t at_ms = 0;
};

struct QuarantineEntry {
  BusMessage message;
  std::string reason;
};

struct StatusEntry {
  std::uint64_t node_uid = 0;
  std::int64_t rx_timestamp_ms = 0;
  alp::AlpAction action;
};

/// Application layer of the split stack: decodes what gateways forward,
/// stores readings and talks to nodes by uid and file id.
class Backend {
 public:
  Backend(MessageBus& bus, TimeSeriesSink& sink);
  ~Backend();
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  void register_node(RemoteNodeHandle handle);
  /// Throws RemoteError(NodeUnknown).
  const RemoteNodeHandle& handle(std::uint64_t node_uid) const;
  void attach_pump(EventPump* pump) { pump_ = pump; }

  std::vector<TimeSeriesRecord> ingest(const BusMessage& msg);

  Bytes remote_read_file(std::uint64_t node_uid, alp::FileId file, std::uint32_t offset,
                         std::uint32_t length, std::int64_t timeout_ms);
  Ack remote_write_file(std::uint64_t node_uid, alp::FileId file, std::uint32_t offset,
                        ByteView payload, std::int64_t timeout_ms);
  /// Fire-and-forget downlink of pre-encoded command bytes.
  void send_raw(std::uint64_t node_uid, ByteView command);

  std::vector<QuarantineEntry> quarantine() const;
  std::vector<StatusEntry> statuses() const;
  std::uint64_t ingested() const;
  /// Up-topic messages in the order they were ingested.
  std::vector<std::pair<std::string, std::int64_t>> ingest_order() const;
  std::size_t outstanding() const;

 private:
  enum class RequestKind { Read, Write };
  using Key = std::tuple<std::uint64_t, std::uint8_t, std::uint32_t>;

  struct Pending {
    RequestKind kind;
    std::uint32_t length = 0;
    bool resolved = false;
    std::optional<Bytes> data;
    std::uint8_t status = alp::status::kOk;
    std::int64_t at_ms = 0;
  };

  Pending& begin(const RemoteNodeHandle& h, RequestKind kind, alp::FileId file, std::uint32_t offset,
                 std::uint32_t length);
  Pending wait(const Key& key, std::int64_t timeout_ms);
  void publish_down(const RemoteNodeHandle& h, Bytes bytes);

  MessageBus& bus_;
  TimeSeriesSink& sink_;
  EventPump* pump_ = nullptr;
  std::size_t subscription_ = 0;

  mutable std::mutex mutex_;
  std::map<std::uint64_t, RemoteNodeHandle> nodes_;
  std::map<Key, Pending> pending_;
  std::vector<QuarantineEntry> quarantine_;
  std::vector<StatusEntry> statuses_;
  std::vector<std::pair<std::string, std::int64_t>> order_;
  std::uint64_t ingested_ = 0;
};

}  // namespace geonet::backend
