#include "geonet/backend.hpp"

#include "geonet/node_config.hpp"
#include "geonet/sensors.hpp"

#include <fmt/format.h>

#include <cstdlib>

namespace geonet::backend {

std::string format_milli(std::int32_t milli) {
  const std::int64_t v = milli;
  const std::int64_t mag = std::llabs(v);
  return fmt::format("{}{}.{:03d}", v < 0 ? "-" : "", mag / 1000, mag % 1000);
}

CsvSink::CsvSink(std::ostream& out) : out_(out) {
  out_ << "timestamp,site,node_uid,transect,channel,value,unit\n";
}

void CsvSink::append(const TimeSeriesRecord& r) {
  out_ << fmt::format("{},{},{},{},{},{},{}\n", r.timestamp, r.site_id, r.node_uid, r.transect, r.channel,
                      format_milli(r.milli), r.unit);
}

Backend::Backend(MessageBus& bus, TimeSeriesSink& sink) : bus_(bus), sink_(sink) {
  subscription_ = bus_.subscribe("site/+/gw/+/up", [this](const BusMessage& m) { ingest(m); });
}

Backend::~Backend() { bus_.unsubscribe(subscription_); }

void Backend::register_node(RemoteNodeHandle handle) {
  std::lock_guard lock(mutex_);
  const auto uid = handle.node_uid;
  nodes_[uid] = std::move(handle);
}

const RemoteNodeHandle& Backend::handle(std::uint64_t node_uid) const {
  std::lock_guard lock(mutex_);
  auto it = nodes_.find(node_uid);
  if (it == nodes_.end()) {
    throw RemoteError(RemoteErrc::NodeUnknown, fmt::format("unknown node {}", node_uid));
  }
  return it->second;
}

std::vector<TimeSeriesRecord> Backend::ingest(const BusMessage& msg) {
  std::vector<TimeSeriesRecord> out;
  std::lock_guard lock(mutex_);
  ++ingested_;
  order_.emplace_back(msg.topic, msg.envelope.rx_timestamp_ms);

  alp::AlpCommand cmd;
  try {
    cmd = alp::decode_command(msg.payload);
  } catch (const alp::DecodeError& e) {
    quarantine_.push_back({msg, e.what()});
    return out;
  }

  const std::uint64_t uid = msg.envelope.node_uid;
  std::string site = msg.envelope.site_id;
  std::string transect;
  if (auto it = nodes_.find(uid); it != nodes_.end()) transect = it->second.transect;

  for (const auto& a : cmd.actions) {
    auto pit = pending_.find(Key{uid, a.file.value, a.offset});
    if (a.opcode == alp::Opcode::ReturnFileData) {
      if (pit != pending_.end() && !pit->second.resolved && pit->second.kind == RequestKind::Read &&
          pit->second.length == a.length) {
        pit->second.resolved = true;
        pit->second.data = a.payload;
        pit->second.at_ms = msg.envelope.rx_timestamp_ms;
      }
      if (a.file == alp::kSensorDataFile && a.offset == 0) {
        try {
          auto reading = node::decode_reading(a.payload, uid);
          auto desc = node::channel_descriptors(reading.kind);
          for (std::size_t i = 0; i < reading.channels.size(); ++i) {
            const auto& ch = reading.channels[i];
            TimeSeriesRecord rec{reading.timestamp, site, uid, transect, ch.name, ch.milli,
                                 static_cast<double>(ch.milli) / 1000.0, desc[i].unit};
            sink_.append(rec);
            out.push_back(std::move(rec));
          }
        } catch (const node::ReadingFormatError& e) {
          quarantine_.push_back({msg, e.what()});
        }
      }
    } else if (a.opcode == alp::Opcode::Status) {
      statuses_.push_back({uid, msg.envelope.rx_timestamp_ms, a});
      if (pit != pending_.end() && !pit->second.resolved) {
        pit->second.resolved = true;
        pit->second.status = a.status_code();
        pit->second.at_ms = msg.envelope.rx_timestamp_ms;
      }
    } else {
      quarantine_.push_back({msg, fmt::format("unexpected {} on uplink", alp::opcode_name(a.opcode))});
    }
  }
  return out;
}

Backend::Pending& Backend::begin(const RemoteNodeHandle& h, RequestKind kind, alp::FileId file,
                                 std::uint32_t offset, std::uint32_t length) {
  std::lock_guard lock(mutex_);
  Key key{h.node_uid, file.value, offset};
  if (pending_.contains(key)) {
    throw RemoteError(RemoteErrc::Busy,
                      fmt::format("request to node {} file 0x{:02X} offset {} already outstanding", h.node_uid,
                                  file.value, offset));
  }
  return pending_[key] = Pending{kind, length, false, std::nullopt, alp::status::kOk, 0};
}

void Backend::publish_down(const RemoteNodeHandle& h, Bytes bytes) {
  const std::int64_t now = pump_ ? pump_->now_ms() : 0;
  bus_.publish(BusMessage{down_topic(h.site_id, h.gateway_id), std::move(bytes),
                          Envelope{h.node_uid, h.gateway_id, h.site_id, now}});
}

Backend::Pending Backend::wait(const Key& key, std::int64_t timeout_ms) {
  auto resolved = [&] {
    std::lock_guard lock(mutex_);
    return pending_.at(key).resolved;
  };
  const bool done = pump_->pump_until(pump_->now_ms() + timeout_ms, resolved);
  std::lock_guard lock(mutex_);
  Pending p = pending_.at(key);
  pending_.erase(key);
  if (!done) {
    throw RemoteError(RemoteErrc::Timeout, fmt::format("node {} did not answer within {} ms",
                                                       std::get<0>(key), timeout_ms));
  }
  return p;
}

Bytes Backend::remote_read_file(std::uint64_t node_uid, alp::FileId file, std::uint32_t offset,
                                std::uint32_t length, std::int64_t timeout_ms) {
  const RemoteNodeHandle h = handle(node_uid);
  if (!pump_) throw RemoteError(RemoteErrc::NoPump, "backend has no event pump attached");
  begin(h, RequestKind::Read, file, offset, length);
  publish_down(h, alp::encode_command({{alp::AlpAction::read(file, offset, length)}}));
  Pending p = wait(Key{node_uid, file.value, offset}, timeout_ms);
  if (!p.data) {
    throw RemoteError(RemoteErrc::NodeStatus,
                      fmt::format("node {} rejected read: status 0x{:02X}", node_uid, p.status), p.status);
  }
  return *p.data;
}

Ack Backend::remote_write_file(std::uint64_t node_uid, alp::FileId file, std::uint32_t offset,
                               ByteView payload, std::int64_t timeout_ms) {
  const RemoteNodeHandle h = handle(node_uid);
  if (!pump_) throw RemoteError(RemoteErrc::NoPump, "backend has no event pump attached");
  begin(h, RequestKind::Write, file, offset, static_cast<std::uint32_t>(payload.size()));
  publish_down(h, alp::encode_command({{alp::AlpAction::write(file, offset, Bytes(payload.begin(), payload.end()))}}));
  Pending p = wait(Key{node_uid, file.value, offset}, timeout_ms);
  return Ack{p.status, p.at_ms};
}

void Backend::send_raw(std::uint64_t node_uid, ByteView command) {
  const RemoteNodeHandle h = handle(node_uid);
  publish_down(h, Bytes(command.begin(), command.end()));
}

std::vector<QuarantineEntry> Backend::quarantine() const {
  std::lock_guard lock(mutex_);
  return quarantine_;
}

std::vector<StatusEntry> Backend::statuses() const {
  std::lock_guard lock(mutex_);
  return statuses_;
}

std::uint64_t Backend::ingested() const {
  std::lock_guard lock(mutex_);
  return ingested_;
}

std::vector<std::pair<std::string, std::int64_t>> Backend::ingest_order() const {
  std::lock_guard lock(mutex_);
  return order_;
}

std::size_t Backend::outstanding() const {
  std::lock_guard lock(mutex_);
  return pending_.size();
}

}  // namespace geonet::backend
