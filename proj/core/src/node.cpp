#include "geonet/node.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace geonet::node {

using alp::AlpAction;
using alp::FileId;
using alp::kNodeConfigFile;
using alp::kSensorDataFile;

// Collects every action emitted while the node handles one wake-up and ships
// them as uplinks when the outermost scope closes.
class Node::ActivityScope {
 public:
  explicit ActivityScope(Node& node) : node_(node) { ++node_.activity_depth_; }
  ~ActivityScope() {
    if (--node_.activity_depth_ == 0) node_.package();
  }
  ActivityScope(const ActivityScope&) = delete;
  ActivityScope& operator=(const ActivityScope&) = delete;

 private:
  Node& node_;
};

namespace {

bool overlaps(std::uint32_t offset, std::size_t length, std::uint32_t field, std::uint32_t width) {
  const std::uint64_t end = static_cast<std::uint64_t>(offset) + length;
  return offset < field + width && end > field;
}

}  // namespace

Node::Node(NodeParams params, std::shared_ptr<const DriverRegistry> registry,
           std::shared_ptr<const Environment> env, PowerProfile profile, std::int64_t listen_interval_ms)
    : params_(std::move(params)),
      registry_(std::move(registry)),
      env_(std::move(env)),
      meter_(profile, listen_interval_ms),
      buffer_(params_.buffer_capacity) {
  if (!registry_) throw std::invalid_argument("node requires a driver registry");
  if (params_.flush_batch == 0) throw std::invalid_argument("flush batch must be positive");

  store_.create({kSensorDataFile, kSensorDataFileSize, {true, true}, alp::Storage::Volatile});
  store_.create({kNodeConfigFile, static_cast<std::uint32_t>(kNodeConfigSize), {true, true},
                 alp::Storage::Persistent});
  auto image = serialize_node_config(params_.config);
  store_.write(kNodeConfigFile, 0, image);

  // Any write to the data file is reported upstream.
  store_.register_hook({kSensorDataFile, alp::Trigger::OnWrite, "uplink-data",
                        [this](const alp::FileAccess& a) {
                          auto content = store_.content(a.file);
                          Bytes written(content.begin() + a.offset, content.begin() + a.offset + a.length);
                          emit(AlpAction::ret(a.file, a.offset, std::move(written)), std::exchange(pending_record_, std::nullopt));
                        }});

  rtc_base_unix_ = params_.config.rtc_time;
  rtc_set_ms_ = 0;
}

NodeConfig Node::config() const { return parse_node_config(store_.content(kNodeConfigFile)); }

std::optional<SensorKind> Node::bound_kind() const {
  if (!driver_) return std::nullopt;
  return driver_->kind();
}

std::uint32_t Node::rtc_now(std::int64_t now_ms) const {
  const std::int64_t elapsed = std::max<std::int64_t>(0, now_ms - rtc_set_ms_) / 1000;
  return static_cast<std::uint32_t>(rtc_base_unix_ + elapsed);
}

void Node::kick(std::int64_t now_ms) { watchdog_deadline_ = now_ms + params_.watchdog_period_ms; }

void Node::arm_timer(std::int64_t now_ms, bool immediate) {
  const auto rate = config().sampling_rate;
  const std::int64_t wait = immediate ? 0 : static_cast<std::int64_t>(rate) * 1000;
  next_sample_at_ = rate >= 1 ? now_ms + wait : -1;
  ++timer_generation_;
}

void Node::boot(std::int64_t now_ms) {
  ActivityScope scope(*this);
  hung_ = false;
  kick(now_ms);
  sim_reload(now_ms);
  arm_timer(now_ms, true);
}

bool Node::sim_reload(std::int64_t now_ms) {
  ActivityScope scope(*this);
  const NodeConfig cfg = config();
  ++counters_.reloads;
  if (!registry_->contains(cfg.sensor_type)) {
    emit_status(kNodeConfigFile, config_offset::kSensorType, 1, alp::status::kUnknownSensorType);
    return false;
  }
  driver_.reset();
  driver_ = registry_->create(cfg.sensor_type, env_);
  bound_code_ = cfg.sensor_type;
  bound_address_ = cfg.sensor_address;
  (void)now_ms;
  return driver_ != nullptr;
}

void Node::apply_config_write(std::int64_t now_ms, std::uint32_t offset, ByteView payload) {
  ActivityScope scope(*this);
  store_.write(kNodeConfigFile, offset, payload);
  const NodeConfig cfg = config();

  sim_reload(now_ms);

  if (overlaps(offset, payload.size(), config_offset::kRtcTime, 4)) {
    rtc_base_unix_ = cfg.rtc_time;
    rtc_set_ms_ = now_ms;
  }
  if (overlaps(offset, payload.size(), config_offset::kSamplingRate, 4)) {
    arm_timer(now_ms);
  }
  if (overlaps(offset, payload.size(), config_offset::kSensorAction, 1)) {
    handle_sensor_action(now_ms, cfg.sensor_action);
  }
}

void Node::handle_sensor_action(std::int64_t now_ms, std::uint8_t code) {
  ActivityScope scope(*this);
  if (code == kActionNone) return;
  if (code == kActionMeasureNow) {
    sample_and_store(now_ms);
    return;
  }
  emit_status(kNodeConfigFile, config_offset::kSensorAction, 1, alp::status::kReservedSensorAction);
}

std::int64_t Node::sampling_ms(SensorKind kind) const {
  const auto& p = meter_.profile();
  return sensor_bus(kind) == SensorBus::OneWire ? p.sampling_onewire_ms : p.sampling_sdi12_ms;
}

std::optional<SensorReading> Node::sample_and_store(std::int64_t now_ms) {
  ActivityScope scope(*this);
  if (!driver_) {
    ++counters_.driver_faults;
    emit_status(kSensorDataFile, 0, 0, alp::status::kDriverFault);
    return std::nullopt;
  }
  const SensorKind kind = driver_->kind();
  const std::int64_t start = meter_.reserve(Mode::Sampling, now_ms, sampling_ms(kind));
  const std::uint32_t ts = rtc_now(start);
  auto values = driver_->measure(bound_address_, ts);
  auto desc = channel_descriptors(kind);
  if (values.empty() || values.size() != desc.size()) {
    ++counters_.driver_faults;
    emit_status(kSensorDataFile, 0, 0, alp::status::kDriverFault);
    return std::nullopt;
  }

  SensorReading reading{ts, params_.uid, kind, {}};
  for (std::size_t i = 0; i < desc.size(); ++i) reading.channels.push_back({desc[i].name, values[i]});
  Bytes record = encode_reading(reading);
  ++counters_.produced;
  pending_record_ = record;
  store_.write(kSensorDataFile, 0, record);
  return reading;
}

bool Node::on_sample_timer(std::int64_t now_ms, std::uint64_t generation) {
  if (hung_ || generation != timer_generation_ || next_sample_at_ < 0) return false;
  ActivityScope scope(*this);
  kick(now_ms);
  sample_and_store(now_ms);
  next_sample_at_ = now_ms + static_cast<std::int64_t>(config().sampling_rate) * 1000;
  ++timer_generation_;
  return true;
}

void Node::handle_downlink(std::int64_t now_ms, ByteView bytes) {
  if (hung_) return;
  ActivityScope scope(*this);
  kick(now_ms);

  alp::AlpCommand cmd;
  try {
    cmd = alp::decode_command(bytes);
  } catch (const alp::DecodeError& e) {
    emit_status(FileId{0}, static_cast<std::uint32_t>(e.offset()), 0, alp::status::kMalformedCommand);
    return;
  }

  for (const auto& a : cmd.actions) {
    switch (a.opcode) {
      case alp::Opcode::ReadFileData: {
        try {
          // A remote read of the data file asks for a fresh measurement first.
          if (a.file == kSensorDataFile) sample_and_store(now_ms);
          Bytes data = store_.read(a.file, a.offset, a.length);
          emit(AlpAction{alp::Opcode::ReturnFileData, a.file, a.offset, a.length, std::move(data)});
        } catch (const alp::FileError& e) {
          emit_status(a.file, a.offset, a.length, alp::status_for(e.code()));
        }
        break;
      }
      case alp::Opcode::WriteFileData: {
        // The ack goes ahead of anything the write itself triggers.
        const std::size_t ack_at = collecting_.size();
        std::uint8_t code = alp::status::kOk;
        try {
          if (a.file == kNodeConfigFile) {
            apply_config_write(now_ms, a.offset, a.payload);
          } else {
            store_.write(a.file, a.offset, a.payload);
          }
        } catch (const alp::FileError& e) {
          code = alp::status_for(e.code());
        }
        if (code != alp::status::kOk) ++counters_.status_errors;
        collecting_.insert(collecting_.begin() + static_cast<std::ptrdiff_t>(ack_at),
                           PendingAction{AlpAction::status(a.file, a.offset, a.length, code), std::nullopt});
        break;
      }
      default:
        emit_status(a.file, a.offset, a.length, alp::status::kUnsupportedAction);
        break;
    }
  }
}

void Node::emit(AlpAction action, std::optional<Bytes> record) {
  collecting_.push_back(PendingAction{std::move(action), std::move(record)});
}

void Node::emit_status(FileId file, std::uint32_t offset, std::uint32_t length, std::uint8_t code) {
  if (code != alp::status::kOk) ++counters_.status_errors;
  emit(AlpAction::status(file, offset, length, code));
}

void Node::package() {
  if (collecting_.empty()) return;
  Uplink current;
  std::size_t size = 0;
  for (auto& pa : collecting_) {
    std::size_t n = pa.action.encoded_size();
    if (n > params_.max_payload) {
      pa.action = AlpAction::status(pa.action.file, pa.action.offset, pa.action.length, alp::status::kOutOfBounds);
      n = pa.action.encoded_size();
    }
    if (size + n > params_.max_payload && !current.command.actions.empty()) {
      outbox_.push_back(std::move(current));
      current = Uplink{};
      size = 0;
    }
    current.command.actions.push_back(std::move(pa.action));
    if (pa.record) current.records.push_back(std::move(*pa.record));
    size += n;
  }
  if (!current.command.actions.empty()) outbox_.push_back(std::move(current));
  collecting_.clear();
}

Uplink Node::take_uplink() {
  if (outbox_.empty()) throw std::logic_error("no uplink pending");
  Uplink u = std::move(outbox_.front());
  outbox_.pop_front();
  return u;
}

void Node::on_uplink_result(const Uplink& uplink, bool delivered) {
  ++counters_.uplinks_attempted;
  if (delivered) ++counters_.uplinks_delivered;

  if (uplink.flush) {
    flush_in_flight_ = false;
    if (delivered) {
      buffer_.pop(uplink.records.size());
      counters_.delivered_records += uplink.records.size();
    }
    return;
  }

  if (!delivered) {
    for (const auto& r : uplink.records) buffer_.push(r);
    return;
  }
  counters_.delivered_records += uplink.records.size();
  if (buffer_.empty() || flush_in_flight_) return;

  Uplink flush;
  flush.flush = true;
  std::size_t size = 0;
  for (auto& rec : buffer_.peek(params_.flush_batch)) {
    const std::size_t n = alp::kActionHeaderSize + rec.size();
    if (size + n > params_.max_payload) break;
    flush.command.actions.push_back(AlpAction::ret(kSensorDataFile, 0, rec));
    flush.records.push_back(std::move(rec));
    size += n;
  }
  if (flush.records.empty()) return;
  flush_in_flight_ = true;
  outbox_.push_back(std::move(flush));
}

void Node::stash_outbox() {
  for (auto& u : outbox_) {
    if (u.flush) continue;  // records still sit in flash
    for (auto& r : u.records) buffer_.push(std::move(r));
  }
  outbox_.clear();
  flush_in_flight_ = false;
}

void Node::shutdown() {
  package();
  stash_outbox();
}

bool Node::watchdog_step(std::int64_t now_ms) {
  if (!hung_) {
    kick(now_ms);
    return false;
  }
  if (now_ms < watchdog_deadline_) return false;
  reset(now_ms);
  return true;
}

void Node::inject_hang(std::int64_t now_ms) {
  if (hung_) return;
  watchdog_step(now_ms);
  hung_ = true;
  hang_at_ = now_ms;
  ++life_;
  ++timer_generation_;
  next_sample_at_ = -1;
  collecting_.clear();
  pending_record_.reset();
  stash_outbox();
}

void Node::reset(std::int64_t now_ms) {
  meter_.block_listening(hang_at_, now_ms);
  store_.reset();
  driver_.reset();
  hung_ = false;
  ++life_;
  ++counters_.resets;
  ++timer_generation_;
  next_sample_at_ = -1;
}

Mode Node::mode_at(std::int64_t now_ms) const {
  if (auto m = meter_.busy_mode_at(now_ms)) return *m;
  const std::int64_t interval = meter_.listen_interval_ms();
  if (!hung_ && interval > 0) {
    const std::int64_t boundary = (now_ms / interval) * interval;
    if (now_ms < boundary + meter_.profile().listen_ms && meter_.sniffs_at(boundary)) return Mode::Listening;
  }
  return Mode::Sleep;
}

}  // namespace geonet::node
