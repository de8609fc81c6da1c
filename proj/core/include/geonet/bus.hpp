#pragma once

#include "geonet/bytes.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geonet::backend {

struct Envelope {
  std::uint64_t node_uid = 0;
  std::string gateway_id;
  std::string site_id;
  std::int64_t rx_timestamp_ms = 0;
};

struct BusMessage {
  std::string topic;
  Bytes payload;
  Envelope envelope;
};

enum class Direction { Up, Down };

std::string up_topic(std::string_view site_id, std::string_view gateway_id);
std::string down_topic(std::string_view site_id, std::string_view gateway_id);

struct TopicParts {
  std::string site_id;
  std::string gateway_id;
  Direction direction = Direction::Up;
};

/// Parses `site/<site>/gw/<gw>/{up|down}`.
std::optional<TopicParts> parse_topic(std::string_view topic);

/// MQTT filter matching with `+` (one level) and `#` (remaining levels).
bool topic_matches(std::string_view filter, std::string_view topic);

/// Topic-based publish/subscribe. Implementations deliver messages on one
/// topic in publish order.
class MessageBus {
 public:
  using Handler = std::function<void(const BusMessage&)>;

  virtual ~MessageBus() = default;
  virtual void publish(BusMessage msg) = 0;
  virtual std::size_t subscribe(std::string filter, Handler handler) = 0;
  virtual void unsubscribe(std::size_t id) = 0;
};

/// Serializes every publish into one FIFO and dispatches on the thread that
/// finds the bus idle. Publishing from inside a handler enqueues behind the
/// message being handled.
class InProcessBus final : public MessageBus {
 public:
  void publish(BusMessage msg) override;
  std::size_t subscribe(std::string filter, Handler handler) override;
  void unsubscribe(std::size_t id) override;

  std::uint64_t published() const;

 private:
  struct Subscription {
    std::size_t id;
    std::string filter;
    Handler handler;
  };

  mutable std::mutex mutex_;
  std::deque<BusMessage> queue_;
  std::vector<Subscription> subs_;
  std::size_t next_id_ = 1;
  bool dispatching_ = false;
  std::uint64_t published_ = 0;
};

/// Forwards raw node bytes upstream without looking inside them.
class Gateway {
 public:
  Gateway(std::string site_id, std::string gateway_id, MessageBus& bus);

  const std::string& site_id() const { return site_id_; }
  const std::string& gateway_id() const { return gateway_id_; }

  BusMessage forward(ByteView raw, std::uint64_t node_uid, std::int64_t rx_timestamp_ms);

 private:
  std::string site_id_;
  std::string gateway_id_;
  MessageBus& bus_;
};

/// Builds and publishes the `up` message for `raw`; payload is bit-identical.
BusMessage gateway_forward(MessageBus& bus, ByteView raw, const Envelope& envelope);

}  // namespace geonet::backend
