#include "geonet/bus.hpp"

#include <fmt/format.h>

namespace geonet::backend {

std::string up_topic(std::string_view site_id, std::string_view gateway_id) {
  return fmt::format("site/{}/gw/{}/up", site_id, gateway_id);
}

std::string down_topic(std::string_view site_id, std::string_view gateway_id) {
  return fmt::format("site/{}/gw/{}/down", site_id, gateway_id);
}

namespace {

std::vector<std::string_view> split_levels(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto slash = s.find('/', start);
    out.push_back(s.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return out;
}

}  // namespace

std::optional<TopicParts> parse_topic(std::string_view topic) {
  auto lv = split_levels(topic);
  if (lv.size() != 5 || lv[0] != "site" || lv[2] != "gw" || lv[1].empty() || lv[3].empty()) {
    return std::nullopt;
  }
  TopicParts parts{std::string(lv[1]), std::string(lv[3]), Direction::Up};
  if (lv[4] == "up") return parts;
  if (lv[4] == "down") {
    parts.direction = Direction::Down;
    return parts;
  }
  return std::nullopt;
}

bool topic_matches(std::string_view filter, std::string_view topic) {
  auto f = split_levels(filter);
  auto t = split_levels(topic);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == "#") return true;
    if (i >= t.size()) return false;
    if (f[i] != "+" && f[i] != t[i]) return false;
  }
  return f.size() == t.size();
}

void InProcessBus::publish(BusMessage msg) {
  std::unique_lock lock(mutex_);
  queue_.push_back(std::move(msg));
  ++published_;
  if (dispatching_) return;
  dispatching_ = true;
  while (!queue_.empty()) {
    BusMessage next = std::move(queue_.front());
    queue_.pop_front();
    std::vector<Handler> targets;
    for (const auto& s : subs_) {
      if (topic_matches(s.filter, next.topic)) targets.push_back(s.handler);
    }
    lock.unlock();
    for (auto& h : targets) h(next);
    lock.lock();
  }
  dispatching_ = false;
}

std::size_t InProcessBus::subscribe(std::string filter, Handler handler) {
  std::lock_guard lock(mutex_);
  const std::size_t id = next_id_++;
  subs_.push_back(Subscription{id, std::move(filter), std::move(handler)});
  return id;
}

void InProcessBus::unsubscribe(std::size_t id) {
  std::lock_guard lock(mutex_);
  std::erase_if(subs_, [id](const Subscription& s) { return s.id == id; });
}

std::uint64_t InProcessBus::published() const {
  std::lock_guard lock(mutex_);
  return published_;
}

Gateway::Gateway(std::string site_id, std::string gateway_id, MessageBus& bus)
    : site_id_(std::move(site_id)), gateway_id_(std::move(gateway_id)), bus_(bus) {}

BusMessage Gateway::forward(ByteView raw, std::uint64_t node_uid, std::int64_t rx_timestamp_ms) {
  return gateway_forward(bus_, raw, Envelope{node_uid, gateway_id_, site_id_, rx_timestamp_ms});
}

BusMessage gateway_forward(MessageBus& bus, ByteView raw, const Envelope& envelope) {
  if (raw.empty()) throw std::invalid_argument("gateway_forward: empty packet");
  BusMessage msg{up_topic(envelope.site_id, envelope.gateway_id), Bytes(raw.begin(), raw.end()), envelope};
  bus.publish(msg);
  return msg;
}

}  // namespace geonet::backend
