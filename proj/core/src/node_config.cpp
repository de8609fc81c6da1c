#include "geonet/node_config.hpp"

#include <fmt/format.h>

namespace geonet::node {

NodeConfig parse_node_config(ByteView bytes) {
  if (bytes.size() != kNodeConfigSize) {
    throw ConfigError(fmt::format("node config must be {} bytes, got {}", kNodeConfigSize, bytes.size()));
  }
  NodeConfig cfg;
  cfg.sensor_type = bytes[config_offset::kSensorType];
  cfg.sensor_address = get_u16le(bytes, config_offset::kSensorAddress);
  cfg.sensor_action = bytes[config_offset::kSensorAction];
  cfg.sampling_rate = get_u32le(bytes, config_offset::kSamplingRate);
  cfg.rtc_time = get_u32le(bytes, config_offset::kRtcTime);
  return cfg;
}

std::array<std::uint8_t, kNodeConfigSize> serialize_node_config(const NodeConfig& cfg) {
  Bytes raw;
  raw.reserve(kNodeConfigSize);
  raw.push_back(cfg.sensor_type);
  put_u16le(raw, cfg.sensor_address);
  raw.push_back(cfg.sensor_action);
  put_u32le(raw, cfg.sampling_rate);
  put_u32le(raw, cfg.rtc_time);
  std::array<std::uint8_t, kNodeConfigSize> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

}  // namespace geonet::node
