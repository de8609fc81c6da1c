#pragma once

#include "geonet/bytes.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>

namespace geonet::node {

/// Packed little-endian image of the node configuration file.
struct NodeConfig {
  std::uint8_t sensor_type = 0;
  std::uint16_t sensor_address = 0;
  std::uint8_t sensor_action = 0;
  std::uint32_t sampling_rate = 0;  // seconds, 0 disables periodic sampling
  std::uint32_t rtc_time = 0;       // Unix seconds

  friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

inline constexpr std::size_t kNodeConfigSize = 12;

namespace config_offset {
inline constexpr std::uint32_t kSensorType = 0;
inline constexpr std::uint32_t kSensorAddress = 1;
inline constexpr std::uint32_t kSensorAction = 3;
inline constexpr std::uint32_t kSamplingRate = 4;
inline constexpr std::uint32_t kRtcTime = 8;
}  // namespace config_offset

inline constexpr std::uint8_t kActionNone = 0x00;
inline constexpr std::uint8_t kActionMeasureNow = 0xAA;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ConfigError (wrong length) unless `bytes` is exactly 12 bytes.
NodeConfig parse_node_config(ByteView bytes);
std::array<std::uint8_t, kNodeConfigSize> serialize_node_config(const NodeConfig& cfg);

}  // namespace geonet::node
