#pragma once

#include "geonet/bytes.hpp"
#include "geonet/energy_meter.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geonet::sim {

struct LinkModel {
  double loss_probability = 0.0;
  std::int64_t latency_ms = 100;
  std::size_t max_payload = 256;
  /// Listen-window delivery attempts before a downlink is dropped; 0 retries
  /// until the ticket expires.
  std::uint32_t max_downlink_attempts = 0;
};

struct NodeSpec {
  std::uint64_t uid = 0;
  std::string transect;
  std::uint8_t sensor_type = 0x01;
  std::uint16_t sensor_address = 0;
  std::uint32_t sampling_rate_s = 600;
  std::string trace;  // empty: synthetic signals for the transect
};

struct SiteSpec {
  std::string site_id;
  std::string gateway_id;
  LinkModel link;
  std::vector<NodeSpec> nodes;
};

struct HangSpec {
  std::uint64_t uid = 0;
  std::int64_t at_ms = 0;
};

struct DownlinkSpec {
  std::int64_t at_ms = 0;
  std::uint64_t uid = 0;
  Bytes command;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::int64_t duration_ms = 86'400'000;
  std::uint32_t epoch_unix = 1'625'097'600;  // 2021-07-01T00:00:00Z
  std::int64_t listen_interval_ms = 1000;
  std::int64_t downlink_ttl_ms = 60'000;
  std::int64_t watchdog_period_ms = 120'000;
  std::size_t buffer_capacity = 256;
  std::size_t flush_batch = 8;
  double battery_capacity_ah = 19.0;
  double battery_voltage_v = 3.6;
  PowerProfile power;
  std::vector<SiteSpec> sites;
  std::vector<HangSpec> hangs;
  std::vector<DownlinkSpec> downlinks;
  std::string base_dir;  // trace paths resolve against this

  std::size_t node_count() const;
};

class InvalidScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON scenario document; throws InvalidScenario naming the first problem.
ScenarioConfig parse_scenario(std::string_view json_text, const std::string& base_dir = ".");
ScenarioConfig load_scenario(const std::string& path);

/// Throws InvalidScenario with the first violated rule.
void validate_scenario(const ScenarioConfig& scenario);

std::string resolve_trace_path(const ScenarioConfig& scenario, const std::string& trace);

}  // namespace geonet::sim
