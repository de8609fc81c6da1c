#pragma once

#include "geonet/bytes.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geonet::node {

enum class SensorKind : std::uint8_t {
  SoilTemperature = 0x01,
  SoilWaterContent = 0x02,
  WeatherStation = 0x03,
};

enum class SensorBus { OneWire, Sdi12 };

std::optional<SensorKind> sensor_kind_from_code(std::uint8_t code);
const char* sensor_kind_name(SensorKind kind);
SensorBus sensor_bus(SensorKind kind);

struct ChannelDescriptor {
  std::string name;
  std::string unit;
};

/// Channel layout for each kind, shared by drivers and the backend decoder.
std::span<const ChannelDescriptor> channel_descriptors(SensorKind kind);

struct ChannelValue {
  std::string name;
  std::int32_t milli = 0;

  friend bool operator==(const ChannelValue&, const ChannelValue&) = default;
};

struct SensorReading {
  std::uint32_t timestamp = 0;
  std::uint64_t node_uid = 0;
  SensorKind kind = SensorKind::SoilTemperature;
  std::vector<ChannelValue> channels;

  friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

inline constexpr std::size_t kReadingHeaderSize = 6;

class ReadingFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Record: u32le timestamp, kind byte, channel count, then i32le milli-unit
/// value per channel. The uid travels in the link envelope, not the record.
Bytes encode_reading(const SensorReading& reading);

/// Decodes a record; trailing bytes past the declared channel count are
/// ignored (fixed-size data file). Channel names come from the kind's table.
SensorReading decode_reading(ByteView bytes, std::uint64_t node_uid);

/// Physical quantities visible to a node's attached sensor, by channel name.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::optional<double> sample(std::string_view channel, std::uint32_t unix_time) const = 0;
};

/// Column-per-channel CSV (`timestamp_unix,<channel>,...`), linearly
/// interpolated and clamped at both ends.
class TraceEnvironment : public Environment {
 public:
  static std::shared_ptr<TraceEnvironment> load(const std::string& path);
  static std::shared_ptr<TraceEnvironment> parse(std::string_view csv_text, const std::string& origin);

  std::optional<double> sample(std::string_view channel, std::uint32_t unix_time) const override;
  std::size_t size() const { return times_.size(); }

 private:
  std::vector<std::uint32_t> times_;
  std::map<std::string, std::vector<double>, std::less<>> columns_;
};

/// Integer triangle-wave diurnal signals, portable bit-for-bit.
class SyntheticEnvironment : public Environment {
 public:
  struct Signal {
    std::int64_t mean_milli = 0;
    std::int64_t amplitude_milli = 0;
    std::int64_t period_s = 86400;
    std::int64_t phase_s = 0;
  };

  void set(std::string channel, Signal signal);
  std::optional<double> sample(std::string_view channel, std::uint32_t unix_time) const override;
  std::optional<std::int64_t> sample_milli(std::string_view channel, std::uint32_t unix_time) const;

  /// Soil/air/moisture/weather signals for a transect label ending in A-F.
  static std::shared_ptr<SyntheticEnvironment> for_transect(std::string_view transect);

 private:
  std::map<std::string, Signal, std::less<>> signals_;
};

class SensorDriver {
 public:
  virtual ~SensorDriver() = default;
  virtual SensorKind kind() const = 0;
  std::span<const ChannelDescriptor> channels() const { return channel_descriptors(kind()); }
  /// Milli-unit values per channel; empty when the sensor yields no data.
  virtual std::vector<std::int32_t> measure(std::uint16_t address, std::uint32_t unix_time) = 0;
};

/// Reads every channel of its kind from an Environment.
class VirtualSensorDriver : public SensorDriver {
 public:
  VirtualSensorDriver(SensorKind kind, std::shared_ptr<const Environment> env)
      : kind_(kind), env_(std::move(env)) {}

  SensorKind kind() const override { return kind_; }
  std::vector<std::int32_t> measure(std::uint16_t address, std::uint32_t unix_time) override;

 private:
  SensorKind kind_;
  std::shared_ptr<const Environment> env_;
};

using DriverFactory = std::function<std::unique_ptr<SensorDriver>(std::shared_ptr<const Environment>)>;

class DriverRegistry {
 public:
  /// Registers one virtual driver per SensorKind.
  static DriverRegistry with_defaults();

  void add(std::uint8_t code, DriverFactory factory);
  bool contains(std::uint8_t code) const { return factories_.contains(code); }
  std::unique_ptr<SensorDriver> create(std::uint8_t code, std::shared_ptr<const Environment> env) const;

 private:
  std::map<std::uint8_t, DriverFactory> factories_;
};

}  // namespace geonet::node
