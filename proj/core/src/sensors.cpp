#include "geonet/sensors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace geonet::node {

std::optional<SensorKind> sensor_kind_from_code(std::uint8_t code) {
  switch (code) {
    case 0x01: return SensorKind::SoilTemperature;
    case 0x02: return SensorKind::SoilWaterContent;
    case 0x03: return SensorKind::WeatherStation;
    default: return std::nullopt;
  }
}

const char* sensor_kind_name(SensorKind kind) {
  switch (kind) {
    case SensorKind::SoilTemperature: return "SoilTemperature";
    case SensorKind::SoilWaterContent: return "SoilWaterContent";
    case SensorKind::WeatherStation: return "WeatherStation";
  }
  return "?";
}

SensorBus sensor_bus(SensorKind kind) {
  return kind == SensorKind::SoilTemperature ? SensorBus::OneWire : SensorBus::Sdi12;
}

std::span<const ChannelDescriptor> channel_descriptors(SensorKind kind) {
  static const std::vector<ChannelDescriptor> soil_temp{{"t_soil", "°C"}};
  static const std::vector<ChannelDescriptor> water{{"vwc", "m3/m3"}, {"t_soil", "°C"}};
  static const std::vector<ChannelDescriptor> weather{
      {"t_air", "°C"}, {"rh", "%"}, {"pressure", "hPa"}, {"wind_speed", "m/s"}};
  switch (kind) {
    case SensorKind::SoilTemperature: return soil_temp;
    case SensorKind::SoilWaterContent: return water;
    case SensorKind::WeatherStation: return weather;
  }
  return {};
}

Bytes encode_reading(const SensorReading& reading) {
  if (reading.channels.size() > 0xFF) throw ReadingFormatError("too many channels");
  Bytes out;
  out.reserve(kReadingHeaderSize + 4 * reading.channels.size());
  put_u32le(out, reading.timestamp);
  out.push_back(static_cast<std::uint8_t>(reading.kind));
  out.push_back(static_cast<std::uint8_t>(reading.channels.size()));
  for (const auto& ch : reading.channels) put_u32le(out, static_cast<std::uint32_t>(ch.milli));
  return out;
}

SensorReading decode_reading(ByteView bytes, std::uint64_t node_uid) {
  if (bytes.size() < kReadingHeaderSize) {
    throw ReadingFormatError(fmt::format("reading record needs {} bytes, got {}", kReadingHeaderSize, bytes.size()));
  }
  SensorReading r;
  r.node_uid = node_uid;
  r.timestamp = get_u32le(bytes, 0);
  const std::uint8_t count = bytes[5];
  if (count == 0 && bytes[4] == 0) {
    // Zeroed data file: no reading stored yet.
    r.kind = SensorKind::SoilTemperature;
    return r;
  }
  auto kind = sensor_kind_from_code(bytes[4]);
  if (!kind) throw ReadingFormatError(fmt::format("unknown sensor kind 0x{:02X}", bytes[4]));
  r.kind = *kind;
  auto desc = channel_descriptors(*kind);
  if (count != desc.size()) {
    throw ReadingFormatError(fmt::format("{} carries {} channels, record declares {}",
                                         sensor_kind_name(*kind), desc.size(), count));
  }
  if (bytes.size() < kReadingHeaderSize + 4u * count) {
    throw ReadingFormatError("reading record truncated");
  }
  for (std::size_t i = 0; i < count; ++i) {
    auto raw = get_u32le(bytes, kReadingHeaderSize + 4 * i);
    r.channels.push_back(ChannelValue{desc[i].name, static_cast<std::int32_t>(raw)});
  }
  return r;
}

// ---------------------------------------------------------------------------

std::shared_ptr<TraceEnvironment> TraceEnvironment::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open trace '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::shared_ptr<TraceEnvironment> TraceEnvironment::parse(std::string_view text, const std::string& origin) {
  auto env = std::make_shared<TraceEnvironment>();
  std::vector<std::string> names;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    if (names.empty()) {
      if (cells.size() < 2 || cells[0] != "timestamp_unix") {
        throw std::runtime_error(fmt::format("{}:{}: header must start with timestamp_unix and name at least one channel", origin, line_no));
      }
      for (std::size_t i = 1; i < cells.size(); ++i) {
        names.emplace_back(cells[i]);
        env->columns_[names.back()];
      }
      continue;
    }
    if (cells.size() != names.size() + 1) {
      throw std::runtime_error(fmt::format("{}:{}: expected {} columns, got {}", origin, line_no, names.size() + 1, cells.size()));
    }
    std::uint32_t ts = 0;
    auto [p, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), ts);
    if (ec != std::errc{} || p != cells[0].data() + cells[0].size()) {
      throw std::runtime_error(fmt::format("{}:{}: bad timestamp '{}'", origin, line_no, cells[0]));
    }
    if (!env->times_.empty() && ts <= env->times_.back()) {
      throw std::runtime_error(fmt::format("{}:{}: timestamps must be strictly increasing", origin, line_no));
    }
    env->times_.push_back(ts);
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::string cell(cells[i + 1]);
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        throw std::runtime_error(fmt::format("{}:{}: bad value '{}' for {}", origin, line_no, cell, names[i]));
      }
      env->columns_[names[i]].push_back(v);
    }
  }
  if (env->times_.empty()) throw std::runtime_error(fmt::format("{}: trace has no samples", origin));
  return env;
}

std::optional<double> TraceEnvironment::sample(std::string_view channel, std::uint32_t unix_time) const {
  auto it = columns_.find(channel);
  if (it == columns_.end() || times_.empty()) return std::nullopt;
  const auto& v = it->second;
  if (unix_time <= times_.front()) return v.front();
  if (unix_time >= times_.back()) return v.back();
  auto hi = std::upper_bound(times_.begin(), times_.end(), unix_time);
  const std::size_t j = static_cast<std::size_t>(hi - times_.begin());
  const std::size_t i = j - 1;
  const double frac = static_cast<double>(unix_time - times_[i]) / static_cast<double>(times_[j] - times_[i]);
  return v[i] + (v[j] - v[i]) * frac;
}

void SyntheticEnvironment::set(std::string channel, Signal signal) {
  if (signal.period_s <= 0) throw std::invalid_argument("synthetic period must be positive");
  signals_[std::move(channel)] = signal;
}

std::optional<std::int64_t> SyntheticEnvironment::sample_milli(std::string_view channel, std::uint32_t unix_time) const {
  auto it = signals_.find(channel);
  if (it == signals_.end()) return std::nullopt;
  const Signal& s = it->second;
  const std::int64_t period = s.period_s;
  std::int64_t ph = (static_cast<std::int64_t>(unix_time) + s.phase_s) % period;
  if (ph < 0) ph += period;
  // +1 at ph == 0, -1 at ph == period/2
  const std::int64_t tri_num = 4 * std::abs(2 * ph - period) - 2 * period;
  return s.mean_milli + s.amplitude_milli * tri_num / (2 * period);
}

std::optional<double> SyntheticEnvironment::sample(std::string_view channel, std::uint32_t unix_time) const {
  auto m = sample_milli(channel, unix_time);
  if (!m) return std::nullopt;
  return static_cast<double>(*m) / 1000.0;
}

std::shared_ptr<SyntheticEnvironment> SyntheticEnvironment::for_transect(std::string_view transect) {
  std::int64_t warming = 0;
  if (!transect.empty()) {
    switch (transect.back()) {
      case 'B': warming = 1000; break;
      case 'C': warming = 3000; break;
      case 'D': warming = 5000; break;
      case 'E': warming = 7000; break;
      case 'F': warming = 10000; break;
      default: break;
    }
  }
  auto env = std::make_shared<SyntheticEnvironment>();
  // Soil lags the air by a few hours and swings less at 10 cm depth.
  env->set("t_soil", {4000 + warming, 1500, 86400, 3 * 3600});
  env->set("t_air", {4000, 5000, 86400, 0});
  env->set("vwc", {350, 20, 86400, 6 * 3600});
  env->set("rh", {80000, 10000, 86400, 43200});
  env->set("pressure", {1010000, 3000, 5 * 86400, 0});
  env->set("wind_speed", {4000, 2000, 86400, 7200});
  return env;
}

std::vector<std::int32_t> VirtualSensorDriver::measure(std::uint16_t /*address*/, std::uint32_t unix_time) {
  std::vector<std::int32_t> out;
  for (const auto& ch : channels()) {
    auto v = env_ ? env_->sample(ch.name, unix_time) : std::nullopt;
    if (!v) return {};
    const double milli = std::round(*v * 1000.0);
    if (milli > std::numeric_limits<std::int32_t>::max() || milli < std::numeric_limits<std::int32_t>::min()) {
      return {};
    }
    out.push_back(static_cast<std::int32_t>(milli));
  }
  return out;
}

DriverRegistry DriverRegistry::with_defaults() {
  DriverRegistry reg;
  for (auto kind : {SensorKind::SoilTemperature, SensorKind::SoilWaterContent, SensorKind::WeatherStation}) {
    reg.add(static_cast<std::uint8_t>(kind), [kind](std::shared_ptr<const Environment> env) {
      return std::make_unique<VirtualSensorDriver>(kind, std::move(env));
    });
  }
  return reg;
}

void DriverRegistry::add(std::uint8_t code, DriverFactory factory) {
  factories_[code] = std::move(factory);
}

std::unique_ptr<SensorDriver> DriverRegistry::create(std::uint8_t code, std::shared_ptr<const Environment> env) const {
  auto it = factories_.find(code);
  if (it == factories_.end()) return nullptr;
  return it->second(std::move(env));
}

}  // namespace geonet::node
