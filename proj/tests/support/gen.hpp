#pragma once

#include "geonet/alp.hpp"
#include "geonet/node_config.hpp"

#include <cstdint>
#include <random>

namespace geonet::testing {

// Small hand-rolled generator; every property test owns one with a fixed seed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t u64() { return rng_(); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(rng_()); }
  std::uint8_t byte() { return static_cast<std::uint8_t>(rng_()); }
  bool coin() { return (rng_() & 1) != 0; }

  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double real(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = byte();
    return out;
  }

  alp::AlpAction action() {
    const alp::FileId file{byte()};
    const std::uint32_t offset = coin() ? u32() : u32() % 64;
    switch (range(0, 3)) {
      case 0: return alp::AlpAction::read(file, offset, coin() ? u32() : u32() % 64);
      case 1: return alp::AlpAction::write(file, offset, bytes(static_cast<std::size_t>(range(0, 40))));
      case 2: return alp::AlpAction::ret(file, offset, bytes(static_cast<std::size_t>(range(0, 40))));
      default: return alp::AlpAction::status(file, offset, u32() % 64, byte());
    }
  }

  alp::AlpCommand command() {
    alp::AlpCommand cmd;
    const auto n = range(1, 6);
    for (std::int64_t i = 0; i < n; ++i) cmd.actions.push_back(action());
    return cmd;
  }

  node::NodeConfig config() {
    node::NodeConfig c;
    c.sensor_type = byte();
    c.sensor_address = static_cast<std::uint16_t>(u32());
    c.sensor_action = byte();
    c.sampling_rate = u32();
    c.rtc_time = u32();
    return c;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace geonet::testing
