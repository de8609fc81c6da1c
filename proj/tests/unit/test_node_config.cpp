#include "geonet/node_config.hpp"
#include "support/gen.hpp"

#include <catch_amalgamated.hpp>

using namespace geonet;
using namespace geonet::node;

TEST_CASE("config layout is packed little-endian", "[config]") {
  NodeConfig c{0x02, 0x0102, 0xAA, 600, 1625097600};
  const auto b = serialize_node_config(c);
  CHECK(to_hex(b) == "020201AA580200008005DD60");
  CHECK(parse_node_config(b) == c);
}

TEST_CASE("wrong length is rejected", "[config]") {
  CHECK_THROWS_AS(parse_node_config(Bytes(11)), ConfigError);
  CHECK_THROWS_AS(parse_node_config(Bytes(13)), ConfigError);
}

TEST_CASE("property: parse/serialize roundtrip over raw bytes", "[config]") {
  testing::Gen g(12);
  for (int i = 0; i < 5000; ++i) {
    const Bytes raw = g.bytes(kNodeConfigSize);
    const auto back = serialize_node_config(parse_node_config(raw));
    REQUIRE(Bytes(back.begin(), back.end()) == raw);
  }
}

TEST_CASE("property: single-field writes change only that field", "[config]") {
  struct Field {
    std::uint32_t offset;
    std::uint32_t width;
  };
  const Field fields[] = {{config_offset::kSensorType, 1},
                          {config_offset::kSensorAddress, 2},
                          {config_offset::kSensorAction, 1},
                          {config_offset::kSamplingRate, 4},
                          {config_offset::kRtcTime, 4}};
  testing::Gen g(34);
  for (int i = 0; i < 5000; ++i) {
    const NodeConfig base = g.config();
    const Field f = fields[g.range(0, 4)];
    auto bytes = serialize_node_config(base);
    const Bytes patch = g.bytes(f.width);
    std::copy(patch.begin(), patch.end(), bytes.begin() + f.offset);
    const NodeConfig after = parse_node_config(bytes);

    NodeConfig expect = base;
    switch (f.offset) {
      case config_offset::kSensorType: expect.sensor_type = patch[0]; break;
      case config_offset::kSensorAddress: expect.sensor_address = get_u16le(patch, 0); break;
      case config_offset::kSensorAction: expect.sensor_action = patch[0]; break;
      case config_offset::kSamplingRate: expect.sampling_rate = get_u32le(patch, 0); break;
      default: expect.rtc_time = get_u32le(patch, 0); break;
    }
    REQUIRE(after == expect);
  }
}
