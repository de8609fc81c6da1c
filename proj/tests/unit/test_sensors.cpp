#include "geonet/flash_buffer.hpp"
#include "geonet/sensors.hpp"
#include "support/gen.hpp"

#include <catch_amalgamated.hpp>

using namespace geonet;
using namespace geonet::node;

TEST_CASE("reading record layout", "[sensors]") {
  SensorReading r{1625097600, 7, SensorKind::SoilWaterContent, {{"vwc", 350}, {"t_soil", -1234}}};
  const Bytes b = encode_reading(r);
  CHECK(to_hex(b) == "8005DD6002025E0100002EFBFFFF");
  CHECK(decode_reading(b, 7) == r);
}

TEST_CASE("decode ignores trailing bytes of the fixed data file", "[sensors]") {
  SensorReading r{42, 1, SensorKind::SoilTemperature, {{"t_soil", 4708}}};
  Bytes b = encode_reading(r);
  b.resize(64, 0);
  CHECK(decode_reading(b, 1) == r);
}

TEST_CASE("malformed records", "[sensors]") {
  CHECK_THROWS_AS(decode_reading(Bytes{1, 2, 3}, 1), ReadingFormatError);
  // soil temperature declares one channel
  CHECK_THROWS_AS(decode_reading(from_hex("2A00000001020000000000000000"), 1), ReadingFormatError);
  CHECK_THROWS_AS(decode_reading(from_hex("2A0000000101AABB"), 1), ReadingFormatError);
  CHECK_THROWS_AS(decode_reading(from_hex("2A000000090100000000"), 1), ReadingFormatError);
  CHECK(decode_reading(Bytes(64, 0), 1).channels.empty());
}

TEST_CASE("property: readings roundtrip", "[sensors]") {
  testing::Gen g(5);
  const SensorKind kinds[] = {SensorKind::SoilTemperature, SensorKind::SoilWaterContent, SensorKind::WeatherStation};
  for (int i = 0; i < 2000; ++i) {
    const SensorKind k = kinds[g.range(0, 2)];
    SensorReading r{g.u32(), 9, k, {}};
    for (const auto& d : channel_descriptors(k)) r.channels.push_back({d.name, static_cast<std::int32_t>(g.u32())});
    REQUIRE(decode_reading(encode_reading(r), 9) == r);
  }
}

TEST_CASE("channel tables", "[sensors]") {
  CHECK(channel_descriptors(SensorKind::SoilTemperature).size() == 1);
  CHECK(channel_descriptors(SensorKind::SoilWaterContent).size() == 2);
  CHECK(channel_descriptors(SensorKind::WeatherStation).size() == 4);
  CHECK(sensor_bus(SensorKind::SoilTemperature) == SensorBus::OneWire);
  CHECK(sensor_bus(SensorKind::WeatherStation) == SensorBus::Sdi12);
  CHECK_FALSE(sensor_kind_from_code(0x07).has_value());
}

TEST_CASE("trace environment interpolates and clamps", "[sensors]") {
  auto env = TraceEnvironment::parse("timestamp_unix,t_soil\n100,1.0\n200,3.0\n", "mem");
  CHECK(env->sample("t_soil", 50) == 1.0);
  CHECK(env->sample("t_soil", 150) == 2.0);
  CHECK(env->sample("t_soil", 175) == 2.5);
  CHECK(env->sample("t_soil", 999) == 3.0);
  CHECK_FALSE(env->sample("t_air", 150).has_value());
  CHECK_THROWS(TraceEnvironment::parse("timestamp_unix,t\n5,1\n5,2\n", "mem"));
  CHECK_THROWS(TraceEnvironment::parse("timestamp_unix,t\n5,x\n", "mem"));
  CHECK_THROWS(TraceEnvironment::parse("timestamp_unix,t\n", "mem"));
}

TEST_CASE("synthetic signal is an integer triangle wave", "[sensors]") {
  SyntheticEnvironment env;
  env.set("x", {1000, 400, 100, 0});
  CHECK(env.sample_milli("x", 0) == 1400);
  CHECK(env.sample_milli("x", 50) == 600);
  CHECK(env.sample_milli("x", 25) == 1000);
  CHECK(env.sample_milli("x", 100) == 1400);

  // warming offsets between transects
  auto a = SyntheticEnvironment::for_transect("A");
  auto f = SyntheticEnvironment::for_transect("F");
  for (std::uint32_t t = 1625097600; t < 1625097600 + 86400; t += 3600) {
    CHECK(*f->sample_milli("t_soil", t) - *a->sample_milli("t_soil", t) == 10000);
  }
}

TEST_CASE("virtual driver rounds to milli-units", "[sensors]") {
  auto env = TraceEnvironment::parse("timestamp_unix,t_soil\n0,1.0004\n10,1.0006\n", "mem");
  VirtualSensorDriver d(SensorKind::SoilTemperature, env);
  CHECK(d.measure(0, 0) == std::vector<std::int32_t>{1000});
  CHECK(d.measure(0, 10) == std::vector<std::int32_t>{1001});
  VirtualSensorDriver weather(SensorKind::WeatherStation, env);
  CHECK(weather.measure(0, 0).empty());

  auto reg = DriverRegistry::with_defaults();
  CHECK(reg.contains(0x01));
  CHECK(reg.create(0x09, env) == nullptr);
}

TEST_CASE("flash buffer ring", "[sensors]") {
  FlashBuffer fb(3);
  for (std::uint8_t i = 0; i < 5; ++i) fb.push(Bytes{i});
  CHECK(fb.size() == 3);
  CHECK(fb.overwritten() == 2);
  CHECK(fb.peek(2) == std::vector<Bytes>{{2}, {3}});
  fb.pop(2);
  CHECK(fb.peek(5) == std::vector<Bytes>{{4}});
  CHECK_THROWS(FlashBuffer(0));
}
