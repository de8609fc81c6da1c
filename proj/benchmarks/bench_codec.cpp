#include "geonet/alp.hpp"
#include "geonet/sensors.hpp"

#include <benchmark/benchmark.h>

using namespace geonet;

namespace {

alp::AlpCommand sample_command() {
  alp::AlpCommand cmd;
  cmd.actions.push_back(alp::AlpAction::status(alp::kNodeConfigFile, 3, 1, alp::status::kOk));
  for (int i = 0; i < 6; ++i) cmd.actions.push_back(alp::AlpAction::ret(alp::kSensorDataFile, 0, Bytes(14, 0x5A)));
  return cmd;
}

void BM_EncodeCommand(benchmark::State& state) {
  const auto cmd = sample_command();
  for (auto _ : state) benchmark::DoNotOptimize(alp::encode_command(cmd));
}
BENCHMARK(BM_EncodeCommand);

void BM_DecodeCommand(benchmark::State& state) {
  const auto bytes = alp::encode_command(sample_command());
  for (auto _ : state) benchmark::DoNotOptimize(alp::decode_command(bytes));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_DecodeCommand);

void BM_ReadingRoundtrip(benchmark::State& state) {
  node::SensorReading r{1625097600, 7, node::SensorKind::WeatherStation,
                        {{"air_temperature", 21500}, {"humidity", 55000}, {"pressure", 1013000}, {"wind", 3200}}};
  for (auto _ : state) benchmark::DoNotOptimize(node::decode_reading(node::encode_reading(r), 7));
}
BENCHMARK(BM_ReadingRoundtrip);

}  // namespace
