#include "geonet/energy_meter.hpp"
#include "geonet/feasibility.hpp"

#include <benchmark/benchmark.h>

using namespace geonet;

namespace {

// One simulated day of 10-minute wake-ups, then the ledger.
void BM_MeterDay(benchmark::State& state) {
  for (auto _ : state) {
    EnergyMeter m(PowerProfile{}, 1000);
    for (std::int64_t t = 0; t < 86'400'000; t += 600'000) {
      const auto s = m.reserve(Mode::Sampling, t, 300);
      m.reserve(Mode::Transmitting, s + 300, 50);
    }
    benchmark::DoNotOptimize(m.ledger(86'400'000));
  }
}
BENCHMARK(BM_MeterDay);

void BM_AnalyzeYear(benchmark::State& state) {
  std::vector<energy::TemperatureSample> trace;
  for (int i = 0; i < 365 * 48; ++i) {
    trace.push_back({1609459200 + i * 1800LL, "E", 20.0 + (i % 17), 5.0 - (i % 11)});
  }
  const auto params = energy::reference_params();
  for (auto _ : state) benchmark::DoNotOptimize(energy::analyze_trace(trace, params));
}
BENCHMARK(BM_AnalyzeYear)->Unit(benchmark::kMillisecond);

}  // namespace
