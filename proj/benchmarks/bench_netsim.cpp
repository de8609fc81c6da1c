#include "geonet/netsim.hpp"

#include <benchmark/benchmark.h>

using namespace geonet;

namespace {

void BM_ForhotDays(benchmark::State& state) {
  auto sc = sim::load_scenario(GEONET_SCENARIO_DIR "/forhot.json");
  sc.duration_ms = state.range(0) * 86'400'000LL;
  for (auto _ : state) {
    const auto log = sim::run(sc);
    benchmark::DoNotOptimize(log.hash());
  }
}
BENCHMARK(BM_ForhotDays)->Arg(1)->Arg(7)->Unit(benchmark::kMillisecond);

}  // namespace
