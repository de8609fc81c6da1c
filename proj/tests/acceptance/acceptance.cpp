// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "geonet/budget.hpp"
#include "geonet/feasibility.hpp"
#include "geonet/netsim.hpp"
#include "geonet/node.hpp"
#include "geonet/thermal.hpp"
#include "support/gen.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

using namespace geonet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail += fmt::format(" (over budget {:.1f} s)", budget_s);
  }
  if (!o.pass) ++failures;
  fmt::print("{} {}: {} [{:.3f} s] {}\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail);
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

bool check_invariants(const sim::RunLog& log, const PowerProfile& profile, std::string& why) {
  for (const auto& n : log.nodes) {
    if (n.counters.uplinks_attempted != n.counters.uplinks_delivered + n.uplinks_dropped) {
      why = fmt::format("uplink conservation broken for {}", n.uid);
      return false;
    }
    if (n.downlinks_queued != n.downlinks_delivered + n.downlinks_dropped + n.downlinks_expired) {
      why = fmt::format("downlink conservation broken for {}", n.uid);
      return false;
    }
    if (n.counters.produced != n.counters.delivered_records + n.buffered + n.overwritten) {
      why = fmt::format("record conservation broken for {}", n.uid);
      return false;
    }
    std::int64_t ms = 0;
    std::int64_t pc = 0;
    for (std::size_t m = 0; m < kModeCount; ++m) {
      ms += n.ledger.mode_ms[m];
      pc += profile.current_na(static_cast<Mode>(m)) * n.ledger.mode_ms[m];
    }
    if (ms != log.horizon_ms) {
      why = fmt::format("ledger of {} covers {} ms of {}", n.uid, ms, log.horizon_ms);
      return false;
    }
    if (pc != n.ledger.total_charge_pc()) {
      why = fmt::format("charge of {} does not match its mode times", n.uid);
      return false;
    }
  }
  return true;
}

sim::ScenarioConfig single_node() {
  sim::ScenarioConfig sc;
  sc.seed = 11;
  sc.duration_ms = 3'600'000;
  sim::SiteSpec site;
  site.site_id = "GO";
  site.gateway_id = "gw-go";
  site.link.loss_probability = 0.0;
  sim::NodeSpec n;
  n.uid = 42;
  n.transect = "C";
  n.sensor_type = 0x01;
  site.nodes.push_back(n);
  sc.sites.push_back(site);
  return sc;
}

}  // namespace

int main() {
  using namespace geonet::energy;
  const std::string forhot = GEONET_SCENARIO_DIR "/forhot.json";

  criterion(1, "conduction resistances", 0, [] {
    const double cyl = r_cylinder(0.02, 0.10, kCopperConductivity);
    const double plate = r_plate(0.0008, 0.04, 0.04, kCopperConductivity);
    return Outcome{within(cyl, 0.815, 0.835) && within(plate, 0.0011, 0.0015),
                   fmt::format("r_cyl={:.6f} K/W r_plate={:.6f} K/W", cyl, plate)};
  });

  criterion(2, "TEG temperature drop at 29 C", 0, [] {
    const double dt = delta_t_teg(29.0, ThermalStack::reference());
    return Outcome{std::abs(dt - 14.96) <= 0.05, fmt::format("dT_teg={:.4f} K", dt)};
  });

  criterion(3, "calibration and cross-check", 0, [] {
    const auto params = reference_params();
    bool ok = std::abs(params.teg.r_elec_ohm - 3.69) <= 0.05;
    std::string detail = fmt::format("r_elec={:.4f} ohm", params.teg.r_elec_ohm);
    for (const auto& row : cross_check(params, 0.10)) {
      if (row.label == 'C' || row.label == 'D' || row.label == 'F') {
        ok = ok && row.within_tolerance;
        detail += fmt::format(" {}={:+.1f}%", row.label, row.relative_error * 100);
      }
    }
    fmt::print("  note: {}\n", kConvexityCaveat);
    return Outcome{ok, detail};
  });

  criterion(4, "mean power is at least power of the mean", 5.0, [] {
    testing::Gen g(0xC0FFEE);
    const auto params = reference_params();
    int strict = 0, equal = 0;
    for (int i = 0; i < 1000; ++i) {
      const bool constant = i % 10 == 0;
      const auto n = static_cast<int>(g.range(2, 60));
      const double base = g.real(-5.0, 40.0);
      std::vector<TemperatureSample> trace;
      for (int k = 0; k < n; ++k) {
        const double grad = constant ? base : g.real(-5.0, 40.0);
        trace.push_back({1625097600 + k * 600, "E", 10.0 + grad, 10.0});
      }
      const auto y = analyze_trace(trace, params).yearly.at(0);
      const double tol = 1e-12 * std::max(std::abs(y.mean_power_w), 1e-30);
      if (y.mean_power_w + tol < y.power_at_mean_dt_w) {
        return Outcome{false, fmt::format("trace {} violates the bound", i)};
      }
      const bool is_equal = std::abs(y.mean_power_w - y.power_at_mean_dt_w) <= tol;
      if (is_equal != constant) {
        return Outcome{false, fmt::format("trace {}: equality={} constant={}", i, is_equal, constant)};
      }
      (is_equal ? equal : strict)++;
    }
    return Outcome{true, fmt::format("{} strict, {} equal (constant)", strict, equal)};
  });

  criterion(5, "battery lifetime", 1.0, [&] {
    const auto sleep = battery_lifetime(PowerProfileBudget::sleep_only());
    bool ok = std::abs(sleep.lifetime_hours / 1.9e6 - 1.0) <= 1e-3;
    const auto log = sim::run(sim::load_scenario(forhot));
    double worst = 1e300;
    for (const auto& n : log.nodes) worst = std::min(worst, n.lifetime_years);
    ok = ok && worst >= 3.0;
    return Outcome{ok, fmt::format("sleep-only={:.0f} h ({:.1f} y) forhot min={:.2f} y", sleep.lifetime_hours,
                                   sleep.lifetime_years, worst)};
  });

  criterion(6, "protocol roundtrip and config isolation", 5.0, [] {
    testing::Gen g(0xA1F);
    for (int i = 0; i < 10'000; ++i) {
      const auto cmd = g.command();
      const auto bytes = alp::encode_command(cmd);
      if (!(alp::decode_command(bytes) == cmd)) return Outcome{false, fmt::format("roundtrip {} differs", i)};
    }
    auto registry = std::make_shared<const node::DriverRegistry>(node::DriverRegistry::with_defaults());
    for (int i = 0; i < 10'000; ++i) {
      node::NodeParams p;
      p.config = g.config();
      p.config.sensor_type = static_cast<std::uint8_t>(g.range(1, 3));
      p.config.sampling_rate = static_cast<std::uint32_t>(g.range(1, 100000));
      node::Node n(p, registry, node::SyntheticEnvironment::for_transect("A"), PowerProfile{}, 1000);
      n.boot(0);
      const auto before = node::serialize_node_config(p.config);
      const std::uint8_t v = g.byte();
      n.handle_downlink(1000, alp::encode_command({{alp::AlpAction::write(alp::kNodeConfigFile, 3, {v})}}));
      const auto after = n.store().content(alp::kNodeConfigFile);
      for (std::size_t b = 0; b < node::kNodeConfigSize; ++b) {
        if (after[b] != (b == 3 ? v : before[b])) return Outcome{false, fmt::format("write {} touched byte {}", i, b)};
      }
    }
    return Outcome{true, "10000 commands, 10000 offset-3 writes"};
  });

  criterion(7, "remote measure-now and config read", 2.0, [] {
    auto sink = std::make_shared<backend::MemorySink>();
    sim::Simulator s(single_node(), sink);
    s.run_until(100'000);
    const auto before = sink->records().size();
    const auto queued_at = s.now_ms();
    const auto ack = s.backend().remote_write_file(42, alp::kNodeConfigFile, 3, Bytes{0xAA}, 60'000);
    if (ack.status != alp::status::kOk) return Outcome{false, "write not acknowledged"};
    std::int64_t delivered_at = -1;
    for (const auto& r : s.log()) {
      if (r.kind == sim::EventKind::ListenWindow && r.time_ms >= queued_at &&
          r.detail.find("result=delivered") != std::string::npos) {
        delivered_at = r.time_ms;
        break;
      }
    }
    s.run_until(200'000);
    const auto extra = sink->records().size() - before;
    if (extra != 1 || delivered_at < 0) return Outcome{false, fmt::format("{} extra readings", extra)};
    const std::int64_t ts = sink->records().back().timestamp;
    const double expect_s = s.scenario().epoch_unix + delivered_at / 1000.0;
    const double slack_s = s.scenario().listen_interval_ms / 1000.0;
    const bool ts_ok = std::abs(static_cast<double>(ts) - expect_s) <= slack_s;

    const Bytes got = s.backend().remote_read_file(42, alp::kNodeConfigFile, 0, 12, 60'000);
    const auto expect = node::serialize_node_config(s.node(42).config());
    const bool read_ok = got == Bytes(expect.begin(), expect.end());
    return Outcome{ts_ok && read_ok,
                   fmt::format("delivered at {} ms, reading ts={} config read {}", delivered_at, ts,
                               read_ok ? "exact" : "differs")};
  });

  criterion(8, "deterministic full-scale run", 30.0, [&] {
    const auto sc = sim::load_scenario(forhot);
    const auto a = sim::run(sc);
    const auto b = sim::run(sc);
    std::string why;
    const bool inv = check_invariants(a, sc.power, why);
    const bool same = a.hash() == b.hash() && a.records.size() == b.records.size();
    return Outcome{same && inv, fmt::format("nodes={} events={} hash={} {}", a.nodes.size(), a.records.size(),
                                            a.hash_hex(), inv ? "invariants hold" : why)};
  });

  fmt::print("{} of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
