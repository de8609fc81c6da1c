#include "geonet/cli.hpp"

#include "geonet/alp.hpp"
#include "geonet/budget.hpp"
#include "geonet/feasibility.hpp"
#include "geonet/netsim.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>

namespace geonet::cli {

namespace {

constexpr int kExitError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

energy::FeasibilityParams params_or_reference(const std::string& path) {
  return path.empty() ? energy::reference_params() : energy::load_params_json(path);
}

void print_stack(const energy::FeasibilityParams& p, std::ostream& out) {
  out << fmt::format("stack: r_hs={:.4f} r_teg_th={:.4f} r_tp={:.6f} r_cplt={:.6f} r_crod={:.6f} K/W "
                     "(divider {:.6f})\n",
                     p.stack.r_hs, p.stack.r_teg_th, p.stack.r_tp, p.stack.r_cplt, p.stack.r_crod, p.stack.divider());
  out << fmt::format("teg: alpha={:.4f} V/K r_elec={:.6f} ohm ({})\n", p.teg.alpha_v_per_k, p.teg.r_elec_ohm,
                     p.r_elec_source);
}

int feas_analyze(const std::string& trace, const std::string& params_path, const std::string& out_path,
                 bool clamp, double node_power_mw, std::ostream& out) {
  const auto params = params_or_reference(params_path);
  const auto samples = energy::load_temperature_csv(trace);
  energy::AnalyzeOptions opts;
  opts.clamp_positive = clamp;
  if (node_power_mw >= 0) opts.node_mean_power_w = node_power_mw * 1e-3;
  const auto report = energy::analyze_trace(samples, params, opts);

  if (!out_path.empty()) {
    const auto parent = std::filesystem::path(out_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream f(out_path);
    if (!f) throw UsageError(fmt::format("cannot write '{}'", out_path));
    energy::write_report_csv(report, f);
  }

  print_stack(params, out);
  out << fmt::format("{} samples, {} transects, {} daily rows{}\n", samples.size(), report.yearly.size(),
                     report.daily.size(), clamp ? ", reversed gradients clamped" : "");
  bool low_gradient = false;
  for (const auto& y : report.yearly) {
    out << fmt::format("transect {}: mean_dt={:.3f} C mean_dt_teg={:.3f} K mean_power={:.4f} mW "
                       "power_at_mean_dt={:.4f} mW{}\n",
                       y.transect, y.mean_dt_c, y.mean_dt_teg_k, y.mean_power_w * 1e3, y.power_at_mean_dt_w * 1e3,
                       y.feasible ? (*y.feasible ? " feasible" : " infeasible") : "");
    low_gradient = low_gradient || y.transect == "A" || y.transect == "B";
  }
  if (low_gradient) out << "note: " << energy::kConvexityCaveat << '\n';
  if (!out_path.empty()) out << "report: " << out_path << '\n';
  return 0;
}

int feas_calibrate(const std::string& params_path, double dt, double power_mw, double tolerance, std::ostream& out) {
  auto params = params_or_reference(params_path);
  params.teg.r_elec_ohm = energy::calibrate_r_elec(dt, power_mw * 1e-3, params.stack, params.teg.alpha_v_per_k);
  params.r_elec_source = "calibrated";
  print_stack(params, out);
  out << fmt::format("calibration: mean_dt={:.3f} C mean_power={:.4f} mW -> dt_teg={:.4f} K r_elec={:.4f} ohm\n", dt,
                     power_mw, energy::delta_t_teg(dt, params.stack), params.teg.r_elec_ohm);
  out << "transect,mean_dt_c,reference_mw,predicted_mw,relative_error,check\n";
  for (const auto& r : energy::cross_check(params, tolerance)) {
    const char* check = !r.expected_reproducible ? "not-reproducible" : (r.within_tolerance ? "ok" : "off");
    out << fmt::format("{},{:.2f},{:.3f},{:.4f},{:+.4f},{}\n", r.label, r.gradient_c, r.reference_mw,
                       r.predicted_mw, r.relative_error, check);
  }
  out << "note: " << energy::kConvexityCaveat << '\n';
  return 0;
}

int sim_run(const std::string& scenario_path, const std::optional<std::uint64_t>& seed, const std::string& out_dir,
            std::ostream& out) {
  auto scenario = sim::load_scenario(scenario_path);
  if (seed) scenario.seed = *seed;

  std::ofstream sink_file;
  std::shared_ptr<backend::TimeSeriesSink> sink;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    sink_file.open(std::filesystem::path(out_dir) / "sink.csv");
    if (!sink_file) throw UsageError(fmt::format("cannot write into '{}'", out_dir));
    sink = std::make_shared<backend::CsvSink>(sink_file);
  }

  sim::Simulator simulator(std::move(scenario), sink);
  const sim::RunLog log = simulator.run();

  double worst_years = std::numeric_limits<double>::infinity();
  double mean_ua = 0.0;
  for (const auto& n : log.nodes) {
    worst_years = std::min(worst_years, n.lifetime_years);
    mean_ua += n.ledger.mean_current_a() * 1e6;
  }
  if (!log.nodes.empty()) mean_ua /= static_cast<double>(log.nodes.size());

  std::ostringstream summary;
  summary << fmt::format("nodes={} horizon_s={} events={} hash={}\n", log.nodes.size(), log.horizon_ms / 1000,
                         log.records.size(), log.hash_hex());
  summary << fmt::format("uplinks attempted={} delivered={} delivery_ratio={:.4f}\n", log.uplinks_attempted(),
                         log.uplinks_delivered(), log.delivery_ratio());
  summary << fmt::format("sink_records={} quarantined={}\n", log.sink_records, log.quarantined);
  summary << fmt::format("mean_node_current={:.3f} uA min_projected_lifetime={:.2f} years\n", mean_ua, worst_years);
  out << summary.str();

  if (!out_dir.empty()) {
    std::ofstream runlog(std::filesystem::path(out_dir) / "runlog.csv");
    log.write(runlog);
    std::ofstream sum(std::filesystem::path(out_dir) / "summary.txt");
    sum << summary.str();
    log.write_summary(sum);
    out << "outputs: " << out_dir << '\n';
  }
  return 0;
}

int proto_encode(const std::vector<std::string>& actions, std::ostream& out) {
  alp::AlpCommand cmd;
  for (const auto& a : actions) cmd.actions.push_back(alp::parse_action(a));
  out << to_hex(alp::encode_command(cmd)) << '\n';
  return 0;
}

int proto_decode(const std::string& hex, bool describe, std::ostream& out) {
  const Bytes bytes = from_hex(hex);
  const auto cmd = alp::decode_command(bytes);
  std::size_t at = 0;
  for (const auto& a : cmd.actions) {
    if (describe) {
      out << fmt::format("[{}..{}) opcode=0x{:02X} ", at, at + a.encoded_size(), static_cast<unsigned>(a.opcode));
    }
    out << alp::describe_action(a) << '\n';
    at += a.encoded_size();
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"geonet: sensor-network simulation, harvesting feasibility and protocol tools", "geonet"};
  app.require_subcommand(1);

  std::string trace, params, report_out, scenario, out_dir, hex;
  std::string calib_params;
  bool clamp = false, describe = false;
  double node_power_mw = -1.0, dt = 29.0, power_mw = 24.27, tolerance = 0.10;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> actions;

  auto* analyze = app.add_subcommand("feas-analyze", "Daily and yearly TEG power from a temperature trace");
  analyze->add_option("--trace", trace, "CSV timestamp_unix,transect,t_soil_c,t_air_c")->required();
  analyze->add_option("--params", params, "Stack/TEG parameter JSON (default: reference build)");
  analyze->add_option("--out", report_out, "Report CSV path");
  analyze->add_flag("--clamp-positive", clamp, "Zero power for reversed gradients");
  analyze->add_option("--node-power-mw", node_power_mw, "Node mean power for per-transect verdicts");

  auto* calibrate = app.add_subcommand("feas-calibrate", "Solve r_elec from a mean gradient/power pair");
  calibrate->add_option("--params", calib_params, "Stack parameter JSON (default: reference build)");
  calibrate->add_option("--dt", dt, "Mean soil-air gradient, C")->capture_default_str();
  calibrate->add_option("--power-mw", power_mw, "Mean power, mW")->capture_default_str();
  calibrate->add_option("--tolerance", tolerance, "Relative tolerance for the cross-check")->capture_default_str();

  auto* simrun = app.add_subcommand("sim-run", "Run a network scenario");
  simrun->add_option("--scenario", scenario, "Scenario JSON")->required();
  simrun->add_option("--seed", seed, "Override the scenario seed");
  simrun->add_option("--out", out_dir, "Directory for runlog.csv, sink.csv, summary.txt");

  auto* encode = app.add_subcommand("proto-encode", "Encode textual actions to hex");
  encode->add_option("actions", actions, "e.g. \"WriteFileData file=0x41 offset=3 len=1 payload=AA\"")
      ->required();

  auto* decode = app.add_subcommand("proto-decode", "Decode a hex command");
  decode->add_option("--hex", hex, "Command bytes in hex")->required();
  decode->add_flag("--describe", describe, "Prefix byte ranges and opcodes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (*analyze) return feas_analyze(trace, params, report_out, clamp, node_power_mw, out);
    if (*calibrate) return feas_calibrate(calib_params, dt, power_mw, tolerance, out);
    if (*simrun) return sim_run(scenario, seed, out_dir, out);
    if (*encode) return proto_encode(actions, out);
    if (*decode) return proto_decode(hex, describe, out);
  } catch (const alp::DecodeError& e) {
    err << fmt::format("error: decode failed at offset {}: {}\n", e.offset(), e.what());
    return kExitError;
  } catch (const energy::EmptyTrace& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace geonet::cli
