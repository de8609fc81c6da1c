#include "geonet/scenario.hpp"

#include "geonet/alp.hpp"
#include "geonet/sensors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

namespace geonet::sim {

using nlohmann::json;

std::size_t ScenarioConfig::node_count() const {
  std::size_t n = 0;
  for (const auto& s : sites) n += s.nodes.size();
  return n;
}

namespace {

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw InvalidScenario(fmt::format("{} must be an object", where));
  for (const auto& [key, _] : obj.items()) {
    bool ok = key == "description" || key == "comment";
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidScenario(fmt::format("{}: unknown key '{}'", where, key));
  }
}

std::int64_t seconds_to_ms(const json& v, std::string_view what) {
  if (!v.is_number()) throw InvalidScenario(fmt::format("{} must be a number", what));
  const double s = v.get<double>();
  if (!std::isfinite(s) || s < 0) throw InvalidScenario(fmt::format("{} must be a non-negative number", what));
  return std::llround(s * 1000.0);
}

template <typename T>
T integer(const json& v, std::string_view what) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw InvalidScenario(fmt::format("{} must be an integer", what));
  }
  if (v.is_number_unsigned()) {
    auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
      throw InvalidScenario(fmt::format("{} out of range", what));
    }
    return static_cast<T>(u);
  }
  auto i = v.get<std::int64_t>();
  if (i < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
      (i > 0 && static_cast<std::uint64_t>(i) > static_cast<std::uint64_t>(std::numeric_limits<T>::max()))) {
    throw InvalidScenario(fmt::format("{} out of range", what));
  }
  return static_cast<T>(i);
}

std::int64_t amps_to_na(const json& v, double scale, std::string_view what) {
  if (!v.is_number()) throw InvalidScenario(fmt::format("{} must be a number", what));
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < 0) throw InvalidScenario(fmt::format("{} must be non-negative", what));
  return std::llround(x * scale);
}

void parse_power(const json& p, PowerProfile& out) {
  check_keys(p, "power_profile",
             {"sleep_ua", "transmit_ma", "transmit_ms", "listen_ma", "listen_ms", "sampling_ma",
              "sampling_onewire_ms", "sampling_sdi12_ms"});
  if (p.contains("sleep_ua")) out.sleep_na = amps_to_na(p["sleep_ua"], 1e3, "sleep_ua");
  if (p.contains("transmit_ma")) out.transmit_na = amps_to_na(p["transmit_ma"], 1e6, "transmit_ma");
  if (p.contains("listen_ma")) out.listen_na = amps_to_na(p["listen_ma"], 1e6, "listen_ma");
  if (p.contains("sampling_ma")) out.sampling_na = amps_to_na(p["sampling_ma"], 1e6, "sampling_ma");
  if (p.contains("transmit_ms")) out.transmit_ms = integer<std::int64_t>(p["transmit_ms"], "transmit_ms");
  if (p.contains("listen_ms")) out.listen_ms = integer<std::int64_t>(p["listen_ms"], "listen_ms");
  if (p.contains("sampling_onewire_ms")) out.sampling_onewire_ms = integer<std::int64_t>(p["sampling_onewire_ms"], "sampling_onewire_ms");
  if (p.contains("sampling_sdi12_ms")) out.sampling_sdi12_ms = integer<std::int64_t>(p["sampling_sdi12_ms"], "sampling_sdi12_ms");
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidScenario(fmt::format("scenario is not valid JSON: {}", e.what()));
  }

  ScenarioConfig sc;
  sc.base_dir = base_dir;
  try {
    check_keys(doc, "scenario",
               {"seed", "duration_s", "epoch_unix", "listen_interval_s", "downlink_ttl_s", "watchdog_period_s",
                "buffer_capacity", "flush_batch", "battery_capacity_ah", "battery_voltage_v", "power_profile",
                "sites", "hangs", "downlinks"});
    if (!doc.contains("seed")) throw InvalidScenario("missing 'seed'");
    if (!doc.contains("duration_s")) throw InvalidScenario("missing 'duration_s'");
    if (!doc.contains("sites")) throw InvalidScenario("missing 'sites'");

    sc.seed = integer<std::uint64_t>(doc["seed"], "seed");
    sc.duration_ms = seconds_to_ms(doc["duration_s"], "duration_s");
    if (doc.contains("epoch_unix")) sc.epoch_unix = integer<std::uint32_t>(doc["epoch_unix"], "epoch_unix");
    if (doc.contains("listen_interval_s")) sc.listen_interval_ms = seconds_to_ms(doc["listen_interval_s"], "listen_interval_s");
    if (doc.contains("downlink_ttl_s")) sc.downlink_ttl_ms = seconds_to_ms(doc["downlink_ttl_s"], "downlink_ttl_s");
    if (doc.contains("watchdog_period_s")) sc.watchdog_period_ms = seconds_to_ms(doc["watchdog_period_s"], "watchdog_period_s");
    if (doc.contains("buffer_capacity")) sc.buffer_capacity = integer<std::size_t>(doc["buffer_capacity"], "buffer_capacity");
    if (doc.contains("flush_batch")) sc.flush_batch = integer<std::size_t>(doc["flush_batch"], "flush_batch");
    if (doc.contains("battery_capacity_ah")) sc.battery_capacity_ah = doc["battery_capacity_ah"].get<double>();
    if (doc.contains("battery_voltage_v")) sc.battery_voltage_v = doc["battery_voltage_v"].get<double>();
    if (doc.contains("power_profile")) parse_power(doc["power_profile"], sc.power);

    if (!doc["sites"].is_array()) throw InvalidScenario("'sites' must be an array");
    for (const auto& s : doc["sites"]) {
      check_keys(s, "site", {"site_id", "gateway_id", "link", "nodes"});
      SiteSpec site;
      if (!s.contains("site_id") || !s["site_id"].is_string()) throw InvalidScenario("site without string 'site_id'");
      site.site_id = s["site_id"].get<std::string>();
      site.gateway_id = s.value("gateway_id", "gw-" + site.site_id);
      if (s.contains("link")) {
        const auto& l = s["link"];
        check_keys(l, "link", {"loss_probability", "latency_ms", "max_payload", "max_downlink_attempts"});
        if (l.contains("loss_probability")) {
          if (!l["loss_probability"].is_number()) throw InvalidScenario("loss_probability must be a number");
          site.link.loss_probability = l["loss_probability"].get<double>();
        }
        if (l.contains("latency_ms")) site.link.latency_ms = integer<std::int64_t>(l["latency_ms"], "latency_ms");
        if (l.contains("max_payload")) site.link.max_payload = integer<std::size_t>(l["max_payload"], "max_payload");
        if (l.contains("max_downlink_attempts")) {
          site.link.max_downlink_attempts = integer<std::uint32_t>(l["max_downlink_attempts"], "max_downlink_attempts");
        }
      }
      if (!s.contains("nodes") || !s["nodes"].is_array()) {
        throw InvalidScenario(fmt::format("site {}: 'nodes' must be an array", site.site_id));
      }
      for (const auto& n : s["nodes"]) {
        check_keys(n, "node", {"uid", "transect", "sensor_type", "sensor_address", "sampling_rate_s", "trace"});
        NodeSpec ns;
        if (!n.contains("uid")) throw InvalidScenario(fmt::format("site {}: node without 'uid'", site.site_id));
        ns.uid = integer<std::uint64_t>(n["uid"], "uid");
        ns.transect = n.value("transect", "");
        if (n.contains("sensor_type")) ns.sensor_type = integer<std::uint8_t>(n["sensor_type"], "sensor_type");
        if (n.contains("sensor_address")) ns.sensor_address = integer<std::uint16_t>(n["sensor_address"], "sensor_address");
        if (n.contains("sampling_rate_s")) ns.sampling_rate_s = integer<std::uint32_t>(n["sampling_rate_s"], "sampling_rate_s");
        if (n.contains("trace") && !n["trace"].is_null()) ns.trace = n["trace"].get<std::string>();
        site.nodes.push_back(std::move(ns));
      }
      sc.sites.push_back(std::move(site));
    }

    if (doc.contains("hangs")) {
      for (const auto& h : doc["hangs"]) {
        check_keys(h, "hang", {"uid", "at_s"});
        sc.hangs.push_back({integer<std::uint64_t>(h.at("uid"), "hang uid"), seconds_to_ms(h.at("at_s"), "hang at_s")});
      }
    }
    if (doc.contains("downlinks")) {
      for (const auto& d : doc["downlinks"]) {
        check_keys(d, "downlink", {"uid", "at_s", "hex"});
        DownlinkSpec ds;
        ds.uid = integer<std::uint64_t>(d.at("uid"), "downlink uid");
        ds.at_ms = seconds_to_ms(d.at("at_s"), "downlink at_s");
        try {
          ds.command = from_hex(d.at("hex").get<std::string>());
        } catch (const std::invalid_argument& e) {
          throw InvalidScenario(fmt::format("downlink to {}: {}", ds.uid, e.what()));
        }
        sc.downlinks.push_back(std::move(ds));
      }
    }
  } catch (const json::exception& e) {
    throw InvalidScenario(fmt::format("scenario: {}", e.what()));
  }

  validate_scenario(sc);
  return sc;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidScenario(fmt::format("cannot open scenario '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = std::filesystem::path(path).parent_path().string();
  return parse_scenario(ss.str(), dir.empty() ? "." : dir);
}

std::string resolve_trace_path(const ScenarioConfig& scenario, const std::string& trace) {
  std::filesystem::path p(trace);
  if (p.is_absolute()) return p.string();
  return (std::filesystem::path(scenario.base_dir) / p).string();
}

void validate_scenario(const ScenarioConfig& sc) {
  if (sc.duration_ms <= 0) throw InvalidScenario("duration_s must be positive");
  if (sc.listen_interval_ms <= 0) throw InvalidScenario("listen_interval_s must be positive");
  if (sc.power.listen_ms >= sc.listen_interval_ms) throw InvalidScenario("listen sniff must be shorter than listen_interval_s");
  if (sc.downlink_ttl_ms <= 0) throw InvalidScenario("downlink_ttl_s must be positive");
  if (sc.watchdog_period_ms <= 0) throw InvalidScenario("watchdog_period_s must be positive");
  if (sc.buffer_capacity == 0) throw InvalidScenario("buffer_capacity must be positive");
  if (sc.flush_batch == 0) throw InvalidScenario("flush_batch must be positive");
  if (!(sc.battery_capacity_ah > 0) || !(sc.battery_voltage_v > 0)) throw InvalidScenario("battery parameters must be positive");
  if (sc.sites.empty()) throw InvalidScenario("scenario has no sites");

  std::set<std::uint64_t> uids;
  std::set<std::string> site_ids;
  const auto registry = node::DriverRegistry::with_defaults();
  for (const auto& s : sc.sites) {
    if (s.site_id.empty()) throw InvalidScenario("empty site_id");
    if (!site_ids.insert(s.site_id).second) throw InvalidScenario(fmt::format("duplicate site_id {}", s.site_id));
    if (s.gateway_id.empty()) throw InvalidScenario(fmt::format("site {}: empty gateway_id", s.site_id));
    if (!(s.link.loss_probability >= 0.0 && s.link.loss_probability <= 1.0)) {
      throw InvalidScenario(fmt::format("site {}: loss_probability must be in [0,1]", s.site_id));
    }
    if (s.link.latency_ms < 0) throw InvalidScenario(fmt::format("site {}: negative latency_ms", s.site_id));
    if (s.link.max_payload < 128) throw InvalidScenario(fmt::format("site {}: max_payload must be at least 128", s.site_id));
    for (const auto& n : s.nodes) {
      if (!uids.insert(n.uid).second) throw InvalidScenario(fmt::format("duplicate node uid {}", n.uid));
      if (!registry.contains(n.sensor_type)) {
        throw InvalidScenario(fmt::format("node {}: unknown sensor_type 0x{:02X}", n.uid, n.sensor_type));
      }
      if (!n.trace.empty()) {
        auto path = resolve_trace_path(sc, n.trace);
        if (!std::filesystem::is_regular_file(path)) {
          throw InvalidScenario(fmt::format("node {}: trace '{}' not found", n.uid, path));
        }
      }
    }
  }
  if (uids.empty()) throw InvalidScenario("scenario has no nodes");
  for (const auto& h : sc.hangs) {
    if (!uids.contains(h.uid)) throw InvalidScenario(fmt::format("hang targets unknown node {}", h.uid));
  }
  for (const auto& d : sc.downlinks) {
    if (!uids.contains(d.uid)) throw InvalidScenario(fmt::format("downlink targets unknown node {}", d.uid));
    if (d.command.empty()) throw InvalidScenario(fmt::format("downlink to {} is empty", d.uid));
  }
}

}  // namespace geonet::sim
