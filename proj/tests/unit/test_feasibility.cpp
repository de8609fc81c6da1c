#include "geonet/feasibility.hpp"
#include "support/gen.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace geonet::energy;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

std::vector<TemperatureSample> series(const std::string& transect, std::int64_t start, std::int64_t step, int n,
                                      auto gradient) {
  std::vector<TemperatureSample> out;
  for (int i = 0; i < n; ++i) {
    const double g = gradient(i);
    out.push_back({start + i * step, transect, 10.0 + g, 10.0});
  }
  return out;
}

}  // namespace

TEST_CASE("trace CSV parsing", "[feasibility]") {
  const auto s = parse_temperature_csv(
      "timestamp_unix,transect,t_soil_c,t_air_c\n"
      "1609459200,E,30.5,1.5\n"
      "1609459200,A,2.0,0.5\r\n"
      "\n"
      "1609462800,E,31.0,2.0\n");
  REQUIRE(s.size() == 3);
  CHECK(s[1].transect == "A");
  CHECK(s[2].t_air_c == 2.0);

  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_temperature_csv(text);
    } catch (const TraceFormatError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("timestamp_unix,transect,t_soil_c,t_air_c\n1,E,1,x\n") == 2);
  CHECK(line_of("timestamp_unix,transect,t_soil_c,t_air_c\n1,E,1,1\n2,E,1\n") == 3);
  CHECK(line_of("timestamp_unix,transect,t_soil_c,t_air_c\n5,E,1,1\n5,E,1,1\n") == 3);
  CHECK(line_of("time,transect,t_soil_c,t_air_c\n") == 1);
  CHECK_THROWS_AS(parse_temperature_csv(""), EmptyTrace);
  CHECK_THROWS_WITH(parse_temperature_csv("timestamp_unix,transect,t_soil_c,t_air_c\n"), "no samples");
}

TEST_CASE("utc day grouping", "[feasibility]") {
  CHECK(utc_date(0) == "1970-01-01");
  CHECK(utc_date(1609459199) == "2020-12-31");
  CHECK(utc_date(1609459200) == "2021-01-01");
  CHECK(utc_date(1625097600) == "2021-07-01");
}

TEST_CASE("constant trace reproduces the point value", "[feasibility]") {
  const auto p = reference_params();
  const auto samples = series("E", 1609459200, 3600, 365 * 24, [](int) { return 29.0; });
  const auto r = analyze_trace(samples, p);
  REQUIRE(r.yearly.size() == 1);
  CHECK(r.daily.size() == 365);
  CHECK_THAT(r.yearly[0].mean_power_w, WithinRel(24.27e-3, 1e-9));
  CHECK_THAT(r.yearly[0].power_at_mean_dt_w, WithinRel(24.27e-3, 1e-9));
  CHECK_THAT(r.yearly[0].mean_dt_teg_k, WithinRel(14.9635388, 1e-8));
}

TEST_CASE("sinusoidal gradient: mean power exceeds power of the mean", "[feasibility]") {
  const auto p = reference_params();
  const auto samples =
      series("C", 0, 600, 144 * 30, [](int i) { return 10.0 + 5.0 * std::sin(2 * std::numbers::pi * i / 144.0); });
  const auto y = analyze_trace(samples, p).yearly.at(0);
  CHECK(y.mean_power_w > y.power_at_mean_dt_w);
  // E[(10+5 sin)^2] = 100 + 12.5
  CHECK_THAT(y.mean_power_w / y.power_at_mean_dt_w, WithinRel(112.5 / 100.0, 1e-9));
}

TEST_CASE("single sample", "[feasibility]") {
  const auto p = reference_params();
  const auto r = analyze_trace({{1625097600, "B", 9.0, 4.0}}, p);
  REQUIRE(r.daily.size() == 1);
  CHECK(r.daily[0].mean_power_w == r.yearly[0].mean_power_w);
  CHECK(r.daily[0].date == "2021-07-01");
  CHECK_THROWS_AS(analyze_trace({}, p), EmptyTrace);
}

TEST_CASE("yearly mean is over samples, not days", "[feasibility]") {
  const auto p = reference_params();
  std::vector<TemperatureSample> s{{0, "A", 12, 10}, {100, "A", 12, 10}, {100000, "A", 18, 10}};
  const auto r = analyze_trace(s, p);
  CHECK_THAT(r.yearly[0].mean_dt_c, WithinRel(4.0, 1e-12));
  CHECK(r.daily.size() == 2);
}

TEST_CASE("clamp-positive zeroes reversed gradients", "[feasibility]") {
  const auto p = reference_params();
  const auto samples = series("D", 0, 3600, 48, [](int i) { return -1.0 - i % 5; });
  const auto as_written = analyze_trace(samples, p);
  AnalyzeOptions clamp;
  clamp.clamp_positive = true;
  const auto clamped = analyze_trace(samples, p, clamp);
  CHECK(as_written.yearly[0].mean_power_w > 0.0);
  CHECK(clamped.yearly[0].mean_power_w == 0.0);
  for (const auto& d : clamped.daily) CHECK(d.mean_power_w == 0.0);
}

TEST_CASE("property: mean of power never below power of mean", "[feasibility]") {
  const auto p = reference_params();
  geonet::testing::Gen g(4);
  for (int trace = 0; trace < 300; ++trace) {
    const int n = static_cast<int>(g.range(1, 200));
    const bool constant = g.range(0, 9) == 0;
    const double base = g.real(-5, 30);
    std::vector<double> grads;
    for (int i = 0; i < n; ++i) grads.push_back(constant ? base : base + g.real(-10, 10));
    const auto s = series("X", 0, 60, n, [&](int i) { return grads[static_cast<std::size_t>(i)]; });
    const auto y = analyze_trace(s, p).yearly.at(0);
    REQUIRE(y.mean_power_w >= y.power_at_mean_dt_w * (1 - 1e-12));
    if (constant || n == 1) REQUIRE_THAT(y.mean_power_w, WithinRel(y.power_at_mean_dt_w, 1e-12));
  }
}

TEST_CASE("report CSV layout", "[feasibility]") {
  const auto p = reference_params();
  AnalyzeOptions o;
  o.node_mean_power_w = 1e-3;
  const auto r = analyze_trace({{0, "A", 11, 10}, {86400, "F", 40, 10}}, p, o);
  std::ostringstream out;
  write_report_csv(r, out);
  const std::string text = out.str();
  CHECK(text.rfind("date,transect,mean_dt_c,mean_dt_teg_k,mean_power_mw\n", 0) == 0);
  CHECK_THAT(text, ContainsSubstring("\n\n# yearly means over all per-sample values"));
  CHECK_THAT(text, ContainsSubstring("A,1,1.000000,"));
  CHECK_THAT(text, ContainsSubstring(",no\n"));
  CHECK_THAT(text, ContainsSubstring(",yes\n"));

  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line) && !line.empty()) {
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
}

TEST_CASE("params JSON", "[feasibility]") {
  const auto p = parse_params_json(R"({
    "r_hs": 0.65, "r_teg_th": 1.58,
    "r_tp": {"areal_k_in2_per_w": 0.005, "area_m2": 0.0016},
    "r_cplt": {"thickness_m": 0.0008, "width_m": 0.04, "height_m": 0.04},
    "r_crod": {"diameter_m": 0.02, "length_m": 0.1, "conductivity": 385},
    "alpha_v_per_k": 0.04,
    "calibration": {"mean_dt_c": 29.0, "mean_power_mw": 24.27}})");
  CHECK_THAT(p.teg.r_elec_ohm, WithinRel(3.69027596, 1e-8));
  CHECK(p.r_elec_source == "calibrated");

  const auto q = parse_params_json(
      R"({"r_hs":1,"r_teg_th":1,"r_tp":0,"r_cplt":0.001,"r_crod":0.8,"alpha_v_per_k":0.04,"r_elec_ohm":2})");
  CHECK(q.teg.r_elec_ohm == 2.0);
  CHECK_THROWS_AS(parse_params_json(R"({"r_hs":1})"), std::invalid_argument);
  CHECK_THROWS_AS(
      parse_params_json(
          R"({"r_hs":1,"r_teg_th":1,"r_tp":0,"r_cplt":0.001,"r_crod":0.8,"alpha_v_per_k":0.04,"r_elec_ohm":2,"x":1})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_params_json(R"({"r_hs":-1,"r_teg_th":1,"r_tp":0,"r_cplt":0.001,"r_crod":0.8,"alpha_v_per_k":0.04,"r_elec_ohm":2})"),
      ThermalError);
}

TEST_CASE("cross-check against published yearly means", "[feasibility]") {
  const auto rows = cross_check(reference_params(), 0.10);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    INFO(r.label);
    if (r.expected_reproducible) {
      CHECK(r.within_tolerance);
    } else {
      CHECK_FALSE(r.within_tolerance);
      CHECK(r.predicted_mw < r.reference_mw);
    }
  }
  CHECK_THAT(rows[5].predicted_mw, WithinRel(21.5079528, 1e-7));
  CHECK_THAT(rows[2].predicted_mw, WithinRel(6.74665887, 1e-7));
  CHECK_THAT(rows[3].predicted_mw, WithinRel(6.48450824, 1e-7));
  CHECK_THAT(rows[0].predicted_mw, WithinRel(0.0914352771, 1e-7));
  CHECK_THAT(std::string(kConvexityCaveat), ContainsSubstring("transects A and B"));
}
