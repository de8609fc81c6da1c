#pragma once

#include "geonet/thermal.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geonet::energy {

struct TemperatureSample {
  std::int64_t timestamp = 0;  // Unix seconds
  std::string transect;
  double t_soil_c = 0.0;
  double t_air_c = 0.0;
};

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyTrace : public std::runtime_error {
 public:
  EmptyTrace() : std::runtime_error("no samples") {}
};

/// `timestamp_unix,transect,t_soil_c,t_air_c` with a header row. Timestamps
/// must increase strictly within each transect.
std::vector<TemperatureSample> parse_temperature_csv(std::string_view text);
std::vector<TemperatureSample> load_temperature_csv(const std::string& path);

struct FeasibilityParams {
  ThermalStack stack;
  TegParams teg;
  std::string r_elec_source = "given";  // or "calibrated"
};

/// JSON keys r_hs, r_teg_th, r_tp, r_cplt, r_crod, alpha_v_per_k, r_elec_ohm.
/// r_tp/r_cplt/r_crod may be geometry objects instead of numbers; r_elec_ohm
/// may be replaced by a `calibration` object {mean_dt_c, mean_power_mw}.
FeasibilityParams parse_params_json(std::string_view text);
FeasibilityParams load_params_json(const std::string& path);
/// Reference build, r_elec calibrated on the hottest-transect yearly pair.
FeasibilityParams reference_params();

struct AnalyzeOptions {
  bool clamp_positive = false;  // reversed gradients harvest nothing
  std::optional<double> node_mean_power_w;
};

struct DailyMean {
  std::string date;  // YYYY-MM-DD, UTC
  std::string transect;
  std::size_t samples = 0;
  double mean_dt_c = 0.0;
  double mean_dt_teg_k = 0.0;
  double mean_power_w = 0.0;
};

struct YearlyMean {
  std::string transect;
  std::size_t samples = 0;
  double mean_dt_c = 0.0;
  double mean_dt_teg_k = 0.0;
  double mean_power_w = 0.0;          // mean of per-sample power
  double power_at_mean_dt_w = 0.0;    // power of the mean gradient
  std::optional<bool> feasible;       // against AnalyzeOptions::node_mean_power_w
};

struct FeasibilityReport {
  std::vector<DailyMean> daily;
  std::vector<YearlyMean> yearly;
  bool clamp_positive = false;
  std::optional<double> node_mean_power_w;
};

double sample_power(const TemperatureSample& s, const FeasibilityParams& params, bool clamp_positive);

/// Throws EmptyTrace when `samples` is empty.
FeasibilityReport analyze_trace(const std::vector<TemperatureSample>& samples, const FeasibilityParams& params,
                                const AnalyzeOptions& options = {});

/// Daily rows, a blank line, then the yearly block.
void write_report_csv(const FeasibilityReport& report, std::ostream& out);

std::string utc_date(std::int64_t unix_seconds);

struct ReferenceTransect {
  char label;
  double gradient_c;
  double power_mw;
};

/// Published yearly means per transect (gradient and power).
const std::vector<ReferenceTransect>& reference_transects();

struct CrossCheckRow {
  char label = 'A';
  double gradient_c = 0.0;
  double reference_mw = 0.0;
  double predicted_mw = 0.0;
  double relative_error = 0.0;
  bool within_tolerance = false;
  bool expected_reproducible = true;
};

/// Point estimates from mean gradients against the published powers. A and B
/// are flagged as not reproducible this way.
std::vector<CrossCheckRow> cross_check(const FeasibilityParams& params, double tolerance = 0.10);

extern const char* const kConvexityCaveat;

}  // namespace geonet::energy
