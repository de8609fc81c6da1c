#include "geonet/feasibility.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace geonet::energy {

const char* const kConvexityCaveat =
    "transects A and B: power is quadratic in the gradient, so the mean of per-sample power exceeds the power "
    "of the mean gradient; with a small, fluctuating gradient the mean-gradient estimate falls far below the "
    "published yearly power and cannot reproduce it without the raw series";

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw TraceFormatError(line, fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

std::int64_t parse_int(std::string_view s, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw TraceFormatError(line, fmt::format("bad timestamp '{}'", s));
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Acc {
  std::size_t n = 0;
  double dt = 0.0;
  double dt_teg = 0.0;
  double power = 0.0;
};

}  // namespace

std::vector<TemperatureSample> parse_temperature_csv(std::string_view text) {
  std::vector<TemperatureSample> out;
  std::map<std::string, std::int64_t> last;
  std::size_t line_no = 0;
  bool header = false;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto cols = split(line);
    if (!header) {
      if (cols.size() != 4 || cols[0] != "timestamp_unix" || cols[1] != "transect" || cols[2] != "t_soil_c" ||
          cols[3] != "t_air_c") {
        throw TraceFormatError(line_no, "expected header timestamp_unix,transect,t_soil_c,t_air_c");
      }
      header = true;
      continue;
    }
    if (cols.size() != 4) throw TraceFormatError(line_no, fmt::format("expected 4 columns, got {}", cols.size()));
    TemperatureSample s;
    s.timestamp = parse_int(cols[0], line_no);
    s.transect = std::string(cols[1]);
    if (s.transect.empty()) throw TraceFormatError(line_no, "empty transect");
    s.t_soil_c = parse_double(cols[2], line_no, "t_soil_c");
    s.t_air_c = parse_double(cols[3], line_no, "t_air_c");
    auto it = last.find(s.transect);
    if (it != last.end() && s.timestamp <= it->second) {
      throw TraceFormatError(line_no, fmt::format("timestamp {} not after {} for transect {}", s.timestamp,
                                                  it->second, s.transect));
    }
    last[s.transect] = s.timestamp;
    out.push_back(std::move(s));
  }
  if (out.empty()) throw EmptyTrace();
  return out;
}

std::vector<TemperatureSample> load_temperature_csv(const std::string& path) {
  return parse_temperature_csv(read_file(path));
}

FeasibilityParams reference_params() {
  FeasibilityParams p;
  p.stack = ThermalStack::reference();
  p.teg.alpha_v_per_k = 0.040;
  p.teg.r_elec_ohm = calibrate_r_elec(29.0, 24.27e-3, p.stack, p.teg.alpha_v_per_k);
  p.r_elec_source = "calibrated";
  return p;
}

FeasibilityParams parse_params_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(fmt::format("params: invalid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw std::invalid_argument("params: expected a JSON object");

  auto number = [](const json& v, const char* key) {
    if (!v.is_number()) throw std::invalid_argument(fmt::format("params: '{}' must be a number", key));
    return v.get<double>();
  };
  auto field = [&](const json& obj, const char* key) {
    if (!obj.contains(key)) throw std::invalid_argument(fmt::format("params: missing '{}'", key));
    return number(obj.at(key), key);
  };
  auto conductivity = [&](const json& obj) {
    return obj.contains("conductivity") ? number(obj["conductivity"], "conductivity") : kCopperConductivity;
  };

  FeasibilityParams p;
  try {
    for (const auto& [key, _] : doc.items()) {
      static const std::array<std::string_view, 9> known{"r_hs", "r_teg_th", "r_tp", "r_cplt", "r_crod",
                                                          "alpha_v_per_k", "r_elec_ohm", "calibration",
                                                          "description"};
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw std::invalid_argument(fmt::format("params: unknown key '{}'", key));
      }
    }
    p.stack.r_hs = field(doc, "r_hs");
    p.stack.r_teg_th = field(doc, "r_teg_th");

    if (!doc.contains("r_tp")) throw std::invalid_argument("params: missing 'r_tp'");
    if (doc["r_tp"].is_object()) {
      const auto& g = doc["r_tp"];
      p.stack.r_tp = r_interface(field(g, "areal_k_in2_per_w"), field(g, "area_m2"));
    } else {
      p.stack.r_tp = number(doc["r_tp"], "r_tp");
    }

    if (!doc.contains("r_cplt")) throw std::invalid_argument("params: missing 'r_cplt'");
    if (doc["r_cplt"].is_object()) {
      const auto& g = doc["r_cplt"];
      p.stack.r_cplt = r_plate(field(g, "thickness_m"), field(g, "width_m"), field(g, "height_m"), conductivity(g));
    } else {
      p.stack.r_cplt = number(doc["r_cplt"], "r_cplt");
    }

    if (!doc.contains("r_crod")) throw std::invalid_argument("params: missing 'r_crod'");
    if (doc["r_crod"].is_object()) {
      const auto& g = doc["r_crod"];
      p.stack.r_crod = r_cylinder(field(g, "diameter_m"), field(g, "length_m"), conductivity(g));
    } else {
      p.stack.r_crod = number(doc["r_crod"], "r_crod");
    }

    p.teg.alpha_v_per_k = field(doc, "alpha_v_per_k");
    p.stack.validate();

    if (doc.contains("r_elec_ohm")) {
      p.teg.r_elec_ohm = number(doc["r_elec_ohm"], "r_elec_ohm");
      p.r_elec_source = "given";
    } else if (doc.contains("calibration")) {
      const auto& c = doc["calibration"];
      p.teg.r_elec_ohm =
          calibrate_r_elec(field(c, "mean_dt_c"), field(c, "mean_power_mw") * 1e-3, p.stack, p.teg.alpha_v_per_k);
      p.r_elec_source = "calibrated";
    } else {
      throw std::invalid_argument("params: need 'r_elec_ohm' or a 'calibration' object");
    }
    p.teg.validate();
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("params: {}", e.what()));
  }
  return p;
}

FeasibilityParams load_params_json(const std::string& path) { return parse_params_json(read_file(path)); }

std::string utc_date(std::int64_t unix_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{unix_seconds}};
  const year_month_day ymd{floor<days>(tp)};
  return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

double sample_power(const TemperatureSample& s, const FeasibilityParams& params, bool clamp_positive) {
  const double gradient = s.t_soil_c - s.t_air_c;
  if (clamp_positive && gradient <= 0.0) return 0.0;
  return teg_power(delta_t_teg(gradient, params.stack), params.teg);
}

FeasibilityReport analyze_trace(const std::vector<TemperatureSample>& samples, const FeasibilityParams& params,
                                const AnalyzeOptions& options) {
  if (samples.empty()) throw EmptyTrace();
  params.stack.validate();
  params.teg.validate();

  std::map<std::pair<std::string, std::string>, Acc> daily;  // (transect, date)
  std::map<std::string, Acc> yearly;
  for (const auto& s : samples) {
    const double dt = s.t_soil_c - s.t_air_c;
    const double dt_teg = delta_t_teg(dt, params.stack);
    const double p = sample_power(s, params, options.clamp_positive);
    for (Acc* a : {&daily[{s.transect, utc_date(s.timestamp)}], &yearly[s.transect]}) {
      ++a->n;
      a->dt += dt;
      a->dt_teg += dt_teg;
      a->power += p;
    }
  }

  FeasibilityReport r;
  r.clamp_positive = options.clamp_positive;
  r.node_mean_power_w = options.node_mean_power_w;
  for (const auto& [key, a] : daily) {
    const double n = static_cast<double>(a.n);
    r.daily.push_back({key.second, key.first, a.n, a.dt / n, a.dt_teg / n, a.power / n});
  }
  std::stable_sort(r.daily.begin(), r.daily.end(),
                   [](const DailyMean& x, const DailyMean& y) { return x.date < y.date; });
  for (const auto& [transect, a] : yearly) {
    const double n = static_cast<double>(a.n);
    YearlyMean y{transect, a.n, a.dt / n, a.dt_teg / n, a.power / n, 0.0, std::nullopt};
    TemperatureSample mean_sample{0, transect, y.mean_dt_c, 0.0};
    y.power_at_mean_dt_w = sample_power(mean_sample, params, options.clamp_positive);
    if (options.node_mean_power_w) y.feasible = y.mean_power_w >= *options.node_mean_power_w;
    r.yearly.push_back(y);
  }
  return r;
}

void write_report_csv(const FeasibilityReport& report, std::ostream& out) {
  out << "date,transect,mean_dt_c,mean_dt_teg_k,mean_power_mw\n";
  for (const auto& d : report.daily) {
    out << fmt::format("{},{},{:.6f},{:.6f},{:.6f}\n", d.date, d.transect, d.mean_dt_c, d.mean_dt_teg_k,
                       d.mean_power_w * 1e3);
  }
  out << '\n';
  out << "# yearly means over all per-sample values (not the mean of daily means)"
      << (report.clamp_positive ? "; reversed gradients clamped to zero power" : "") << '\n';
  out << "transect,samples,mean_dt_c,mean_dt_teg_k,mean_power_mw,power_at_mean_dt_mw,feasible\n";
  for (const auto& y : report.yearly) {
    out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", y.transect, y.samples, y.mean_dt_c,
                       y.mean_dt_teg_k, y.mean_power_w * 1e3, y.power_at_mean_dt_w * 1e3,
                       y.feasible ? (*y.feasible ? "yes" : "no") : "");
  }
}

const std::vector<ReferenceTransect>& reference_transects() {
  static const std::vector<ReferenceTransect> table{
      {'A', 1.78, 0.572}, {'B', 4.31, 0.867}, {'C', 15.29, 7.05},
      {'D', 14.99, 6.93}, {'E', 29.0, 24.27}, {'F', 27.3, 21.3},
  };
  return table;
}

std::vector<CrossCheckRow> cross_check(const FeasibilityParams& params, double tolerance) {
  std::vector<CrossCheckRow> rows;
  for (const auto& t : reference_transects()) {
    CrossCheckRow r;
    r.label = t.label;
    r.gradient_c = t.gradient_c;
    r.reference_mw = t.power_mw;
    r.predicted_mw = teg_power(delta_t_teg(t.gradient_c, params.stack), params.teg) * 1e3;
    r.relative_error = (r.predicted_mw - r.reference_mw) / r.reference_mw;
    r.within_tolerance = std::abs(r.relative_error) <= tolerance;
    r.expected_reproducible = t.label != 'A' && t.label != 'B';
    rows.push_back(r);
  }
  return rows;
}

}  // namespace geonet::energy
