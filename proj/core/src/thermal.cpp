#include "geonet/thermal.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace geonet::energy {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ThermalError(ThermalErrc::NonPositiveArgument, fmt::format("{} must be positive, got {}", name, v));
  }
}

}  // namespace

double r_cylinder(double diameter_m, double length_m, double conductivity) {
  require_positive(diameter_m, "diameter");
  require_positive(length_m, "length");
  require_positive(conductivity, "conductivity");
  const double radius = diameter_m / 2.0;
  return length_m / (conductivity * std::numbers::pi * radius * radius);
}

double r_plate(double thickness_m, double width_m, double height_m, double conductivity) {
  require_positive(thickness_m, "thickness");
  require_positive(width_m, "width");
  require_positive(height_m, "height");
  require_positive(conductivity, "conductivity");
  return thickness_m / (conductivity * width_m * height_m);
}

double r_interface(double areal_k_in2_per_w, double area_m2) {
  require_positive(area_m2, "area");
  if (!(areal_k_in2_per_w >= 0.0) || !std::isfinite(areal_k_in2_per_w)) {
    throw ThermalError(ThermalErrc::NonPositiveArgument, "areal resistance must be non-negative");
  }
  return areal_k_in2_per_w / (area_m2 / kSquareInchM2);
}

void ThermalStack::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ThermalError(ThermalErrc::InvalidStack, fmt::format("{} must be positive, got {}", name, v));
    }
  };
  positive(r_hs, "r_hs");
  positive(r_teg_th, "r_teg_th");
  positive(r_cplt, "r_cplt");
  positive(r_crod, "r_crod");
  if (!(r_tp >= 0.0) || !std::isfinite(r_tp)) {
    throw ThermalError(ThermalErrc::InvalidStack, fmt::format("r_tp must be non-negative, got {}", r_tp));
  }
}

ThermalStack ThermalStack::reference() {
  ThermalStack s;
  s.r_hs = 0.65;
  s.r_teg_th = 1.58;
  s.r_tp = r_interface(0.005, 0.04 * 0.04);
  s.r_cplt = r_plate(0.0008, 0.04, 0.04, kCopperConductivity);
  s.r_crod = r_cylinder(0.02, 0.10, kCopperConductivity);
  return s;
}

void TegParams::validate() const {
  if (!(alpha_v_per_k > 0.0) || !std::isfinite(alpha_v_per_k)) {
    throw ThermalError(ThermalErrc::NonPositiveArgument, "alpha must be positive");
  }
  if (!(r_elec_ohm > 0.0) || !std::isfinite(r_elec_ohm)) {
    throw ThermalError(ThermalErrc::NonPositiveArgument, "r_elec must be positive");
  }
}

double delta_t_teg(double gradient_c, const ThermalStack& stack) { return gradient_c * stack.divider(); }

double delta_t_teg(double t_soil_c, double t_air_c, const ThermalStack& stack) {
  return delta_t_teg(t_soil_c - t_air_c, stack);
}

double teg_power(double delta_t_k, const TegParams& teg) {
  const double v = teg.alpha_v_per_k * delta_t_k;
  return v * v / (4.0 * teg.r_elec_ohm);
}

double calibrate_r_elec(double mean_dt_c, double mean_power_w, const ThermalStack& stack, double alpha_v_per_k) {
  if (mean_dt_c == 0.0 || !std::isfinite(mean_dt_c)) {
    throw ThermalError(ThermalErrc::DegenerateInput, "calibration needs a non-zero mean gradient");
  }
  if (!(mean_power_w > 0.0) || !std::isfinite(mean_power_w)) {
    throw ThermalError(ThermalErrc::DegenerateInput, "calibration needs a positive mean power");
  }
  require_positive(alpha_v_per_k, "alpha");
  const double v = alpha_v_per_k * delta_t_teg(mean_dt_c, stack);
  return v * v / (4.0 * mean_power_w);
}

}  // namespace geonet::energy
