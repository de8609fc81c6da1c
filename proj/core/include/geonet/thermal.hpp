#pragma once

#include <stdexcept>
#include <string>

// Lumped thermal model of the soil-to-air harvester: conduction resistances
// of the stack parts, the series temperature divider and matched-load TEG
// power.
namespace geonet::energy {

inline constexpr double kCopperConductivity = 385.0;  // W/(m K)
inline constexpr double kSquareInchM2 = 6.4516e-4;

enum class ThermalErrc { NonPositiveArgument, DegenerateInput, InvalidStack };

class ThermalError : public std::invalid_argument {
 public:
  ThermalError(ThermalErrc code, const std::string& what) : std::invalid_argument(what), code_(code) {}
  ThermalErrc code() const { return code_; }

 private:
  ThermalErrc code_;
};

/// Axial conduction through a solid rod, K/W.
double r_cylinder(double diameter_m, double length_m, double conductivity);
/// Through-thickness conduction of a rectangular plate, K/W.
double r_plate(double thickness_m, double width_m, double height_m, double conductivity);
/// Interface material rated in K·in²/W over a contact area in m².
double r_interface(double areal_k_in2_per_w, double area_m2);

struct ThermalStack {
  double r_hs = 0.65;
  double r_teg_th = 1.58;
  double r_tp = 0.0;  // per joint; two joints in the path
  double r_cplt = 0.0;
  double r_crod = 0.0;

  double total() const { return r_hs + r_teg_th + 2.0 * r_tp + r_cplt + r_crod; }
  /// Fraction of the soil-air gradient that lands across the TEG.
  double divider() const { return r_teg_th / total(); }
  /// Throws ThermalError(InvalidStack).
  void validate() const;

  /// The build described for the field prototype: TG12-6 module, finned
  /// sink, 2 cm x 10 cm copper rod, 40 x 40 x 0.8 mm plate, thin paste.
  static ThermalStack reference();
};

struct TegParams {
  double alpha_v_per_k = 0.040;
  double r_elec_ohm = 0.0;

  void validate() const;
};

/// Temperature drop across the TEG for a soil/air pair; sign follows
/// t_soil - t_air.
double delta_t_teg(double t_soil_c, double t_air_c, const ThermalStack& stack);
double delta_t_teg(double gradient_c, const ThermalStack& stack);

/// Matched-load electrical power in watts; even in delta_t.
double teg_power(double delta_t_k, const TegParams& teg);

/// Electrical resistance that makes the mean gradient produce the mean
/// power. Point estimate: ignores the spread of the gradient.
double calibrate_r_elec(double mean_dt_c, double mean_power_w, const ThermalStack& stack, double alpha_v_per_k);

}  // namespace geonet::energy
