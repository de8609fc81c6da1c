#pragma once

#include "geonet/energy_meter.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace geonet::energy {

inline constexpr double kHoursPerYear = 365.25 * 24.0;

struct BudgetMode {
  std::string name;
  double current_a = 0.0;
  double duty = 0.0;  // fraction of time
};

class InvalidBudget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PowerProfileBudget {
  double capacity_ah = 19.0;
  double voltage_v = 3.6;
  std::vector<BudgetMode> modes;

  /// Duty fractions must sum to 1 (within 1e-9) and currents be >= 0.
  void validate() const;
  double mean_current_a() const;
  double mean_power_w() const { return mean_current_a() * voltage_v; }

  static PowerProfileBudget sleep_only(double sleep_current_a = 10e-6);
  /// Duty cycle observed by a simulated node over its ledger horizon.
  static PowerProfileBudget from_ledger(const EnergyLedger& ledger, const PowerProfile& profile,
                                        double capacity_ah = 19.0, double voltage_v = 3.6);
};

struct BatteryVerdict {
  double mean_current_a = 0.0;
  double lifetime_hours = 0.0;
  double lifetime_years = 0.0;
};

struct HarvestVerdict {
  double harvested_w = 0.0;
  double efficiency = 1.0;
  double node_mean_w = 0.0;
  bool feasible = false;
};

BatteryVerdict battery_lifetime(const PowerProfileBudget& budget);
HarvestVerdict harvest_feasibility(const PowerProfileBudget& budget, double harvested_mean_w, double efficiency = 1.0);

}  // namespace geonet::energy
