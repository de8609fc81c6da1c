#include "geonet/budget.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace geonet::energy {

void PowerProfileBudget::validate() const {
  if (!(capacity_ah > 0.0)) throw InvalidBudget("battery capacity must be positive");
  if (!(voltage_v > 0.0)) throw InvalidBudget("nominal voltage must be positive");
  if (modes.empty()) throw InvalidBudget("budget has no modes");
  double sum = 0.0;
  for (const auto& m : modes) {
    if (!(m.current_a >= 0.0) || !std::isfinite(m.current_a)) {
      throw InvalidBudget(fmt::format("mode {}: current must be non-negative", m.name));
    }
    if (!(m.duty >= 0.0 && m.duty <= 1.0)) throw InvalidBudget(fmt::format("mode {}: duty outside [0,1]", m.name));
    sum += m.duty;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidBudget(fmt::format("duty fractions sum to {}, not 1", sum));
}

double PowerProfileBudget::mean_current_a() const {
  double i = 0.0;
  for (const auto& m : modes) i += m.current_a * m.duty;
  return i;
}

PowerProfileBudget PowerProfileBudget::sleep_only(double sleep_current_a) {
  PowerProfileBudget b;
  b.modes.push_back({"sleep", sleep_current_a, 1.0});
  return b;
}

PowerProfileBudget PowerProfileBudget::from_ledger(const EnergyLedger& ledger, const PowerProfile& profile,
                                                   double capacity_ah, double voltage_v) {
  PowerProfileBudget b;
  b.capacity_ah = capacity_ah;
  b.voltage_v = voltage_v;
  if (ledger.horizon_ms <= 0) throw InvalidBudget("ledger has an empty horizon");
  const auto horizon = static_cast<double>(ledger.horizon_ms);
  for (std::size_t i = 0; i < kModeCount; ++i) {
    const auto mode = static_cast<Mode>(i);
    b.modes.push_back({mode_name(mode), static_cast<double>(profile.current_na(mode)) * 1e-9,
                       static_cast<double>(ledger.mode_ms[i]) / horizon});
  }
  return b;
}

BatteryVerdict battery_lifetime(const PowerProfileBudget& budget) {
  budget.validate();
  BatteryVerdict v;
  v.mean_current_a = budget.mean_current_a();
  v.lifetime_hours = v.mean_current_a > 0.0 ? budget.capacity_ah / v.mean_current_a
                                            : std::numeric_limits<double>::infinity();
  v.lifetime_years = v.lifetime_hours / kHoursPerYear;
  return v;
}

HarvestVerdict harvest_feasibility(const PowerProfileBudget& budget, double harvested_mean_w, double efficiency) {
  budget.validate();
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidBudget("converter efficiency must be in (0,1]");
  HarvestVerdict v;
  v.harvested_w = harvested_mean_w;
  v.efficiency = efficiency;
  v.node_mean_w = budget.mean_power_w();
  v.feasible = harvested_mean_w > 0.0 && efficiency * harvested_mean_w >= v.node_mean_w;
  return v;
}

}  // namespace geonet::energy
