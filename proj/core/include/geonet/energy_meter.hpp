#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace geonet {

enum class Mode : std::uint8_t { Sleep, Sampling, Transmitting, Listening };
inline constexpr std::size_t kModeCount = 4;
const char* mode_name(Mode mode);

/// Mode currents in nanoamperes and activity durations in milliseconds.
/// Only the sleep current is a measured figure; the rest are nominal
/// defaults for a sub-GHz radio module and can be overridden per scenario.
struct PowerProfile {
  std::int64_t sleep_na = 10'000;
  std::int64_t transmit_na = 45'000'000;
  std::int64_t transmit_ms = 60;
  std::int64_t listen_na = 5'000'000;
  std::int64_t listen_ms = 2;
  std::int64_t sampling_na = 3'000'000;
  std::int64_t sampling_onewire_ms = 750;
  std::int64_t sampling_sdi12_ms = 1000;

  std::int64_t current_na(Mode mode) const;
};

/// Charge in picocoulombs (nA x ms) drawn in `mode` over `duration_ms`.
std::int64_t charge_pc(const PowerProfile& profile, Mode mode, std::int64_t duration_ms);
/// Same charge in coulombs.
double meter_energy(const PowerProfile& profile, Mode mode, std::int64_t duration_ms);

struct EnergyLedger {
  std::int64_t horizon_ms = 0;
  std::array<std::int64_t, kModeCount> mode_ms{};
  std::array<std::int64_t, kModeCount> mode_charge_pc{};
  std::int64_t sniffs = 0;

  std::int64_t total_charge_pc() const;
  double total_charge_c() const { return static_cast<double>(total_charge_pc()) * 1e-12; }
  double mean_current_a() const;
};

/// Per-node mode timeline. Activities occupy disjoint busy intervals; the
/// periodic listen sniff happens at every multiple of the listen interval not
/// covered by a busy interval or a hang, and everything else is sleep.
class EnergyMeter {
 public:
  EnergyMeter(PowerProfile profile, std::int64_t listen_interval_ms);

  /// Books `duration_ms` of `mode` at the earliest time >= `earliest_ms` that
  /// is after the previous activity and outside an active sniff window.
  /// Returns the start time.
  std::int64_t reserve(Mode mode, std::int64_t earliest_ms, std::int64_t duration_ms);

  /// Suppresses listen sniffs in [from_ms, to_ms) (node hung).
  void block_listening(std::int64_t from_ms, std::int64_t to_ms);

  /// True when the radio sniffs at listen boundary `at_ms`, given the
  /// activity booked so far.
  bool sniffs_at(std::int64_t at_ms) const;

  std::optional<Mode> busy_mode_at(std::int64_t at_ms) const;
  std::int64_t busy_until() const { return busy_until_; }
  std::int64_t listen_interval_ms() const { return listen_interval_ms_; }
  const PowerProfile& profile() const { return profile_; }

  EnergyLedger ledger(std::int64_t horizon_ms) const;

 private:
  struct Interval {
    std::int64_t start;
    std::int64_t end;
    Mode mode;
  };

  bool blocked(std::int64_t at_ms) const;

  PowerProfile profile_;
  std::int64_t listen_interval_ms_;
  std::vector<Interval> busy_;
  std::vector<Interval> blocked_;
  std::int64_t busy_until_ = 0;
};

}  // namespace geonet
