#include "geonet/energy_meter.hpp"

#include <algorithm>
#include <stdexcept>

namespace geonet {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::Sleep: return "Sleep";
    case Mode::Sampling: return "Sampling";
    case Mode::Transmitting: return "Transmitting";
    case Mode::Listening: return "Listening";
  }
  return "?";
}

std::int64_t PowerProfile::current_na(Mode mode) const {
  switch (mode) {
    case Mode::Sleep: return sleep_na;
    case Mode::Sampling: return sampling_na;
    case Mode::Transmitting: return transmit_na;
    case Mode::Listening: return listen_na;
  }
  return 0;
}

std::int64_t charge_pc(const PowerProfile& profile, Mode mode, std::int64_t duration_ms) {
  if (duration_ms < 0) throw std::invalid_argument("negative interval");
  return profile.current_na(mode) * duration_ms;
}

double meter_energy(const PowerProfile& profile, Mode mode, std::int64_t duration_ms) {
  return static_cast<double>(charge_pc(profile, mode, duration_ms)) * 1e-12;
}

std::int64_t EnergyLedger::total_charge_pc() const {
  std::int64_t total = 0;
  for (auto c : mode_charge_pc) total += c;
  return total;
}

double EnergyLedger::mean_current_a() const {
  if (horizon_ms <= 0) return 0.0;
  // pC / ms = nA
  return static_cast<double>(total_charge_pc()) / static_cast<double>(horizon_ms) * 1e-9;
}

EnergyMeter::EnergyMeter(PowerProfile profile, std::int64_t listen_interval_ms)
    : profile_(profile), listen_interval_ms_(listen_interval_ms) {
  if (listen_interval_ms_ < 0) throw std::invalid_argument("negative listen interval");
  if (listen_interval_ms_ > 0 && profile_.listen_ms >= listen_interval_ms_) {
    throw std::invalid_argument("listen sniff must be shorter than the listen interval");
  }
}

bool EnergyMeter::blocked(std::int64_t at_ms) const {
  return std::any_of(blocked_.begin(), blocked_.end(),
                     [&](const Interval& b) { return at_ms >= b.start && at_ms < b.end; });
}

bool EnergyMeter::sniffs_at(std::int64_t at_ms) const {
  if (listen_interval_ms_ <= 0 || at_ms <= 0 || at_ms % listen_interval_ms_ != 0) return false;
  if (blocked(at_ms)) return false;
  // Busy intervals are appended in time order.
  for (auto it = busy_.rbegin(); it != busy_.rend(); ++it) {
    if (it->end <= at_ms) break;
    if (at_ms >= it->start) return false;
  }
  return true;
}

std::optional<Mode> EnergyMeter::busy_mode_at(std::int64_t at_ms) const {
  for (auto it = busy_.rbegin(); it != busy_.rend(); ++it) {
    if (it->end <= at_ms) break;
    if (at_ms >= it->start) return it->mode;
  }
  return std::nullopt;
}

std::int64_t EnergyMeter::reserve(Mode mode, std::int64_t earliest_ms, std::int64_t duration_ms) {
  if (duration_ms < 0) throw std::invalid_argument("negative activity duration");
  std::int64_t start = std::max(earliest_ms, busy_until_);
  if (listen_interval_ms_ > 0) {
    const std::int64_t boundary = (start / listen_interval_ms_) * listen_interval_ms_;
    if (start < boundary + profile_.listen_ms && sniffs_at(boundary)) {
      start = boundary + profile_.listen_ms;
    }
  }
  if (duration_ms > 0) {
    busy_.push_back(Interval{start, start + duration_ms, mode});
    busy_until_ = start + duration_ms;
  }
  return start;
}

void EnergyMeter::block_listening(std::int64_t from_ms, std::int64_t to_ms) {
  if (to_ms > from_ms) blocked_.push_back(Interval{from_ms, to_ms, Mode::Sleep});
}

EnergyLedger EnergyMeter::ledger(std::int64_t horizon_ms) const {
  EnergyLedger out;
  out.horizon_ms = horizon_ms;

  std::int64_t busy_total = 0;
  for (const auto& iv : busy_) {
    const std::int64_t s = std::min(iv.start, horizon_ms);
    const std::int64_t e = std::min(iv.end, horizon_ms);
    if (e <= s) continue;
    out.mode_ms[static_cast<std::size_t>(iv.mode)] += e - s;
    busy_total += e - s;
  }

  std::int64_t listen_total = 0;
  if (listen_interval_ms_ > 0 && horizon_ms > 0) {
    // Boundaries covered by the union of busy and blocked intervals skip the sniff.
    std::vector<std::pair<std::int64_t, std::int64_t>> cover;
    cover.reserve(busy_.size() + blocked_.size());
    for (const auto& iv : busy_) cover.emplace_back(iv.start, iv.end);
    for (const auto& iv : blocked_) cover.emplace_back(iv.start, iv.end);
    std::sort(cover.begin(), cover.end());

    auto boundaries_in = [&](std::int64_t s, std::int64_t e) -> std::int64_t {
      // multiples k*I with k >= 1 inside [s, e)
      s = std::max<std::int64_t>(s, listen_interval_ms_);
      if (e <= s) return 0;
      const std::int64_t first = (s + listen_interval_ms_ - 1) / listen_interval_ms_;
      const std::int64_t last = (e - 1) / listen_interval_ms_;
      return last >= first ? last - first + 1 : 0;
    };

    std::int64_t covered = 0;
    std::int64_t cur_s = 0, cur_e = 0;
    bool open = false;
    for (const auto& [s0, e0] : cover) {
      const std::int64_t s = std::min(s0, horizon_ms);
      const std::int64_t e = std::min(e0, horizon_ms);
      if (e <= s) continue;
      if (open && s <= cur_e) {
        cur_e = std::max(cur_e, e);
      } else {
        if (open) covered += boundaries_in(cur_s, cur_e);
        cur_s = s;
        cur_e = e;
        open = true;
      }
    }
    if (open) covered += boundaries_in(cur_s, cur_e);

    const std::int64_t all = boundaries_in(0, horizon_ms);
    out.sniffs = all - covered;
    listen_total = out.sniffs * profile_.listen_ms;
    // The last sniff may be cut by the horizon.
    const std::int64_t last_boundary = ((horizon_ms - 1) / listen_interval_ms_) * listen_interval_ms_;
    if (out.sniffs > 0 && last_boundary > 0 && horizon_ms - last_boundary < profile_.listen_ms &&
        sniffs_at(last_boundary)) {
      listen_total -= profile_.listen_ms - (horizon_ms - last_boundary);
    }
  }
  out.mode_ms[static_cast<std::size_t>(Mode::Listening)] += listen_total;
  out.mode_ms[static_cast<std::size_t>(Mode::Sleep)] = horizon_ms - busy_total - listen_total;

  for (std::size_t m = 0; m < kModeCount; ++m) {
    out.mode_charge_pc[m] = profile_.current_na(static_cast<Mode>(m)) * out.mode_ms[m];
  }
  return out;
}

}  // namespace geonet
