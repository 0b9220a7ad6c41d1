#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cspf/types.hpp"

namespace cspf {

struct TtcResult {
  std::optional<double> ttc;  // s; empty when no collision within the horizon
  double ttci = 0.0;          // 1/s; 0 when ttc is empty
};

// Two-dimensional time to collision: both axis-aligned boxes are advanced at
// their current velocities in steps of dt; the first step at which the boxes
// intersect gives ttc (step-quantized). Throws on mismatched frames or
// dt <= 0.
TtcResult ttc_2d(const VehicleState& ego, const VehicleState& other,
                 double dt = 0.01, double horizon = 30.0);

// Per-frame inverse TTC for two tracks; frames present in only one track are
// skipped. Tracks must be frame-sorted.
std::vector<std::pair<double, double>> ttci_timeline(
    std::span<const VehicleState> ego_track, std::span<const VehicleState> other_track,
    double dt = 0.01, double horizon = 30.0);  // (t, ttci)

}  // namespace cspf
