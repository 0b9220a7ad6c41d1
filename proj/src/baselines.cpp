#include "cspf/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cspf {

TtcResult ttc_2d(const VehicleState& ego, const VehicleState& other, double dt,
                 double horizon) {
  if (ego.frame != other.frame) {
    throw std::invalid_argument("ttc_2d: mismatched frames");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("ttc_2d: dt must be positive");
  }
  const double dx0 = other.x - ego.x;
  const double dy0 = other.y - ego.y;
  const double dvx = other.vx - ego.vx;
  const double dvy = other.vy - ego.vy;
  const double half_l = 0.5 * (ego.length + other.length);
  const double half_w = 0.5 * (ego.width + other.width);

  const long steps = static_cast<long>(std::floor(horizon / dt));
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (std::abs(dx0 + dvx * t) < half_l && std::abs(dy0 + dvy * t) < half_w) {
      TtcResult out;
      out.ttc = t;
      out.ttci = t > 0.0 ? 1.0 / t : std::numeric_limits<double>::infinity();
      return out;
    }
  }
  return {};
}

std::vector<std::pair<double, double>> ttci_timeline(
    std::span<const VehicleState> ego_track, std::span<const VehicleState> other_track,
    double dt, double horizon) {
  std::vector<std::pair<double, double>> out;
  std::size_t j = 0;
  for (const auto& ego : ego_track) {
    while (j < other_track.size() && other_track[j].frame < ego.frame) ++j;
    if (j == other_track.size()) break;
    if (other_track[j].frame != ego.frame) continue;
    out.emplace_back(ego.t, ttc_2d(ego, other_track[j], dt, horizon).ttci);
  }
  return out;
}

}  // namespace cspf
