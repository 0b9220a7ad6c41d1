#include "cspf/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cspf {

std::vector<VehicleState> normalize_track(std::span<const VehicleState> states,
                                          TravelDirection direction) {
  if (states.empty()) {
    throw std::invalid_argument("normalize_track: empty track");
  }
  std::vector<VehicleState> out(states.begin(), states.end());
  for (const auto& s : out) {
    if (s.vehicle_id != out.front().vehicle_id) {
      throw std::invalid_argument("normalize_track: mixed vehicle ids");
    }
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].frame <= out[i - 1].frame) {
      throw std::invalid_argument("normalize_track: frames not strictly increasing");
    }
  }
  if (direction == TravelDirection::leftward) {
    for (auto& s : out) {
      s.x = -s.x;
      s.y = -s.y;
      s.vx = -s.vx;
      s.vy = -s.vy;
      s.ax = -s.ax;
      s.ay = -s.ay;
    }
  }
  return out;
}

namespace {

// Signed edge clearance along one axis from center offset and half extents.
double edge_gap(double center_delta, double half_sum) {
  const double g = std::max(0.0, std::abs(center_delta) - half_sum);
  return center_delta < 0.0 ? -g : g;
}

}  // namespace

GapVector gap_vector(const VehicleState& ego, const VehicleState& other) {
  if (ego.frame != other.frame) {
    throw std::invalid_argument("gap_vector: mismatched frames");
  }
  GapVector gap;
  gap.dx = edge_gap(other.x - ego.x, 0.5 * (ego.length + other.length));
  gap.dy = edge_gap(other.y - ego.y, 0.5 * (ego.width + other.width));
  return gap;
}

RelativeMotion center_vector(const VehicleState& ego, const VehicleState& other) {
  if (ego.frame != other.frame) {
    throw std::invalid_argument("center_vector: mismatched frames");
  }
  return {{other.x - ego.x, other.y - ego.y}, {other.vx - ego.vx, other.vy - ego.vy}};
}

SceneFrame select_neighbors(std::span<const VehicleState> frame_states, int ego_id,
                            double window, int lane_span, LaneGeometry lanes) {
  const VehicleState* ego = nullptr;
  for (const auto& s : frame_states) {
    if (s.vehicle_id == ego_id) {
      ego = &s;
      break;
    }
  }
  if (ego == nullptr) {
    throw std::invalid_argument("select_neighbors: ego_id not present in frame");
  }
  SceneFrame scene;
  scene.ego = *ego;
  scene.lanes = std::move(lanes);
  for (const auto& s : frame_states) {
    if (s.vehicle_id == ego_id) continue;
    if (std::abs(s.x - ego->x) > window) continue;
    if (std::abs(s.lane_id - ego->lane_id) > lane_span) continue;
    scene.neighbors.push_back(s);
  }
  // Input-order independence: neighbors sorted by id.
  std::sort(scene.neighbors.begin(), scene.neighbors.end(),
            [](const VehicleState& a, const VehicleState& b) {
              return a.vehicle_id < b.vehicle_id;
            });
  return scene;
}

}  // namespace cspf
