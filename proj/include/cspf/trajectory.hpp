#pragma once

#include <span>
#include <vector>

#include "cspf/types.hpp"

namespace cspf {

// Transforms a single-vehicle track into the canonical frame (travel along
// +x, +y to the driver's right). Leftward tracks are point-reflected:
// x, y, vx, vy, ax, ay all negate. Idempotent for rightward input.
// Throws std::invalid_argument on empty input or mixed vehicle ids.
std::vector<VehicleState> normalize_track(std::span<const VehicleState> states,
                                          TravelDirection direction);

// Signed edge-to-edge clearance between two states at the same frame.
// Throws std::invalid_argument on mismatched frames.
GapVector gap_vector(const VehicleState& ego, const VehicleState& other);

// Center-to-center distance and velocity difference, other minus ego.
// Throws std::invalid_argument on mismatched frames.
RelativeMotion center_vector(const VehicleState& ego, const VehicleState& other);

// Builds the ego's perceived scene from all states of one frame: neighbors
// are vehicles within `window` meters longitudinally and `lane_span` lanes
// laterally. Throws std::invalid_argument if ego_id is absent.
SceneFrame select_neighbors(std::span<const VehicleState> frame_states, int ego_id,
                            double window = 100.0, int lane_span = 1,
                            LaneGeometry lanes = {});

}  // namespace cspf
