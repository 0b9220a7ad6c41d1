#pragma once

#include <cmath>
#include <vector>

namespace cspf {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

// Canonical frame: travel along +x, +y is the driver's right.
enum class TravelDirection { rightward, leftward };

// One vehicle at one frame. Positions are bounding-box centers; length is the
// longitudinal extent, width the lateral extent.
struct VehicleState {
  int vehicle_id = 0;
  int frame = 0;
  double t = 0.0;  // seconds
  double x = 0.0;  // m, longitudinal
  double y = 0.0;  // m, lateral
  double vx = 0.0;
  double vy = 0.0;  // m/s
  double ax = 0.0;
  double ay = 0.0;  // m/s^2
  double length = 0.0;
  double width = 0.0;  // m
  int lane_id = 0;

  double speed() const { return std::hypot(vx, vy); }
};

// Lateral positions of lane markers and the two road boundaries of one
// carriageway, in canonical coordinates. marker_ys is sorted ascending.
struct LaneGeometry {
  std::vector<double> marker_ys;
  std::vector<double> boundary_ys;
};

// Signed edge-to-edge clearances between two axis-aligned boxes. dx > 0 when
// the other vehicle's nearest edge is ahead, dy > 0 when it is to the right.
// Zero exactly when the extents overlap on that axis.
struct GapVector {
  double dx = 0.0;
  double dy = 0.0;
};

// Center-to-center position and velocity difference, other minus ego.
struct RelativeMotion {
  Vec2 d;  // m
  Vec2 v;  // m/s
};

// An ego vehicle with its perceived neighbors at one frame.
struct SceneFrame {
  VehicleState ego;
  std::vector<VehicleState> neighbors;
  LaneGeometry lanes;
};

}  // namespace cspf
