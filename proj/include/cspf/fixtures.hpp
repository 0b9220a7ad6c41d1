#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cspf/highd.hpp"
#include "cspf/types.hpp"

namespace cspf {

// One scripted vehicle: piecewise-linear velocity profiles per axis,
// integrated to positions at the fixture frame rate.
struct ScriptedTrack {
  int vehicle_id = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double length = 4.5;
  double width = 2.0;
  std::vector<std::pair<double, double>> vx_knots;  // (t, v)
  std::vector<std::pair<double, double>> vy_knots;  // (t, v), default still
};

// Scenario description for synthetic datasets. The JSON form is a document
//   {frame_rate, duration_s, noise, lanes: {markers, boundaries},
//    maneuvers: [{type, ...}]}
// with maneuver types car_following, lateral_drift_pass, lane_change_abort,
// lane_change, convoy, constant, and scripted (raw profiles); see the README
// for the per-type parameters.
struct FixtureSpec {
  double frame_rate = 25.0;
  double duration_s = 10.0;
  double noise = 0.0;  // std of the velocity perturbation, m/s
  LaneGeometry lanes;
  nlohmann::json maneuvers = nlohmann::json::array();

  static FixtureSpec from_json(const std::string& json_text);
  static FixtureSpec from_file(const std::string& path);
};

// Expands the maneuver list into scripted tracks; convoy gap/speed jitter is
// drawn from the seed. Throws std::invalid_argument on unknown maneuver
// types or malformed parameters.
std::vector<ScriptedTrack> expand_maneuvers(const FixtureSpec& spec,
                                            std::uint64_t seed);

// Deterministic synthetic Dataset in the recording schema: positions are the
// trapezoidal integral of the (optionally noise-perturbed) velocity
// profiles, accelerations their forward differences. Lane ids derive from
// the lateral position against the lane geometry.
Dataset synthesize_fixture(const FixtureSpec& spec, std::uint64_t seed);

// Parses the JSON document and synthesizes in one step.
Dataset synthesize_fixture(const std::string& spec_json, std::uint64_t seed);

}  // namespace cspf
