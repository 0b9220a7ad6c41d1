#include "cspf/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cspf/rng.hpp"

namespace cspf {

namespace {

using nlohmann::json;

std::vector<std::pair<double, double>> parse_knots(const json& j, const char* name) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(std::string("fixture: ") + name +
                                " must be a non-empty [[t, v], ...] array");
  }
  std::vector<std::pair<double, double>> knots;
  for (const auto& item : j) {
    knots.emplace_back(item.at(0).get<double>(), item.at(1).get<double>());
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].first < knots[i - 1].first) {
      throw std::invalid_argument(std::string("fixture: ") + name +
                                  " knot times must be non-decreasing");
    }
  }
  return knots;
}

std::vector<std::pair<double, double>> constant_profile(double v) {
  return {{0.0, v}};
}

double knot_value(const std::vector<std::pair<double, double>>& knots, double t) {
  if (knots.empty()) return 0.0;
  if (t <= knots.front().first) return knots.front().second;
  if (t >= knots.back().first) return knots.back().second;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (t <= knots[i].first) {
      const auto& [t0, v0] = knots[i - 1];
      const auto& [t1, v1] = knots[i];
      if (t1 == t0) return v1;
      return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  return knots.back().second;
}

ScriptedTrack base_track(const json& m) {
  ScriptedTrack tr;
  tr.x0 = m.value("x0", 0.0);
  tr.y0 = m.value("y0", 0.0);
  tr.length = m.value("length", 4.5);
  tr.width = m.value("width", 2.0);
  tr.vy_knots = constant_profile(0.0);
  return tr;
}

// Symmetric out-and-back lateral excursion: vy is a triangle wave out and a
// mirrored one back, so y peaks at y0 + offset at t_peak and returns by t_end.
std::vector<std::pair<double, double>> excursion_vy(double t_start, double t_peak,
                                                    double t_end, double offset) {
  const double v_out = 2.0 * offset / (t_peak - t_start);
  const double v_back = -2.0 * offset / (t_end - t_peak);
  return {{0.0, 0.0},
          {t_start, 0.0},
          {0.5 * (t_start + t_peak), v_out},
          {t_peak, 0.0},
          {0.5 * (t_peak + t_end), v_back},
          {t_end, 0.0}};
}

// One-way lateral move from y0 to y0 + offset between t_start and t_end.
std::vector<std::pair<double, double>> crossing_vy(double t_start, double t_end,
                                                   double offset) {
  const double v_peak = 2.0 * offset / (t_end - t_start);
  return {{0.0, 0.0},
          {t_start, 0.0},
          {0.5 * (t_start + t_end), v_peak},
          {t_end, 0.0}};
}

void expand_one(const json& m, rng::SplitMix64& g, std::vector<ScriptedTrack>& out) {
  const std::string type = m.value("type", "");
  if (type == "scripted") {
    ScriptedTrack tr = base_track(m);
    tr.vx_knots = parse_knots(m.at("vx_profile"), "vx_profile");
    if (m.contains("vy_profile")) {
      tr.vy_knots = parse_knots(m.at("vy_profile"), "vy_profile");
    }
    out.push_back(std::move(tr));
  } else if (type == "car_following") {
    ScriptedTrack leader = base_track(m);
    leader.y0 = m.value("lane_y", leader.y0);
    leader.x0 = m.value("leader_x0", 60.0);
    leader.vx_knots = parse_knots(m.at("leader_profile"), "leader_profile");
    ScriptedTrack follower = leader;
    follower.x0 = m.value("follower_x0", 0.0);
    follower.vx_knots = parse_knots(m.at("follower_profile"), "follower_profile");
    out.push_back(std::move(leader));
    out.push_back(std::move(follower));
  } else if (type == "lateral_drift_pass") {
    // A faster ego passes a laterally offset vehicle in the adjacent lane;
    // the ego answers the proximity with a brief move away.
    ScriptedTrack ego = base_track(m);
    ego.vx_knots = constant_profile(m.value("v_ego", 16.0));
    ScriptedTrack other = base_track(m);
    other.x0 = m.value("other_x0", 40.0);
    other.y0 = m.value("other_y", 2.6);
    other.vx_knots = constant_profile(m.value("v_other", 14.0));
    if (m.contains("response")) {
      const auto& r = m.at("response");
      ego.vy_knots = excursion_vy(r.at("t_start").get<double>(),
                                  r.at("t_peak").get<double>(),
                                  r.at("t_end").get<double>(),
                                  r.at("offset").get<double>());
    }
    out.push_back(std::move(ego));
    out.push_back(std::move(other));
  } else if (type == "lane_change_abort") {
    ScriptedTrack tr = base_track(m);
    tr.vx_knots = constant_profile(m.value("speed", 20.0));
    tr.vy_knots = excursion_vy(m.value("t_start", 2.0), m.value("t_peak", 5.0),
                               m.value("t_end", 8.0), m.value("offset", 1.2));
    out.push_back(std::move(tr));
  } else if (type == "lane_change") {
    ScriptedTrack tr = base_track(m);
    tr.vx_knots = constant_profile(m.value("speed", 20.0));
    tr.vy_knots = crossing_vy(m.value("t_start", 2.0), m.value("t_end", 6.0),
                              m.value("offset", 3.7));
    out.push_back(std::move(tr));
  } else if (type == "convoy") {
    const int count = m.value("count", 2);
    const double speed = m.value("speed", 20.0);
    const double gap_mean = m.value("gap_mean", 25.0);
    const double gap_jitter = m.value("gap_jitter", 0.0);
    const double speed_jitter = m.value("speed_jitter", 0.0);
    double x = m.value("x0", 0.0);
    for (int i = 0; i < count; ++i) {
      ScriptedTrack tr = base_track(m);
      tr.y0 = m.value("lane_y", tr.y0);
      tr.x0 = x;
      tr.vx_knots = constant_profile(
          speed + rng::uniform(g, -speed_jitter, speed_jitter));
      out.push_back(std::move(tr));
      x += tr.length + gap_mean + rng::uniform(g, -gap_jitter, gap_jitter);
    }
  } else if (type == "constant") {
    ScriptedTrack tr = base_track(m);
    tr.vx_knots = constant_profile(m.value("speed", 20.0));
    out.push_back(std::move(tr));
  } else {
    throw std::invalid_argument("fixture: unknown maneuver type '" + type + "'");
  }
}

int lane_id_for(const LaneGeometry& lanes, double y) {
  std::vector<double> lines = lanes.boundary_ys;
  lines.insert(lines.end(), lanes.marker_ys.begin(), lanes.marker_ys.end());
  std::sort(lines.begin(), lines.end());
  if (lines.size() < 2) return 1;
  int band = 0;
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    if (y >= lines[i]) band = static_cast<int>(i);
  }
  return band + 1;
}

}  // namespace

FixtureSpec FixtureSpec::from_json(const std::string& json_text) {
  const json doc = json::parse(json_text);
  FixtureSpec spec;
  spec.frame_rate = doc.value("frame_rate", 25.0);
  spec.duration_s = doc.value("duration_s", 10.0);
  spec.noise = doc.value("noise", 0.0);
  if (!(spec.frame_rate > 0.0) || !(spec.duration_s > 0.0)) {
    throw std::invalid_argument("fixture: frame_rate and duration_s must be positive");
  }
  if (doc.contains("lanes")) {
    spec.lanes.marker_ys = doc["lanes"].value("markers", std::vector<double>{});
    spec.lanes.boundary_ys = doc["lanes"].value("boundaries", std::vector<double>{});
  } else {
    spec.lanes.marker_ys = {1.85, 5.55};
    spec.lanes.boundary_ys = {-1.85, 9.25};
  }
  if (doc.contains("maneuvers")) spec.maneuvers = doc["maneuvers"];
  return spec;
}

FixtureSpec FixtureSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open fixture spec: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::vector<ScriptedTrack> expand_maneuvers(const FixtureSpec& spec,
                                            std::uint64_t seed) {
  rng::SplitMix64 g(rng::mix(seed, 0x6669787475726573ULL));
  std::vector<ScriptedTrack> tracks;
  for (const auto& m : spec.maneuvers) {
    expand_one(m, g, tracks);
  }
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    tracks[i].vehicle_id = static_cast<int>(i) + 1;
  }
  return tracks;
}

Dataset synthesize_fixture(const FixtureSpec& spec, std::uint64_t seed) {
  Dataset ds;
  ds.meta.recording_id = 1;
  ds.meta.frame_rate = spec.frame_rate;
  std::vector<double> lines = spec.lanes.boundary_ys;
  lines.insert(lines.end(), spec.lanes.marker_ys.begin(), spec.lanes.marker_ys.end());
  std::sort(lines.begin(), lines.end());
  ds.meta.lower_lane_ys = lines;

  const int n_frames = static_cast<int>(std::floor(spec.duration_s * spec.frame_rate));
  const double dt = 1.0 / spec.frame_rate;

  for (const auto& tr : expand_maneuvers(spec, seed)) {
    std::vector<VehicleState> track(static_cast<std::size_t>(n_frames) + 1);
    // Independent noise streams per vehicle and axis.
    rng::SplitMix64 gx(rng::mix(seed, static_cast<std::uint64_t>(tr.vehicle_id) * 2));
    rng::SplitMix64 gy(rng::mix(seed, static_cast<std::uint64_t>(tr.vehicle_id) * 2 + 1));
    double nx = 0.0;
    double ny = 0.0;
    constexpr double kNoiseRho = 0.9;
    const double drive = spec.noise * std::sqrt(1.0 - kNoiseRho * kNoiseRho);

    double x = tr.x0;
    double y = tr.y0;
    double prev_vx = 0.0;
    double prev_vy = 0.0;
    for (int k = 0; k <= n_frames; ++k) {
      const double t = k * dt;
      double vx = knot_value(tr.vx_knots, t);
      double vy = knot_value(tr.vy_knots, t);
      if (spec.noise > 0.0) {
        nx = kNoiseRho * nx + drive * rng::normal(gx);
        ny = kNoiseRho * ny + drive * rng::normal(gy);
        vx = std::max(0.0, vx + nx);
        vy += ny;
      }
      if (k > 0) {
        x += 0.5 * (prev_vx + vx) * dt;
        y += 0.5 * (prev_vy + vy) * dt;
      }
      VehicleState& s = track[static_cast<std::size_t>(k)];
      s.vehicle_id = tr.vehicle_id;
      s.frame = k;
      s.t = k / spec.frame_rate;
      s.x = x;
      s.y = y;
      s.vx = vx;
      s.vy = vy;
      s.length = tr.length;
      s.width = tr.width;
      s.lane_id = lane_id_for(spec.lanes, y);
      prev_vx = vx;
      prev_vy = vy;
    }
    for (int k = 0; k <= n_frames; ++k) {
      auto& s = track[static_cast<std::size_t>(k)];
      if (k < n_frames) {
        const auto& nxt = track[static_cast<std::size_t>(k) + 1];
        s.ax = (nxt.vx - s.vx) / dt;
        s.ay = (nxt.vy - s.vy) / dt;
      } else if (k > 0) {
        s.ax = track[static_cast<std::size_t>(k) - 1].ax;
        s.ay = track[static_cast<std::size_t>(k) - 1].ay;
      }
    }
    bool changed = false;
    for (std::size_t i = 1; i < track.size(); ++i) {
      changed = changed || track[i].lane_id != track[i - 1].lane_id;
    }
    ds.lane_changes[tr.vehicle_id] = changed;
    ds.source_direction[tr.vehicle_id] = TravelDirection::rightward;
    ds.tracks[tr.vehicle_id] = std::move(track);
  }
  return ds;
}

Dataset synthesize_fixture(const std::string& spec_json, std::uint64_t seed) {
  return synthesize_fixture(FixtureSpec::from_json(spec_json), seed);
}

}  // namespace cspf
