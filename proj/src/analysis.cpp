#include "cspf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "cspf/trajectory.hpp"

namespace cspf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Frame states restricted to the ego's carriageway, with its lane geometry.
struct CarriagewayView {
  std::vector<VehicleState> states;
  LaneGeometry lanes;
};

CarriagewayView carriageway_frame(const Dataset& dataset, int frame,
                                  TravelDirection direction) {
  CarriagewayView view;
  for (const auto& s : dataset.frame_states(frame)) {
    const auto it = dataset.source_direction.find(s.vehicle_id);
    const TravelDirection dir =
        it == dataset.source_direction.end() ? TravelDirection::rightward : it->second;
    if (dir == direction) view.states.push_back(s);
  }
  view.lanes = dataset.meta.canonical_lanes(direction);
  return view;
}

TravelDirection direction_of(const Dataset& dataset, int vehicle_id) {
  const auto it = dataset.source_direction.find(vehicle_id);
  return it == dataset.source_direction.end() ? TravelDirection::rightward : it->second;
}

double median_dt(const std::vector<TimelinePoint>& points) {
  if (points.size() < 2) return 0.0;
  std::vector<double> dts;
  dts.reserve(points.size() - 1);
  for (std::size_t i = 1; i < points.size(); ++i) {
    dts.push_back(points[i].t - points[i - 1].t);
  }
  std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2),
                   dts.end());
  return dts[dts.size() / 2];
}

}  // namespace

RiskTimeline risk_timeline(const Dataset& dataset, int vehicle_id,
                           const SFieldParams& s_params, const OFieldParams& o_params,
                           const AssessOptions& options) {
  const auto track_it = dataset.tracks.find(vehicle_id);
  if (track_it == dataset.tracks.end()) {
    throw std::invalid_argument("risk_timeline: unknown vehicle " +
                                std::to_string(vehicle_id));
  }
  const TravelDirection dir = direction_of(dataset, vehicle_id);

  RiskTimeline timeline;
  timeline.vehicle_id = vehicle_id;
  for (const auto& ego : track_it->second) {
    const CarriagewayView view = carriageway_frame(dataset, ego.frame, dir);
    const SceneFrame scene = select_neighbors(view.states, vehicle_id, options.window,
                                              options.lane_span, view.lanes);
    const SFieldRisk s_risk = aggregate_subjective(scene, s_params);

    TimelinePoint point;
    point.frame = ego.frame;
    point.t = ego.t;
    point.aggregated_s = s_risk.aggregated;

    std::vector<double> o_risks;
    o_risks.reserve(scene.neighbors.size());
    for (std::size_t i = 0; i < scene.neighbors.size(); ++i) {
      const VehicleState& nb = scene.neighbors[i];
      const RelativeMotion rel = center_vector(scene.ego, nb);
      const CpaResult c = cpa(rel.d, rel.v);
      PairRisk pair;
      pair.neighbor_id = nb.vehicle_id;
      pair.r_s = s_risk.per_vehicle[i].second;
      pair.r_o = pair_objective_risk(scene.ego, nb, o_params);
      pair.t_m = c.t_m;
      pair.d_m = c.d_m;
      o_risks.push_back(pair.r_o);
      point.ttci = std::max(
          point.ttci, ttc_2d(scene.ego, nb, options.ttc_dt, options.ttc_horizon).ttci);
      point.per_pair.push_back(pair);
    }
    point.aggregated_o = aggregate_objective(o_risks);
    timeline.points.push_back(std::move(point));
  }
  return timeline;
}

std::vector<ThresholdEvent> detect_events(const RiskTimeline& timeline, RiskKind kind,
                                          double threshold, double min_duration) {
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw std::invalid_argument("detect_events: threshold must lie in (0, 1)");
  }
  const double dt = median_dt(timeline.points);

  // Per-source series; frames where the source is absent count as below.
  std::map<int, std::vector<std::pair<std::size_t, double>>> series;
  for (std::size_t i = 0; i < timeline.points.size(); ++i) {
    for (const auto& pair : timeline.points[i].per_pair) {
      const double r = kind == RiskKind::s ? pair.r_s : pair.r_o;
      series[pair.neighbor_id].emplace_back(i, r);
    }
  }

  std::vector<ThresholdEvent> events;
  for (const auto& [source, values] : series) {
    std::size_t run_start = 0;
    std::size_t run_len = 0;
    double peak = 0.0;
    std::size_t prev_index = 0;
    auto flush = [&]() {
      if (run_len == 0) return;
      ThresholdEvent ev;
      ev.vehicle_id = timeline.vehicle_id;
      ev.source_id = source;
      ev.kind = kind;
      ev.onset_t = timeline.points[run_start].t;
      ev.peak = peak;
      ev.duration = static_cast<double>(run_len) * dt;
      if (ev.duration >= min_duration) events.push_back(ev);
      run_len = 0;
      peak = 0.0;
    };
    for (const auto& [index, r] : values) {
      const bool above = r > threshold;
      const bool contiguous = run_len > 0 && index == prev_index + 1;
      if (above) {
        if (!contiguous) {
          flush();
          run_start = index;
        }
        peak = std::max(peak, r);
        ++run_len;
      } else {
        flush();
      }
      prev_index = index;
    }
    flush();
  }
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return a.onset_t != b.onset_t ? a.onset_t < b.onset_t : a.source_id < b.source_id;
  });
  return events;
}

namespace {

// Nearest same-lane neighbor ahead of the ego, if any.
const VehicleState* lead_vehicle(const VehicleState& ego,
                                 const std::vector<VehicleState>& neighbors) {
  const VehicleState* lead = nullptr;
  for (const auto& nb : neighbors) {
    if (nb.lane_id != ego.lane_id || nb.x <= ego.x) continue;
    if (lead == nullptr || nb.x < lead->x) lead = &nb;
  }
  return lead;
}

bool qualifies(ResponseDirection direction, const VehicleState& ego,
               const VehicleState& source, const std::vector<VehicleState>& neighbors) {
  switch (direction) {
    case ResponseDirection::longitudinal: {
      const VehicleState* lead = lead_vehicle(ego, neighbors);
      return lead != nullptr && lead->vehicle_id == source.vehicle_id;
    }
    case ResponseDirection::lateral_left:
      return std::abs(source.lane_id - ego.lane_id) == 1 && source.y < ego.y;
    case ResponseDirection::lateral_right:
      return std::abs(source.lane_id - ego.lane_id) == 1 && source.y > ego.y;
  }
  return false;
}

// Signed extremal response in (onset, onset + lag].
std::optional<double> window_response(const std::vector<VehicleState>& track,
                                      double onset, double lag, RiskKind kind,
                                      ResponseDirection direction) {
  std::optional<double> extremal;
  for (const auto& s : track) {
    if (s.t <= onset || s.t > onset + lag) continue;
    const double value = direction == ResponseDirection::longitudinal
                             ? s.ax
                             : (kind == RiskKind::o ? s.ay : s.vy);
    if (!extremal || std::abs(value) > std::abs(*extremal)) extremal = value;
  }
  return extremal;
}

}  // namespace

std::vector<ResponseDistribution> behavior_response(
    const Dataset& dataset, const SFieldParams& s_params, const OFieldParams& o_params,
    RiskKind kind, ResponseDirection direction, const std::vector<double>& thresholds,
    double lag, bool exclude_lane_changers, const AssessOptions& options) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] <= thresholds[i - 1]) {
      throw std::invalid_argument("behavior_response: thresholds must be ascending");
    }
  }
  std::vector<ResponseDistribution> out(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    out[k].threshold = thresholds[k];
    out[k].lag = lag;
  }

  for (const auto& [ego_id, track] : dataset.tracks) {
    const TravelDirection dir = direction_of(dataset, ego_id);
    const bool changer =
        dataset.lane_changes.count(ego_id) && dataset.lane_changes.at(ego_id);
    // first-crossing flags per (source, threshold)
    std::map<int, std::vector<bool>> fired;

    for (const auto& ego : track) {
      const CarriagewayView view = carriageway_frame(dataset, ego.frame, dir);
      const SceneFrame scene = select_neighbors(view.states, ego_id, options.window,
                                                options.lane_span, view.lanes);
      const SFieldRisk s_risk = aggregate_subjective(scene, s_params);

      for (std::size_t i = 0; i < scene.neighbors.size(); ++i) {
        const VehicleState& nb = scene.neighbors[i];
        const double r = kind == RiskKind::s
                             ? s_risk.per_vehicle[i].second
                             : pair_objective_risk(scene.ego, nb, o_params);
        auto& flags = fired[nb.vehicle_id];
        if (flags.empty()) flags.assign(thresholds.size(), false);
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
          if (flags[k] || r <= thresholds[k]) continue;
          flags[k] = true;
          if (!qualifies(direction, scene.ego, nb, scene.neighbors)) continue;
          const auto value = window_response(track, ego.t, lag, kind, direction);
          if (!value) continue;
          if (changer && exclude_lane_changers) {
            ++out[k].excluded_lane_changers;
          } else {
            out[k].values.push_back(*value);
          }
        }
      }
    }
  }
  return out;
}

FieldGrid rasterize_field(const VehicleState& ego, FieldKind kind,
                          const FieldParams& params,
                          const std::optional<VehicleState>& other, double extent_x,
                          double extent_y, double resolution) {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("rasterize_field: resolution must be positive");
  }
  if (!(extent_x >= resolution) || !(extent_y >= resolution)) {
    throw std::invalid_argument("rasterize_field: degenerate extent");
  }
  if (kind == FieldKind::o && !other) {
    throw std::invalid_argument("rasterize_field: O-field needs an influencing vehicle");
  }

  FieldGrid grid;
  grid.resolution = resolution;
  grid.nx = static_cast<int>(std::lround(extent_x / resolution));
  grid.ny = static_cast<int>(std::lround(extent_y / resolution));
  grid.x0 = ego.x - 0.5 * extent_x + 0.5 * resolution;
  grid.y0 = ego.y - 0.5 * extent_y + 0.5 * resolution;
  grid.values.resize(static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny));

  const VelocityParams vp = params_at_velocity(params.s_field, ego.speed());
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double px = grid.cell_x(ix);
      const double py = grid.cell_y(iy);
      double r;
      if (kind == FieldKind::s) {
        // Edge clearance from the ego's box to the probe point.
        GapVector gap;
        gap.dx = std::max(0.0, std::abs(px - ego.x) - 0.5 * ego.length);
        gap.dy = std::max(0.0, std::abs(py - ego.y) - 0.5 * ego.width);
        r = vehicle_proximity_risk(gap, vp.gamma_x, vp.beta_x, vp.gamma_y, vp.beta_y);
      } else {
        VehicleState probe = ego;
        probe.x = px;
        probe.y = py;
        probe.frame = other->frame;
        r = pair_objective_risk(probe, *other, params.o_field);
      }
      grid.values[static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid.nx) +
                  static_cast<std::size_t>(ix)] = r;
    }
  }
  return grid;
}

}  // namespace cspf
