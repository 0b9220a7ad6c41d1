#pragma once

#include <optional>
#include <vector>

#include "cspf/baselines.hpp"
#include "cspf/highd.hpp"
#include "cspf/o_field.hpp"
#include "cspf/params_io.hpp"
#include "cspf/s_field.hpp"
#include "cspf/types.hpp"

namespace cspf {

enum class RiskKind { s, o };

inline constexpr double kRiskThreshold = 0.36787944117144233;  // e^-1

struct PairRisk {
  int neighbor_id = 0;
  double r_s = 0.0;
  double r_o = 0.0;
  double t_m = 0.0;  // s, +inf when receding
  double d_m = 0.0;  // m, +inf when receding
};

struct TimelinePoint {
  int frame = 0;
  double t = 0.0;
  double aggregated_s = 0.0;
  double aggregated_o = 0.0;
  std::vector<PairRisk> per_pair;
  double ttci = 0.0;  // max over the selected pairs
};

struct RiskTimeline {
  int vehicle_id = 0;
  std::vector<TimelinePoint> points;
};

struct AssessOptions {
  double window = 100.0;
  int lane_span = 1;
  double ttc_dt = 0.01;
  double ttc_horizon = 30.0;
};

// Per-frame aggregated and per-pair risks for one vehicle, with the 2-D
// inverse-TTC baseline evaluated against the same neighbor set.
// Throws std::invalid_argument for unknown vehicle ids.
RiskTimeline risk_timeline(const Dataset& dataset, int vehicle_id,
                           const SFieldParams& s_params, const OFieldParams& o_params,
                           const AssessOptions& options = {});

struct ThresholdEvent {
  int vehicle_id = 0;
  int source_id = 0;
  RiskKind kind = RiskKind::o;
  double onset_t = 0.0;
  double peak = 0.0;
  double duration = 0.0;  // s
};

// Maximal contiguous above-threshold intervals of each source's pair-risk
// series. Throws unless threshold lies in (0, 1).
std::vector<ThresholdEvent> detect_events(const RiskTimeline& timeline, RiskKind kind,
                                          double threshold = kRiskThreshold,
                                          double min_duration = 0.0);

enum class ResponseDirection { longitudinal, lateral_left, lateral_right };

struct ResponseDistribution {
  double threshold = 0.0;
  double lag = 1.0;  // s
  std::vector<double> values;
  int excluded_lane_changers = 0;
};

// Distribution of driver responses after pair risk first exceeds each
// threshold: the signed extremal longitudinal acceleration (longitudinal
// direction), lateral acceleration (lateral + O risk), or lateral velocity
// (lateral + S risk) within (onset, onset + lag]. Longitudinal events
// qualify only when the source is the ego's lead (nearest same-lane
// neighbor ahead); lateral events when the source occupies the adjacent
// lane on the stated side. Thresholds must be ascending.
std::vector<ResponseDistribution> behavior_response(
    const Dataset& dataset, const SFieldParams& s_params, const OFieldParams& o_params,
    RiskKind kind, ResponseDirection direction, const std::vector<double>& thresholds,
    double lag = 1.0, bool exclude_lane_changers = true,
    const AssessOptions& options = {});

enum class FieldKind { s, o };

// Row-major raster (values[iy * nx + ix]); cell (0, 0) is centered at
// (x0, y0), x grows with ix and y with iy.
struct FieldGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double resolution = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  double at(int ix, int iy) const {
    return values[static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
                  static_cast<std::size_t>(ix)];
  }
  double cell_x(int ix) const { return x0 + ix * resolution; }
  double cell_y(int iy) const { return y0 + iy * resolution; }
};

// Rasterizes a field on a grid centered on the ego. The S-field evaluates
// the proximity risk of a probe point around the ego's box; the O-field
// evaluates the risk the influencing vehicle (`other`, required) imposes on
// a probe ego placed at each cell with the ego's velocity and width. Throws
// on non-positive resolution or degenerate extent.
FieldGrid rasterize_field(const VehicleState& ego, FieldKind kind,
                          const FieldParams& params,
                          const std::optional<VehicleState>& other, double extent_x,
                          double extent_y, double resolution);

}  // namespace cspf
