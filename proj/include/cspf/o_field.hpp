#pragma once

#include <span>

#include "cspf/types.hpp"

namespace cspf {

// Objective collision-field parameters. d* is the collision distance
// threshold: either the half sum of the pair's widths or a fixed value.
struct OFieldParams {
  enum class DStarRule { half_width_sum, fixed };

  double beta_p = 10.0;
  double beta_t = 2.0;
  double t_star = 7.5;  // s
  DStarRule d_star_rule = DStarRule::half_width_sum;
  double d_star_fixed = 2.0;  // m, used when rule == fixed

  double d_star(double width_ego, double width_other) const {
    return d_star_rule == DStarRule::fixed ? d_star_fixed
                                           : 0.5 * (width_ego + width_other);
  }
};

enum class CpaRegime { overlap, approaching, receding };

// Closest point of approach under constant relative velocity.
//   overlap:     |D| = 0, t_m = d_m = 0
//   approaching: D.V < 0, t_m = -(D.V)/(V.V), d_m = |D x V| / |V|
//   receding:    otherwise, t_m = d_m = +inf
struct CpaResult {
  double t_m = 0.0;  // s
  double d_m = 0.0;  // m
  CpaRegime regime = CpaRegime::receding;
};

// D = center distance vector (other minus ego), V = relative velocity.
// Throws std::invalid_argument on non-finite input.
CpaResult cpa(const Vec2& d, const Vec2& v);

// Spatial proximity factor exp(-(d_m/d*)^beta_p); 0 at d_m = +inf.
double spatial_factor(double d_m, double d_star, double beta_p);

// Temporal proximity factor exp(-(t_m/t*)^beta_t); 1 at t_m = 0, 0 at +inf.
double temporal_factor(double t_m, double t_star, double beta_t);

// Pairwise collision risk: overlap -> 1, receding -> 0, approaching ->
// spatial_factor * temporal_factor with d* from the params rule.
// Throws std::invalid_argument on mismatched frames.
double pair_objective_risk(const VehicleState& ego, const VehicleState& other,
                           const OFieldParams& params);

// 1 - prod(1 - r) over pairwise risks; empty input -> 0. Throws if any input
// lies outside [0, 1].
double aggregate_objective(std::span<const double> pair_risks);

}  // namespace cspf
