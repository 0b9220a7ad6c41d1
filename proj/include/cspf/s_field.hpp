#pragma once

#include <array>
#include <utility>
#include <vector>

#include "cspf/types.hpp"

namespace cspf {

// Subjective proximity-field parameters. The longitudinal pair varies with
// the ego's speed through cubic polynomials (coefficients in ascending
// order: c0 + c1*v + c2*v^2 + c3*v^3); the lateral, lane-marker, and
// boundary pairs are constants. kappa_l / kappa_b weight marker and
// boundary risks in the aggregation.
struct SFieldParams {
  std::array<double, 4> gamma_x_poly{};
  std::array<double, 4> beta_x_poly{};
  double gamma_y = 0.0;
  double beta_y = 0.0;
  double gamma_l = 0.0;
  double beta_l = 0.0;
  double gamma_b = 0.0;
  double beta_b = 0.0;
  double kappa_l = 0.25;
  double kappa_b = 0.25;

  // Default parameter set calibrated on highway drone trajectories.
  static SFieldParams highway_defaults();
};

struct VelocityParams {
  double gamma_x = 0.0;
  double beta_x = 0.0;
  double gamma_y = 0.0;
  double beta_y = 0.0;
};

inline constexpr double kGammaFloor = 0.05;  // m
inline constexpr double kBetaFloor = 2.0;

// Evaluates the velocity-dependent longitudinal pair at speed v (m/s) and
// returns it together with the constant lateral pair. gamma_x is clamped to
// >= kGammaFloor and beta_x to >= kBetaFloor. Throws on negative v.
VelocityParams params_at_velocity(const SFieldParams& params, double v);

// Proximity risk of a vehicle pair from its edge-to-edge gap:
// exp(-|dx/gamma_x|^beta_x - |dy/gamma_y|^beta_y). Throws on non-finite gap
// or invalid parameters (gamma <= 0 or beta < 2).
double vehicle_proximity_risk(const GapVector& gap, double gamma_x, double beta_x,
                              double gamma_y, double beta_y);

// Risk relative to a lane marker at center-referenced lateral distance dy:
// exp(-|dy/gamma_l|^beta_l).
double lane_marker_risk(double dy, double gamma_l, double beta_l);

// Risk relative to a road boundary, same form with (gamma_b, beta_b).
double boundary_risk(double dy, double gamma_b, double beta_b);

struct SFieldRisk {
  std::vector<std::pair<int, double>> per_vehicle;  // (neighbor_id, risk)
  std::vector<double> per_marker;
  std::vector<double> per_boundary;
  double aggregated = 0.0;
};

// Per-entity subjective risks for a scene plus their aggregation
//   1 - prod(1-r_v) * prod(1-kappa_l*r_l) * prod(1-kappa_b*r_b).
// Only the nearest marker on each side of the ego and the nearest boundary
// contribute; farther lines are dominated.
SFieldRisk aggregate_subjective(const SceneFrame& scene, const SFieldParams& params);

}  // namespace cspf
