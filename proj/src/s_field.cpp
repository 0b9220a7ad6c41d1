#include "cspf/s_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "cspf/trajectory.hpp"

namespace cspf {

SFieldParams SFieldParams::highway_defaults() {
  SFieldParams p;
  p.gamma_x_poly = {1.2925, 1.0621, -3.7051e-2, 5.1053e-4};
  p.beta_x_poly = {3.2589, 9.6673e-3, -1.4834e-3, 2.2214e-5};
  p.gamma_y = 1.4310;
  p.beta_y = 4.9956;
  p.gamma_l = 1.18;
  p.beta_l = 2.46;
  p.gamma_b = 1.64;
  p.beta_b = 5.17;
  p.kappa_l = 0.25;
  p.kappa_b = 0.25;
  return p;
}

namespace {

double eval_cubic(const std::array<double, 4>& c, double v) {
  return ((c[3] * v + c[2]) * v + c[1]) * v + c[0];
}

void check_pair(double gamma, double beta, const char* what) {
  if (!(gamma > 0.0) || !(beta >= 2.0)) {
    throw std::invalid_argument(std::string(what) + ": require gamma > 0 and beta >= 2");
  }
}

// 0-1 scaled generalized Gaussian kernel along one axis.
double axis_exponent(double distance, double gamma, double beta) {
  return std::pow(std::abs(distance) / gamma, beta);
}

}  // namespace

VelocityParams params_at_velocity(const SFieldParams& params, double v) {
  if (!(v >= 0.0)) {
    throw std::invalid_argument("params_at_velocity: negative velocity");
  }
  VelocityParams out;
  out.gamma_x = std::max(kGammaFloor, eval_cubic(params.gamma_x_poly, v));
  out.beta_x = std::max(kBetaFloor, eval_cubic(params.beta_x_poly, v));
  out.gamma_y = params.gamma_y;
  out.beta_y = params.beta_y;
  return out;
}

double vehicle_proximity_risk(const GapVector& gap, double gamma_x, double beta_x,
                              double gamma_y, double beta_y) {
  if (!std::isfinite(gap.dx) || !std::isfinite(gap.dy)) {
    throw std::invalid_argument("vehicle_proximity_risk: non-finite gap");
  }
  check_pair(gamma_x, beta_x, "vehicle_proximity_risk[x]");
  check_pair(gamma_y, beta_y, "vehicle_proximity_risk[y]");
  return std::exp(-(axis_exponent(gap.dx, gamma_x, beta_x) +
                    axis_exponent(gap.dy, gamma_y, beta_y)));
}

double lane_marker_risk(double dy, double gamma_l, double beta_l) {
  if (!std::isfinite(dy)) {
    throw std::invalid_argument("lane_marker_risk: non-finite distance");
  }
  check_pair(gamma_l, beta_l, "lane_marker_risk");
  return std::exp(-axis_exponent(dy, gamma_l, beta_l));
}

double boundary_risk(double dy, double gamma_b, double beta_b) {
  if (!std::isfinite(dy)) {
    throw std::invalid_argument("boundary_risk: non-finite distance");
  }
  check_pair(gamma_b, beta_b, "boundary_risk");
  return std::exp(-axis_exponent(dy, gamma_b, beta_b));
}

namespace {

// Nearest line strictly on each side of y; a line exactly at y counts as the
// left-side one so it contributes once.
struct SideLines {
  std::optional<double> left;
  std::optional<double> right;
};

SideLines nearest_per_side(const std::vector<double>& ys, double y) {
  SideLines out;
  for (double ly : ys) {
    if (ly <= y) {
      if (!out.left || ly > *out.left) out.left = ly;
    } else {
      if (!out.right || ly < *out.right) out.right = ly;
    }
  }
  return out;
}

std::optional<double> nearest_line(const std::vector<double>& ys, double y) {
  std::optional<double> best;
  for (double ly : ys) {
    if (!best || std::abs(ly - y) < std::abs(*best - y)) best = ly;
  }
  return best;
}

}  // namespace

SFieldRisk aggregate_subjective(const SceneFrame& scene, const SFieldParams& params) {
  SFieldRisk out;
  const VelocityParams vp = params_at_velocity(params, scene.ego.speed());

  double survival = 1.0;  // joint likelihood of all spacings
  for (const auto& nb : scene.neighbors) {
    const double r =
        vehicle_proximity_risk(gap_vector(scene.ego, nb), vp.gamma_x, vp.beta_x,
                               vp.gamma_y, vp.beta_y);
    out.per_vehicle.emplace_back(nb.vehicle_id, r);
    survival *= 1.0 - r;
  }

  const SideLines markers = nearest_per_side(scene.lanes.marker_ys, scene.ego.y);
  for (const auto& m : {markers.left, markers.right}) {
    if (!m) continue;
    const double r = lane_marker_risk(*m - scene.ego.y, params.gamma_l, params.beta_l);
    out.per_marker.push_back(r);
    survival *= 1.0 - params.kappa_l * r;
  }

  if (const auto b = nearest_line(scene.lanes.boundary_ys, scene.ego.y)) {
    const double r = boundary_risk(*b - scene.ego.y, params.gamma_b, params.beta_b);
    out.per_boundary.push_back(r);
    survival *= 1.0 - params.kappa_b * r;
  }

  out.aggregated = 1.0 - survival;
  return out;
}

}  // namespace cspf
