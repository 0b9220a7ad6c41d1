#include "cspf/o_field.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cspf/trajectory.hpp"

namespace cspf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CpaResult cpa(const Vec2& d, const Vec2& v) {
  if (!std::isfinite(d.x) || !std::isfinite(d.y) || !std::isfinite(v.x) ||
      !std::isfinite(v.y)) {
    throw std::invalid_argument("cpa: non-finite input");
  }
  if (d.x == 0.0 && d.y == 0.0) {
    return {0.0, 0.0, CpaRegime::overlap};
  }
  const double closing = dot(d, v);
  if (closing < 0.0) {
    // Stationary pairs (|V| = 0) never reach this branch: D.V would be 0.
    const double v2 = dot(v, v);
    return {-closing / v2, std::abs(cross(d, v)) / std::sqrt(v2),
            CpaRegime::approaching};
  }
  return {kInf, kInf, CpaRegime::receding};
}

double spatial_factor(double d_m, double d_star, double beta_p) {
  return std::exp(-std::pow(d_m / d_star, beta_p));
}

double temporal_factor(double t_m, double t_star, double beta_t) {
  return std::exp(-std::pow(t_m / t_star, beta_t));
}

double pair_objective_risk(const VehicleState& ego, const VehicleState& other,
                           const OFieldParams& params) {
  const RelativeMotion rel = center_vector(ego, other);
  const CpaResult c = cpa(rel.d, rel.v);
  switch (c.regime) {
    case CpaRegime::overlap:
      return 1.0;
    case CpaRegime::receding:
      return 0.0;
    case CpaRegime::approaching:
      break;
  }
  const double ds = params.d_star(ego.width, other.width);
  return spatial_factor(c.d_m, ds, params.beta_p) *
         temporal_factor(c.t_m, params.t_star, params.beta_t);
}

double aggregate_objective(std::span<const double> pair_risks) {
  double survival = 1.0;
  for (double r : pair_risks) {
    if (!(r >= 0.0) || !(r <= 1.0)) {
      throw std::invalid_argument("aggregate_objective: risk outside [0, 1]");
    }
    survival *= 1.0 - r;
  }
  return 1.0 - survival;
}

}  // namespace cspf
