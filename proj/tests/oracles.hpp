#pragma once

// Test-only reference computations, kept independent of the library's
// closed-form implementations.

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "cspf/calibration.hpp"
#include "cspf/types.hpp"

namespace oracles {

struct NumericCpa {
  double t_m = 0.0;
  double d_m = 0.0;
};

// Brute-force scan of |D + V t| over t >= 0. The squared distance is a
// parabola in t, so the scan stops once it starts growing.
inline NumericCpa numeric_cpa(const cspf::Vec2& d, const cspf::Vec2& v,
                              double step = 1e-4, double horizon = 100.0) {
  auto dist2 = [&](double t) {
    const double x = d.x + v.x * t;
    const double y = d.y + v.y * t;
    return x * x + y * y;
  };
  double best_t = 0.0;
  double best = dist2(0.0);
  double prev = best;
  const long n = static_cast<long>(horizon / step);
  for (long k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) * step;
    const double cur = dist2(t);
    if (cur < best) {
      best = cur;
      best_t = t;
    }
    if (cur > prev) break;
    prev = cur;
  }
  return {best_t, std::sqrt(best)};
}

// Exhaustive argmax of the joint log-likelihood over beta.
inline double grid_beta(std::span<const cspf::SpacingSample> samples, cspf::Axis axis,
                        cspf::Ggd2d ctx, double step = 1e-3) {
  double best_beta = cspf::kBetaLo;
  double best = -std::numeric_limits<double>::infinity();
  for (double b = cspf::kBetaLo; b <= cspf::kBetaHi + 1e-12; b += step) {
    if (axis == cspf::Axis::longitudinal) {
      ctx.beta_x = b;
    } else {
      ctx.beta_y = b;
    }
    const double v = cspf::log_likelihood(samples, ctx);
    if (v > best) {
      best = v;
      best_beta = b;
    }
  }
  return best_beta;
}

// Finite-difference curvature of the joint log-likelihood in gamma, matching
// the step rule of the implementation but evaluated through the public
// log_likelihood surface.
inline double lnl_curvature(std::span<const cspf::SpacingSample> samples,
                            cspf::Axis axis, cspf::Ggd2d ctx, double gamma) {
  const double h = std::max(0.01, 0.01 * gamma);
  auto eval = [&](double g) {
    cspf::Ggd2d p = ctx;
    if (axis == cspf::Axis::longitudinal) {
      p.gamma_x = g;
    } else {
      p.gamma_y = g;
    }
    return cspf::log_likelihood(samples, p);
  };
  return (eval(gamma + h) - 2.0 * eval(gamma) + eval(gamma - h)) / (h * h);
}

// Coarse linear scan plus an exhaustive fine grid around the coarse argmin.
inline double grid_gamma(std::span<const cspf::SpacingSample> samples, cspf::Axis axis,
                         const cspf::Ggd2d& ctx, double coarse_step = 0.05,
                         double fine_step = 1e-3) {
  double best_g = cspf::kGammaLo;
  double best = std::numeric_limits<double>::infinity();
  for (double g = cspf::kGammaLo; g <= cspf::kGammaHi + 1e-12; g += coarse_step) {
    const double v = lnl_curvature(samples, axis, ctx, g);
    if (v < best) {
      best = v;
      best_g = g;
    }
  }
  const double lo = std::max(cspf::kGammaLo, best_g - 2.0 * coarse_step);
  const double hi = best_g + 2.0 * coarse_step;
  for (double g = lo; g <= hi + 1e-12; g += fine_step) {
    const double v = lnl_curvature(samples, axis, ctx, g);
    if (v < best) {
      best = v;
      best_g = g;
    }
  }
  return best_g;
}

}  // namespace oracles
