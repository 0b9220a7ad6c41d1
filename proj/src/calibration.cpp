#include "cspf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "cspf/rng.hpp"
#include "cspf/trajectory.hpp"

namespace cspf {

namespace {

void check_params(const Ggd2d& p) {
  if (!(p.gamma_x > 0.0) || !(p.gamma_y > 0.0) || !(p.beta_x >= 2.0) ||
      !(p.beta_y >= 2.0)) {
    throw std::invalid_argument(
        "log_likelihood: require gamma > 0 and beta >= 2 on both axes");
  }
}

// One-axis view of the joint likelihood: the distance column being optimized
// plus the per-sample exponent contributed by everything that stays frozen.
struct AxialProblem {
  std::vector<double> dist;
  std::vector<double> fixed_exp;

  bool empty() const { return dist.empty(); }
};

AxialProblem make_axial(std::span<const SpacingSample> samples, Axis axis,
                        const Ggd2d& ctx) {
  AxialProblem p;
  p.dist.reserve(samples.size());
  p.fixed_exp.reserve(samples.size());
  for (const auto& s : samples) {
    if (axis == Axis::longitudinal) {
      if (s.kind != SampleKind::vehicle) continue;  // constant in the x params
      p.dist.push_back(std::abs(s.dx));
      p.fixed_exp.push_back(std::pow(std::abs(s.dy) / ctx.gamma_y, ctx.beta_y));
    } else {
      p.dist.push_back(std::abs(s.dy));
      p.fixed_exp.push_back(
          s.kind == SampleKind::vehicle
              ? std::pow(std::abs(s.dx) / ctx.gamma_x, ctx.beta_x)
              : 0.0);
    }
  }
  return p;
}

double axial_log_likelihood(const AxialProblem& p, double gamma, double beta) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.dist.size(); ++i) {
    const double e = std::pow(p.dist[i] / gamma, beta) + p.fixed_exp[i];
    acc += std::log(std::max(1.0 - std::exp(-e), kLikelihoodFloor));
  }
  return acc;
}

// Central finite-difference second derivative in gamma.
double gamma_curvature(const AxialProblem& p, double gamma, double beta) {
  const double h = std::max(0.01, 0.01 * gamma);
  return (axial_log_likelihood(p, gamma + h, beta) -
          2.0 * axial_log_likelihood(p, gamma, beta) +
          axial_log_likelihood(p, gamma - h, beta)) /
         (h * h);
}

// Golden-section minimization; returns the bracket midpoint once the bracket
// shrinks below tol.
template <typename F>
double golden_min(F f, double a, double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double infer_beta_impl(const AxialProblem& p, double gamma) {
  constexpr int kGridPoints = 91;
  double best_val = 0.0;
  int best_i = 0;
  std::vector<double> grid(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    grid[static_cast<std::size_t>(i)] =
        kBetaLo + (kBetaHi - kBetaLo) * i / (kGridPoints - 1);
    const double v = axial_log_likelihood(p, gamma, grid[static_cast<std::size_t>(i)]);
    if (i == 0 || v > best_val) {
      best_val = v;
      best_i = i;
    }
  }
  const double lo = grid[static_cast<std::size_t>(std::max(0, best_i - 1))];
  const double hi =
      grid[static_cast<std::size_t>(std::min(kGridPoints - 1, best_i + 1))];
  const double beta = golden_min(
      [&](double b) { return -axial_log_likelihood(p, gamma, b); }, lo, hi, kOptimTol);
  // Flat objectives resolve to the smaller beta.
  const double at_lo = axial_log_likelihood(p, gamma, kBetaLo);
  const double at_hat = axial_log_likelihood(p, gamma, beta);
  if (at_lo >= at_hat - 1e-12 * (1.0 + std::abs(at_hat))) {
    return kBetaLo;
  }
  return beta;
}

double infer_gamma_impl(const AxialProblem& p, double beta) {
  constexpr int kGridPoints = 400;
  const double log_lo = std::log(kGammaLo);
  const double log_hi = std::log(kGammaHi);
  double best_val = 0.0;
  int best_i = 0;
  std::vector<double> grid(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    grid[static_cast<std::size_t>(i)] =
        std::exp(log_lo + (log_hi - log_lo) * i / (kGridPoints - 1));
    const double v = gamma_curvature(p, grid[static_cast<std::size_t>(i)], beta);
    if (i == 0 || v < best_val) {
      best_val = v;
      best_i = i;
    }
  }
  const double lo = grid[static_cast<std::size_t>(std::max(0, best_i - 1))];
  const double hi =
      grid[static_cast<std::size_t>(std::min(kGridPoints - 1, best_i + 1))];
  return golden_min([&](double g) { return gamma_curvature(p, g, beta); }, lo, hi,
                    kOptimTol);
}

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

double median_abs(std::vector<double> values) {
  if (values.empty()) return 0.0;
  for (double& v : values) v = std::abs(v);
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  return values[mid];
}

}  // namespace

double log_likelihood(std::span<const SpacingSample> samples, const Ggd2d& params) {
  check_params(params);
  double acc = 0.0;
  for (const auto& s : samples) {
    double e = std::pow(std::abs(s.dy) / params.gamma_y, params.beta_y);
    if (s.kind == SampleKind::vehicle) {
      e += std::pow(std::abs(s.dx) / params.gamma_x, params.beta_x);
    }
    acc += std::log(std::max(1.0 - std::exp(-e), kLikelihoodFloor));
  }
  return acc;
}

double infer_beta(std::span<const SpacingSample> samples, Axis axis,
                  const Ggd2d& current) {
  if (samples.empty()) {
    throw std::invalid_argument("infer_beta: empty samples");
  }
  const AxialProblem p = make_axial(samples, axis, current);
  if (p.empty()) {
    throw std::invalid_argument("infer_beta: no samples respond to this axis");
  }
  return infer_beta_impl(
      p, axis == Axis::longitudinal ? current.gamma_x : current.gamma_y);
}

double infer_gamma(std::span<const SpacingSample> samples, Axis axis,
                   const Ggd2d& current) {
  if (samples.empty()) {
    throw std::invalid_argument("infer_gamma: empty samples");
  }
  const AxialProblem p = make_axial(samples, axis, current);
  if (p.empty()) {
    throw std::invalid_argument("infer_gamma: no samples respond to this axis");
  }
  return infer_gamma_impl(
      p, axis == Axis::longitudinal ? current.beta_x : current.beta_y);
}

InferResult infer_params(std::span<const SpacingSample> samples,
                         const InferOptions& options) {
  std::vector<SpacingSample> vehicle;
  vehicle.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.kind == SampleKind::vehicle) vehicle.push_back(s);
  }
  if (vehicle.empty()) {
    throw std::invalid_argument("infer_params: no vehicle-kind samples");
  }

  std::vector<double> dxs;
  std::vector<double> dys;
  dxs.reserve(vehicle.size());
  dys.reserve(vehicle.size());
  for (const auto& s : vehicle) {
    dxs.push_back(s.dx);
    dys.push_back(s.dy);
  }
  const bool lateral_degenerate =
      std::all_of(dys.begin(), dys.end(), [](double d) { return std::abs(d) <= 1e-12; });

  InferResult out;
  out.lateral_degenerate = lateral_degenerate;
  Ggd2d& cur = out.params;
  cur.gamma_x = clamp(median_abs(dxs), kGammaLo, kGammaHi);
  cur.beta_x = kBetaLo;
  cur.gamma_y = lateral_degenerate ? kGammaLo : clamp(median_abs(dys), kGammaLo, kGammaHi);
  cur.beta_y = kBetaLo;

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    const Ggd2d old = cur;
    cur.gamma_x = infer_gamma(vehicle, Axis::longitudinal, cur);
    cur.beta_x = infer_beta(vehicle, Axis::longitudinal, cur);
    if (!lateral_degenerate) {
      cur.gamma_y = infer_gamma(vehicle, Axis::lateral, cur);
      cur.beta_y = infer_beta(vehicle, Axis::lateral, cur);
    }
    out.sweeps = sweep;
    const double rel = std::max(
        {std::abs(cur.gamma_x - old.gamma_x) / std::max(1e-12, std::abs(old.gamma_x)),
         std::abs(cur.beta_x - old.beta_x) / std::max(1e-12, std::abs(old.beta_x)),
         std::abs(cur.gamma_y - old.gamma_y) / std::max(1e-12, std::abs(old.gamma_y)),
         std::abs(cur.beta_y - old.beta_y) / std::max(1e-12, std::abs(old.beta_y))});
    if (rel < options.rel_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

Infer1d infer_params_1d(std::span<const SpacingSample> samples, Axis axis,
                        const InferOptions& options) {
  if (samples.empty()) {
    throw std::invalid_argument("infer_params_1d: empty samples");
  }
  std::vector<double> dist;
  dist.reserve(samples.size());
  for (const auto& s : samples) {
    dist.push_back(axis == Axis::longitudinal ? s.dx : s.dy);
  }
  Infer1d out;
  out.degenerate = std::all_of(dist.begin(), dist.end(),
                               [](double d) { return std::abs(d) <= 1e-12; });
  Ggd2d cur;
  double& gamma = axis == Axis::longitudinal ? cur.gamma_x : cur.gamma_y;
  double& beta = axis == Axis::longitudinal ? cur.beta_x : cur.beta_y;
  gamma = out.degenerate ? kGammaLo : clamp(median_abs(dist), kGammaLo, kGammaHi);
  beta = kBetaLo;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    const double old_gamma = gamma;
    const double old_beta = beta;
    if (!out.degenerate) {
      gamma = infer_gamma(samples, axis, cur);
      beta = infer_beta(samples, axis, cur);
    }
    out.sweeps = sweep;
    const double rel =
        std::max(std::abs(gamma - old_gamma) / std::max(1e-12, std::abs(old_gamma)),
                 std::abs(beta - old_beta) / std::max(1e-12, std::abs(old_beta)));
    if (rel < options.rel_tol) {
      out.converged = true;
      break;
    }
  }
  out.gamma = gamma;
  out.beta = beta;
  return out;
}

std::vector<SpacingSample> collect_spacings(const Dataset& dataset, double window,
                                            int lane_span) {
  std::vector<SpacingSample> out;
  const LaneGeometry lower = dataset.meta.canonical_lanes(TravelDirection::rightward);
  const LaneGeometry upper = dataset.meta.canonical_lanes(TravelDirection::leftward);

  for (const int frame : dataset.frame_range()) {
    const std::vector<VehicleState> states = dataset.frame_states(frame);
    // Vehicles interact within their own carriageway only.
    for (const auto dir : {TravelDirection::rightward, TravelDirection::leftward}) {
      std::vector<VehicleState> side;
      for (const auto& s : states) {
        if (dataset.source_direction.count(s.vehicle_id) &&
            dataset.source_direction.at(s.vehicle_id) == dir) {
          side.push_back(s);
        }
      }
      if (side.empty()) continue;
      const LaneGeometry& lanes = dir == TravelDirection::rightward ? lower : upper;
      for (const auto& ego : side) {
        SceneFrame scene = select_neighbors(side, ego.vehicle_id, window, lane_span, lanes);
        const double v = ego.speed();
        for (const auto& nb : scene.neighbors) {
          const GapVector gap = gap_vector(ego, nb);
          out.push_back({gap.dx, gap.dy, SampleKind::vehicle, v, ego.vehicle_id});
        }
        // Nearest marker each side, nearest boundary; center-based distances.
        double best_left = 0.0, best_right = 0.0;
        bool has_left = false, has_right = false;
        for (double my : lanes.marker_ys) {
          const double dy = my - ego.y;
          if (dy <= 0.0) {
            if (!has_left || dy > best_left) best_left = dy, has_left = true;
          } else {
            if (!has_right || dy < best_right) best_right = dy, has_right = true;
          }
        }
        if (has_left) {
          out.push_back({0.0, best_left, SampleKind::lane_marker, v, ego.vehicle_id});
        }
        if (has_right) {
          out.push_back({0.0, best_right, SampleKind::lane_marker, v, ego.vehicle_id});
        }
        bool has_b = false;
        double best_b = 0.0;
        for (double by : lanes.boundary_ys) {
          const double dy = by - ego.y;
          if (!has_b || std::abs(dy) < std::abs(best_b)) best_b = dy, has_b = true;
        }
        if (has_b) {
          out.push_back({0.0, best_b, SampleKind::boundary, v, ego.vehicle_id});
        }
      }
    }
  }
  return out;
}

std::vector<CalibrationBin> bin_by_velocity(std::span<const SpacingSample> samples,
                                            int min_samples, int min_vehicles) {
  std::map<int, CalibrationBin> bins;
  for (const auto& s : samples) {
    const int v = static_cast<int>(std::floor(s.ego_velocity + 0.5));
    auto& bin = bins[v];
    bin.velocity = v;
    bin.samples.push_back(s);
  }
  std::vector<CalibrationBin> out;
  out.reserve(bins.size());
  for (auto& [v, bin] : bins) {
    std::set<int> ids;
    for (const auto& s : bin.samples) ids.insert(s.vehicle_id);
    bin.n_vehicles = static_cast<int>(ids.size());
    bin.sufficient = static_cast<int>(bin.samples.size()) >= min_samples &&
                     bin.n_vehicles >= min_vehicles;
    out.push_back(std::move(bin));
  }
  return out;
}

BinResult bootstrap_bin(const CalibrationBin& bin, int n_iter, double frac,
                        std::uint64_t seed) {
  if (!bin.sufficient) {
    throw std::invalid_argument("bootstrap_bin: insufficient bin");
  }
  // Samples grouped per ego id; ids iterated in sorted order so the result
  // does not depend on the input ordering of whole vehicles.
  std::map<int, std::vector<SpacingSample>> by_id;
  for (const auto& s : bin.samples) by_id[s.vehicle_id].push_back(s);
  std::vector<int> ids;
  ids.reserve(by_id.size());
  for (const auto& [id, v] : by_id) ids.push_back(id);

  const int draws =
      static_cast<int>(std::ceil(frac * static_cast<double>(ids.size())));

  std::vector<Ggd2d> estimates;
  estimates.reserve(static_cast<std::size_t>(n_iter));
  int n_converged = 0;
  for (int iter = 0; iter < n_iter; ++iter) {
    rng::SplitMix64 g(rng::mix(rng::mix(seed, static_cast<std::uint64_t>(bin.velocity)),
                               static_cast<std::uint64_t>(iter)));
    std::vector<SpacingSample> pooled;
    for (int d = 0; d < draws; ++d) {
      const int id = ids[rng::index(g, ids.size())];
      const auto& group = by_id.at(id);
      pooled.insert(pooled.end(), group.begin(), group.end());
    }
    const InferResult r = infer_params(pooled);
    if (r.converged) ++n_converged;
    estimates.push_back(r.params);
  }

  auto mean_std = [&](auto field) {
    double mean = 0.0;
    for (const auto& e : estimates) mean += e.*field;
    mean /= static_cast<double>(estimates.size());
    double var = 0.0;
    for (const auto& e : estimates) {
      const double d = e.*field - mean;
      var += d * d;
    }
    var = estimates.size() > 1 ? var / static_cast<double>(estimates.size() - 1) : 0.0;
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  BinResult out;
  out.velocity = bin.velocity;
  std::tie(out.gamma_x, out.std_gamma_x) = mean_std(&Ggd2d::gamma_x);
  std::tie(out.beta_x, out.std_beta_x) = mean_std(&Ggd2d::beta_x);
  std::tie(out.gamma_y, out.std_gamma_y) = mean_std(&Ggd2d::gamma_y);
  std::tie(out.beta_y, out.std_beta_y) = mean_std(&Ggd2d::beta_y);
  out.n_iterations = n_iter;
  out.draws_per_iteration = draws;
  out.n_converged = n_converged;
  out.n_samples = static_cast<int>(bin.samples.size());
  out.n_vehicles = static_cast<int>(ids.size());
  out.sufficient = true;
  return out;
}

namespace {

// Least-squares polynomial fit via Householder QR with column equilibration;
// coefficients in ascending order.
std::vector<double> polyfit(std::span<const double> xs, std::span<const double> ys,
                            int degree) {
  const std::size_t m = xs.size();
  const std::size_t n = static_cast<std::size_t>(degree) + 1;
  if (m < n) {
    throw std::invalid_argument("polyfit: need at least degree+1 points");
  }
  // Column-major Vandermonde.
  std::vector<double> a(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      a[j * m + i] = p;
      p *= xs[i];
    }
  }
  std::vector<double> scale(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a[j * m + i] * a[j * m + i];
    s = std::sqrt(s);
    if (s > 0.0) {
      scale[j] = s;
      for (std::size_t i = 0; i < m; ++i) a[j * m + i] /= s;
    }
  }
  std::vector<double> b(ys.begin(), ys.end());
  for (std::size_t k = 0; k < n; ++k) {
    double norm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) norm2 += a[k * m + i] * a[k * m + i];
    const double alpha = a[k * m + k] >= 0.0 ? -std::sqrt(norm2) : std::sqrt(norm2);
    if (alpha == 0.0) {
      throw std::invalid_argument("polyfit: rank-deficient system");
    }
    // Householder vector in place of column k below the diagonal.
    std::vector<double> v(m - k);
    v[0] = a[k * m + k] - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = a[k * m + i];
    double vnorm2 = 0.0;
    for (const double t : v) vnorm2 += t * t;
    a[k * m + k] = alpha;
    for (std::size_t i = k + 1; i < m; ++i) a[k * m + i] = 0.0;
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = k + 1; j < n; ++j) {
      double proj = 0.0;
      for (std::size_t i = k; i < m; ++i) proj += v[i - k] * a[j * m + i];
      proj = 2.0 * proj / vnorm2;
      for (std::size_t i = k; i < m; ++i) a[j * m + i] -= proj * v[i - k];
    }
    double proj = 0.0;
    for (std::size_t i = k; i < m; ++i) proj += v[i - k] * b[i];
    proj = 2.0 * proj / vnorm2;
    for (std::size_t i = k; i < m; ++i) b[i] -= proj * v[i - k];
  }
  std::vector<double> coeff(n);
  for (std::size_t jj = n; jj-- > 0;) {
    double s = b[jj];
    for (std::size_t j = jj + 1; j < n; ++j) s -= a[j * m + jj] * coeff[j];
    coeff[jj] = s / a[jj * m + jj];
  }
  for (std::size_t j = 0; j < n; ++j) coeff[j] /= scale[j];
  return coeff;
}

}  // namespace

SFieldParams fit_velocity_polynomials(std::span<const BinResult> results, int degree,
                                      const SFieldParams& base) {
  if (degree < 0 || degree > 3) {
    throw std::invalid_argument("fit_velocity_polynomials: degree must be in [0, 3]");
  }
  if (results.size() < static_cast<std::size_t>(degree) + 1) {
    throw std::invalid_argument("fit_velocity_polynomials: too few bins");
  }
  std::vector<double> xs;
  std::vector<double> g_x;
  std::vector<double> b_x;
  double mean_gy = 0.0;
  double mean_by = 0.0;
  for (const auto& r : results) {
    xs.push_back(static_cast<double>(r.velocity));
    g_x.push_back(r.gamma_x);
    b_x.push_back(r.beta_x);
    mean_gy += r.gamma_y;
    mean_by += r.beta_y;
  }
  mean_gy /= static_cast<double>(results.size());
  mean_by /= static_cast<double>(results.size());

  SFieldParams out = base;
  out.gamma_x_poly = {0.0, 0.0, 0.0, 0.0};
  out.beta_x_poly = {0.0, 0.0, 0.0, 0.0};
  const std::vector<double> cg = polyfit(xs, g_x, degree);
  const std::vector<double> cb = polyfit(xs, b_x, degree);
  for (std::size_t j = 0; j < cg.size(); ++j) out.gamma_x_poly[j] = cg[j];
  for (std::size_t j = 0; j < cb.size(); ++j) out.beta_x_poly[j] = cb[j];
  out.gamma_y = mean_gy;
  out.beta_y = mean_by;
  return out;
}

CalibrationOutcome run_calibration(std::span<const Dataset> datasets,
                                   const CalibrationOptions& options) {
  std::vector<SpacingSample> all;
  for (const auto& ds : datasets) {
    auto part = collect_spacings(ds, options.window, options.lane_span);
    all.insert(all.end(), part.begin(), part.end());
  }

  std::vector<SpacingSample> vehicle;
  std::vector<SpacingSample> marker;
  std::vector<SpacingSample> boundary;
  for (const auto& s : all) {
    switch (s.kind) {
      case SampleKind::vehicle: vehicle.push_back(s); break;
      case SampleKind::lane_marker: marker.push_back(s); break;
      case SampleKind::boundary: boundary.push_back(s); break;
    }
  }

  CalibrationOutcome out;
  out.n_samples = all.size();
  out.bins = {};

  std::vector<BinResult> fitted;
  for (auto& bin : bin_by_velocity(vehicle, options.min_samples, options.min_vehicles)) {
    if (bin.sufficient) {
      BinResult r = bootstrap_bin(bin, options.n_iter, options.frac, options.seed);
      fitted.push_back(r);
      out.bins.push_back(std::move(r));
    } else {
      BinResult r;
      r.velocity = bin.velocity;
      r.n_samples = static_cast<int>(bin.samples.size());
      r.n_vehicles = bin.n_vehicles;
      r.sufficient = false;
      out.bins.push_back(std::move(r));
    }
  }

  SFieldParams params = SFieldParams::highway_defaults();
  if (fitted.size() >= static_cast<std::size_t>(options.poly_degree) + 1) {
    params = fit_velocity_polynomials(fitted, options.poly_degree, params);
  }
  if (!marker.empty()) {
    out.marker_fit = infer_params_1d(marker, Axis::lateral);
    params.gamma_l = out.marker_fit.gamma;
    params.beta_l = out.marker_fit.beta;
  }
  if (!boundary.empty()) {
    out.boundary_fit = infer_params_1d(boundary, Axis::lateral);
    params.gamma_b = out.boundary_fit.gamma;
    params.beta_b = out.boundary_fit.beta;
  }
  out.params = params;
  return out;
}

}  // namespace cspf
