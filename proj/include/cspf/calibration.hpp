#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cspf/highd.hpp"
#include "cspf/s_field.hpp"
#include "cspf/types.hpp"

namespace cspf {

enum class SampleKind { vehicle, lane_marker, boundary };
enum class Axis { longitudinal, lateral };

// One observed spacing. Vehicle samples carry both edge-to-edge clearances;
// marker/boundary samples carry the center-referenced lateral distance in dy
// with dx = 0.
struct SpacingSample {
  double dx = 0.0;
  double dy = 0.0;
  SampleKind kind = SampleKind::vehicle;
  double ego_velocity = 0.0;  // m/s
  int vehicle_id = 0;         // the perceiving ego
};

// Two-axis field parameters as seen by the inference.
struct Ggd2d {
  double gamma_x = 1.0;
  double beta_x = 2.0;
  double gamma_y = 1.0;
  double beta_y = 2.0;
};

// Inference boxes: gamma in [kGammaLo, kGammaHi], beta in [kBetaLo, kBetaHi].
inline constexpr double kGammaLo = 0.05;
inline constexpr double kGammaHi = 200.0;
inline constexpr double kBetaLo = 2.0;
inline constexpr double kBetaHi = 20.0;
inline constexpr double kOptimTol = 1e-3;
inline constexpr double kLikelihoodFloor = 1e-12;

// Accumulates one spacing sample per (ego frame, neighbor) via gap_vector,
// plus per-frame samples for the nearest marker on each side and the
// nearest boundary (center-based lateral distances).
std::vector<SpacingSample> collect_spacings(const Dataset& dataset,
                                            double window = 100.0,
                                            int lane_span = 1);

// Joint log-likelihood sum(ln(1 - r)) of the samples, where r is the
// proximity risk of each sample: vehicle samples use both axes of `params`,
// marker/boundary samples use the lateral pair. Each (1 - r) is floored at
// kLikelihoodFloor before the log. Throws on parameter-constraint violation.
double log_likelihood(std::span<const SpacingSample> samples, const Ggd2d& params);

// Maximizes the joint log-likelihood over the shape factor of one axis, all
// other parameters frozen at `current` (coarse grid then golden-section,
// absolute tolerance kOptimTol; ties break toward the smaller beta).
// Throws on empty samples.
double infer_beta(std::span<const SpacingSample> samples, Axis axis,
                  const Ggd2d& current);

// Minimizes the central finite-difference second derivative of the joint
// log-likelihood with respect to one axis's scale factor
// (h = max(0.01, 0.01*gamma); 400-point log-spaced grid over
// [kGammaLo, kGammaHi] plus golden-section refinement). Throws on empty
// samples.
double infer_gamma(std::span<const SpacingSample> samples, Axis axis,
                   const Ggd2d& current);

struct InferOptions {
  int max_sweeps = 20;
  double rel_tol = 1e-3;
};

struct InferResult {
  Ggd2d params;
  bool converged = false;
  bool lateral_degenerate = false;
  int sweeps = 0;
};

// Alternating inference over vehicle-kind samples: per sweep updates
// gamma_x, beta_x, gamma_y, beta_y in that order, starting from
// gamma = median |distance| and beta = 2, until every relative parameter
// change drops below rel_tol or max_sweeps is reached. Deterministic.
// A lateral distance column of all zeros flags the lateral axis degenerate
// and pins gamma_y to the lower bound.
InferResult infer_params(std::span<const SpacingSample> samples,
                         const InferOptions& options = {});

struct Infer1d {
  double gamma = 0.0;
  double beta = 0.0;
  bool converged = false;
  bool degenerate = false;
  int sweeps = 0;
};

// One-axis alternation for pooled lane-marker or boundary samples.
Infer1d infer_params_1d(std::span<const SpacingSample> samples,
                        Axis axis = Axis::lateral, const InferOptions& options = {});

struct CalibrationBin {
  int velocity = 0;  // m/s, integer bin center
  std::vector<SpacingSample> samples;
  int n_vehicles = 0;  // distinct ego ids
  bool sufficient = false;
};

// Half-up integer binning on ego velocity (19.5 .. 20.5 -> 20, 20.5 -> 21).
// Bins below the sample or distinct-vehicle minimum are marked insufficient.
std::vector<CalibrationBin> bin_by_velocity(std::span<const SpacingSample> samples,
                                            int min_samples = 500,
                                            int min_vehicles = 10);

struct BinResult {
  int velocity = 0;
  double gamma_x = 0.0, beta_x = 0.0, gamma_y = 0.0, beta_y = 0.0;  // means
  double std_gamma_x = 0.0, std_beta_x = 0.0, std_gamma_y = 0.0, std_beta_y = 0.0;
  int n_iterations = 0;
  int draws_per_iteration = 0;
  int n_converged = 0;  // iterations whose alternation converged
  int n_samples = 0;
  int n_vehicles = 0;
  bool sufficient = false;
};

// Bootstrap over vehicles: each iteration draws ceil(frac * n_vehicles) ego
// ids with replacement (ids considered in sorted order; iteration streams
// are seeded by iteration index), pools their samples, and runs
// infer_params. Returns per-parameter means and sample standard deviations.
// Throws on insufficient bins.
BinResult bootstrap_bin(const CalibrationBin& bin, int n_iter = 20,
                        double frac = 0.85, std::uint64_t seed = 0);

// Ordinary least-squares polynomial fit of gamma_x(v) and beta_x(v) over the
// bin means (degree <= 3), with gamma_y/beta_y set to the unweighted means
// across bins. Marker/boundary/kappa fields are taken from `base`. Throws
// when fewer than degree+1 bins are given.
SFieldParams fit_velocity_polynomials(std::span<const BinResult> results,
                                      int degree = 3,
                                      const SFieldParams& base = SFieldParams::highway_defaults());

struct CalibrationOptions {
  std::uint64_t seed = 0;
  int min_samples = 500;
  int min_vehicles = 10;
  int n_iter = 20;
  double frac = 0.85;
  double window = 100.0;
  int lane_span = 1;
  int poly_degree = 3;
};

struct CalibrationOutcome {
  SFieldParams params;
  std::vector<BinResult> bins;  // every bin, including insufficient ones
  Infer1d marker_fit;
  Infer1d boundary_fit;
  std::size_t n_samples = 0;
};

// Full pipeline over one or more recordings: spacing collection, velocity
// binning, per-bin bootstrap, polynomial fitting, and pooled marker/boundary
// inference. Bit-reproducible for a fixed seed.
CalibrationOutcome run_calibration(std::span<const Dataset> datasets,
                                   const CalibrationOptions& options = {});

}  // namespace cspf
