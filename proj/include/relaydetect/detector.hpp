#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "relaydetect/channel.hpp"
#include "relaydetect/quantizer.hpp"
#include "relaydetect/stats.hpp"

namespace relaydetect {

/// P(S | X in bin k) from Gaussian bin masses.
SymbolPosterior bin_posterior(const Grid& x_grid, std::size_t k, const ChannelParams& params);

/// Bin-conditioned density f_{U|X~}(u | k) = sum_s P(s | X in B_k) f_{U|S}(u | s).
double pdf_u_given_x_bin(double u, const SymbolPosterior& posterior, const ChannelParams& params);

/// Honest-channel reference: values(m, k) = integral of f_{U|X~}(u|k) F_{Y|V}(t_m|u) du.
struct ReferenceTable {
  Eigen::MatrixXd values;
  std::vector<double> t_points;
  std::size_t x_bins = 0;
};

/// Evaluates every cell by adaptive quadrature (absolute tolerance 1e-8).
/// Throws NumericError naming the failing cell.
ReferenceTable reference_table(const ChannelParams& params, const Grid& x_grid,
                               std::span<const double> t_points);

/// Default evaluation points: the inner edges of the Y grid.
std::vector<double> default_t_points(const Grid& y_grid);

/**
 * D^n = 1/((n_x - 2)(n_y - 2)) * sum_{k < n_x - 1} sum_{m < n_y - 1} |F^n(t_m|k) - ref(m, k)|
 *
 * with n_x the number of X bins and n_y - 1 the number of t points. The last
 * (upper tail) X bin is not summed.
 */
double decision_statistic(const EmpiricalCdfTable& cdf, const ReferenceTable& ref);

struct CalibrationRecord {
  std::size_t honest_trials = 0;
  double quantile = 0.0;
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  std::size_t n_u = 0;
  std::size_t n_v = 0;
  double range = 0.0;
};

struct DetectionPolicy {
  double threshold = 0.0;
  CalibrationRecord calibration;
};

/**
 * Picks the empirical `quantile` of honest-relay statistics as the threshold:
 * the ceil(quantile * N)-th smallest value, so at least that many honest
 * values sit at or below it. Requires N >= 20 and 0 < quantile < 1.
 */
double empirical_quantile_threshold(std::span<const double> honest_statistics, double quantile);

enum class Verdict { honest, malicious };

struct DetectionOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  Verdict verdict = Verdict::honest;
};

/// Malicious iff statistic > threshold. Throws on a negative statistic.
DetectionOutcome detect(double statistic, const DetectionPolicy& policy);

/**
 * A relay kernel Psi(v|u) for the manipulability check. `location` and
 * `spread` tell the integrator where the mass of Psi(.|u) sits so that very
 * narrow kernels are resolved.
 */
struct ConditionalKernel {
  std::function<double(double v, double u)> density;
  std::function<double(double u)> location;
  std::function<double(double u)> spread;
};

/// Psi(v|u) = f_U(v): forwards a fresh draw from the U marginal.
ConditionalKernel marginal_kernel(const ChannelParams& params);
/// Psi(v|u) = N(v; u, width^2), the identity kernel as width -> 0.
ConditionalKernel gaussian_kernel(double width);

struct ManipulabilityReport {
  double max_gap = 0.0;
  bool manipulable_at_tol = false;
};

/**
 * Largest gap over the probe points (x, y) between
 *
 *   iint f_{U|X}(u|x) Psi(v|u) F_{Y|V}(y|v) du dv   and   int f_{U|X}(u|x) F_{Y|V}(y|u) du.
 *
 * A kernel that closes every gap reproduces the honest observation law and so
 * witnesses manipulability. Throws std::invalid_argument if the kernel is not
 * normalized to 1e-4, NumericError on quadrature failure.
 */
ManipulabilityReport check_manipulable(const ChannelParams& params,
                                       const ConditionalKernel& kernel,
                                       std::span<const double> x_points,
                                       std::span<const double> y_points, double tol);

/// Row-stochastic (U bin x V bin) matrix per X bin: w[k](i, j).
using StochasticTensor = std::vector<Eigen::MatrixXd>;

/**
 * The manipulation objective M(W): for a candidate relay transition W it
 * measures the squared distance between the honest reference and the CDF the
 * destination would see,
 *
 *   M(W) = (b4 - a4)/(n_x - 2) (b3 - a3)/(n_y - 2)
 *          sum_{k < n_x - 1} sum_{m < n_y - 1}
 *          | ref(m, k) - sum_j sum_i P(u_i | x_k) w_{i,j,k} F(t_m | vbar_{m,j,k}) |^2,
 *
 * where F(t_m | vbar_{m,j,k}) is the f_{U|X~}(.|k)-weighted average of
 * F_{Y|V}(t_m | u) over V bin j. All W-independent quantities are computed
 * once at construction.
 */
class ManipulationObjective {
 public:
  ManipulationObjective(const ChannelParams& params, const NestedGridPair& uv_pair,
                        const Grid& x_grid, const Grid& y_grid);

  double operator()(const StochasticTensor& w) const;

  /// W0 lifted to three indices (constant in k).
  StochasticTensor nesting_point() const;

  std::size_t u_bins() const noexcept { return p_u_given_x_.rows(); }
  std::size_t v_bins() const noexcept { return v_bins_; }
  std::size_t x_bins() const noexcept { return p_u_given_x_.cols(); }

  const ReferenceTable& reference() const noexcept { return reference_; }

 private:
  NestingMatrix nesting_;
  Eigen::MatrixXd p_u_given_x_;
  ReferenceTable reference_;
  // averaged_cdf_[k](m, j) = F(t_m | vbar_{m,j,k})
  std::vector<Eigen::MatrixXd> averaged_cdf_;
  std::size_t v_bins_;
  double scale_;
};

/// Throws std::invalid_argument unless every slice row lies in [0,1] and sums to 1 (1e-9).
void validate_stochastic(const StochasticTensor& w, std::size_t u_bins, std::size_t v_bins,
                         std::size_t x_bins);

}  // namespace relaydetect

namespace relaydetect {

/// One-shot evaluation of M(W); prefer ManipulationObjective for repeated calls.
double manipulation_objective(const StochasticTensor& w, const ChannelParams& params,
                              const NestedGridPair& uv_pair, const Grid& x_grid,
                              const Grid& y_grid);

}  // namespace relaydetect
