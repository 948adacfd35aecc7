#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "relaydetect/channel.hpp"
#include "relaydetect/quantizer.hpp"

namespace relaydetect {

/// Empirical conditional distribution of one quantized sequence given another.
/// Rows with a positive count sum to one; unobserved rows are zero.
struct TransitionMatrix {
  Eigen::MatrixXd entries;
  std::vector<std::size_t> row_counts;
};

/// entry(j, k) = #{i : u_i = j, v_i = k} / #{i : u_i = j}, or 0 for unobserved j.
TransitionMatrix empirical_transition(std::span<const std::size_t> u_bins,
                                      std::span<const std::size_t> v_bins, std::size_t rows,
                                      std::size_t cols);

/// Empirical CDF of Y conditioned on the X bin, tabulated at t points.
/// values(m, k) = #{i : y_i < t_m, x_i = k} / #{i : x_i = k}; empty bins give a zero column.
struct EmpiricalCdfTable {
  Eigen::MatrixXd values;
  std::vector<double> t_points;
  std::vector<std::size_t> x_bin_counts;
};

/// Throws std::invalid_argument on length mismatch, out-of-range bins or
/// t_points that are not strictly increasing.
EmpiricalCdfTable empirical_cond_cdf(std::span<const double> y,
                                     std::span<const std::size_t> x_bins,
                                     std::span<const double> t_points, std::size_t n_x_bins);

/**
 * P(U in B_j | X in B_k) for every U bin j (rows) and X bin k (columns).
 *
 * U and X are conditionally independent given S, so each cell is a ratio of
 * products of Gaussian bin masses. Every column sums to one.
 */
Eigen::MatrixXd p_u_bin_given_x_bin(const Grid& u_grid, const Grid& x_grid,
                                    const ChannelParams& params);

/// E[U | U in tail bin] under the marginal of U, for the two tail bins of a grid.
/// Returns {lower_tail_mean, upper_tail_mean}.
std::pair<double, double> tail_conditional_means(const Grid& grid, const ChannelParams& params);

/**
 * F_{Y|V}(t_m | v_l) at one point per V bin: the representative for inner
 * bins and the conditional mean of the U marginal for the two tail bins.
 * Shape: (t points) x (V bins).
 */
Eigen::MatrixXd cdf_y_at_v_bins(const Grid& v_grid, std::span<const double> t_points,
                                const ChannelParams& params);

/**
 * Largest gap between the empirical conditional CDF and its prediction from
 * the empirical relay transition:
 *
 *   max_{m,k} | F^n(t_m | k) - sum_j sum_l P(u_j | x_k) dF(l | j) F_{Y|V}(t_m | v_l) |.
 *
 * Shapes: cdf (M x K), p_u_given_x (J x K), delta_f (J x L), f_y_given_v (M x L).
 */
double convergence_residual(const EmpiricalCdfTable& cdf, const Eigen::MatrixXd& p_u_given_x,
                            const TransitionMatrix& delta_f,
                            const Eigen::MatrixXd& f_y_given_v);

}  // namespace relaydetect
