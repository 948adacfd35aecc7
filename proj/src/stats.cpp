#include "relaydetect/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "relaydetect/errors.hpp"
#include "quadrature.hpp"

namespace relaydetect {

TransitionMatrix empirical_transition(std::span<const std::size_t> u_bins,
                                      std::span<const std::size_t> v_bins, std::size_t rows,
                                      std::size_t cols) {
  if (u_bins.size() != v_bins.size()) {
    throw std::invalid_argument("empirical_transition: length mismatch");
  }
  TransitionMatrix t{Eigen::MatrixXd::Zero(rows, cols), std::vector<std::size_t>(rows, 0)};
  for (std::size_t i = 0; i < u_bins.size(); ++i) {
    if (u_bins[i] >= rows || v_bins[i] >= cols) {
      throw std::out_of_range("empirical_transition: bin index out of range at position " +
                              std::to_string(i));
    }
    t.entries(u_bins[i], v_bins[i]) += 1.0;
    ++t.row_counts[u_bins[i]];
  }
  for (std::size_t j = 0; j < rows; ++j) {
    if (t.row_counts[j] > 0) t.entries.row(j) /= static_cast<double>(t.row_counts[j]);
  }
  return t;
}

EmpiricalCdfTable empirical_cond_cdf(std::span<const double> y,
                                     std::span<const std::size_t> x_bins,
                                     std::span<const double> t_points, std::size_t n_x_bins) {
  if (y.size() != x_bins.size()) throw std::invalid_argument("empirical_cond_cdf: length mismatch");
  if (t_points.empty()) throw std::invalid_argument("empirical_cond_cdf: no t points");
  for (std::size_t m = 1; m < t_points.size(); ++m) {
    if (!(t_points[m - 1] < t_points[m])) {
      throw std::invalid_argument("empirical_cond_cdf: t points must be strictly increasing");
    }
  }
  const std::size_t n_t = t_points.size();
  // hist(p, k): samples of bin k with exactly p t-points <= y, i.e. y < t_m iff m >= p.
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(n_t + 1, n_x_bins);
  EmpiricalCdfTable table{Eigen::MatrixXd::Zero(n_t, n_x_bins),
                          std::vector<double>(t_points.begin(), t_points.end()),
                          std::vector<std::size_t>(n_x_bins, 0)};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t k = x_bins[i];
    if (k >= n_x_bins) throw std::out_of_range("empirical_cond_cdf: X bin out of range");
    const auto p = static_cast<std::size_t>(
        std::upper_bound(t_points.begin(), t_points.end(), y[i]) - t_points.begin());
    hist(p, k) += 1.0;
    ++table.x_bin_counts[k];
  }
  for (std::size_t k = 0; k < n_x_bins; ++k) {
    if (table.x_bin_counts[k] == 0) continue;
    const double total = static_cast<double>(table.x_bin_counts[k]);
    double below = 0.0;
    for (std::size_t m = 0; m < n_t; ++m) {
      below += hist(m, k);
      table.values(m, k) = below / total;
    }
  }
  return table;
}

namespace {

// Gaussian mass of each bin of a grid for U-like variables centred at `mean`.
std::vector<double> bin_masses(const Grid& grid, double mean) {
  std::vector<double> out(grid.bin_count());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const BinInterval b = grid.bin(j);
    out[j] = std_normal_mass(b.lower - mean, b.upper - mean);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd p_u_bin_given_x_bin(const Grid& u_grid, const Grid& x_grid,
                                    const ChannelParams& params) {
  params.validate();
  const auto u_plus = bin_masses(u_grid, params.h1);
  const auto u_minus = bin_masses(u_grid, -params.h1);
  const auto x_plus = bin_masses(x_grid, params.h3);
  const auto x_minus = bin_masses(x_grid, -params.h3);
  Eigen::MatrixXd p(u_grid.bin_count(), x_grid.bin_count());
  for (std::size_t k = 0; k < x_grid.bin_count(); ++k) {
    const double norm = x_plus[k] + x_minus[k];
    if (!(norm > 0.0)) {
      throw NumericError("p_u_bin_given_x_bin: X bin " + std::to_string(k) +
                         " has zero probability");
    }
    const double wp = x_plus[k] / norm;
    const double wm = x_minus[k] / norm;
    for (std::size_t j = 0; j < u_grid.bin_count(); ++j) {
      p(j, k) = wp * u_plus[j] + wm * u_minus[j];
    }
  }
  return p;
}

std::pair<double, double> tail_conditional_means(const Grid& grid, const ChannelParams& params) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto weighted = [&](double u) { return u * pdf_u(u, params); };
  const auto density = [&](double u) { return pdf_u(u, params); };
  const auto mean_over = [&](double a, double b) {
    const double mass = detail::integrate(density, a, b, 1e-12, "tail mass");
    if (!(mass > 1e-300)) return std::isinf(a) ? b : a;
    return detail::integrate(weighted, a, b, 1e-12, "tail mean") / mass;
  };
  return {mean_over(-inf, grid.alpha()), mean_over(grid.beta(), inf)};
}

Eigen::MatrixXd cdf_y_at_v_bins(const Grid& v_grid, std::span<const double> t_points,
                                const ChannelParams& params) {
  auto points = v_grid.representatives();
  const auto [lower, upper] = tail_conditional_means(v_grid, params);
  points.front() = lower;
  points.back() = upper;
  Eigen::MatrixXd f(t_points.size(), points.size());
  for (std::size_t m = 0; m < t_points.size(); ++m) {
    for (std::size_t l = 0; l < points.size(); ++l) {
      f(m, l) = cdf_y_given_v(t_points[m], points[l], params);
    }
  }
  return f;
}

double convergence_residual(const EmpiricalCdfTable& cdf, const Eigen::MatrixXd& p_u_given_x,
                            const TransitionMatrix& delta_f,
                            const Eigen::MatrixXd& f_y_given_v) {
  const auto m = cdf.values.rows();
  const auto k = cdf.values.cols();
  if (p_u_given_x.cols() != k || delta_f.entries.rows() != p_u_given_x.rows() ||
      f_y_given_v.rows() != m || f_y_given_v.cols() != delta_f.entries.cols()) {
    throw std::invalid_argument("convergence_residual: dimension mismatch");
  }
  std::size_t total = 0;
  for (auto c : cdf.x_bin_counts) total += c;
  if (total == 0) throw std::invalid_argument("convergence_residual: empty sample");
  const Eigen::MatrixXd predicted = f_y_given_v * delta_f.entries.transpose() * p_u_given_x;
  return (cdf.values - predicted).cwiseAbs().maxCoeff();
}

}  // namespace relaydetect
