#include "relaydetect/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "relaydetect/errors.hpp"
#include "quadrature.hpp"

namespace relaydetect {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string cell_name(std::size_t m, std::size_t k) {
  return "reference cell (m=" + std::to_string(m) + ", k=" + std::to_string(k) + ")";
}

// int_a^b N(u; h1 s, 1) Phi(t - h2 u) du
double gaussian_times_cdf(double t, Symbol s, double a, double b, const ChannelParams& params,
                          double tol, const char* what) {
  const double mean = params.h1 * value(s);
  const auto f = [&](double u) {
    return std_normal_pdf(u - mean) * cdf_y_given_v(t, u, params);
  };
  if (std::isinf(a) && std::isinf(b)) return detail::integrate_real_line(f, mean, 1.0, tol, what);
  return detail::integrate(f, a, b, tol, what);
}

}  // namespace

SymbolPosterior bin_posterior(const Grid& x_grid, std::size_t k, const ChannelParams& params) {
  const BinInterval b = x_grid.bin(k);
  const double plus = std_normal_mass(b.lower - params.h3, b.upper - params.h3);
  const double minus = std_normal_mass(b.lower + params.h3, b.upper + params.h3);
  const double total = plus + minus;
  if (!(total > 0.0)) {
    throw NumericError("X bin " + std::to_string(k) + " has zero probability");
  }
  return {plus / total, minus / total};
}

double pdf_u_given_x_bin(double u, const SymbolPosterior& posterior,
                         const ChannelParams& params) {
  return posterior.plus * pdf_u_given_s(u, Symbol::plus, params) +
         posterior.minus * pdf_u_given_s(u, Symbol::minus, params);
}

std::vector<double> default_t_points(const Grid& y_grid) {
  return {y_grid.edges().begin(), y_grid.edges().end()};
}

ReferenceTable reference_table(const ChannelParams& params, const Grid& x_grid,
                               std::span<const double> t_points) {
  params.validate();
  for (std::size_t m = 1; m < t_points.size(); ++m) {
    if (!(t_points[m - 1] < t_points[m])) {
      throw std::invalid_argument("reference_table: t points must be strictly increasing");
    }
  }
  ReferenceTable ref{Eigen::MatrixXd(t_points.size(), x_grid.bin_count()),
                     {t_points.begin(), t_points.end()}, x_grid.bin_count()};
  // The per-symbol integrals do not depend on k; only the posterior weights do.
  std::vector<double> plus(t_points.size());
  std::vector<double> minus(t_points.size());
  for (std::size_t m = 0; m < t_points.size(); ++m) {
    const std::string what = cell_name(m, 0);
    plus[m] = gaussian_times_cdf(t_points[m], Symbol::plus, -kInf, kInf, params, 2e-9, what.c_str());
    minus[m] = gaussian_times_cdf(t_points[m], Symbol::minus, -kInf, kInf, params, 2e-9, what.c_str());
  }
  for (std::size_t k = 0; k < x_grid.bin_count(); ++k) {
    const SymbolPosterior w = bin_posterior(x_grid, k, params);
    for (std::size_t m = 0; m < t_points.size(); ++m) {
      ref.values(m, k) = std::clamp(w.plus * plus[m] + w.minus * minus[m], 0.0, 1.0);
    }
  }
  return ref;
}

double decision_statistic(const EmpiricalCdfTable& cdf, const ReferenceTable& ref) {
  if (cdf.values.rows() != ref.values.rows() || cdf.values.cols() != ref.values.cols() ||
      cdf.t_points != ref.t_points) {
    throw std::invalid_argument("decision_statistic: empirical and reference tables do not match");
  }
  const auto n_x = static_cast<std::size_t>(cdf.values.cols());
  const auto n_y = static_cast<std::size_t>(cdf.values.rows()) + 1;
  if (n_x < 3 || n_y < 3) {
    throw std::invalid_argument("decision_statistic: needs at least 3 X bins and 2 t points");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < n_x; ++k) {
    for (std::size_t m = 0; m + 1 < n_y; ++m) {
      sum += std::abs(cdf.values(m, k) - ref.values(m, k));
    }
  }
  return sum / (static_cast<double>(n_x - 2) * static_cast<double>(n_y - 2));
}

double empirical_quantile_threshold(std::span<const double> honest_statistics, double quantile) {
  if (honest_statistics.size() < 20) {
    throw std::invalid_argument("calibration needs at least 20 honest trials, got " +
                                std::to_string(honest_statistics.size()));
  }
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw std::invalid_argument("calibration quantile must lie in (0, 1)");
  }
  std::vector<double> sorted(honest_statistics.begin(), honest_statistics.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(quantile * static_cast<double>(sorted.size()) - 1e-9));
  const double t = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
  return std::max(t, std::numeric_limits<double>::min());
}

DetectionOutcome detect(double statistic, const DetectionPolicy& policy) {
  if (!(statistic >= 0.0)) throw std::invalid_argument("detect: statistic must be non-negative");
  if (!(policy.threshold > 0.0)) throw std::invalid_argument("detect: threshold must be positive");
  return {statistic, policy.threshold,
          statistic > policy.threshold ? Verdict::malicious : Verdict::honest};
}

ConditionalKernel marginal_kernel(const ChannelParams& params) {
  return {[params](double v, double) { return pdf_u(v, params); },
          [](double) { return 0.0; },
          [h1 = std::abs(params.h1)](double) { return 1.0 + h1; }};
}

ConditionalKernel gaussian_kernel(double width) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_kernel: width must be positive");
  return {[width](double v, double u) { return std_normal_pdf((v - u) / width) / width; },
          [](double u) { return u; }, [width](double) { return width; }};
}

ManipulabilityReport check_manipulable(const ChannelParams& params,
                                       const ConditionalKernel& kernel,
                                       std::span<const double> x_points,
                                       std::span<const double> y_points, double tol) {
  params.validate();
  if (!kernel.density || !kernel.location || !kernel.spread) {
    throw std::invalid_argument("check_manipulable: incomplete kernel");
  }
  if (x_points.empty() || y_points.empty()) {
    throw std::invalid_argument("check_manipulable: empty probe grid");
  }
  // Inner integral over v in the kernel's own scale, v = location + spread * z,
  // truncated at |z| = 40. Its error is carried into the outer estimate, which
  // is the one checked: for narrow kernels the rounding of v - u puts noise
  // into the integrand, so the adaptive depth is capped instead.
  const auto inner = [&](double u, auto&& g) {
    const double loc = kernel.location(u);
    const double s = kernel.spread(u);
    const auto f = [&](double z) {
      const double v = loc + s * z;
      return kernel.density(v, u) * g(v) * s;
    };
    double value = 0.0;
    for (const auto& [a, b] : {std::pair{-40.0, -12.0}, {-12.0, 12.0}, {12.0, 40.0}}) {
      double error = 0.0;
      value += detail::integrate_estimate(f, a, b, error, 1e-13, 10);
    }
    if (!std::isfinite(value)) throw NumericError("check_manipulable: kernel integral diverged");
    return value;
  };
  for (double u = -4.0; u <= 4.0; u += 0.5) {
    const double mass = inner(u, [](double) { return 1.0; });
    if (std::abs(mass - 1.0) > 1e-4) {
      throw std::invalid_argument("check_manipulable: kernel integrates to " +
                                  std::to_string(mass) + " at u=" + std::to_string(u));
    }
  }
  // The inner values carry rounding noise near 1e-16, so the outer rule is not
  // asked to resolve below it.
  constexpr double kOuterRelTol = 1e-12;
  constexpr unsigned kOuterDepth = 12;
  const double spread = 1.0 + std::abs(params.h1);
  ManipulabilityReport report;
  for (double x : x_points) {
    for (double y : y_points) {
      const auto fy = [&](double v) { return cdf_y_given_v(y, v, params); };
      const auto attacked = [&](double u) {
        return pdf_u_given_x(u, x, params) * inner(u, fy);
      };
      const auto honest = [&](double u) { return pdf_u_given_x(u, x, params) * fy(u); };
      const double lhs = detail::integrate_real_line(attacked, 0.0, spread, 3e-8, "attacked law",
                                                         kOuterRelTol, kOuterDepth);
      const double rhs = detail::integrate_real_line(honest, 0.0, spread, 3e-8, "honest law",
                                                         kOuterRelTol, kOuterDepth);
      report.max_gap = std::max(report.max_gap, std::abs(lhs - rhs));
    }
  }
  report.manipulable_at_tol = report.max_gap < tol;
  return report;
}

void validate_stochastic(const StochasticTensor& w, std::size_t u_bins, std::size_t v_bins,
                         std::size_t x_bins) {
  if (w.size() != x_bins) throw std::invalid_argument("W must have one slice per X bin");
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto& slice = w[k];
    if (static_cast<std::size_t>(slice.rows()) != u_bins ||
        static_cast<std::size_t>(slice.cols()) != v_bins) {
      throw std::invalid_argument("W slice " + std::to_string(k) + " has the wrong shape");
    }
    if (slice.minCoeff() < -1e-12 || slice.maxCoeff() > 1.0 + 1e-12) {
      throw std::invalid_argument("W slice " + std::to_string(k) + " has entries outside [0,1]");
    }
    for (Eigen::Index i = 0; i < slice.rows(); ++i) {
      if (std::abs(slice.row(i).sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("W slice " + std::to_string(k) + " row " + std::to_string(i) +
                                    " does not sum to 1");
      }
    }
  }
}

ManipulationObjective::ManipulationObjective(const ChannelParams& params,
                                             const NestedGridPair& uv_pair, const Grid& x_grid,
                                             const Grid& y_grid)
    : nesting_(uv_pair.fine, uv_pair.coarse),
      p_u_given_x_(p_u_bin_given_x_bin(uv_pair.fine, x_grid, params)),
      reference_(reference_table(params, x_grid, default_t_points(y_grid))),
      v_bins_(uv_pair.coarse.bin_count()),
      scale_((x_grid.beta() - x_grid.alpha()) / static_cast<double>(x_grid.bin_count() - 2) *
             (y_grid.beta() - y_grid.alpha()) / static_cast<double>(y_grid.bin_count() - 2)) {
  const Grid& v_grid = uv_pair.coarse;
  const auto& t = reference_.t_points;
  const auto reps = v_grid.representatives();

  // Per-symbol pieces over each V bin; the X bin only enters through the posterior.
  const auto n_t = static_cast<Eigen::Index>(t.size());
  const auto n_v = static_cast<Eigen::Index>(v_bins_);
  Eigen::MatrixXd num_plus(n_t, n_v), num_minus(n_t, n_v);
  Eigen::VectorXd mass_plus(n_v), mass_minus(n_v);
  for (std::size_t j = 0; j < v_bins_; ++j) {
    const BinInterval b = v_grid.bin(j);
    mass_plus(j) = std_normal_mass(b.lower - params.h1, b.upper - params.h1);
    mass_minus(j) = std_normal_mass(b.lower + params.h1, b.upper + params.h1);
    for (std::size_t m = 0; m < t.size(); ++m) {
      num_plus(m, j) = gaussian_times_cdf(t[m], Symbol::plus, b.lower, b.upper, params, 1e-12,
                                          "bin-averaged CDF");
      num_minus(m, j) = gaussian_times_cdf(t[m], Symbol::minus, b.lower, b.upper, params, 1e-12,
                                           "bin-averaged CDF");
    }
  }
  averaged_cdf_.reserve(x_grid.bin_count());
  for (std::size_t k = 0; k < x_grid.bin_count(); ++k) {
    const SymbolPosterior w = bin_posterior(x_grid, k, params);
    Eigen::MatrixXd avg(n_t, n_v);
    for (Eigen::Index j = 0; j < n_v; ++j) {
      const double mass = w.plus * mass_plus(j) + w.minus * mass_minus(j);
      for (Eigen::Index m = 0; m < n_t; ++m) {
        avg(m, j) = mass > 1e-300
                        ? (w.plus * num_plus(m, j) + w.minus * num_minus(m, j)) / mass
                        : cdf_y_given_v(t[m], reps[j], params);
      }
    }
    averaged_cdf_.push_back(std::move(avg));
  }
}

StochasticTensor ManipulationObjective::nesting_point() const {
  Eigen::MatrixXd w0 = Eigen::MatrixXd::Zero(nesting_.rows(), nesting_.cols());
  for (std::size_t i = 0; i < nesting_.rows(); ++i) w0(i, nesting_.parent(i)) = 1.0;
  return StochasticTensor(x_bins(), w0);
}

double ManipulationObjective::operator()(const StochasticTensor& w) const {
  validate_stochastic(w, u_bins(), v_bins_, x_bins());
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < x_bins(); ++k) {
    // weight(j) = sum_i P(u_i | x_k) w_{i,j,k}
    const Eigen::RowVectorXd weight = p_u_given_x_.col(k).transpose() * w[k];
    const Eigen::VectorXd predicted = averaged_cdf_[k] * weight.transpose();
    sum += (reference_.values.col(k) - predicted).squaredNorm();
  }
  return scale_ * sum;
}

double manipulation_objective(const StochasticTensor& w, const ChannelParams& params,
                              const NestedGridPair& uv_pair, const Grid& x_grid,
                              const Grid& y_grid) {
  return ManipulationObjective(params, uv_pair, x_grid, y_grid)(w);
}

}  // namespace relaydetect
