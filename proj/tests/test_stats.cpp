#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "relaydetect/relay.hpp"
#include "relaydetect/stats.hpp"

using namespace relaydetect;

namespace {

// P(U in B_j, X in B_k) / P(X in B_k) by nested Simpson over the joint density,
// with the tail bins truncated at +-12.
Eigen::MatrixXd joint_quadrature_oracle(const Grid& ug, const Grid& xg, const ChannelParams& p) {
  const auto clip = [](BinInterval b) {
    return BinInterval{std::max(b.lower, -12.0), std::min(b.upper, 12.0)};
  };
  Eigen::MatrixXd out(ug.bin_count(), xg.bin_count());
  for (std::size_t k = 0; k < xg.bin_count(); ++k) {
    const auto bx = clip(xg.bin(k));
    double column = 0;
    for (std::size_t j = 0; j < ug.bin_count(); ++j) {
      const auto bu = clip(ug.bin(j));
      out(j, k) = oracle::simpson(
          [&](double x) {
            return oracle::simpson(
                [&](double u) {
                  return 0.5 * (oracle::normal_pdf(u - p.h1) * oracle::normal_pdf(x - p.h3) +
                                oracle::normal_pdf(u + p.h1) * oracle::normal_pdf(x + p.h3));
                },
                bu.lower, bu.upper, 400);
          },
          bx.lower, bx.upper, 400);
      column += out(j, k);
    }
    out.col(k) /= column;
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(EmpiricalTransition, CountsRows) {
  const std::vector<std::size_t> u{0, 0, 1, 1}, v{2, 2, 2, 3};
  const auto t = empirical_transition(u, v, 3, 4);
  EXPECT_EQ(t.entries(0, 2), 1.0);
  EXPECT_EQ(t.entries.row(0).sum(), 1.0);
  EXPECT_EQ(t.entries(1, 2), 0.5);
  EXPECT_EQ(t.entries(1, 3), 0.5);
  EXPECT_EQ(t.entries.row(2).sum(), 0.0);
  EXPECT_EQ(t.row_counts, (std::vector<std::size_t>{2, 2, 0}));
}

TEST(EmpiricalTransition, SingleSampleOneHot) {
  const std::vector<std::size_t> u{1}, v{0};
  const auto t = empirical_transition(u, v, 2, 2);
  EXPECT_EQ(t.entries(1, 0), 1.0);
  EXPECT_EQ(t.entries.sum(), 1.0);
}

TEST(EmpiricalTransition, Errors) {
  const std::vector<std::size_t> a{0, 1}, b{0};
  EXPECT_THROW(empirical_transition(a, b, 2, 2), std::invalid_argument);
  const std::vector<std::size_t> c{0, 5};
  EXPECT_THROW(empirical_transition(a, c, 2, 2), std::out_of_range);
}

TEST(EmpiricalTransition, RowStochasticOnRandomInputs) {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 1 + gen() % 12, cols = 1 + gen() % 12, n = 1 + gen() % 60;
    std::vector<std::size_t> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = gen() % rows;
      v[i] = gen() % cols;
    }
    const auto t = empirical_transition(u, v, rows, cols);
    for (std::size_t j = 0; j < rows; ++j) {
      const double s = t.entries.row(j).sum();
      ASSERT_TRUE(t.row_counts[j] > 0 ? std::abs(s - 1) < 1e-12 : s == 0.0);
      ASSERT_GE(t.entries.row(j).minCoeff(), 0.0);
    }
  }
}

TEST(EmpiricalTransition, HonestDataReproducesNesting) {
  const auto pair = build_nested_pair(3, 12, 4);
  const NestingMatrix w0 = nesting_matrix(pair);
  RandomStream rng(3);
  const auto rec = sample_transmission(2000, {1, 1, 1}, rng);
  const auto t = empirical_transition(pair.fine.quantize(rec.u), pair.coarse.quantize(rec.u),
                                      pair.fine.bin_count(), pair.coarse.bin_count());
  for (std::size_t i = 0; i < w0.rows(); ++i) {
    if (t.row_counts[i] == 0) continue;
    for (std::size_t j = 0; j < w0.cols(); ++j) ASSERT_EQ(t.entries(i, j), w0(i, j));
  }
}

TEST(EmpiricalCondCdf, Counting) {
  const std::vector<double> y{0.1, 0.5, 0.9}, t{0.6};
  const std::vector<std::size_t> x{1, 1, 1};
  const auto table = empirical_cond_cdf(y, x, t, 3);
  EXPECT_NEAR(table.values(0, 1), 2.0 / 3, 1e-15);
  EXPECT_EQ(table.values(0, 0), 0.0);
  EXPECT_EQ(table.values(0, 2), 0.0);
  EXPECT_EQ(table.x_bin_counts, (std::vector<std::size_t>{0, 3, 0}));
}

TEST(EmpiricalCondCdf, StrictInequalityAndSaturation) {
  const std::vector<double> y{0.5, 1.0, 2.0};
  const std::vector<std::size_t> x{0, 0, 0};
  const std::vector<double> t{-1.0, 0.5, 1.0, 3.0};
  const auto table = empirical_cond_cdf(y, x, t, 1);
  EXPECT_EQ(table.values(0, 0), 0.0);
  EXPECT_EQ(table.values(1, 0), 0.0);  // y = t is not counted
  EXPECT_NEAR(table.values(2, 0), 1.0 / 3, 1e-15);
  EXPECT_EQ(table.values(3, 0), 1.0);
}

TEST(EmpiricalCondCdf, Errors) {
  const std::vector<double> y{0.5, 1.0};
  const std::vector<std::size_t> x1{0}, x2{0, 4};
  const std::vector<double> t{0.0, 1.0}, bad{1.0, 1.0};
  EXPECT_THROW(empirical_cond_cdf(y, x1, t, 2), std::invalid_argument);
  EXPECT_THROW(empirical_cond_cdf(y, x2, t, 2), std::out_of_range);
  const std::vector<std::size_t> x3{0, 1};
  EXPECT_THROW(empirical_cond_cdf(y, x3, bad, 2), std::invalid_argument);
}

TEST(EmpiricalCondCdf, MatchesNaiveCountAndIsMonotone) {
  std::mt19937_64 gen(202);
  std::normal_distribution<double> nd(0, 2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + gen() % 80, bins = 1 + gen() % 6, nt = 1 + gen() % 9;
    std::vector<double> y(n), t(nt);
    std::vector<std::size_t> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::round(nd(gen) * 4) / 4;  // forces ties with t
      x[i] = gen() % bins;
    }
    for (std::size_t m = 0; m < nt; ++m) t[m] = -3 + 0.75 * m;
    const auto table = empirical_cond_cdf(y, x, t, bins);
    for (std::size_t k = 0; k < bins; ++k) {
      for (std::size_t m = 0; m < nt; ++m) {
        double hit = 0, total = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (x[i] != k) continue;
          total += 1;
          hit += y[i] < t[m];
        }
        ASSERT_NEAR(table.values(m, k), total > 0 ? hit / total : 0.0, 1e-15);
        if (m > 0) ASSERT_LE(table.values(m - 1, k), table.values(m, k));
        ASSERT_GE(table.values(m, k), 0.0);
        ASSERT_LE(table.values(m, k), 1.0);
      }
    }
  }
}

TEST(PUGivenX, ColumnsSumToOne) {
  const Grid ug(-3, 3, 82), xg(-3, 3, 12);
  const auto p = p_u_bin_given_x_bin(ug, xg, {1, 1, 1});
  for (Eigen::Index k = 0; k < p.cols(); ++k) EXPECT_NEAR(p.col(k).sum(), 1.0, 1e-12);
}

TEST(PUGivenX, NoDirectLinkMakesColumnsEqual) {
  const Grid ug(-3, 3, 22), xg(-2, 2, 7);
  const auto p = p_u_bin_given_x_bin(ug, xg, {1, 1, 0});
  for (Eigen::Index k = 1; k < p.cols(); ++k) {
    EXPECT_LT((p.col(k) - p.col(0)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(PUGivenX, MirrorSymmetry) {
  const Grid ug(-3, 3, 14), xg(-2, 2, 6);
  const auto p = p_u_bin_given_x_bin(ug, xg, {1, 1, 1});
  const Eigen::Index J = p.rows(), K = p.cols();
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index k = 0; k < K; ++k) EXPECT_NEAR(p(j, k), p(J - 1 - j, K - 1 - k), 1e-6);
  }
}

TEST(PUGivenX, MatchesTwoDimensionalQuadrature) {
  const Grid ug(-2, 2, 8), xg(-1.5, 1.5, 5);
  for (const ChannelParams params : {ChannelParams{1, 1, 1}, ChannelParams{0.7, 1, 1.6}}) {
    const auto p = p_u_bin_given_x_bin(ug, xg, params);
    const auto q = joint_quadrature_oracle(ug, xg, params);
    EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(TailMeans, SymmetricAndOutsideRange) {
  const Grid g(-3, 3, 12);
  const auto [lo, hi] = tail_conditional_means(g, {1, 1, 1});
  EXPECT_NEAR(lo, -hi, 1e-10);
  EXPECT_GT(hi, 3.0);
  // E[U | U > 3] under the mixture, from the oracle integrals
  const auto f = [](double u) { return 0.5 * (oracle::normal_pdf(u - 1) + oracle::normal_pdf(u + 1)); };
  const double mass = oracle::simpson(f, 3, 20, 20000);
  const double first = oracle::simpson([&](double u) { return u * f(u); }, 3, 20, 20000);
  EXPECT_NEAR(hi, first / mass, 1e-9);
  EXPECT_NEAR(hi, 3.37301032777719493033303974833, 1e-9);
}

TEST(ConvergenceResidual, ExactPredictionGivesZero) {
  EmpiricalCdfTable cdf{Eigen::MatrixXd::Constant(1, 1, 0.25), {0.0}, {4}};
  TransitionMatrix df{Eigen::MatrixXd::Constant(1, 1, 1.0), {4}};
  const Eigen::MatrixXd p = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const Eigen::MatrixXd f = Eigen::MatrixXd::Constant(1, 1, 0.25);
  EXPECT_EQ(convergence_residual(cdf, p, df, f), 0.0);
}

TEST(ConvergenceResidual, Errors) {
  EmpiricalCdfTable empty{Eigen::MatrixXd::Zero(1, 1), {0.0}, {0}};
  TransitionMatrix df{Eigen::MatrixXd::Zero(1, 1), {0}};
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  EXPECT_THROW(convergence_residual(empty, one, df, one), std::invalid_argument);
  EmpiricalCdfTable cdf{Eigen::MatrixXd::Zero(1, 1), {0.0}, {2}};
  EXPECT_THROW(convergence_residual(cdf, Eigen::MatrixXd::Ones(1, 2), df, one),
               std::invalid_argument);
}

namespace {

double residual_at(std::size_t n, std::uint64_t seed, const RelayStrategy& strategy) {
  const ChannelParams params{1, 1, 1};
  const auto pair = build_nested_pair(3, 42, 2);
  const Grid xg(-3, 3, 12), yg(-3, 3, 12);
  const std::vector<double> t(yg.edges().begin(), yg.edges().end());
  RandomStream rng(seed);
  const auto rec = sample_transmission(n, params, rng);
  const auto v = apply_strategy(rec.u, strategy, rng);
  const auto y = sample_y(v, params, rng);
  const auto cdf = empirical_cond_cdf(y, xg.quantize(rec.x), t, xg.bin_count());
  const auto df = empirical_transition(pair.fine.quantize(rec.u), pair.coarse.quantize(v),
                                       pair.fine.bin_count(), pair.coarse.bin_count());
  return convergence_residual(cdf, p_u_bin_given_x_bin(pair.fine, xg, params), df,
                              cdf_y_at_v_bins(pair.coarse, t, params));
}

}  // namespace

TEST(ConvergenceResidual, MedianHalvesWithBlockLength) {
  for (const RelayStrategy& s : {RelayStrategy{Honest{}}, RelayStrategy{Attack2{1.0}}}) {
    std::vector<double> small, large;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      small.push_back(residual_at(100, seed, s));
      large.push_back(residual_at(10000, 1000 + seed, s));
    }
    EXPECT_LT(median(large), 0.5 * median(small)) << median(large) << " vs " << median(small);
  }
}
