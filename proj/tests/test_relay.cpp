#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "relaydetect/channel.hpp"
#include "relaydetect/relay.hpp"

using namespace relaydetect;

TEST(ApplyStrategy, HonestCopies) {
  RandomStream rng(1);
  const std::vector<double> u{0.3, -1.2};
  EXPECT_EQ(apply_strategy(u, Honest{}, rng), u);
}

TEST(ApplyStrategy, Attack1AlternatesMaps) {
  RandomStream rng(1);
  const std::vector<double> u{0.5, 0.2};
  const auto v = apply_strategy(u, Attack1{}, rng);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(v[0], -0.5);
  EXPECT_DOUBLE_EQ(v[1], -0.6);
}

TEST(ApplyStrategy, DeterministicMapAndKernel) {
  RandomStream rng(1);
  const std::vector<double> u{1.0, -2.0, 3.5};
  const auto v = apply_strategy(u, DeterministicMap{[](double x) { return -x; }}, rng);
  EXPECT_EQ(v, (std::vector<double>{-1.0, 2.0, -3.5}));

  const IidKernel shift{[](double x, RandomStream&) { return x + 10; }};
  EXPECT_EQ(apply_strategy(u, shift, rng), (std::vector<double>{11.0, 8.0, 13.5}));
}

TEST(ApplyStrategy, RejectsEmptyInput) {
  RandomStream rng(1);
  EXPECT_THROW(apply_strategy(std::vector<double>{}, Honest{}, rng), std::invalid_argument);
}

TEST(ApplyStrategy, Attack2FollowsMarginalIndependently) {
  RandomStream rng(31);
  const ChannelParams p{1, 1, 1};
  const auto rec = sample_transmission(100000, p, rng);
  const auto v = apply_strategy(rec.u, Attack2{1.0}, rng);
  RandomStream fresh(77);
  std::vector<double> reference(100000);
  for (auto& r : reference) r = sample_u_marginal(p, fresh);
  // brute force is quadratic, so compare via the sorted merge instead
  std::vector<double> a = v, b = reference;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double ks = 0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    ks = std::max(ks, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  EXPECT_LT(ks, 0.01);
  EXPECT_NEAR(oracle::correlation(rec.u, v), 0.0, 0.01);
}

TEST(ApplyStrategy, Attack2UncorrelatedAcrossTrials) {
  const ChannelParams p{1, 1, 1};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed);
    const auto rec = sample_transmission(10000, p, rng);
    const auto v = apply_strategy(rec.u, Attack2{1.0}, rng);
    ASSERT_LT(std::abs(oracle::correlation(rec.u, v)), 0.03) << seed;
  }
}

TEST(AttackMagnitude, HonestIsZeroForEverySeed) {
  const std::vector<NestedGridPair> pairs{build_nested_pair(3, 42, 2), build_nested_pair(2, 4, 3),
                                          build_nested_pair(5, 12, 1)};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed);
    const auto rec = sample_transmission(500, {1, 1, 1}, rng);
    const auto v = apply_strategy(rec.u, Honest{}, rng);
    for (const auto& pair : pairs) {
      const auto r = attack_magnitude(rec.u, v, pair);
      ASSERT_EQ(r.value, 0.0) << seed;
      ASSERT_GT(r.observed_rows, 0u);
    }
  }
}

TEST(AttackMagnitude, SingleSample) {
  const auto pair = build_nested_pair(2, 4, 2);
  // 0.1 sits in fine bin (0,1], whose parent is (0,2]; 1.5 is in that same coarse bin.
  const std::vector<double> u{0.1}, same{1.5}, other{-1.5};
  EXPECT_DOUBLE_EQ(attack_magnitude(u, same, pair).value, 0.0);
  const auto r = attack_magnitude(u, other, pair);
  EXPECT_DOUBLE_EQ(r.value, 2.0);
  EXPECT_EQ(r.observed_rows, 1u);
  EXPECT_EQ(r.mode, MagnitudeMode::observed_rows);
}

TEST(AttackMagnitude, AllRowsChargesUnobservedRows) {
  const auto pair = build_nested_pair(2, 4, 2);
  const std::vector<double> u{0.1}, v{0.1};
  EXPECT_DOUBLE_EQ(attack_magnitude(u, v, pair, MagnitudeMode::all_rows).value, 5.0);
  EXPECT_DOUBLE_EQ(attack_magnitude(u, v, pair).value, 0.0);
}

TEST(AttackMagnitude, ShiftByTwoCoarseWidths) {
  const auto pair = build_nested_pair(4, 10, 2);  // coarse width 1, fine width 0.5
  const double shift = 2 * pair.coarse.step();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> d(-3.9, 1.9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u(10), v(10);
    std::set<std::size_t> rows;
    for (int i = 0; i < 10; ++i) {
      u[i] = d(gen);
      v[i] = u[i] + shift;
      rows.insert(pair.fine.quantize(u[i]));
    }
    EXPECT_DOUBLE_EQ(attack_magnitude(u, v, pair).value, 2.0 * rows.size());
  }
}

TEST(AttackMagnitude, Attack1BoundedAwayFromZero) {
  const auto pair = build_nested_pair(3, 42, 2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed);
    const auto rec = sample_transmission(1000, {1, 1, 1}, rng);
    const auto v = apply_strategy(rec.u, Attack1{}, rng);
    ASSERT_GT(attack_magnitude(rec.u, v, pair).value, 1.0) << seed;
  }
}

TEST(AttackMagnitude, InvariantUnderJointPermutation) {
  const auto pair = build_nested_pair(3, 12, 3);
  RandomStream rng(9);
  const auto rec = sample_transmission(300, {1, 1, 1}, rng);
  const auto v = apply_strategy(rec.u, Attack1{}, rng);
  std::vector<std::size_t> perm(rec.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  std::vector<double> pu, pv;
  for (auto i : perm) {
    pu.push_back(rec.u[i]);
    pv.push_back(v[i]);
  }
  EXPECT_NEAR(attack_magnitude(rec.u, v, pair).value, attack_magnitude(pu, pv, pair).value, 1e-12);
}

TEST(AttackMagnitude, RejectsLengthMismatch) {
  const auto pair = build_nested_pair(2, 4, 2);
  EXPECT_THROW(attack_magnitude(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, pair),
               std::invalid_argument);
}
