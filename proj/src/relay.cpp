#include "relaydetect/relay.hpp"

#include <cmath>
#include <stdexcept>

#include "relaydetect/stats.hpp"

namespace relaydetect {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::vector<double> apply_strategy(std::span<const double> u, const RelayStrategy& strategy,
                                   RandomStream& rng) {
  if (u.empty()) throw std::invalid_argument("apply_strategy: empty input");
  std::vector<double> v(u.size());
  std::visit(
      overloaded{
          [&](const Honest&) { v.assign(u.begin(), u.end()); },
          [&](const Attack1&) {
            // Index i here is 0-based, so even i is an odd 1-based position.
            for (std::size_t i = 0; i < u.size(); ++i) {
              v[i] = (i % 2 == 0) ? u[i] - 1.0 : 2.0 * u[i] - 1.0;
            }
          },
          [&](const Attack2& a) {
            for (double& vi : v) vi = a.h1 * rng.sign() + rng.normal();
          },
          [&](const DeterministicMap& m) {
            if (!m.f) throw std::invalid_argument("DeterministicMap without a function");
            for (std::size_t i = 0; i < u.size(); ++i) v[i] = m.f(u[i]);
          },
          [&](const IidKernel& k) {
            if (!k.sample) throw std::invalid_argument("IidKernel without a sampler");
            for (std::size_t i = 0; i < u.size(); ++i) v[i] = k.sample(u[i], rng);
          },
      },
      strategy);
  return v;
}

AttackMagnitude attack_magnitude(std::span<const double> u, std::span<const double> v,
                                 const NestedGridPair& pair, MagnitudeMode mode) {
  if (u.size() != v.size()) throw std::invalid_argument("attack_magnitude: length mismatch");
  const NestingMatrix w0(pair.fine, pair.coarse);
  const auto u_bins = pair.fine.quantize(u);
  const auto v_bins = pair.coarse.quantize(v);
  const TransitionMatrix df =
      empirical_transition(u_bins, v_bins, pair.fine.bin_count(), pair.coarse.bin_count());

  AttackMagnitude r;
  r.mode = mode;
  for (std::size_t i = 0; i < w0.rows(); ++i) {
    if (df.row_counts[i] > 0) {
      ++r.observed_rows;
    } else if (mode == MagnitudeMode::observed_rows) {
      continue;
    }
    for (std::size_t j = 0; j < w0.cols(); ++j) r.value += std::abs(df.entries(i, j) - w0(i, j));
  }
  return r;
}

}  // namespace relaydetect
