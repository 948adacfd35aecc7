#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "relaydetect/quantizer.hpp"
#include "relaydetect/random.hpp"

namespace relaydetect {

/// V = U.
struct Honest {};

/// Non-i.i.d. mapping: V_i = U_i - 1 for odd i, V_i = 2 U_i - 1 for even i (1-based).
struct Attack1 {};

/// V drawn i.i.d. from the marginal of U, independently of U.
struct Attack2 {
  double h1 = 1.0;
};

/// V_i = f(U_i).
struct DeterministicMap {
  std::function<double(double)> f;
};

/// V_i ~ Psi(. | U_i), drawn independently per symbol.
struct IidKernel {
  std::function<double(double, RandomStream&)> sample;
};

/// How the relay turns its observation U^n into the forwarded V^n. Every
/// strategy sees only U^n.
using RelayStrategy = std::variant<Honest, Attack1, Attack2, DeterministicMap, IidKernel>;

/// Throws std::invalid_argument on empty input.
std::vector<double> apply_strategy(std::span<const double> u, const RelayStrategy& strategy,
                                   RandomStream& rng);

enum class MagnitudeMode { observed_rows, all_rows };

struct AttackMagnitude {
  double value = 0.0;
  std::size_t observed_rows = 0;
  MagnitudeMode mode = MagnitudeMode::observed_rows;
};

/**
 * R = sum_{i,j} |dF(j|i) - W0(i,j)| between the empirical transition of the
 * quantized (U, V) pair and the nesting matrix.
 *
 * In observed_rows mode only U bins that occur in u are charged; all_rows mode
 * also charges each unobserved row its full W0 mass of 1.
 */
AttackMagnitude attack_magnitude(std::span<const double> u, std::span<const double> v,
                                 const NestedGridPair& pair,
                                 MagnitudeMode mode = MagnitudeMode::observed_rows);

}  // namespace relaydetect
