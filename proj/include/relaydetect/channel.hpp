#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "relaydetect/random.hpp"

namespace relaydetect {

/// Standard normal density.
double std_normal_pdf(double z) noexcept;
/// Standard normal CDF via erfc; absolute error is at the level of 1e-16.
double std_normal_cdf(double z) noexcept;
/// P(a < Z <= b) for a standard normal Z, accurate in both tails.
double std_normal_mass(double a, double b) noexcept;

/**
 * Coefficients of the two-hop relay network with a direct link.
 *
 *   U = h1 S + N_r      (source -> relay)
 *   Y = h2 V + N'_d     (relay  -> destination)
 *   X = h3 S + N_d      (source -> destination, the secured side channel)
 *
 * All noises are independent standard Gaussians. Zero coefficients are
 * allowed; h3 = 0 removes the direct channel.
 */
struct ChannelParams {
  double h1 = 1.0;
  double h2 = 1.0;
  double h3 = 1.0;

  /// Throws std::invalid_argument unless all coefficients are finite.
  void validate() const;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

/// Source symbol alphabet {+1, -1}.
enum class Symbol : int { minus = -1, plus = 1 };

inline double value(Symbol s) noexcept { return static_cast<double>(static_cast<int>(s)); }

struct SymbolPosterior {
  double plus = 0.5;
  double minus = 0.5;

  double operator[](Symbol s) const noexcept { return s == Symbol::plus ? plus : minus; }
};

/// Realization of one block: source symbols and the two observations of them.
struct TransmissionRecord {
  std::vector<int> s;
  std::vector<double> u;
  std::vector<double> x;

  std::size_t size() const noexcept { return s.size(); }
};

double pdf_u_given_s(double u, Symbol s, const ChannelParams& params) noexcept;

/// P(S | X = x) under the uniform prior: P(+1|x) = 1 / (1 + exp(-2 h3 x)).
SymbolPosterior posterior_s_given_x(double x, const ChannelParams& params) noexcept;

/// Two-component Gaussian mixture f_{U|X}(u|x).
double pdf_u_given_x(double u, double x, const ChannelParams& params) noexcept;

/// Marginal density of U: 0.5 N(h1, 1) + 0.5 N(-h1, 1).
double pdf_u(double u, const ChannelParams& params) noexcept;

/// F_{Y|V}(t|v) = Phi(t - h2 v).
double cdf_y_given_v(double t, double v, const ChannelParams& params) noexcept;

/// Draws n symbols and their relay and direct-link observations. n must be >= 1.
TransmissionRecord sample_transmission(std::size_t n, const ChannelParams& params,
                                       RandomStream& rng);

/// y_i = h2 v_i + N'_i.
std::vector<double> sample_y(std::span<const double> v, const ChannelParams& params,
                             RandomStream& rng);

/// One draw from the marginal of U.
double sample_u_marginal(const ChannelParams& params, RandomStream& rng);

}  // namespace relaydetect
