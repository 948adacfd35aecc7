#include "relaydetect/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace relaydetect {

double std_normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double std_normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z * (0.5 * std::numbers::sqrt2));
}

double std_normal_mass(double a, double b) noexcept {
  if (!(a < b)) return 0.0;
  // Subtract in whichever tail keeps both terms small.
  if (a >= 0.0) return std_normal_cdf(-a) - std_normal_cdf(-b);
  return std_normal_cdf(b) - std_normal_cdf(a);
}

void ChannelParams::validate() const {
  if (!std::isfinite(h1) || !std::isfinite(h2) || !std::isfinite(h3)) {
    throw std::invalid_argument("channel coefficients must be finite");
  }
}

double pdf_u_given_s(double u, Symbol s, const ChannelParams& params) noexcept {
  return std_normal_pdf(u - params.h1 * value(s));
}

SymbolPosterior posterior_s_given_x(double x, const ChannelParams& params) noexcept {
  // Logistic in the log-likelihood ratio 2 h3 x, evaluated on the stable side.
  const double llr = 2.0 * params.h3 * x;
  SymbolPosterior p;
  if (llr >= 0.0) {
    const double e = std::exp(-llr);
    p.plus = 1.0 / (1.0 + e);
    p.minus = e / (1.0 + e);
  } else {
    const double e = std::exp(llr);
    p.plus = e / (1.0 + e);
    p.minus = 1.0 / (1.0 + e);
  }
  return p;
}

double pdf_u_given_x(double u, double x, const ChannelParams& params) noexcept {
  const SymbolPosterior p = posterior_s_given_x(x, params);
  return p.plus * pdf_u_given_s(u, Symbol::plus, params) +
         p.minus * pdf_u_given_s(u, Symbol::minus, params);
}

double pdf_u(double u, const ChannelParams& params) noexcept {
  return 0.5 * (pdf_u_given_s(u, Symbol::plus, params) + pdf_u_given_s(u, Symbol::minus, params));
}

double cdf_y_given_v(double t, double v, const ChannelParams& params) noexcept {
  return std_normal_cdf(t - params.h2 * v);
}

TransmissionRecord sample_transmission(std::size_t n, const ChannelParams& params,
                                       RandomStream& rng) {
  if (n == 0) throw std::invalid_argument("sample_transmission: n must be at least 1");
  TransmissionRecord rec;
  rec.s.resize(n);
  rec.u.resize(n);
  rec.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int s = rng.sign();
    rec.s[i] = s;
    rec.u[i] = params.h1 * s + rng.normal();
    rec.x[i] = params.h3 * s + rng.normal();
  }
  return rec;
}

std::vector<double> sample_y(std::span<const double> v, const ChannelParams& params,
                             RandomStream& rng) {
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) y[i] = params.h2 * v[i] + rng.normal();
  return y;
}

double sample_u_marginal(const ChannelParams& params, RandomStream& rng) {
  const int s = rng.sign();
  return params.h1 * s + rng.normal();
}

}  // namespace relaydetect
