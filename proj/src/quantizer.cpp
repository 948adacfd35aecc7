#include "relaydetect/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace relaydetect {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Grid::Grid(double alpha, double beta, std::size_t bin_count) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !(alpha < beta)) {
    throw std::invalid_argument("grid requires finite alpha < beta");
  }
  if (bin_count < 3) {
    throw std::invalid_argument("grid requires at least 3 bins, got " + std::to_string(bin_count));
  }
  const std::size_t inner = bin_count - 2;
  step_ = (beta - alpha) / static_cast<double>(inner);
  if (!(step_ > 0.0)) throw std::invalid_argument("grid step underflows");
  edges_.resize(inner + 1);
  for (std::size_t j = 0; j < inner; ++j) edges_[j] = alpha + static_cast<double>(j) * step_;
  edges_[inner] = beta;
}

Grid::Grid(std::vector<double> edges, double step) : edges_(std::move(edges)), step_(step) {}

std::vector<double> Grid::representatives() const {
  std::vector<double> reps(edges_.begin(), edges_.end());
  reps.push_back(beta() + step_);
  return reps;
}

BinInterval Grid::bin(std::size_t index) const {
  const std::size_t n = bin_count();
  if (index >= n) throw std::out_of_range("bin index out of range");
  if (index == 0) return {-kInf, edges_.front()};
  if (index == n - 1) return {edges_.back(), kInf};
  return {edges_[index - 1], edges_[index]};
}

std::size_t Grid::quantize(double value) const {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot quantize a non-finite value");
  if (value <= edges_.front()) return 0;
  if (value > edges_.back()) return bin_count() - 1;
  // First edge >= value; that edge closes the bin on the right.
  const double guess = std::ceil((value - edges_.front()) / step_);
  auto j = static_cast<std::size_t>(
      std::clamp(guess, 1.0, static_cast<double>(edges_.size() - 1)));
  while (j > 1 && value <= edges_[j - 1]) --j;
  while (value > edges_[j]) ++j;
  return j;
}

std::vector<std::size_t> Grid::quantize(std::span<const double> values) const {
  std::vector<std::size_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = quantize(values[i]);
  return out;
}

Grid Grid::refine(std::size_t refinement) const {
  if (refinement == 0) throw std::invalid_argument("refinement must be at least 1");
  std::vector<double> fine;
  fine.reserve((edges_.size() - 1) * refinement + 1);
  fine.push_back(edges_.front());
  for (std::size_t j = 1; j < edges_.size(); ++j) {
    const double lo = edges_[j - 1];
    const double width = edges_[j] - lo;
    for (std::size_t r = 1; r < refinement; ++r) {
      fine.push_back(lo + width * static_cast<double>(r) / static_cast<double>(refinement));
    }
    fine.push_back(edges_[j]);
  }
  return Grid(std::move(fine), step_ / static_cast<double>(refinement));
}

NestedGridPair build_nested_pair(double range, std::size_t coarse_bins, std::size_t refinement) {
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw std::invalid_argument("nested pair requires a positive finite range");
  }
  if (refinement == 0) throw std::invalid_argument("refinement must be at least 1");
  Grid coarse(-range, range, coarse_bins);
  Grid fine = coarse.refine(refinement);
  return {std::move(fine), std::move(coarse)};
}

namespace {

bool contains(const BinInterval& outer, const BinInterval& inner) {
  return outer.lower <= inner.lower && inner.upper <= outer.upper;
}

bool disjoint(const BinInterval& a, const BinInterval& b) {
  // Right-closed bins (lo, hi] share no point iff one ends where the other starts or earlier.
  return a.upper <= b.lower || b.upper <= a.lower;
}

}  // namespace

bool is_nested(const Grid& fine, const Grid& coarse) {
  for (std::size_t i = 0; i < fine.bin_count(); ++i) {
    const BinInterval f = fine.bin(i);
    for (std::size_t j = 0; j < coarse.bin_count(); ++j) {
      const BinInterval c = coarse.bin(j);
      if (!contains(c, f) && !disjoint(c, f)) return false;
    }
  }
  return true;
}

NestingMatrix::NestingMatrix(const Grid& fine, const Grid& coarse)
    : parent_(fine.bin_count()), cols_(coarse.bin_count()) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < fine.bin_count(); ++i) {
    const BinInterval f = fine.bin(i);
    while (j < cols_ && !(f.upper <= coarse.bin(j).upper)) ++j;
    if (j == cols_ || !contains(coarse.bin(j), f)) {
      throw std::invalid_argument("fine bin " + std::to_string(i) +
                                  " straddles a coarse bin edge");
    }
    parent_[i] = j;
  }
}

GridSchedule schedule(std::size_t n_prime) {
  const auto fourth_root = [](double x) {
    return static_cast<std::size_t>(std::llround(std::sqrt(std::sqrt(x))));
  };
  const auto n_u = static_cast<double>(n_prime);
  const std::size_t n_v = fourth_root(n_u);
  const std::size_t n_y = fourth_root(static_cast<double>(n_v));
  if (n_prime < 3 || n_v < 3 || n_y < 3) {
    throw std::invalid_argument("schedule(" + std::to_string(n_prime) +
                                ") gives fewer than 3 bins (n_v=" + std::to_string(n_v) +
                                ", n_y=" + std::to_string(n_y) + ")");
  }
  const double beta1 = std::sqrt(n_u);
  const double beta2 = std::sqrt(static_cast<double>(n_v));
  const double beta3 = std::sqrt(static_cast<double>(n_y));
  GridSchedule s{{-beta1, beta1, n_prime}, {-beta2, beta2, n_v}, {-beta3, beta3, n_y},
                 {-beta3, beta3, n_y}};
  return s;
}

}  // namespace relaydetect
