#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace relaydetect {

/// Closed interval bounds of one bin; tail bins carry an infinite bound.
/// Membership is right-closed: lower < value <= upper (the upper tail is open).
struct BinInterval {
  double lower;
  double upper;
};

/**
 * Uniform quantizer on [alpha, beta] with one unbounded bin on each side.
 *
 * With N = bin_count the representatives are
 *
 *   r_0 = alpha < r_1 < ... < r_{N-2} = beta < r_{N-1} = beta + step,
 *
 * spaced by step = (beta - alpha) / (N - 2) on the inner part, and the bins are
 *
 *   B_0 = (-inf, alpha],  B_j = (r_{j-1}, r_j] for 1 <= j <= N-2,  B_{N-1} = (beta, +inf).
 *
 * Bin indices are 0-based. Grids are immutable once built.
 */
class Grid {
 public:
  /// Throws std::invalid_argument unless alpha < beta (both finite) and bin_count >= 3.
  Grid(double alpha, double beta, std::size_t bin_count);

  double alpha() const noexcept { return edges_.front(); }
  double beta() const noexcept { return edges_.back(); }
  std::size_t bin_count() const noexcept { return edges_.size() + 1; }
  std::size_t inner_bin_count() const noexcept { return edges_.size() - 1; }
  double step() const noexcept { return step_; }

  /// The bin_count representatives r_0 .. r_{N-1}.
  std::vector<double> representatives() const;
  /// Inner edges r_0 .. r_{N-2} (alpha .. beta).
  std::span<const double> edges() const noexcept { return edges_; }

  BinInterval bin(std::size_t index) const;

  /// Index of the unique bin containing value. Throws on non-finite input.
  std::size_t quantize(double value) const;
  std::vector<std::size_t> quantize(std::span<const double> values) const;

  /// Splits each inner bin of this grid into `refinement` equal parts. The
  /// resulting grid shares this grid's range and every one of its edges.
  Grid refine(std::size_t refinement) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Grid(std::vector<double> edges, double step);

  std::vector<double> edges_;
  double step_;
};

inline Grid build_grid(double alpha, double beta, std::size_t bin_count) {
  return Grid(alpha, beta, bin_count);
}

/// A fine grid (for U) whose every bin is nested in one coarse bin (for V).
struct NestedGridPair {
  Grid fine;
  Grid coarse;
};

/// coarse = Grid(-range, range, coarse_bins); fine = coarse.refine(refinement).
NestedGridPair build_nested_pair(double range, std::size_t coarse_bins, std::size_t refinement);

/// True iff every (fine, coarse) bin pair is either nested or disjoint.
/// Exhaustive over all pairs; meant for validation and tests.
bool is_nested(const Grid& fine, const Grid& coarse);

/**
 * The 0/1 matrix W0 with W0(i, j) = 1 iff fine bin i lies inside coarse bin j.
 *
 * Stored as the parent coarse bin of every fine bin, since each row is one-hot.
 */
class NestingMatrix {
 public:
  /// Throws std::invalid_argument if some fine bin straddles a coarse edge.
  NestingMatrix(const Grid& fine, const Grid& coarse);

  std::size_t rows() const noexcept { return parent_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t parent(std::size_t row) const { return parent_.at(row); }
  double operator()(std::size_t row, std::size_t col) const {
    return parent_.at(row) == col ? 1.0 : 0.0;
  }

 private:
  std::vector<std::size_t> parent_;
  std::size_t cols_;
};

inline NestingMatrix nesting_matrix(const NestedGridPair& pair) {
  return NestingMatrix(pair.fine, pair.coarse);
}

struct GridSpec {
  double alpha;
  double beta;
  std::size_t bin_count;

  Grid build() const { return Grid(alpha, beta, bin_count); }
};

/// Grid parameters for U, V, Y, X driven by the number of U bins n'.
struct GridSchedule {
  GridSpec u;
  GridSpec v;
  GridSpec y;
  GridSpec x;
};

/**
 * Asymptotic parameter schedule: beta_1 = sqrt(n'), n_v^2 = sqrt(n'),
 * beta_2 = sqrt(n_v), n_y^2 = sqrt(n_v), beta_3 = sqrt(n_y); every grid is
 * symmetric (alpha = -beta) and the X grid mirrors the Y grid.
 *
 * Throws std::invalid_argument if any derived bin count is below 3.
 */
GridSchedule schedule(std::size_t n_prime);

}  // namespace relaydetect
