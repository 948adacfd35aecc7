#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relaydetect/channel.hpp"
#include "relaydetect/detector.hpp"
#include "relaydetect/quantizer.hpp"
#include "relaydetect/relay.hpp"

namespace relaydetect {

enum class StrategyKind { honest, attack1, attack2, map, kernel };

std::string_view to_string(StrategyKind kind) noexcept;
/// Throws ConfigError naming the value if it is not a known strategy.
StrategyKind parse_strategy(std::string_view name);

/// Concrete strategy for a configured kind. `map` is sign inversion V = -U,
/// `kernel` adds an independent standard Gaussian to U.
RelayStrategy make_strategy(StrategyKind kind, const ChannelParams& params);

struct GridSettings {
  std::size_t n_x = 12;
  std::size_t n_y = 12;
  std::size_t n_u = 82;
  std::size_t n_v = 42;
  double range = 3.0;
  /// Derive the X and Y grids from schedule(n_u) instead of the fixed range.
  bool schedule = false;

  friend bool operator==(const GridSettings&, const GridSettings&) = default;
};

struct ExperimentConfig {
  ChannelParams params;
  std::size_t n = 1000;
  std::size_t trials = 200;
  StrategyKind strategy = StrategyKind::attack1;
  GridSettings grids;
  std::uint64_t seed = 1;
  double quantile = 0.99;
  std::string out = "report";

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the flat `key = value` format ('#' starts a comment). Unknown keys and
/// missing required keys (h1, h2, h3, n, trials, strategy, seed) raise ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every key, one per line, in a form parse_config reads back identically.
std::string format_config(const ExperimentConfig& config);

/// Stream family of an experiment arm.
enum class Arm : std::uint64_t { honest = 0, attack = 1 };

/// Grids used by the detector for a configuration.
struct DetectorGrids {
  Grid x;
  Grid y;
};
DetectorGrids detector_grids(const GridSettings& settings);

/**
 * Everything a trial needs that does not depend on the trial: grids, t points,
 * and the reference table. Immutable and shared between worker threads.
 */
class TrialContext {
 public:
  explicit TrialContext(const ExperimentConfig& config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const Grid& x_grid() const noexcept { return grids_.x; }
  const Grid& y_grid() const noexcept { return grids_.y; }
  const ReferenceTable& reference() const noexcept { return reference_; }

  /// D^n of trial `index` in `arm`. The honest arm always uses the honest relay;
  /// the attack arm uses the configured strategy. Deterministic in (seed, arm, index).
  double run_trial(Arm arm, std::uint64_t index) const;

  /// D^n of an externally observed (x, y) block.
  double score(std::span<const double> x, std::span<const double> y) const;

  /// Runs `count` trials of an arm on up to `jobs` threads; result i is trial i.
  std::vector<double> run_arm(Arm arm, std::size_t count, std::size_t jobs) const;

 private:
  ExperimentConfig config_;
  DetectorGrids grids_;
  std::vector<double> t_points_;
  ReferenceTable reference_;
  RelayStrategy strategy_;
};

/// Arm follows the configured strategy (honest -> Arm::honest).
double run_trial(const ExperimentConfig& config, std::uint64_t trial_index);

/// Sup-norm distance between the empirical CDFs of two samples.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Threshold from `trials` honest Monte Carlo runs of the configuration.
DetectionPolicy calibrate_threshold(const ExperimentConfig& config, std::size_t honest_trials,
                                    double quantile, std::size_t jobs = 1);

struct CdfPoint {
  double value;
  double ecdf;
};

/// Sorted sample with its empirical CDF, one point per sample.
std::vector<CdfPoint> empirical_cdf(std::span<const double> sample);

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<double> honest;
  std::vector<double> attack;
  DetectionPolicy policy;
  double ks = 0.0;
  std::string version;
};

ExperimentReport run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

struct ReportPaths {
  std::filesystem::path trials;
  std::filesystem::path cdf;
  std::filesystem::path config;
};

/// File names derived from an output prefix: <prefix>_trials.csv, <prefix>_cdf.csv
/// and <prefix>_config.txt. A trailing ".csv" on the prefix is dropped.
ReportPaths report_paths(const std::filesystem::path& prefix);

/// Writes the per-trial CSV (arm,trial,seed,d_n,verdict), the CDF CSV
/// (arm,d_n_value,ecdf) and the config echo.
ReportPaths emit_report(const ExperimentReport& report, const std::filesystem::path& prefix);

/// The library version string.
std::string_view version() noexcept;

}  // namespace relaydetect
