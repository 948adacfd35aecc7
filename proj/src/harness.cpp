#include "relaydetect/harness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "relaydetect/errors.hpp"
#include "relaydetect/figures.hpp"
#include "relaydetect/stats.hpp"

namespace relaydetect {

std::string_view version() noexcept { return "0.1.0"; }

RelayStrategy make_strategy(StrategyKind kind, const ChannelParams& params) {
  switch (kind) {
    case StrategyKind::honest: return Honest{};
    case StrategyKind::attack1: return Attack1{};
    case StrategyKind::attack2: return Attack2{params.h1};
    case StrategyKind::map: return DeterministicMap{[](double u) { return -u; }};
    case StrategyKind::kernel:
      return IidKernel{[](double u, RandomStream& rng) { return u + rng.normal(); }};
  }
  throw std::invalid_argument("unknown strategy kind");
}

DetectorGrids detector_grids(const GridSettings& settings) {
  if (settings.schedule) {
    const GridSchedule s = schedule(settings.n_u);
    return {s.x.build(), s.y.build()};
  }
  return {Grid(-settings.range, settings.range, settings.n_x),
          Grid(-settings.range, settings.range, settings.n_y)};
}

TrialContext::TrialContext(const ExperimentConfig& config)
    : config_((config.validate(), config)),
      grids_(detector_grids(config.grids)),
      t_points_(default_t_points(grids_.y)),
      reference_(reference_table(config.params, grids_.x, t_points_)),
      strategy_(make_strategy(config.strategy, config.params)) {}

double TrialContext::score(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw std::invalid_argument("score: x and y lengths differ");
  if (x.empty()) throw std::invalid_argument("score: no observations");
  const auto x_bins = grids_.x.quantize(x);
  const EmpiricalCdfTable cdf = empirical_cond_cdf(y, x_bins, t_points_, grids_.x.bin_count());
  return decision_statistic(cdf, reference_);
}

double TrialContext::run_trial(Arm arm, std::uint64_t index) const {
  RandomStream rng =
      RandomStream::derive(config_.seed, static_cast<std::uint64_t>(arm), index);
  const TransmissionRecord rec = sample_transmission(config_.n, config_.params, rng);
  const std::vector<double> v =
      apply_strategy(rec.u, arm == Arm::honest ? RelayStrategy{Honest{}} : strategy_, rng);
  const std::vector<double> y = sample_y(v, config_.params, rng);
  return score(rec.x, y);
}

std::vector<double> TrialContext::run_arm(Arm arm, std::size_t count, std::size_t jobs) const {
  std::vector<double> out(count);
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = run_trial(arm, i);
    return out;
  }
  std::vector<std::exception_ptr> errors(jobs);
  {
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += jobs) out[i] = run_trial(arm, i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double run_trial(const ExperimentConfig& config, std::uint64_t trial_index) {
  const TrialContext ctx(config);
  const Arm arm = config.strategy == StrategyKind::honest ? Arm::honest : Arm::attack;
  return ctx.run_trial(arm, trial_index);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> sample) {
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out[i] = {sorted[i], static_cast<double>(i + 1) / static_cast<double>(sorted.size())};
  }
  return out;
}

namespace {

CalibrationRecord calibration_record(const ExperimentConfig& config, std::size_t trials,
                                     double quantile) {
  return {trials,           quantile,          config.grids.n_x,  config.grids.n_y,
          config.grids.n_u, config.grids.n_v, config.grids.range};
}

}  // namespace

DetectionPolicy calibrate_threshold(const ExperimentConfig& config, std::size_t honest_trials,
                                    double quantile, std::size_t jobs) {
  if (honest_trials < 20) {
    throw std::invalid_argument("calibration needs at least 20 honest trials");
  }
  const TrialContext ctx(config);
  const auto honest = ctx.run_arm(Arm::honest, honest_trials, jobs);
  return {empirical_quantile_threshold(honest, quantile),
          calibration_record(config, honest_trials, quantile)};
}

ExperimentReport run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  const TrialContext ctx(config);
  ExperimentReport report;
  report.config = config;
  report.version = std::string(version());
  report.honest = ctx.run_arm(Arm::honest, config.trials, jobs);
  report.attack = ctx.run_arm(Arm::attack, config.trials, jobs);
  report.policy = {empirical_quantile_threshold(report.honest, config.quantile),
                   calibration_record(config, config.trials, config.quantile)};
  report.ks = ks_distance(report.honest, report.attack);
  return report;
}

ReportPaths report_paths(const std::filesystem::path& prefix) {
  std::string base = prefix.string();
  if (base.size() > 4 && base.ends_with(".csv")) base.resize(base.size() - 4);
  return {base + "_trials.csv", base + "_cdf.csv", base + "_config.txt"};
}

namespace {

std::string real(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

ReportPaths emit_report(const ExperimentReport& report, const std::filesystem::path& prefix) {
  const ReportPaths paths = report_paths(prefix);
  // Assemble everything before touching the filesystem so a failure leaves no partial report.
  std::string trials = "arm,trial,seed,d_n,verdict\n";
  std::string cdf = "arm,d_n_value,ecdf\n";
  const auto add_arm = [&](std::string_view name, Arm arm, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const DetectionOutcome o = detect(values[i], report.policy);
      trials += std::string(name) + ',' + std::to_string(i) + ',' +
                std::to_string(derive_seed(report.config.seed, static_cast<std::uint64_t>(arm), i)) +
                ',' + real(values[i]) + ',' +
                (o.verdict == Verdict::malicious ? "malicious" : "honest") + '\n';
    }
    for (const CdfPoint& p : empirical_cdf(values)) {
      cdf += std::string(name) + ',' + real(p.value) + ',' + real(p.ecdf) + '\n';
    }
  };
  add_arm("honest", Arm::honest, report.honest);
  add_arm("attack", Arm::attack, report.attack);

  open_for_write(paths.trials) << trials;
  open_for_write(paths.cdf) << cdf;
  open_for_write(paths.config) << format_config(report.config);
  return paths;
}

FigurePreset figure_preset(int figure) {
  switch (figure) {
    case 4:
      return {4, {1.0, 1.0, 1.0}, StrategyKind::attack1,
              {{100, 200}, {1000, 200}, {10000, 200}},
              "Attack 1, strong direct channel (h1=h2=h3=1)"};
    case 5:
      return {5, {1.0, 1.0, 1.0}, StrategyKind::attack2,
              {{100, 200}, {1000, 200}, {10000, 200}},
              "Attack 2, strong direct channel (h1=h2=h3=1)"};
    case 6:
      return {6, {1.0, 1.0, 0.01}, StrategyKind::attack2,
              {{100, 200}, {1000, 200}, {10000, 200}, {100000, 50}},
              "Attack 2, weak direct channel (h1=h2=1, h3=0.01)"};
    case 7:
      return {7, {1.0, 1.0, 0.0}, StrategyKind::attack2,
              {{100, 200}, {1000, 200}, {10000, 200}},
              "Attack 2, no direct channel (h1=h2=1, h3=0)"};
    default:
      throw ConfigError("unknown figure " + std::to_string(figure) + " (expected 4, 5, 6 or 7)");
  }
}

ExperimentConfig figure_config(const FigurePreset& preset, const FigureRun& run,
                               std::uint64_t seed) {
  ExperimentConfig c;
  c.params = preset.params;
  c.strategy = preset.strategy;
  c.n = run.n;
  c.trials = run.trials;
  c.seed = seed;
  c.quantile = 0.99;
  c.out = "figure" + std::to_string(preset.figure) + "_n" + std::to_string(run.n);
  c.validate();
  return c;
}

}  // namespace relaydetect
