// relaydetect: command-line front end for simulation, calibration, detection
// and the manipulability check.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "relaydetect/detector.hpp"
#include "relaydetect/errors.hpp"
#include "relaydetect/figures.hpp"
#include "relaydetect/harness.hpp"

namespace fs = std::filesystem;
using namespace relaydetect;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> out;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override the master seed");
  cmd->add_option("--trials", o.trials, "Override the number of trials per arm")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output prefix");
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig configured(const fs::path& path, const Overrides& o) {
  ExperimentConfig c = load_config(path);
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.out) c.out = *o.out;
  c.validate();
  return c;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }
double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

void print_summary(const ExperimentReport& r) {
  std::size_t flagged = 0;
  for (double d : r.attack) flagged += d > r.policy.threshold;
  std::cout << "n=" << r.config.n << " trials=" << r.config.trials
            << " strategy=" << to_string(r.config.strategy) << '\n'
            << "  honest D^n: min " << num(min_of(r.honest)) << ", max " << num(max_of(r.honest))
            << '\n'
            << "  attack D^n: min " << num(min_of(r.attack)) << ", max " << num(max_of(r.attack))
            << '\n'
            << "  threshold (q=" << r.config.quantile << "): " << num(r.policy.threshold)
            << ", attack trials flagged: " << flagged << '/' << r.attack.size() << '\n'
            << "  KS distance between arms: " << num(r.ks) << '\n';
}

std::pair<std::vector<double>, std::vector<double>> read_observations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read observations file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y") throw ConfigError(path.string() + ": header must be 'x,y'");
  std::vector<double> x, y;
  std::size_t row = 1;
  const auto parse = [&](std::string_view s) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError(path.string() + ": bad number '" + std::string(s) + "' on line " +
                        std::to_string(row));
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError(path.string() + ": expected two columns on line " + std::to_string(row));
    }
    x.push_back(parse(std::string_view(line).substr(0, comma)));
    y.push_back(parse(std::string_view(line).substr(comma + 1)));
  }
  if (x.empty()) throw ConfigError(path.string() + ": no observations");
  return {x, y};
}

int run(int argc, char** argv) {
  CLI::App app{"Byzantine relay detection toolkit", "relaydetect"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Overrides o;
  std::string config_path;

  auto* simulate = app.add_subcommand("simulate", "Run one experiment from a config file");
  simulate->add_option("--config", config_path, "Config file")->required();
  add_overrides(simulate, o);

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the honest-arm threshold");
  calibrate->add_option("--config", config_path, "Config file")->required();
  add_overrides(calibrate, o);

  auto* detect_cmd = app.add_subcommand("detect", "Score an x,y observation CSV");
  std::string observations;
  std::optional<double> threshold;
  detect_cmd->add_option("observations", observations, "CSV with header x,y")->required();
  detect_cmd->add_option("--config", config_path, "Config file")->required();
  detect_cmd->add_option("--threshold", threshold, "Use this threshold instead of calibrating")
      ->check(CLI::PositiveNumber);
  add_overrides(detect_cmd, o);

  auto* check = app.add_subcommand("check-manipulable",
                                   "Check whether a relay kernel reproduces the honest law");
  std::string kernel = "marginal";
  double width = 1e-3, tol = 1e-6;
  ChannelParams params;
  check->add_option("--kernel", kernel, "marginal or gaussian")
      ->check(CLI::IsMember({"marginal", "gaussian"}));
  check->add_option("--width", width, "Gaussian kernel width")->check(CLI::PositiveNumber);
  check->add_option("--tol", tol, "Gap below which the kernel counts as reproducing the law")
      ->check(CLI::PositiveNumber);
  check->add_option("--config", config_path, "Take h1, h2, h3 from a config file");
  check->add_option("--h1", params.h1, "Source-relay gain");
  check->add_option("--h2", params.h2, "Relay-destination gain");
  check->add_option("--h3", params.h3, "Direct-link gain");

  auto* figure = app.add_subcommand("reproduce-figure", "Run one of the pinned experiments");
  int figure_id = 0;
  figure->add_option("figure", figure_id, "4, 5, 6 or 7")->required();
  add_overrides(figure, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*simulate) {
    const ExperimentConfig c = configured(config_path, o);
    const ExperimentReport r = run_experiment(c, o.jobs);
    const ReportPaths p = emit_report(r, c.out);
    print_summary(r);
    std::cout << "wrote " << p.trials.string() << ", " << p.cdf.string() << ", "
              << p.config.string() << '\n';
  } else if (*calibrate) {
    const ExperimentConfig c = configured(config_path, o);
    const DetectionPolicy policy = calibrate_threshold(c, c.trials, c.quantile, o.jobs);
    std::cout << "threshold = " << num(policy.threshold) << "\nhonest_trials = " << c.trials
              << "\nquantile = " << c.quantile << "\nn = " << c.n << '\n';
  } else if (*detect_cmd) {
    const ExperimentConfig c = configured(config_path, o);
    const auto [x, y] = read_observations(observations);
    const TrialContext ctx(c);
    DetectionPolicy policy;
    if (threshold) {
      policy.threshold = *threshold;
    } else {
      ExperimentConfig calib = c;
      calib.n = x.size();
      policy = calibrate_threshold(calib, c.trials, c.quantile, o.jobs);
    }
    const DetectionOutcome outcome = detect(ctx.score(x, y), policy);
    std::cout << "observations = " << x.size() << "\nd_n = " << num(outcome.statistic)
              << "\nthreshold = " << num(outcome.threshold) << "\nverdict = "
              << (outcome.verdict == Verdict::malicious ? "malicious" : "honest") << '\n';
  } else if (*check) {
    if (!config_path.empty()) params = load_config(config_path).params;
    params.validate();
    const ConditionalKernel k =
        kernel == "marginal" ? marginal_kernel(params) : gaussian_kernel(width);
    const std::vector<double> probe{-2, -1, 0, 1, 2};
    const ManipulabilityReport r = check_manipulable(params, k, probe, probe, tol);
    std::cout << "kernel = " << kernel << "\nmax_gap = " << num(r.max_gap) << "\ntol = " << tol
              << "\nreproduces_honest_law = " << (r.manipulable_at_tol ? "yes" : "no") << '\n';
  } else if (*figure) {
    const FigurePreset preset = figure_preset(figure_id);
    const fs::path dir = o.out.value_or(".");
    std::cout << "figure " << preset.figure << ": " << preset.description << '\n';
    for (FigureRun run : preset.runs) {
      if (o.trials) run.trials = *o.trials;
      ExperimentConfig c = figure_config(preset, run, o.seed.value_or(1));
      c.out = (dir / c.out).string();
      const ExperimentReport r = run_experiment(c, o.jobs);
      emit_report(r, c.out);
      print_summary(r);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
