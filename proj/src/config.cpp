#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>

#include "relaydetect/errors.hpp"
#include "relaydetect/harness.hpp"

namespace relaydetect {

namespace {

constexpr std::array<std::string_view, 15> kKeys = {
    "h1", "h2", "h3",    "n",        "trials", "strategy", "n_x", "n_y",
    "n_u", "n_v", "range", "schedule", "seed",   "quantile", "out"};
constexpr std::array<std::string_view, 7> kRequired = {"h1", "h2",       "h3",  "n",
                                                       "trials", "strategy", "seed"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for config key '" +
                    std::string(key) + "'");
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out)) {
    bad_value(key, value);
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::honest: return "honest";
    case StrategyKind::attack1: return "attack1";
    case StrategyKind::attack2: return "attack2";
    case StrategyKind::map: return "map";
    case StrategyKind::kernel: return "kernel";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  for (auto kind : {StrategyKind::honest, StrategyKind::attack1, StrategyKind::attack2,
                    StrategyKind::map, StrategyKind::kernel}) {
    if (to_string(kind) == name) return kind;
  }
  bad_value("strategy", name);
}

void ExperimentConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n < 1) throw ConfigError("n must be at least 1");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (grids.n_x < 3 || grids.n_y < 3 || grids.n_u < 3 || grids.n_v < 3) {
    throw ConfigError("grid bin counts must be at least 3");
  }
  if (!(grids.range > 0.0) || !std::isfinite(grids.range)) {
    throw ConfigError("range must be positive");
  }
  if (grids.schedule) {
    try {
      schedule(grids.n_u);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!grids.schedule && (grids.n_u - 2) % (grids.n_v - 2) != 0) {
    throw ConfigError("n_u - 2 must be a multiple of n_v - 2 so the U grid nests in the V grid");
  }
  if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("quantile must lie in (0, 1)");
  if (out.empty()) throw ConfigError("out must not be empty");
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string, std::less<>> values;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    if (!values.emplace(key, value).second) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
  }
  std::string missing;
  for (auto key : kRequired) {
    if (!values.contains(key)) missing += (missing.empty() ? "" : ", ") + std::string(key);
  }
  if (!missing.empty()) throw ConfigError("missing required config keys: " + missing);

  ExperimentConfig c;
  for (const auto& [key, value] : values) {
    if (key == "h1") c.params.h1 = parse_real(key, value);
    else if (key == "h2") c.params.h2 = parse_real(key, value);
    else if (key == "h3") c.params.h3 = parse_real(key, value);
    else if (key == "n") c.n = parse_int<std::size_t>(key, value);
    else if (key == "trials") c.trials = parse_int<std::size_t>(key, value);
    else if (key == "strategy") c.strategy = parse_strategy(value);
    else if (key == "n_x") c.grids.n_x = parse_int<std::size_t>(key, value);
    else if (key == "n_y") c.grids.n_y = parse_int<std::size_t>(key, value);
    else if (key == "n_u") c.grids.n_u = parse_int<std::size_t>(key, value);
    else if (key == "n_v") c.grids.n_v = parse_int<std::size_t>(key, value);
    else if (key == "range") c.grids.range = parse_real(key, value);
    else if (key == "schedule") {
      if (value == "on") c.grids.schedule = true;
      else if (value == "off") c.grids.schedule = false;
      else bad_value(key, value);
    }
    else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
    else if (key == "quantile") c.quantile = parse_real(key, value);
    else if (key == "out") c.out = value;
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "h1 = " << format_real(c.params.h1) << '\n'
     << "h2 = " << format_real(c.params.h2) << '\n'
     << "h3 = " << format_real(c.params.h3) << '\n'
     << "n = " << c.n << '\n'
     << "trials = " << c.trials << '\n'
     << "strategy = " << to_string(c.strategy) << '\n'
     << "n_x = " << c.grids.n_x << '\n'
     << "n_y = " << c.grids.n_y << '\n'
     << "n_u = " << c.grids.n_u << '\n'
     << "n_v = " << c.grids.n_v << '\n'
     << "range = " << format_real(c.grids.range) << '\n'
     << "schedule = " << (c.grids.schedule ? "on" : "off") << '\n'
     << "seed = " << c.seed << '\n'
     << "quantile = " << format_real(c.quantile) << '\n'
     << "out = " << c.out << '\n';
  return os.str();
}

}  // namespace relaydetect
