#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "relaydetect/harness.hpp"

namespace relaydetect {

struct FigureRun {
  std::size_t n;
  std::size_t trials;
};

/// Pinned setup of one of the separation experiments (figures 4 to 7).
struct FigurePreset {
  int figure;
  ChannelParams params;
  StrategyKind strategy;
  std::vector<FigureRun> runs;
  std::string_view description;
};

/// Throws ConfigError for a figure outside 4..7.
FigurePreset figure_preset(int figure);

/// Experiment config for one block length of a preset, on the default grids.
ExperimentConfig figure_config(const FigurePreset& preset, const FigureRun& run,
                               std::uint64_t seed);

}  // namespace relaydetect
