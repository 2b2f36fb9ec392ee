// Config-driven experiment runner behind the CLI.
#pragma once

#include "otd/config.hpp"

namespace otd {

// exit codes: 0 success, 1 config error, 2 numerical failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

int run_experiment(const ExperimentConfig& config);

// helpers shared with tests
Grid grid_from_spec(const GridSpec& spec);
Density initial_density(const Grid& g, const InitialSpec& spec,
                        std::uint64_t seed);

}  // namespace otd
