// Experiment configuration: JSON file with a schema_version key, parsed
// into plain structs. See README for the documented schema.
#pragma once

#include "otd/elliptic.hpp"
#include "otd/flow.hpp"
#include "otd/grid.hpp"
#include "otd/metric.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace otd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { flow, jko, sweep, oracle_check };

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

struct GridSpec {
    int dim = 1;
    std::array<double, 2> lo{}, hi{};
    std::array<int, 2> n{};
};

struct InitialSpec {
    std::string type = "constant";  // zero | constant | random
    double value = 0.5;
};

struct RegSpec {
    double lambda = 1e-3;
    double delta = 1e-6;
    double p = 2.0;
};

struct JkoSpec {
    std::vector<double> tau_schedule;
    double inner_tol = 1e-8;
    int inner_max_iter = 500;
};

struct ExperimentConfig {
    int schema_version = 1;
    Mode mode = Mode::flow;
    GridSpec grid;
    std::vector<SourceBox> source_boxes;
    bool allow_mean_correction = false;
    InitialSpec initial;
    RegSpec reg;
    FlowConfig flow;
    JkoSpec jko;
    int dw_K = 0;  // 0: default by dimension (64 in 1D, 128 in 2D)
    std::vector<double> sweep_lambdas, sweep_deltas;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace otd
