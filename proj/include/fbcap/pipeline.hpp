#pragma once

#include "fbcap/bounds.hpp"
#include "fbcap/coding.hpp"
#include "fbcap/synthesis.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fbcap {

struct SimulationConfig {
    int n = 200;
    int trials = 1000;
    int nR_bits = 1;
    std::uint64_t seed = 1;
};

struct RunConfig {
    std::vector<double> channel_num;
    std::vector<double> channel_den{1.0};
    double power = 10.0;
    int m = 40;
    int h_max = 6;
    SolverSettings solver;
    double quad_tol = 1e-10;
    int reduce_order = 0;  // 0 = pick by the singular-value drop rule
    std::optional<SimulationConfig> simulation;
    std::string out_dir = ".";
    std::vector<std::string> warnings;  // filled by validation

    NoiseModel make_model() const { return NoiseModel(channel_num, channel_den); }
};

class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& what, std::vector<std::string> violations_)
        : std::runtime_error(what), violations(std::move(violations_)) {}
    std::vector<std::string> violations;
};

// Parses and invariant-checks a JSON config document. All violations are collected
// and reported together in the ConfigError.
RunConfig validate_config(const std::string& raw);

struct PipelineResult {
    std::vector<BoundsReport> rows;
    FirFilter filter;            // filter synthesized at h = h_max
    CodingScheme scheme;
    std::optional<StateSpace> reduced_controller;
    std::optional<TransmissionStats> stats;
    bool incomplete = false;
    std::string error;
    int exit_code = 0;
};

// Full pipeline: solve -> bound -> synthesize -> controller split (-> simulate).
// Persists report.json, convergence.csv, impulse.csv, scheme.json under
// config.out_dir (atomic write-then-rename). Module failures leave partial results
// on disk with an "incomplete" marker and a nonzero exit code in the result.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace fbcap
