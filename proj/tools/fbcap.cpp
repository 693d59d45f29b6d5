// fbcap: bounds on the feedback capacity of stationary Gaussian channels and the
// matching feedback coding scheme. See README.md for the config schema.

#include "fbcap/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"feedback-capacity bounds and coding-scheme synthesis"};

    std::string config_path;
    std::string out_dir;
    int m = -1;
    int h_max = -1;
    double power = 0.0;
    long long seed = -1;
    bool simulate = false;
    double quad_tol = 0.0;
    double solver_tol = 0.0;

    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--m", m, "grid half-resolution (overrides config)");
    app.add_option("--h-max", h_max, "largest causality-constraint count (overrides config)");
    app.add_option("--power", power, "input power budget P (overrides config)");
    app.add_option("--seed", seed, "simulation seed (overrides config)");
    app.add_flag("--simulate", simulate, "run the transmission simulation");
    app.add_option("--quad-tol", quad_tol, "quadrature tolerance in nats (overrides config)");
    app.add_option("--solver-tol", solver_tol, "dual-solver gradient tolerance (overrides config)");

    CLI11_PARSE(app, argc, argv);

    std::string raw;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot read config file " << config_path << "\n";
            return 2;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        raw = ss.str();
    }

    fbcap::RunConfig config;
    try {
        config = fbcap::validate_config(raw);
    } catch (const fbcap::ConfigError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }

    if (!out_dir.empty()) config.out_dir = out_dir;
    if (m > 0) config.m = m;
    if (h_max > 0) config.h_max = h_max;
    if (power > 0.0) config.power = power;
    if (quad_tol > 0.0) config.quad_tol = quad_tol;
    if (solver_tol > 0.0) config.solver.tol_grad = solver_tol;
    if (simulate && !config.simulation) config.simulation = fbcap::SimulationConfig{};
    if (seed >= 0) {
        if (!config.simulation) config.simulation = fbcap::SimulationConfig{};
        config.simulation->seed = static_cast<std::uint64_t>(seed);
    }
    if (config.m < config.h_max + 1) {
        std::cerr << "error: m must exceed h_max\n";
        return 2;
    }

    for (const auto& w : config.warnings) std::cerr << "warning: " << w << "\n";

    fbcap::PipelineResult result;
    try {
        result = fbcap::run_pipeline(config);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }

    for (const auto& row : result.rows) {
        if (row.ok) {
            std::printf("h=%d  upper=%.6f  lower=%.6f  gap=%.3e\n", row.h, row.upper_bits,
                        row.lower_bits ? *row.lower_bits : 0.0,
                        row.gap_bits ? *row.gap_bits : 0.0);
        } else {
            std::printf("h=%d  FAILED: %s\n", row.h, row.error.c_str());
        }
    }
    if (result.stats) {
        std::printf("simulation: power=%.4f  error_rate=%.4g  estimate_error=%.4g\n",
                    result.stats->empirical_input_power, result.stats->decode_error_rate,
                    result.stats->mean_estimate_error);
    }
    if (result.incomplete) {
        std::cerr << "incomplete run: " << result.error << "\n";
        return result.exit_code ? result.exit_code : 1;
    }
    return 0;
}
