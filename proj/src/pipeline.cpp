#include "fbcap/pipeline.hpp"

#include "fbcap/reduction.hpp"
#include "fbcap/serialize.hpp"

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>

namespace fbcap {

using nlohmann::json;

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string convergence_csv(const std::vector<BoundsReport>& rows) {
    std::string csv = "h,upper_bits,lower_bits,gap_bits\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.h);
        csv += ',';
        csv += row.ok ? format_full(row.upper_bits) : "";
        csv += ',';
        csv += row.lower_bits ? format_full(*row.lower_bits) : "";
        csv += ',';
        csv += row.gap_bits ? format_full(*row.gap_bits) : "";
        csv += '\n';
    }
    return csv;
}

std::string impulse_csv(const FirFilter& fir) {
    std::string csv = "n,c_n\n";
    for (size_t i = 0; i < fir.coeffs.size(); ++i) {
        csv += std::to_string(i + 1);
        csv += ',';
        csv += format_full(fir.coeffs[i]);
        csv += '\n';
    }
    return csv;
}

}  // namespace

RunConfig validate_config(const std::string& raw) {
    std::vector<std::string> violations;
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config: malformed JSON: ") + ex.what(), {ex.what()});
    }

    RunConfig cfg;
    try {
        const json& channel = doc.at("channel");
        cfg.channel_num = channel.at("num").get<std::vector<double>>();
        cfg.channel_den = channel.value("den", std::vector<double>{1.0});
    } catch (const json::exception&) {
        violations.push_back("channel: missing or malformed {\"num\": [...], \"den\": [...]} block");
    }
    cfg.power = doc.value("P", 10.0);
    cfg.m = doc.value("m", 40);
    cfg.h_max = doc.value("h_max", 6);
    cfg.quad_tol = doc.value("quad_tol", 1e-10);
    cfg.reduce_order = doc.value("reduce_order", 0);
    cfg.out_dir = doc.value("out_dir", ".");
    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        cfg.solver.tol_grad = s.value("tol_grad", cfg.solver.tol_grad);
        cfg.solver.max_iter = s.value("max_iter", cfg.solver.max_iter);
        cfg.solver.barrier_init = s.value("barrier_init", cfg.solver.barrier_init);
        cfg.solver.barrier_shrink = s.value("barrier_shrink", cfg.solver.barrier_shrink);
        cfg.solver.eliminate_nu = s.value("eliminate_nu", cfg.solver.eliminate_nu);
    }
    if (doc.contains("simulation")) {
        const json& s = doc.at("simulation");
        SimulationConfig sim;
        sim.n = s.value("n", sim.n);
        sim.trials = s.value("trials", sim.trials);
        sim.nR_bits = s.value("nR_bits", sim.nR_bits);
        sim.seed = s.value("seed", sim.seed);
        cfg.simulation = sim;
        if (sim.n < 1) violations.push_back("simulation.n: must be >= 1");
        if (sim.trials < 1) violations.push_back("simulation.trials: must be >= 1");
        if (sim.nR_bits < 0) violations.push_back("simulation.nR_bits: must be >= 0");
    }

    if (!(cfg.power > 0.0)) violations.push_back("P: must be positive");
    if (cfg.h_max < 1) violations.push_back("h_max: must be >= 1");
    if (cfg.m < cfg.h_max + 1) violations.push_back("m must exceed h_max");
    if (!(cfg.quad_tol > 0.0)) violations.push_back("quad_tol: must be positive");
    if (!(cfg.solver.tol_grad > 0.0)) violations.push_back("solver.tol_grad: must be positive");
    if (cfg.solver.max_iter < 1) violations.push_back("solver.max_iter: must be >= 1");
    if (cfg.reduce_order < 0) violations.push_back("reduce_order: must be >= 0");

    if (violations.empty()) {
        try {
            const NoiseModel model = cfg.make_model();
            if (model.is_flat())
                cfg.warnings.push_back("flat channel spectrum: the dual bound theory assumes a non-flat spectrum");
        } catch (const std::exception& ex) {
            violations.push_back(std::string("channel: ") + ex.what());
        }
    }

    if (!violations.empty()) {
        std::string what = "config validation failed:";
        for (const auto& v : violations) what += "\n  - " + v;
        throw ConfigError(what, violations);
    }
    return cfg;
}

PipelineResult run_pipeline(const RunConfig& config) {
    PipelineResult result;
    const NoiseModel model = config.make_model();
    const std::filesystem::path out_dir(config.out_dir);
    std::filesystem::create_directories(out_dir);

    struct Row {
        BoundsReport report;
        std::optional<SynthesisResult> synthesis;
    };
    std::vector<Row> rows(static_cast<size_t>(config.h_max));

    auto run_one = [&](int h) {
        Row row;
        try {
            auto [report, sol] = evaluate_h(model, config.power, config.m, h, config.solver,
                                            config.quad_tol);
            const FrequencyGrid grid = build_grid(config.m, h, model);
            SynthesisResult syn = synthesize(sol, grid, model, config.power);
            report.set_lower(syn.rate_bits);
            row.report = report;
            row.synthesis = std::move(syn);
        } catch (const std::exception& ex) {
            row.report.h = h;
            row.report.m = config.m;
            row.report.ok = false;
            row.report.error = ex.what();
        }
        return row;
    };

    const int cap = std::min(thread_cap(), config.h_max);
    if (cap <= 1) {
        for (int h = 1; h <= config.h_max; ++h) rows[static_cast<size_t>(h - 1)] = run_one(h);
    } else {
        for (int base = 1; base <= config.h_max; base += cap) {
            std::vector<std::future<Row>> batch;
            for (int h = base; h <= std::min(config.h_max, base + cap - 1); ++h)
                batch.push_back(std::async(std::launch::async, run_one, h));
            for (int k = 0; k < static_cast<int>(batch.size()); ++k)
                rows[static_cast<size_t>(base - 1 + k)] = batch[static_cast<size_t>(k)].get();
        }
    }

    for (auto& row : rows) result.rows.push_back(row.report);

    json report_json;
    report_json["channel"] = to_json(model);
    report_json["P"] = config.power;
    report_json["m"] = config.m;
    report_json["h_max"] = config.h_max;
    if (!config.warnings.empty()) report_json["warnings"] = config.warnings;
    {
        json table = json::array();
        for (const auto& row : result.rows) table.push_back(to_json(row));
        report_json["convergence"] = std::move(table);
    }

    try {
        const Row& final_row = rows.back();
        if (!final_row.report.ok)
            throw std::runtime_error("final h row failed: " + final_row.report.error);
        result.filter = final_row.synthesis->filter;
        report_json["capacity_bits"] = {{"upper", final_row.report.upper_bits},
                                        {"lower", *final_row.report.lower_bits},
                                        {"gap", *final_row.report.gap_bits}};
        report_json["filter"] = to_json(result.filter);

        const StateSpace k = youla_controller(result.filter);
        result.scheme = stable_unstable_split(k);
        report_json["scheme_rate_bits"] = result.scheme.rate_bits;

        // Low-order rational controller for reporting, per the requested order or the
        // singular-value drop rule on the controller's impulse response.
        {
            const int want = config.reduce_order;
            const int samples = std::max(24, 4 * std::max(want, 2) + 8);
            std::vector<double> markov = k.impulse(samples + 1);
            markov.erase(markov.begin());  // strictly proper; drop h_0 = 0
            int order = want;
            if (order == 0) {
                // The drop rule on the same windowed Hankel the reduction factors.
                HankelSpectrum hs = hankel_singular_values(markov, /*tail_is_zero=*/false);
                order = std::min(hs.chosen_order, k.order());
            }
            result.reduced_controller = kung_reduce(markov, order, /*tail_is_zero=*/false);
            json reduced;
            reduced["order"] = order;
            reduced["state_space"] = to_json(*result.reduced_controller);
            json poles = json::array();
            const Eigen::EigenSolver<Eigen::MatrixXd> es(result.reduced_controller->A, false);
            for (int i = 0; i < result.reduced_controller->order(); ++i)
                poles.push_back({es.eigenvalues()(i).real(), es.eigenvalues()(i).imag()});
            reduced["poles"] = std::move(poles);
            report_json["reduced_controller"] = std::move(reduced);
        }

        if (config.simulation) {
            const SimulationConfig& sim = *config.simulation;
            result.stats = simulate_transmission(result.scheme, model, config.power, sim.n,
                                                 sim.nR_bits, sim.trials, sim.seed);
            report_json["transmission"] = to_json(*result.stats);
        }

        write_atomic(out_dir / "impulse.csv", impulse_csv(result.filter));
        write_atomic(out_dir / "scheme.json", to_json(result.scheme).dump(2) + "\n");
    } catch (const std::exception& ex) {
        result.incomplete = true;
        result.error = ex.what();
        result.exit_code = 1;
        report_json["incomplete"] = true;
        report_json["error"] = result.error;
    }

    write_atomic(out_dir / "convergence.csv", convergence_csv(result.rows));
    write_atomic(out_dir / "report.json", report_json.dump(2) + "\n");
    return result;
}

}  // namespace fbcap
