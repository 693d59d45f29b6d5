// Acceptance suite: runs every capacity-pipeline requirement end to end and prints
// one PASS/FAIL line per criterion. Exit status is the number of failed criteria.

#include "fbcap/bounds.hpp"
#include "fbcap/coding.hpp"
#include "fbcap/linalg.hpp"
#include "fbcap/pipeline.hpp"
#include "fbcap/reduction.hpp"
#include "fbcap/synthesis.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

using namespace fbcap;

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Frozen benchmark targets (tests/benchmark_values.hpp holds the tabulated source).
constexpr double kChannelABits = 1.7688;
constexpr double kTableUpper[6] = {1.953615794213734, 1.919419110833023, 1.919395054344304,
                                   1.919358863350398, 1.919358787261653, 1.919358744798872};
constexpr double kTableLower[6] = {1.837997383645331, 1.919133474756371, 1.919215947145071,
                                   1.919358573743238, 1.919358689375164, 1.919358744265310};
constexpr double kPoleRe = -0.2057;
constexpr double kPoleIm = 1.9340;

struct Criterion {
    Criterion(int id_, std::string name_) : id(id_), name(std::move(name_)) {}
    int id;
    std::string name;
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

std::vector<Criterion> g_results;

void report(Criterion c) {
    std::printf("[%s] criterion %d: %s%s%s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
    g_results.push_back(std::move(c));
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct SynthesizedFilter {
    NoiseModel model;
    FirFilter filter;
    std::string label;
};

std::vector<SynthesizedFilter> g_filters;  // collected for criteria 7 and 9

struct TableRow {
    BoundsReport report;
    SynthesisResult synthesis;
};

// Deterministic uniform generator for the randomized sandwich suite.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    double uniform(double lo, double hi) {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return lo + (hi - lo) * ((z >> 11) * 0x1.0p-53);
    }
    int integer(int lo, int hi) { return lo + static_cast<int>(uniform(0, hi - lo + 1 - 1e-12)); }

  private:
    std::uint64_t state_;
};

bool minimum_phase(const std::vector<double>& coeffs) {
    std::vector<double> ascending(coeffs.rbegin(), coeffs.rend());
    for (const auto& z : polynomial_roots(ascending))
        if (std::abs(z) >= 1.0 - 1e-8) return false;
    return true;
}

// ---------------------------------------------------------------------------

void criterion_1() {
    Criterion c(1, "benchmark channel A: both bounds at 1.7688 bits");
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const NoiseModel model({1.0, 0.1});
        auto [report, sol] = evaluate_h(model, 10.0, 40, 6, SolverSettings{}, 1e-10);
        const FrequencyGrid grid = build_grid(40, 6, model);
        const SynthesisResult syn = synthesize(sol, grid, model, 10.0);
        g_filters.push_back({model, syn.filter, "A h=6"});
        c.require(std::abs(report.upper_bits - kChannelABits) <= 5e-3,
                  fmt("upper %.6f vs %.4f", report.upper_bits, kChannelABits));
        c.require(std::abs(syn.rate_bits - kChannelABits) <= 5e-3,
                  fmt("lower %.6f vs %.4f", syn.rate_bits, kChannelABits));
        const double elapsed = seconds_since(t0);
        c.require(elapsed < 60.0, fmt("runtime %.1f s exceeds 60 s", elapsed));
        if (c.pass)
            c.detail = fmt("upper %.6f, lower %.6f, %.2f s", report.upper_bits, syn.rate_bits,
                           elapsed);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

std::vector<TableRow> g_table;  // channel B rows, reused by criteria 3, 5, 8

void criterion_2() {
    Criterion c(2, "benchmark channel B: convergence table to 1e-3, vanishing gap");
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const NoiseModel model({1.0, 0.1, 0.5});
        for (int h = 1; h <= 6; ++h) {
            auto [report, sol] = evaluate_h(model, 10.0, 40, h, SolverSettings{}, 1e-10);
            const FrequencyGrid grid = build_grid(40, h, model);
            SynthesisResult syn = synthesize(sol, grid, model, 10.0);
            report.set_lower(syn.rate_bits);
            g_filters.push_back({model, syn.filter, fmt("B h=%d", h)});
            g_table.push_back({report, std::move(syn)});
        }
        for (int h = 1; h <= 6; ++h) {
            const TableRow& row = g_table[static_cast<size_t>(h - 1)];
            c.require(std::abs(row.report.upper_bits - kTableUpper[h - 1]) <= 1e-3,
                      fmt("upper(h=%d) %.9f vs %.9f", h, row.report.upper_bits, kTableUpper[h - 1]));
            c.require(std::abs(*row.report.lower_bits - kTableLower[h - 1]) <= 1e-3,
                      fmt("lower(h=%d) %.9f vs %.9f", h, *row.report.lower_bits, kTableLower[h - 1]));
        }
        for (int h = 1; h <= 3; ++h) {
            c.require(*g_table[static_cast<size_t>(h)].report.gap_bits <
                          *g_table[static_cast<size_t>(h - 1)].report.gap_bits,
                      fmt("gap not strictly decreasing at h=%d", h + 1));
        }
        c.require(*g_table[5].report.gap_bits <= 1e-4,
                  fmt("gap(h=6) %.3e exceeds 1e-4", *g_table[5].report.gap_bits));
        const double elapsed = seconds_since(t0);
        c.require(elapsed < 300.0, fmt("runtime %.1f s exceeds 5 min", elapsed));
        if (c.pass)
            c.detail = fmt("six rows within 1e-3, gap(h=6) = %.2e, %.2f s",
                           *g_table[5].report.gap_bits, elapsed);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

void criterion_3() {
    Criterion c(3, "channel B reduced controller: unstable pair and its rate");
    try {
        const TableRow& final_row = g_table.at(5);
        const StateSpace k = youla_controller(final_row.synthesis.filter);
        std::vector<double> markov = k.impulse(25);
        markov.erase(markov.begin());
        const StateSpace reduced = kung_reduce(markov, 4, /*tail_is_zero=*/false);
        const Eigen::EigenSolver<Eigen::MatrixXd> es(reduced.A, false);
        int unstable = 0;
        double modulus_product = 1.0;
        for (int i = 0; i < reduced.order(); ++i) {
            const std::complex<double> p = es.eigenvalues()(i);
            if (std::abs(p) > 1.0) {
                ++unstable;
                modulus_product *= std::abs(p);
                c.require(std::abs(p.real() - kPoleRe) <= 0.01,
                          fmt("pole re %.4f vs %.4f", p.real(), kPoleRe));
                c.require(std::abs(std::abs(p.imag()) - kPoleIm) <= 0.01,
                          fmt("pole |im| %.4f vs %.4f", std::abs(p.imag()), kPoleIm));
            }
        }
        c.require(unstable == 2, fmt("expected one unstable pair, found %d poles", unstable));
        const double rate = std::log2(modulus_product);
        c.require(std::abs(rate - *final_row.report.lower_bits) <= 1e-3,
                  fmt("log2|p1 p2| %.6f vs lower %.6f", rate, *final_row.report.lower_bits));
        if (c.pass) c.detail = fmt("pair -0.2057 +- 1.9340i matched, log2|p1 p2| = %.4f", rate);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

void criterion_4() {
    Criterion c(4, "sandwich suite over 20 random ARMA channels, P in {1, 10}");
    try {
        Rng rng(20260809);
        int accepted = 0;
        int attempts = 0;
        double worst_gap = 0.0;
        while (accepted < 20 && attempts < 400) {
            ++attempts;
            const int nb = rng.integer(1, 3);
            const int na = rng.integer(0, 3);
            std::vector<double> num{1.0}, den{1.0};
            for (int i = 0; i < nb; ++i) num.push_back(rng.uniform(-0.7, 0.7));
            for (int i = 0; i < na; ++i) den.push_back(rng.uniform(-0.7, 0.7));
            if (!minimum_phase(num)) continue;
            NoiseModel model({1.0});
            try {
                model = NoiseModel(num, den);
            } catch (const std::exception&) {
                continue;  // unstable or nonpositive draw
            }
            if (model.is_flat(1e-3)) continue;  // dual theory needs a non-flat spectrum

            bool channel_ok = true;
            for (double P : {1.0, 10.0}) {
                double prev_upper = std::numeric_limits<double>::infinity();
                for (int h = 1; h <= 4 && channel_ok; ++h) {
                    try {
                        auto [report, sol] = evaluate_h(model, P, 40, h, SolverSettings{}, 1e-10);
                        const FrequencyGrid grid = build_grid(40, h, model);
                        const SynthesisResult syn = synthesize(sol, grid, model, P);
                        c.require(report.upper_bits <= prev_upper + 1e-6,
                                  fmt("upper not monotone (attempt %d, P=%g, h=%d)", attempts, P, h));
                        c.require(syn.rate_bits <= report.upper_bits + 1e-6,
                                  fmt("rate above upper (attempt %d, P=%g, h=%d)", attempts, P, h));
                        const double power = power_of_filter(syn.filter, model);
                        c.require(std::abs(power - P) <= 1e-9,
                                  fmt("power %.12f vs %g (attempt %d, h=%d)", power, P, attempts, h));
                        worst_gap = std::max(worst_gap, report.upper_bits - syn.rate_bits);
                        prev_upper = report.upper_bits;
                        if (h == 4)
                            g_filters.push_back({model, syn.filter, fmt("rand%d P=%g", accepted, P)});
                    } catch (const SolverError&) {
                        channel_ok = false;  // degenerate draw: reject and redraw
                    } catch (const std::runtime_error& ex) {
                        if (std::string(ex.what()) == "degenerate dual point")
                            channel_ok = false;
                        else
                            throw;
                    }
                }
                if (!channel_ok) break;
            }
            if (channel_ok) ++accepted;
        }
        c.require(accepted == 20, fmt("only %d/20 channels accepted in %d draws", accepted, attempts));
        if (c.pass)
            c.detail = fmt("20 channels x 2 powers x h=1..4 (%d draws), worst gap %.3e bits",
                           attempts, worst_gap);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

void criterion_5() {
    Criterion c(5, "strong duality: recovered primal matches the dual optimum");
    try {
        struct Case {
            NoiseModel model;
            int h;
        };
        std::vector<Case> cases;
        for (int h = 1; h <= 6; ++h) cases.push_back({NoiseModel({1.0, 0.1, 0.5}), h});
        cases.push_back({NoiseModel({1.0, 0.1}), 6});
        double worst = 0.0;
        for (const auto& [model, h] : cases) {
            const FrequencyGrid grid = build_grid(40, h, model);
            const DualSolution sol = solve_dual(grid, 10.0);
            const SampledSpectrum spec = recover_ab(sol, grid);
            double primal = 0.0;
            for (int i = 0; i < grid.size(); ++i) {
                const double re = 1.0 + spec.a(i);
                primal += std::log(re * re + spec.b(i) * spec.b(i));
            }
            primal /= 2.0 * grid.size();
            worst = std::max(worst, std::abs(primal - (-sol.value_nats)));
            c.require(std::abs(primal - (-sol.value_nats)) <= 1e-6,
                      fmt("h=%d primal-dual gap %.3e nats", h, std::abs(primal + sol.value_nats)));
            if (sol.point.lambda > 1e-6) {
                c.require(std::abs(spec.discretized_power() - 10.0) <= 1e-4,
                          fmt("h=%d power constraint inactive: %.6f", h, spec.discretized_power()));
            }
        }
        if (c.pass) c.detail = fmt("7 optima, worst primal-dual mismatch %.2e nats", worst);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

void criterion_6() {
    Criterion c(6, "analytic dual gradient matches central finite differences");
    try {
        Rng rng(99);
        double worst = 0.0;
        for (const auto& num : {std::vector<double>{1.0, 0.1}, std::vector<double>{1.0, 0.1, 0.5}}) {
            const NoiseModel model(num);
            const FrequencyGrid grid = build_grid(10, 3, model);
            const double P = 10.0;
            for (int rep = 0; rep < 20; ++rep) {
                DualPoint dp;
                bool feasible = false;
                while (!feasible) {
                    dp.lambda = rng.uniform(0.2, 1.2);
                    dp.eta.resize(grid.h);
                    for (int k = 0; k < grid.h; ++k) dp.eta(k) = rng.uniform(-0.1, 0.1);
                    dp.eta0 = rng.uniform(-0.1, 0.1);
                    dp.nu.resize(grid.size());
                    feasible = true;
                    for (int i = 0; i < grid.size(); ++i) {
                        const double r2 = r_squared(dp, grid.thetas(i), grid.sw(i));
                        if (r2 < 1e-6) {
                            feasible = false;
                            break;
                        }
                        dp.nu(i) = nu_closed_form(r2, dp.lambda, grid.sw(i)) * rng.uniform(0.4, 0.95);
                    }
                }
                const Eigen::VectorXd g = grad_gm(dp, grid, P);
                const double step = 1e-6;
                for (int idx = 0; idx < g.size(); ++idx) {
                    auto nudged = [&](double delta) {
                        DualPoint q = dp;
                        if (idx == 0) q.lambda += delta;
                        else if (idx <= grid.h) q.eta(idx - 1) += delta;
                        else if (idx == grid.h + 1) q.eta0 += delta;
                        else q.nu(idx - grid.h - 2) += delta;
                        return eval_gm(q, grid, P);
                    };
                    const double fd = (nudged(step) - nudged(-step)) / (2.0 * step);
                    const double err = std::abs(fd - g(idx)) / std::max(1.0, std::abs(g(idx)));
                    worst = std::max(worst, err);
                    c.require(err <= 1e-5, fmt("component %d rel err %.2e", idx, err));
                }
            }
        }
        if (c.pass) c.detail = fmt("2 channels x 20 points, worst relative error %.2e", worst);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

void criterion_7() {
    Criterion c(7, "quadrature rate equals NMP-root rate on every synthesized filter");
    try {
        double worst = 0.0;
        for (const auto& item : g_filters) {
            const RateBreakdown rate = achievable_rate_detail(item.filter);
            c.require(rate.root_route_ok, "root route unavailable for " + item.label);
            if (!rate.root_route_ok) continue;
            const double diff = std::abs(rate.quadrature_bits - *rate.nmp_root_bits);
            worst = std::max(worst, diff);
            c.require(diff <= 1e-6, fmt("%s differs by %.2e bits", item.label.c_str(), diff));
        }
        if (c.pass)
            c.detail = fmt("%zu filters, worst cross-check difference %.2e bits",
                           g_filters.size(), worst);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

void criterion_8() {
    Criterion c(8, "closed-loop transmission on the channel B scheme");
    try {
        const NoiseModel model({1.0, 0.1, 0.5});
        const double P = 10.0;
        const FirFilter& filter = g_table.at(5).synthesis.filter;
        const CodingScheme scheme = stable_unstable_split(youla_controller(filter));

        // Empirical input power over 1e5 steps.
        const Eigen::VectorXd xu0 = encode_message(scheme, 2, 2);
        const LoopTrajectories long_run = run_loop(scheme, model, xu0, 100000, 20240809);
        double power = 0.0;
        for (double u : long_run.u) power += u * u;
        power /= static_cast<double>(long_run.u.size());
        c.require(std::abs(power - P) <= 0.05 * P, fmt("power %.4f vs %.1f +- 5%%", power, P));

        // Noiseless decode is exact.
        for (std::uint64_t msg = 1; msg <= 16; ++msg) {
            const Eigen::VectorXd x0 = encode_message(scheme, msg, 4);
            const LoopTrajectories t = run_loop(scheme, model, x0, 64, 1, 0.0);
            const std::uint64_t decoded = decode_message(scheme, -t.xu0_estimate.col(63), 4);
            c.require(decoded == msg, fmt("noiseless decode %llu -> %llu",
                                          (unsigned long long)msg, (unsigned long long)decoded));
        }

        // Estimate error contracts by >= 4x when the horizon doubles.
        const TransmissionStats s12 = simulate_transmission(scheme, model, P, 12, 1, 10000, 42);
        const TransmissionStats s24 = simulate_transmission(scheme, model, P, 24, 1, 10000, 42);
        c.require(s12.mean_estimate_error >= 4.0 * s24.mean_estimate_error,
                  fmt("contraction %.2f < 4", s12.mean_estimate_error / s24.mean_estimate_error));
        c.require(s24.decode_error_rate <= s12.decode_error_rate,
                  fmt("error rate grew: %.4f -> %.4f", s12.decode_error_rate, s24.decode_error_rate));
        if (c.pass)
            c.detail = fmt("power %.3f, noiseless exact, contraction %.0fx", power,
                           s12.mean_estimate_error / s24.mean_estimate_error);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

void criterion_9() {
    Criterion c(9, "S = 1+Q and T = -Q identities for every synthesized controller");
    try {
        double worst = 0.0;
        for (const auto& item : g_filters) {
            const StateSpace k = youla_controller(item.filter);
            for (int j = 1; j <= 32; ++j) {
                const double theta = std::numbers::pi * j / 33.0;
                const std::complex<double> z(std::cos(theta), std::sin(theta));
                const std::complex<double> kz = k.transfer(z);
                const std::complex<double> q = item.filter.response(theta);
                const double sens_err = std::abs(1.0 / (1.0 + kz) - (1.0 + q)) / std::abs(1.0 + q);
                const double comp_err =
                    std::abs(kz / (1.0 + kz) + q) / std::max(1.0, std::abs(q));
                worst = std::max({worst, sens_err, comp_err});
                c.require(sens_err <= 1e-8,
                          fmt("%s sensitivity err %.2e", item.label.c_str(), sens_err));
                c.require(comp_err <= 1e-8,
                          fmt("%s complementary err %.2e", item.label.c_str(), comp_err));
            }
        }
        if (c.pass)
            c.detail = fmt("%zu controllers x 32 frequencies, worst relative error %.2e",
                           g_filters.size(), worst);
    } catch (const std::exception& ex) {
        c.require(false, ex.what());
    }
    report(std::move(c));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();

    int failed = 0;
    for (const auto& c : g_results)
        if (!c.pass) ++failed;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failed,
                g_results.size());
    return failed;
}
