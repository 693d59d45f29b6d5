#include "fbcap/bounds.hpp"

#include "fbcap/quadrature.hpp"

#include <cmath>
#include <cstdlib>
#include <future>
#include <numbers>
#include <thread>

namespace fbcap {

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

double eval_g_continuous(const DualPoint& dp, const NoiseModel& model, double P,
                         double quad_tol, double* error_estimate) {
    if (!(dp.lambda > 0.0))
        throw std::domain_error("eval_g_continuous: lambda must be positive");
    const int h = static_cast<int>(dp.eta.size());
    const double lambda = dp.lambda;

    // Dual-cost integrand with nu at its stationary value; the conjugate forms
    // keep it defined down to r^2 = 0.
    auto integrand = [&](double theta) {
        const double sw = eval_psd(model, theta);
        Eigen::VectorXd A, B;
        trig_basis(h, theta, A, B);
        const double c = 2.0 * lambda * sw + dp.eta.dot(A) + dp.eta0;
        const double s = dp.eta.dot(B);
        const double r2 = c * c + s * s;
        const double R = std::sqrt(r2) * std::sqrt(r2 + 8.0 * lambda * sw);
        const double t = r2 > 0.0
                             ? 16.0 * lambda * lambda * sw * sw * r2 / ((r2 + R) * (r2 + R))
                             : 2.0 * lambda * sw;
        const double r2_over_2nu = (r2 + R) / (8.0 * lambda * sw);
        return 0.5 * std::log(t) - r2_over_2nu + lambda * sw;
    };

    // Even in theta: integrate half the circle and double.
    const QuadratureResult q =
        integrate_adaptive_simpson(integrand, 0.0, std::numbers::pi, 0.5 * quad_tol * std::numbers::pi);
    if (error_estimate) *error_estimate = q.error_estimate / std::numbers::pi;
    return q.value / std::numbers::pi - lambda * P + dp.eta0 + 0.5;
}

double certified_upper_bound(const DualSolution& sol, const NoiseModel& model, double P,
                             double quad_tol, double* error_estimate) {
    double quad_err = 0.0;
    const double g = eval_g_continuous(sol.point, model, P, quad_tol, &quad_err);
    if (error_estimate) *error_estimate = quad_err;
    return (-g + quad_err) / kLn2;
}

std::pair<BoundsReport, DualSolution> evaluate_h(const NoiseModel& model, double P, int m,
                                                 int h, const SolverSettings& settings,
                                                 double quad_tol) {
    BoundsReport report;
    report.h = h;
    report.m = m;
    const FrequencyGrid grid = build_grid(m, h, model);
    const DualSolution sol = solve_dual(grid, P, settings);
    report.dual_value_bits = -sol.value_nats / kLn2;
    report.solver_iterations = sol.iterations;
    report.solver_certificate = sol.certificate;
    double quad_err = 0.0;
    report.upper_bits = certified_upper_bound(sol, model, P, quad_tol, &quad_err);
    report.quad_error_estimate = quad_err;
    report.ok = true;
    return {report, sol};
}

int thread_cap() {
    unsigned cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("FBCAP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) cap = std::min<unsigned>(cap, static_cast<unsigned>(v));
    }
    return static_cast<int>(cap);
}

std::vector<BoundsReport> h_sweep(const NoiseModel& model, double P, int m, int h_max,
                                  const SolverSettings& settings, double quad_tol) {
    if (h_max < 1) throw std::invalid_argument("h_sweep: h_max must be >= 1");
    std::vector<BoundsReport> reports(static_cast<size_t>(h_max));

    auto run_one = [&](int h) {
        BoundsReport report;
        try {
            report = evaluate_h(model, P, m, h, settings, quad_tol).first;
        } catch (const std::exception& ex) {
            report.h = h;
            report.m = m;
            report.ok = false;
            report.error = ex.what();
        }
        return report;
    };

    const int cap = std::min(thread_cap(), h_max);
    if (cap <= 1) {
        for (int h = 1; h <= h_max; ++h) reports[static_cast<size_t>(h - 1)] = run_one(h);
        return reports;
    }
    for (int base = 1; base <= h_max; base += cap) {
        std::vector<std::future<BoundsReport>> batch;
        for (int h = base; h <= std::min(h_max, base + cap - 1); ++h)
            batch.push_back(std::async(std::launch::async, run_one, h));
        for (int k = 0; k < static_cast<int>(batch.size()); ++k)
            reports[static_cast<size_t>(base - 1 + k)] = batch[static_cast<size_t>(k)].get();
    }
    return reports;
}

}  // namespace fbcap
