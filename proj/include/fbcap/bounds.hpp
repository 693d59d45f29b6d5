#pragma once

#include "fbcap/dual_solver.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fbcap {

// One row of the convergence table for a fixed (m, h).
struct BoundsReport {
    int h = 0;
    int m = 0;
    double upper_bits = 0.0;       // certified continuous bound, quadrature error included
    double dual_value_bits = 0.0;  // -g_m optimum on the solve grid
    std::optional<double> lower_bits;  // achievable rate, filled by synthesis
    std::optional<double> gap_bits;
    double quad_error_estimate = 0.0;  // nats
    int solver_iterations = 0;
    double solver_certificate = 0.0;
    bool ok = false;
    std::string error;

    void set_lower(double bits) {
        lower_bits = bits;
        gap_bits = upper_bits - bits;
    }
};

// Continuous dual objective g (nats) at (lambda, eta, eta0) with nu at its stationary
// value, by adaptive Simpson quadrature over [0, pi] (the integrand is even).
// If error_estimate is non-null it receives the absolute quadrature error estimate.
double eval_g_continuous(const DualPoint& dp, const NoiseModel& model, double P,
                         double quad_tol, double* error_estimate = nullptr);

// Certified upper bound in bits: -g at the discrete optimum, with the quadrature
// error added so the reported number remains a valid bound.
double certified_upper_bound(const DualSolution& sol, const NoiseModel& model, double P,
                             double quad_tol, double* error_estimate = nullptr);

// Solve + quadrature for a single h. The report's lower/gap fields stay empty.
std::pair<BoundsReport, DualSolution> evaluate_h(const NoiseModel& model, double P, int m,
                                                 int h, const SolverSettings& settings,
                                                 double quad_tol);

// One report per h = 1..h_max, ordered by h. Per-h solver failures are recorded in
// the report and the sweep continues. Rows are independent; the sweep runs them
// concurrently up to the FBCAP_THREADS cap.
std::vector<BoundsReport> h_sweep(const NoiseModel& model, double P, int m, int h_max,
                                  const SolverSettings& settings = {},
                                  double quad_tol = 1e-10);

// Thread cap shared by the sweep and the pipeline: min(FBCAP_THREADS, hardware).
int thread_cap();

}  // namespace fbcap
