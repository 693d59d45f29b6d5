#pragma once

#include "fbcap/freq_grid.hpp"

#include <stdexcept>
#include <string>

namespace fbcap {

struct SolverSettings {
    double tol_grad = 1e-9;       // sup-norm of the projected gradient at exit
    int max_iter = 500;
    double barrier_init = 1e-8;   // weight of the log-barrier on lambda >= 0
    double barrier_shrink = 1e-2;
    bool eliminate_nu = true;     // false: keep nu as free variables (joint Newton)
};

struct DualSolution {
    DualPoint point;          // nu holds the values at exit (stationary when eliminated)
    double value_nats = 0.0;  // g_m at the optimum
    int iterations = 0;
    double certificate = 0.0;  // projected-gradient sup norm at exit
    bool flat_spectrum_warning = false;
};

class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, DualSolution best)
        : std::runtime_error(what), best_iterate(std::move(best)) {}
    DualSolution best_iterate;
};

// Stationary value of the per-point dual variable,
//   nu = (-r^2 + sqrt(r^4 + 8 lambda Sw r^2)) / 2,
// computed through the conjugate rearrangement so small 8*lambda*Sw does not cancel.
double nu_closed_form(double r2, double lambda, double sw);

// Discretized dual objective
//   g_m = (1/2m) sum_i [ 1/2 log(2 lambda Sw_i - nu_i) + 1/2 - r_i^2/(2 nu_i)
//                        + lambda Sw_i ] - lambda P + eta0   (nats).
// Requires dp strictly inside its domain; throws std::domain_error otherwise.
double eval_gm(const DualPoint& dp, const FrequencyGrid& grid, double P);

// Analytic gradient over (lambda, eta_1..eta_h, eta0, nu_1..nu_2m), in that order.
Eigen::VectorXd grad_gm(const DualPoint& dp, const FrequencyGrid& grid, double P);

// Maximizes g_m by damped Newton iterations, by default on the reduced problem over
// (lambda, eta, eta0) with nu eliminated at its stationary value. Deterministic.
// Throws SolverError (carrying the best iterate) when the iteration cap is reached.
DualSolution solve_dual(const FrequencyGrid& grid, double P, const SolverSettings& settings = {});

}  // namespace fbcap
