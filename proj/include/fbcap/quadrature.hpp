#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace fbcap {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;  // accumulated Richardson estimates, absolute
    long evaluations = 0;
};

// Thrown when the subdivision cap is hit before the tolerance is met. Carries the
// best available estimate and a bound on its error so callers can degrade gracefully.
class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(const std::string& what, double best, double bound)
        : std::runtime_error(what), best_value(best), error_bound(bound) {}
    double best_value;
    double error_bound;
};

// Adaptive Simpson integration of f over [a, b] to absolute tolerance abs_tol.
// Each interval is accepted when the Richardson difference |S2 - S1|/15 meets its
// share of the tolerance; accepted intervals contribute that difference to the
// reported error estimate.
QuadratureResult integrate_adaptive_simpson(const std::function<double(double)>& f,
                                            double a, double b, double abs_tol,
                                            int max_depth = 48);

}  // namespace fbcap
