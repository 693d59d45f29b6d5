#include "fbcap/quadrature.hpp"

#include <cmath>

namespace fbcap {
namespace {

struct Worker {
    const std::function<double(double)>& f;
    long evaluations = 0;
    double error_estimate = 0.0;
    bool failed = false;

    double eval(double x) {
        ++evaluations;
        return f(x);
    }

    static double simpson(double h, double fa, double fm, double fb) {
        return h / 6.0 * (fa + 4.0 * fm + fb);
    }

    double refine(double a, double b, double fa, double fm, double fb, double whole,
                  double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double left = simpson(m - a, fa, flm, fm);
        const double right = simpson(b - m, fm, frm, fb);
        const double diff = left + right - whole;
        if (std::abs(diff) <= 15.0 * tol || depth <= 0) {
            if (depth <= 0 && std::abs(diff) > 15.0 * tol) failed = true;
            error_estimate += std::abs(diff) / 15.0;
            return left + right + diff / 15.0;
        }
        return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

}  // namespace

QuadratureResult integrate_adaptive_simpson(const std::function<double(double)>& f,
                                            double a, double b, double abs_tol,
                                            int max_depth) {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
    if (a == b) return {0.0, 0.0, 0};
    Worker w{f};
    const double fa = w.eval(a);
    const double fm = w.eval(0.5 * (a + b));
    const double fb = w.eval(b);
    const double whole = Worker::simpson(b - a, fa, fm, fb);
    const double value = w.refine(a, b, fa, fm, fb, whole, abs_tol, max_depth);
    if (w.failed) {
        throw QuadratureError("adaptive Simpson: subdivision cap reached before tolerance",
                              value, w.error_estimate);
    }
    return {value, w.error_estimate, w.evaluations};
}

}  // namespace fbcap
