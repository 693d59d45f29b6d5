#pragma once

#include "fbcap/dual_solver.hpp"
#include "fbcap/freq_grid.hpp"
#include "fbcap/noise_model.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace fbcap::test {

// Periodic trapezoid mean of f over [-pi, pi) on 2^k points: (1/2pi) integral f.
template <typename F>
double trapezoid_mean(F&& f, int points) {
    double acc = 0.0;
    for (int i = 0; i < points; ++i)
        acc += f(-std::numbers::pi + 2.0 * std::numbers::pi * i / points);
    return acc / points;
}

// Raw periodogram |sum x_k e^{-ik theta}|^2 / n.
inline double periodogram(std::span<const double> x, double theta) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t k = 0; k < x.size(); ++k)
        acc += x[k] * std::complex<double>(std::cos(theta * static_cast<double>(k)),
                                           -std::sin(theta * static_cast<double>(k)));
    return std::norm(acc) / static_cast<double>(x.size());
}

// Daniell-smoothed periodogram: average over +-half_window Fourier bins around theta.
inline double smoothed_periodogram(std::span<const double> x, double theta, int half_window) {
    const int n = static_cast<int>(x.size());
    const double bin = 2.0 * std::numbers::pi / n;
    const int center = static_cast<int>(std::lround(theta / bin));
    double acc = 0.0;
    for (int j = -half_window; j <= half_window; ++j) acc += periodogram(x, (center + j) * bin);
    return acc / (2 * half_window + 1);
}

// Independent high-precision evaluation of the discretized dual objective: a direct
// Kahan-compensated long double sum of the textbook formula, sharing no code with
// eval_gm.
inline double gm_reference(const DualPoint& dp, const FrequencyGrid& grid, double P) {
    long double acc = 0.0L, comp = 0.0L;
    for (int i = 0; i < grid.size(); ++i) {
        const long double lambda = dp.lambda;
        const long double sw = grid.sw(i);
        long double c = 2.0L * lambda * sw + dp.eta0;
        long double s = 0.0L;
        for (int k = 1; k <= grid.h; ++k) {
            c += static_cast<long double>(dp.eta(k - 1)) * std::cos(static_cast<long double>(k) * grid.thetas(i));
            s += static_cast<long double>(dp.eta(k - 1)) * std::sin(static_cast<long double>(k) * grid.thetas(i));
        }
        const long double r2 = c * c + s * s;
        const long double nu = dp.nu(i);
        const long double term = 0.5L * std::log(2.0L * lambda * sw - nu) + 0.5L -
                                 r2 / (2.0L * nu) + lambda * sw;
        const long double y = term - comp;
        const long double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return static_cast<double>(acc / grid.size() - static_cast<long double>(dp.lambda) * P +
                               dp.eta0);
}

// Deterministic uniform draws for test-data generation.
class UniformRng {
  public:
    explicit UniformRng(std::uint64_t seed) : state_(seed ? seed : 1) {}
    double next(double lo, double hi) {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return lo + (hi - lo) * ((z >> 11) * 0x1.0p-53);
    }

  private:
    std::uint64_t state_;
};

// Random strictly feasible dual point on the grid (nu pulled inside the closed form).
inline DualPoint random_feasible_point(const FrequencyGrid& grid, UniformRng& rng) {
    for (;;) {
        DualPoint dp;
        dp.lambda = rng.next(0.2, 1.2);
        dp.eta.resize(grid.h);
        for (int k = 0; k < grid.h; ++k) dp.eta(k) = rng.next(-0.1, 0.1);
        dp.eta0 = rng.next(-0.1, 0.1);
        bool ok = true;
        dp.nu.resize(grid.size());
        for (int i = 0; i < grid.size(); ++i) {
            const double r2 = r_squared(dp, grid.thetas(i), grid.sw(i));
            if (r2 < 1e-6) {
                ok = false;
                break;
            }
            dp.nu(i) = nu_closed_form(r2, dp.lambda, grid.sw(i)) * rng.next(0.4, 0.95);
        }
        if (ok) return dp;
    }
}

}  // namespace fbcap::test
