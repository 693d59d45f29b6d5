#include "fbcap/freq_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbcap {

FrequencyGrid build_grid(int m, int h, const NoiseModel& model) {
    if (m < 1) throw std::invalid_argument("build_grid: m must be >= 1");
    if (h < 0) throw std::invalid_argument("build_grid: h must be >= 0");
    FrequencyGrid grid;
    grid.m = m;
    grid.h = h;
    grid.thetas.resize(2 * m);
    grid.sw.resize(2 * m);
    for (int i = 0; i < 2 * m; ++i) {
        const double theta = -std::numbers::pi + std::numbers::pi / m * i;
        grid.thetas(i) = theta;
        grid.sw(i) = eval_psd(model, theta);
        if (!(grid.sw(i) > 0.0)) throw std::invalid_argument("build_grid: PSD sample not positive");
    }
    return grid;
}

void trig_basis(int h, double theta, Eigen::VectorXd& A, Eigen::VectorXd& B) {
    A.resize(h);
    B.resize(h);
    for (int k = 1; k <= h; ++k) {
        A(k - 1) = std::cos(k * theta);
        B(k - 1) = std::sin(k * theta);
    }
}

double r_squared(const DualPoint& dp, double theta, double sw) {
    if (!(sw > 0.0)) throw std::invalid_argument("r_squared: Sw must be positive");
    const int h = static_cast<int>(dp.eta.size());
    Eigen::VectorXd A, B;
    trig_basis(h, theta, A, B);
    const double c = 2.0 * dp.lambda * sw + dp.eta.dot(A) + dp.eta0;
    const double s = dp.eta.dot(B);
    return c * c + s * s;
}

}  // namespace fbcap
