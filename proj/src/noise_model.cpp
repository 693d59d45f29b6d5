#include "fbcap/noise_model.hpp"

#include "fbcap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fbcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void trim_trailing_zeros(std::vector<double>& c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
}

std::complex<double> eval_poly_zinv(const std::vector<double>& c, double theta) {
    // Horner in w = e^{-i theta} for c0 + c1 w + c2 w^2 + ...
    const std::complex<double> w(std::cos(theta), -std::sin(theta));
    std::complex<double> acc(0.0, 0.0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * w + *it;
    return acc;
}

}  // namespace

NoiseModel::NoiseModel(std::vector<double> numerator, std::vector<double> denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
    if (num_.empty()) throw std::invalid_argument("NoiseModel: empty numerator");
    if (den_.empty()) den_ = {1.0};
    trim_trailing_zeros(num_);
    trim_trailing_zeros(den_);
    if (den_[0] == 0.0)
        throw std::invalid_argument("NoiseModel: denominator constant term must be nonzero");
    if (den_[0] != 1.0) {
        const double d0 = den_[0];
        for (double& c : num_) c /= d0;
        for (double& c : den_) c /= d0;
    }
    if (num_[0] == 0.0)
        throw std::invalid_argument("NoiseModel: numerator constant term must be nonzero");

    // Poles of H are the roots of z^N + a1 z^{N-1} + ... + aN.
    if (den_.size() > 1) {
        std::vector<double> ascending(den_.rbegin(), den_.rend());
        for (const auto& pole : polynomial_roots(ascending)) {
            if (std::abs(pole) >= 1.0 - 1e-8)
                throw std::invalid_argument("NoiseModel: denominator root not strictly inside the unit disc");
        }
    }

    constexpr int kGrid = 1 << 12;
    double min_psd = std::numeric_limits<double>::infinity();
    double max_psd = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        const double theta = -std::numbers::pi + 2.0 * std::numbers::pi * i / kGrid;
        const double v = eval_psd(*this, theta);
        min_psd = std::min(min_psd, v);
        max_psd = std::max(max_psd, v);
    }
    if (!(min_psd > 1e-12 * std::max(1.0, max_psd)))
        throw std::invalid_argument("NoiseModel: power spectral density not strictly positive");
}

bool NoiseModel::is_flat(double rel_tol) const {
    constexpr int kGrid = 512;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        const double v = eval_psd(*this, -std::numbers::pi + 2.0 * std::numbers::pi * i / kGrid);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo <= rel_tol * hi;
}

double eval_psd(const NoiseModel& model, double theta) {
    const std::complex<double> h =
        eval_poly_zinv(model.numerator(), theta) / eval_poly_zinv(model.denominator(), theta);
    return std::norm(h);
}

StateSpace to_state_space(const NoiseModel& model) {
    const auto& num = model.numerator();
    const auto& den = model.denominator();
    const int n = static_cast<int>(std::max(num.size(), den.size())) - 1;
    const double b0 = num[0];
    if (n == 0) {
        return StateSpace(MatrixXd(0, 0), MatrixXd(0, 1), MatrixXd(1, 0),
                          MatrixXd::Constant(1, 1, b0));
    }
    auto coeff = [](const std::vector<double>& c, int k) {
        return k < static_cast<int>(c.size()) ? c[static_cast<size_t>(k)] : 0.0;
    };
    MatrixXd A = MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) A(0, k) = -coeff(den, k + 1);
    for (int k = 1; k < n; ++k) A(k, k - 1) = 1.0;
    MatrixXd B = MatrixXd::Zero(n, 1);
    B(0, 0) = 1.0;
    MatrixXd C(1, n);
    for (int k = 0; k < n; ++k) C(0, k) = coeff(num, k + 1) - b0 * coeff(den, k + 1);
    return StateSpace(std::move(A), std::move(B), std::move(C), MatrixXd::Constant(1, 1, b0));
}

std::uint64_t GaussianSampler::next_u64() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double GaussianSampler::next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianSampler::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

std::vector<double> sample_noise(const NoiseModel& model, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_noise: n must be >= 1");
    const StateSpace ss = to_state_space(model);
    GaussianSampler rng(seed);

    VectorXd x(ss.order());
    if (ss.order() > 0) {
        const MatrixXd cov = solve_discrete_lyapunov(ss.A, ss.B * ss.B.transpose());
        const MatrixXd root = psd_sqrt(cov);
        VectorXd xi(ss.order());
        for (int i = 0; i < ss.order(); ++i) xi(i) = rng.next();
        x = root * xi;
    }

    std::vector<double> w(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double e = rng.next();
        w[static_cast<size_t>(k)] = (ss.order() > 0 ? (ss.C * x)(0, 0) : 0.0) + ss.D(0, 0) * e;
        if (ss.order() > 0) x = ss.A * x + ss.B * e;
    }
    return w;
}

}  // namespace fbcap
