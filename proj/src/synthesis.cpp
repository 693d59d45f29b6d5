#include "fbcap/synthesis.hpp"

#include "fbcap/linalg.hpp"
#include "fbcap/quadrature.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace fbcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

double SampledSpectrum::discretized_power() const {
    double acc = 0.0;
    for (int i = 0; i < grid.size(); ++i) acc += (a(i) * a(i) + b(i) * b(i)) * grid.sw(i);
    return acc / grid.size();
}

void SampledSpectrum::check_symmetry(double tol) const {
    const int n = grid.size();
    const int m = grid.m;
    auto fail = [](const char* what) { throw std::runtime_error(std::string("SampledSpectrum: ") + what); };
    if (std::abs(b(0)) > tol || std::abs(b(m)) > tol) fail("self-paired sample has nonzero imaginary part");
    for (int i = 1; i < n; ++i) {
        const int j = n - i;  // theta_j = -theta_i
        if (std::abs(a(i) - a(j)) > tol || std::abs(b(i) + b(j)) > tol)
            fail("conjugate symmetry violated");
    }
}

StateSpace FirFilter::to_state_space() const {
    int len = static_cast<int>(coeffs.size());
    while (len > 0 && coeffs[static_cast<size_t>(len - 1)] == 0.0) --len;
    if (len == 0)
        return StateSpace(MatrixXd(0, 0), MatrixXd(0, 1), MatrixXd(1, 0), MatrixXd::Zero(1, 1));
    MatrixXd A = MatrixXd::Zero(len, len);
    for (int i = 1; i < len; ++i) A(i, i - 1) = 1.0;
    MatrixXd B = MatrixXd::Zero(len, 1);
    B(0, 0) = 1.0;
    MatrixXd C(1, len);
    for (int i = 0; i < len; ++i) C(0, i) = coeffs[static_cast<size_t>(i)];
    return StateSpace(std::move(A), std::move(B), std::move(C), MatrixXd::Zero(1, 1));
}

std::complex<double> FirFilter::response(double theta) const {
    const std::complex<double> w(std::cos(theta), -std::sin(theta));
    std::complex<double> acc(0.0, 0.0);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc + *it) * w;
    return acc;
}

SampledSpectrum recover_ab(const DualSolution& sol, const FrequencyGrid& grid) {
    const DualPoint& dp = sol.point;
    if (dp.eta.size() != grid.h || dp.nu.size() != grid.size())
        throw std::invalid_argument("recover_ab: dual point does not match the grid");
    SampledSpectrum spec;
    spec.grid = grid;
    spec.a.resize(grid.size());
    spec.b.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double nu = dp.nu(i);
        if (nu <= 1e-14) throw std::runtime_error("degenerate dual point");
        Eigen::VectorXd A, B;
        trig_basis(grid.h, grid.thetas(i), A, B);
        spec.a(i) = (2.0 * dp.lambda * grid.sw(i) + dp.eta.dot(A) + dp.eta0) / nu - 1.0;
        spec.b(i) = dp.eta.dot(B) / nu;
    }
    return spec;
}

std::vector<double> fourier_coeffs(const SampledSpectrum& spec) {
    const int m = spec.grid.m;
    const int points = spec.grid.size();
    std::vector<double> c(static_cast<size_t>(m));
    for (int n = 1; n <= m; ++n) {
        double acc = 0.0;
        for (int i = 0; i < points; ++i) {
            acc += spec.a(i) * std::cos(n * spec.grid.thetas(i)) -
                   spec.b(i) * std::sin(n * spec.grid.thetas(i));
        }
        c[static_cast<size_t>(n - 1)] = acc / points;
    }
    return c;
}

double power_of_filter(const FirFilter& fir, const NoiseModel& model) {
    return h2_norm_sq(StateSpace::series(to_state_space(model), fir.to_state_space()));
}

FirFilter power_scale(const FirFilter& fir, const NoiseModel& model, double P) {
    const double p = power_of_filter(fir, model);
    if (!(p > 0.0)) throw std::runtime_error("degenerate filter, no rate");
    const double alpha = std::sqrt(P / p);
    FirFilter scaled = fir;
    for (double& c : scaled.coeffs) c *= alpha;
    scaled.scale = fir.scale * alpha;
    return scaled;
}

RateBreakdown achievable_rate_detail(const FirFilter& fir) {
    RateBreakdown out;

    auto integrand = [&](double theta) {
        return std::log(std::abs(1.0 + fir.response(theta)));
    };
    const QuadratureResult q =
        integrate_adaptive_simpson(integrand, 0.0, std::numbers::pi, 1e-10 * std::numbers::pi);
    out.quadrature_bits = q.value / std::numbers::pi / kLn2;

    // 1 + Q(z) = (z^m + c_1 z^{m-1} + ... + c_m) / z^m; ascending coefficients.
    int len = static_cast<int>(fir.coeffs.size());
    while (len > 0 && fir.coeffs[static_cast<size_t>(len - 1)] == 0.0) --len;
    try {
        std::vector<double> poly(static_cast<size_t>(len + 1));
        for (int i = 0; i < len; ++i) poly[static_cast<size_t>(i)] = fir.coeffs[static_cast<size_t>(len - 1 - i)];
        poly[static_cast<size_t>(len)] = 1.0;
        double bits = 0.0;
        for (const auto& root : polynomial_roots(poly)) {
            const double mod = std::abs(root);
            if (mod > 1.0 + 1e-9) bits += std::log2(mod);
        }
        out.nmp_root_bits = bits;
        out.root_route_ok = true;
    } catch (const std::exception&) {
        out.root_route_ok = false;
    }

    out.bits = out.root_route_ok ? *out.nmp_root_bits : out.quadrature_bits;
    return out;
}

double achievable_rate(const FirFilter& fir) { return achievable_rate_detail(fir).bits; }

SynthesisResult synthesize(const DualSolution& sol, const FrequencyGrid& grid,
                           const NoiseModel& model, double P) {
    const SampledSpectrum spec = recover_ab(sol, grid);
    FirFilter fir{fourier_coeffs(spec), 1.0};
    SynthesisResult out;
    out.filter = power_scale(fir, model, P);
    out.rate = achievable_rate_detail(out.filter);
    out.rate_bits = out.rate.bits;
    return out;
}

}  // namespace fbcap
