#pragma once

#include "fbcap/bounds.hpp"

#include <optional>
#include <vector>

namespace fbcap {

// Grid samples of the Youla parameter's real/imaginary parts, Q(e^{i theta_i}) = a_i + i b_i.
struct SampledSpectrum {
    FrequencyGrid grid;
    Eigen::VectorXd a;
    Eigen::VectorXd b;

    // (1/2m) sum (a_i^2 + b_i^2) S_w(theta_i)
    double discretized_power() const;
    // Conjugate symmetry on the grid; throws std::runtime_error on violation.
    void check_symmetry(double tol = 1e-12) const;
};

// Strictly causal FIR Q(z) = sum_{n=1}^{len} coeffs[n-1] z^{-n}; there is no c_0 slot,
// so strict causality is structural.
struct FirFilter {
    std::vector<double> coeffs;
    double scale = 1.0;  // power-normalization factor already applied to coeffs

    StateSpace to_state_space() const;
    std::complex<double> response(double theta) const;
};

// a_i = (2 lambda Sw_i + eta'A_i + eta0)/nu_i - 1, b_i = eta'B_i / nu_i.
// Throws std::runtime_error("degenerate dual point") if any nu_i <= 1e-14.
SampledSpectrum recover_ab(const DualSolution& sol, const FrequencyGrid& grid);

// c_n = (1/2m) sum_i [a_i cos(n theta_i) - b_i sin(n theta_i)], n = 1..m
// (the non-strictly-causal indices of the periodic inverse transform are dropped).
std::vector<double> fourier_coeffs(const SampledSpectrum& spec);

// (1/2pi) integral |Q|^2 S_w, exact via the H2 norm of the cascade Q(z) H(z).
double power_of_filter(const FirFilter& fir, const NoiseModel& model);

// Rescale so power_of_filter == P; throws std::runtime_error("degenerate filter, no rate")
// when the filter carries no power.
FirFilter power_scale(const FirFilter& fir, const NoiseModel& model, double P);

struct RateBreakdown {
    double bits = 0.0;             // the reported rate
    double quadrature_bits = 0.0;  // (1/2pi) integral log|1+Q| dtheta
    std::optional<double> nmp_root_bits;  // sum log2|z_k| over roots outside the disc
    bool root_route_ok = false;
};

// Achievable rate of the scheme built on Q, computed two ways (Bode integral by
// quadrature, and non-minimum-phase roots of 1+Q via companion eigenvalues) and
// cross-checked; falls back to quadrature if root finding fails.
RateBreakdown achievable_rate_detail(const FirFilter& fir);
double achievable_rate(const FirFilter& fir);

struct SynthesisResult {
    FirFilter filter;
    double rate_bits = 0.0;
    RateBreakdown rate;
};

// recover_ab -> fourier_coeffs -> power_scale -> achievable_rate.
SynthesisResult synthesize(const DualSolution& sol, const FrequencyGrid& grid,
                           const NoiseModel& model, double P);

}  // namespace fbcap
