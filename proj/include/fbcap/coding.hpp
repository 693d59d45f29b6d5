#pragma once

#include "fbcap/noise_model.hpp"
#include "fbcap/synthesis.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace fbcap {

// State-space encoder/decoder pair from the stable/unstable split of the Youla
// controller. Matrices follow the scheme convention
//   u(k) = Cs x_s(k) + Cu (x_hat_u(k) + x_tilde_u(k)),
// whose unity-feedback loop y = u + w is internally stable (the sign of C is folded
// in accordingly when splitting K = -Q/(1+Q)).
struct CodingScheme {
    Eigen::MatrixXd As, Au;
    Eigen::MatrixXd Bs, Bu;
    Eigen::MatrixXd Cs, Cu;
    std::vector<std::complex<double>> unstable_eigs;
    double rate_bits = 0.0;
    int message_dim = 0;
    Eigen::MatrixXd transform;  // similarity from the controller realization to the split one
};

struct TransmissionStats {
    int trials = 0;
    int horizon = 0;
    double empirical_input_power = 0.0;
    double decode_error_rate = 0.0;
    double mean_estimate_error = 0.0;
};

// K = -Q/(1+Q) as a state-space system of order <= deg Q. Well-posed for any
// strictly proper Q.
StateSpace youla_controller(const FirFilter& fir);
StateSpace youla_controller(const StateSpace& q);

// Ordered-Schur spectral split of K into (As, Au) blocks; throws
// std::runtime_error("marginal mode, cannot split") near the unit circle.
CodingScheme stable_unstable_split(const StateSpace& k);

// Message index -> centroid of the message's subcube of the unit hypercube in the
// Au coordinate frame; per-axis bits proportional to log2|lambda_i(Au)|.
Eigen::VectorXd encode_message(const CodingScheme& scheme, std::uint64_t message, int total_bits);
std::uint64_t decode_message(const CodingScheme& scheme, const Eigen::VectorXd& estimate, int total_bits);

struct LoopTrajectories {
    std::vector<double> y;
    std::vector<double> u;
    Eigen::MatrixXd xu0_estimate;  // message_dim x n; column k-1 holds x_hat_{u,0}(k)
};

// Simulates the closed loop for n steps from encoder initial condition xu0. The
// decoder's x_hat_{u,0}(k) = Au^{-k} x_hat_u(k) is propagated through Au^{-1}
// recursions so nothing in the simulation grows with the horizon.
LoopTrajectories run_loop(const CodingScheme& scheme, const NoiseModel& model,
                          const Eigen::VectorXd& xu0, int n, std::uint64_t seed,
                          double noise_scale = 1.0);

// Monte-Carlo transmission: per trial draw a message, run the loop, decode the
// nearest centroid to -x_hat_{u,0}(n).
TransmissionStats simulate_transmission(const CodingScheme& scheme, const NoiseModel& model,
                                        double P, int n, int nR_bits, int trials,
                                        std::uint64_t seed);

}  // namespace fbcap
