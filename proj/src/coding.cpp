#include "fbcap/coding.hpp"

#include "fbcap/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace fbcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Per-axis bit weights: each axis of a complex-pair block carries log2 of the pair
// modulus, a real axis carries log2 of its eigenvalue modulus.
std::vector<double> axis_weights(const MatrixXd& Au) {
    std::vector<double> w;
    const int n = static_cast<int>(Au.rows());
    int k = 0;
    while (k < n) {
        if (k + 1 < n && Au(k + 1, k) != 0.0) {
            const double det = Au(k, k) * Au(k + 1, k + 1) - Au(k, k + 1) * Au(k + 1, k);
            const double lw = 0.5 * std::log2(std::abs(det));
            w.push_back(lw);
            w.push_back(lw);
            k += 2;
        } else {
            w.push_back(std::log2(std::abs(Au(k, k))));
            k += 1;
        }
    }
    return w;
}

std::vector<int> allocate_bits(const CodingScheme& scheme, int total_bits) {
    if (scheme.message_dim < 1) throw std::invalid_argument("coding scheme carries no message");
    if (total_bits < 0 || total_bits > 60)
        throw std::invalid_argument("total_bits outside the representable range");
    const std::vector<double> w = axis_weights(scheme.Au);
    const double wsum = scheme.rate_bits;
    const int d = scheme.message_dim;
    std::vector<int> bits(static_cast<size_t>(d), 0);
    std::vector<double> frac(static_cast<size_t>(d), 0.0);
    int assigned = 0;
    for (int i = 0; i < d; ++i) {
        const double target = wsum > 0.0 ? total_bits * w[static_cast<size_t>(i)] / wsum
                                         : static_cast<double>(total_bits) / d;
        bits[static_cast<size_t>(i)] = static_cast<int>(std::floor(target));
        frac[static_cast<size_t>(i)] = target - std::floor(target);
        assigned += bits[static_cast<size_t>(i)];
    }
    while (assigned < total_bits) {  // hand leftovers to the largest fractional parts
        int pick = 0;
        for (int i = 1; i < d; ++i)
            if (frac[static_cast<size_t>(i)] > frac[static_cast<size_t>(pick)]) pick = i;
        ++bits[static_cast<size_t>(pick)];
        frac[static_cast<size_t>(pick)] = -1.0;
        ++assigned;
    }
    return bits;
}

}  // namespace

StateSpace youla_controller(const FirFilter& fir) {
    return youla_controller(fir.to_state_space());
}

StateSpace youla_controller(const StateSpace& q) {
    if (q.inputs() != 1 || q.outputs() != 1)
        throw std::invalid_argument("youla_controller: SISO only");
    if (q.D(0, 0) != 0.0)
        throw std::invalid_argument("youla_controller: Q must be strictly causal");
    // u = -Q v with v = y - Q v gives x' = (A - B C) x + B y, u = -C x.
    return StateSpace(q.A - q.B * q.C, q.B, -q.C, MatrixXd::Zero(1, 1));
}

CodingScheme stable_unstable_split(const StateSpace& k) {
    const SpectralSplit split = split_by_unit_circle(k.A, 1e-6);
    const int ns = static_cast<int>(split.stable.rows());
    const int nu = static_cast<int>(split.unstable.rows());

    CodingScheme scheme;
    scheme.As = split.stable;
    scheme.Au = split.unstable;
    const MatrixXd B = split.transform_inv * k.B;
    // The scheme stores the realization of -K so that u(k) = C x(k) closes the loop.
    const MatrixXd C = -k.C * split.transform;
    scheme.Bs = B.topRows(ns);
    scheme.Bu = B.bottomRows(nu);
    scheme.Cs = C.leftCols(ns);
    scheme.Cu = C.rightCols(nu);
    scheme.transform = split.transform;
    scheme.message_dim = nu;

    if (nu > 0) {
        const Eigen::EigenSolver<MatrixXd> es(scheme.Au, false);
        for (int i = 0; i < nu; ++i) {
            const std::complex<double> lam = es.eigenvalues()(i);
            scheme.unstable_eigs.push_back(lam);
            scheme.rate_bits += std::log2(std::abs(lam));
        }
    }
    return scheme;
}

Eigen::VectorXd encode_message(const CodingScheme& scheme, std::uint64_t message, int total_bits) {
    const std::vector<int> bits = allocate_bits(scheme, total_bits);
    const std::uint64_t count = 1ull << total_bits;
    if (message < 1 || message > count)
        throw std::invalid_argument("encode_message: message index out of range");
    std::uint64_t rem = message - 1;
    VectorXd x(scheme.message_dim);
    for (int i = 0; i < scheme.message_dim; ++i) {
        const std::uint64_t cells = 1ull << bits[static_cast<size_t>(i)];
        const std::uint64_t idx = rem % cells;
        rem /= cells;
        x(i) = -0.5 + (static_cast<double>(idx) + 0.5) / static_cast<double>(cells);
    }
    return x;
}

std::uint64_t decode_message(const CodingScheme& scheme, const Eigen::VectorXd& estimate,
                             int total_bits) {
    const std::vector<int> bits = allocate_bits(scheme, total_bits);
    if (estimate.size() != scheme.message_dim)
        throw std::invalid_argument("decode_message: estimate dimension mismatch");
    std::uint64_t message = 0;
    std::uint64_t stride = 1;
    for (int i = 0; i < scheme.message_dim; ++i) {
        const std::uint64_t cells = 1ull << bits[static_cast<size_t>(i)];
        long long idx = static_cast<long long>(std::floor((estimate(i) + 0.5) * static_cast<double>(cells)));
        idx = std::max(0ll, std::min<long long>(idx, static_cast<long long>(cells) - 1));
        message += static_cast<std::uint64_t>(idx) * stride;
        stride *= cells;
    }
    return message + 1;
}

LoopTrajectories run_loop(const CodingScheme& scheme, const NoiseModel& model,
                          const Eigen::VectorXd& xu0, int n, std::uint64_t seed,
                          double noise_scale) {
    if (n < 1) throw std::invalid_argument("run_loop: n must be >= 1");
    const int d = scheme.message_dim;
    if (xu0.size() != d) throw std::invalid_argument("run_loop: xu0 dimension mismatch");

    std::vector<double> noise(static_cast<size_t>(n), 0.0);
    if (noise_scale != 0.0) {
        noise = sample_noise(model, n, seed);
        if (noise_scale != 1.0)
            for (double& w : noise) w *= noise_scale;
    }

    LoopTrajectories out;
    out.y.resize(static_cast<size_t>(n));
    out.u.resize(static_cast<size_t>(n));
    out.xu0_estimate.resize(d, n);

    // State bookkeeping. x_hat_u and x_tilde_u individually diverge, but their sum
    // x_u is a closed-loop state and stays bounded; the decoder estimate
    // z(k) = Au^{-k} x_hat_u(k) obeys z(k+1) = z(k) + Au^{-(k+1)} Bu y(k).
    VectorXd xs = VectorXd::Zero(scheme.As.rows());
    VectorXd xu = xu0;                  // x_hat_u + x_tilde_u
    VectorXd z = VectorXd::Zero(d);     // Au^{-k} x_hat_u(k)
    MatrixXd au_inv(d, d);
    VectorXd w_vec(d);                  // Au^{-(k+1)} Bu
    if (d > 0) {
        au_inv = scheme.Au.partialPivLu().inverse();
        w_vec = au_inv * scheme.Bu.col(0);
    }

    for (int k = 0; k < n; ++k) {
        const double u = (scheme.Cs * xs).value() + (d > 0 ? (scheme.Cu * xu).value() : 0.0);
        const double y = u + noise[static_cast<size_t>(k)];
        out.u[static_cast<size_t>(k)] = u;
        out.y[static_cast<size_t>(k)] = y;
        xs = scheme.As * xs + scheme.Bs.col(0) * y;
        if (d > 0) {
            xu = scheme.Au * xu + scheme.Bu.col(0) * y;
            z += w_vec * y;
            w_vec = au_inv * w_vec;
            out.xu0_estimate.col(k) = z;
        }
    }
    return out;
}

TransmissionStats simulate_transmission(const CodingScheme& scheme, const NoiseModel& model,
                                        double P, int n, int nR_bits, int trials,
                                        std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("simulate_transmission: trials must be >= 1");
    if (n >= 1 && nR_bits >= 0 && scheme.rate_bits > 0.0 &&
        static_cast<double>(nR_bits) / n >= scheme.rate_bits)
        throw std::invalid_argument("simulate_transmission: nR_bits/n must stay below the scheme rate");
    (void)P;

    TransmissionStats stats;
    stats.trials = trials;
    stats.horizon = n;

    double power_acc = 0.0;
    double err_acc = 0.0;
    long decode_errors = 0;
    const std::uint64_t messages = 1ull << nR_bits;

    auto mix64 = [](std::uint64_t v) {
        v += 0x9e3779b97f4a7c15ull;
        v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
        v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
        return v ^ (v >> 31);
    };

    for (int trial = 0; trial < trials; ++trial) {
        // Per-trial derived seeds keep trials independent and order-free.
        const std::uint64_t message = 1 + mix64(seed ^ mix64(static_cast<std::uint64_t>(trial) + 1)) % messages;
        const VectorXd xu0 = encode_message(scheme, message, nR_bits);
        const LoopTrajectories traj = run_loop(scheme, model, xu0, n, seed + 1000003ull * trial);
        for (double u : traj.u) power_acc += u * u;
        const VectorXd z_final = traj.xu0_estimate.col(n - 1);
        err_acc += (z_final + xu0).norm();
        if (decode_message(scheme, -z_final, nR_bits) != message) ++decode_errors;
    }

    stats.empirical_input_power = power_acc / (static_cast<double>(trials) * n);
    stats.decode_error_rate = static_cast<double>(decode_errors) / trials;
    stats.mean_estimate_error = err_acc / trials;
    return stats;
}

}  // namespace fbcap
