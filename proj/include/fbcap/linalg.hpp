#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace fbcap {

// Solves X = A X A' + Q for symmetric Q with A strictly stable, by real Schur
// reduction and block back-substitution.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

// Solves A Y - Y B = C (A: n x n, B: q x q, C: n x q) by Kronecker vectorization.
// Requires the spectra of A and B to be disjoint.
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C);

// In-place Parlett-Reinsch balancing (radix-2 diagonal similarity).
void balance_matrix(Eigen::MatrixXd& M);

// Roots of c[0] + c[1] x + ... + c[n] x^n via balanced companion-matrix eigenvalues.
// Trailing (highest-degree) zero coefficients are trimmed first.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

// Spectral split A = V * blkdiag(stable, unstable) * V^{-1} with |eig(stable)| < 1
// and |eig(unstable)| > 1, obtained from an ordered real Schur form.
struct SpectralSplit {
    Eigen::MatrixXd stable;         // quasi-upper-triangular
    Eigen::MatrixXd unstable;       // quasi-upper-triangular
    Eigen::MatrixXd transform;      // V
    Eigen::MatrixXd transform_inv;  // V^{-1}
};

// Throws std::runtime_error("marginal mode, cannot split") if any eigenvalue has
// modulus within `margin` of the unit circle.
SpectralSplit split_by_unit_circle(const Eigen::MatrixXd& A, double margin = 1e-6);

// Symmetric PSD square root; small negative eigenvalue ripple is clipped at zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S);

}  // namespace fbcap
