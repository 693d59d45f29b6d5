#include "fbcap/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace fbcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Kronecker-vectorized solve of T_ii Y T_jj' - Y = -R for blocks of size <= 2.
MatrixXd solve_small_stein(const MatrixXd& Tii, const MatrixXd& Tjj, const MatrixXd& R) {
    const int p = static_cast<int>(Tii.rows());
    const int q = static_cast<int>(Tjj.rows());
    MatrixXd K = MatrixXd::Zero(p * q, p * q);
    // vec(Tii Y Tjj') = (Tjj kron Tii) vec(Y), column-major stacking.
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) K.block(a * p, b * p, p, p) = Tjj(a, b) * Tii;
    K -= MatrixXd::Identity(p * q, p * q);
    VectorXd rhs(p * q);
    for (int col = 0; col < q; ++col) rhs.segment(col * p, p) = -R.col(col);
    const VectorXd y = K.fullPivLu().solve(rhs);
    MatrixXd Y(p, q);
    for (int col = 0; col < q; ++col) Y.col(col) = y.segment(col * p, p);
    return Y;
}

std::vector<std::pair<int, int>> schur_blocks(const MatrixXd& T) {
    std::vector<std::pair<int, int>> blocks;  // (start, size)
    const int n = static_cast<int>(T.rows());
    int k = 0;
    while (k < n) {
        if (k + 1 < n && T(k + 1, k) != 0.0) {
            blocks.emplace_back(k, 2);
            k += 2;
        } else {
            blocks.emplace_back(k, 1);
            k += 1;
        }
    }
    return blocks;
}

double block_modulus(const MatrixXd& T, int start, int size) {
    if (size == 1) return std::abs(T(start, start));
    // 2x2 Schur blocks carry a complex pair; |lambda|^2 = det.
    const double det = T(start, start) * T(start + 1, start + 1) -
                       T(start, start + 1) * T(start + 1, start);
    return std::sqrt(std::abs(det));
}

// Swaps the adjacent diagonal blocks at `p` (sizes n1, n2) of the quasi-triangular T,
// updating T and the accumulated orthogonal factor U.
void swap_adjacent_blocks(MatrixXd& T, MatrixXd& U, int p, int n1, int n2) {
    const int w = n1 + n2;
    const MatrixXd A11 = T.block(p, p, n1, n1);
    const MatrixXd A12 = T.block(p, p + n1, n1, n2);
    const MatrixXd A22 = T.block(p + n1, p + n1, n2, n2);
    // A11 X - X A22 = -A12, so the columns of [X; I] span the A22-invariant subspace.
    const MatrixXd X = solve_sylvester(A11, A22, -A12);
    MatrixXd basis(w, n2);
    basis.topRows(n1) = X;
    basis.bottomRows(n2) = MatrixXd::Identity(n2, n2);
    const Eigen::HouseholderQR<MatrixXd> qr(basis);
    const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(w, w);

    const int n = static_cast<int>(T.rows());
    T.block(p, 0, w, n) = Q.transpose() * T.block(p, 0, w, n);
    T.block(0, p, n, w) = T.block(0, p, n, w) * Q;
    U.block(0, p, n, w) = U.block(0, p, n, w) * Q;
    // Restore exact quasi-triangular zeros in the swapped window.
    T.block(p + n2, p, n1, n2).setZero();
    if (n2 == 2 && std::abs(T(p + 1, p)) < 1e-13 * (std::abs(T(p, p)) + std::abs(T(p + 1, p + 1))))
        T(p + 1, p) = 0.0;
    if (n1 == 2) {
        const int q = p + n2;
        if (std::abs(T(q + 1, q)) < 1e-13 * (std::abs(T(q, q)) + std::abs(T(q + 1, q + 1))))
            T(q + 1, q) = 0.0;
    }
}

}  // namespace

MatrixXd solve_discrete_lyapunov(const MatrixXd& A, const MatrixXd& Q) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || Q.rows() != n || Q.cols() != n)
        throw std::invalid_argument("solve_discrete_lyapunov: dimension mismatch");
    if (n == 0) return MatrixXd(0, 0);

    const Eigen::RealSchur<MatrixXd> schur(A);
    if (schur.info() != Eigen::Success)
        throw std::runtime_error("solve_discrete_lyapunov: Schur factorization failed");
    const MatrixXd U = schur.matrixU();
    const MatrixXd T = schur.matrixT();
    const MatrixXd Qt = U.transpose() * Q * U;

    const auto blocks = schur_blocks(T);
    const int nb = static_cast<int>(blocks.size());
    MatrixXd Xt = MatrixXd::Zero(n, n);

    // Solve T Xt T' - Xt = -Qt block-entry-wise; entry (i,j) couples only to entries
    // with k >= i, l >= j, so sweep from the bottom-right corner.
    for (int i = nb - 1; i >= 0; --i) {
        const auto [pi, si] = blocks[i];
        for (int j = nb - 1; j >= i; --j) {
            const auto [pj, sj] = blocks[j];
            MatrixXd R = Qt.block(pi, pj, si, sj);
            for (int k = i; k < nb; ++k) {
                const auto [pk, sk] = blocks[k];
                for (int l = j; l < nb; ++l) {
                    if (k == i && l == j) continue;
                    const auto [pl, sl] = blocks[l];
                    R += T.block(pi, pk, si, sk) * Xt.block(pk, pl, sk, sl) *
                         T.block(pj, pl, sj, sl).transpose();
                }
            }
            const MatrixXd Y = solve_small_stein(T.block(pi, pi, si, si),
                                                 T.block(pj, pj, sj, sj), R);
            Xt.block(pi, pj, si, sj) = Y;
            if (j != i) Xt.block(pj, pi, sj, si) = Y.transpose();
        }
    }

    MatrixXd X = U * Xt * U.transpose();
    return 0.5 * (X + X.transpose());
}

MatrixXd solve_sylvester(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C) {
    const int n = static_cast<int>(A.rows());
    const int q = static_cast<int>(B.rows());
    if (C.rows() != n || C.cols() != q)
        throw std::invalid_argument("solve_sylvester: dimension mismatch");
    if (n == 0 || q == 0) return MatrixXd(n, q);
    MatrixXd K = MatrixXd::Zero(n * q, n * q);
    for (int a = 0; a < q; ++a) {
        K.block(a * n, a * n, n, n) += A;
        for (int b = 0; b < q; ++b) K.block(a * n, b * n, n, n) -= B(b, a) * MatrixXd::Identity(n, n);
    }
    VectorXd rhs(n * q);
    for (int col = 0; col < q; ++col) rhs.segment(col * n, n) = C.col(col);
    const VectorXd y = K.fullPivLu().solve(rhs);
    MatrixXd Y(n, q);
    for (int col = 0; col < q; ++col) Y.col(col) = y.segment(col * n, n);
    return Y;
}

void balance_matrix(MatrixXd& M) {
    const int n = static_cast<int>(M.rows());
    const double radix = 2.0;
    const double sqrdx = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(M(j, i));
                r += std::abs(M(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double ginv = 1.0 / f;
                M.row(i) *= ginv;
                M.col(i) *= f;
            }
        }
    }
}

std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
    int degree = static_cast<int>(coeffs.size()) - 1;
    while (degree >= 0 && coeffs[static_cast<size_t>(degree)] == 0.0) --degree;
    if (degree <= 0) return {};
    const double lead = coeffs[static_cast<size_t>(degree)];
    MatrixXd companion = MatrixXd::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -coeffs[static_cast<size_t>(i)] / lead;
    balance_matrix(companion);
    const Eigen::EigenSolver<MatrixXd> es(companion, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("polynomial_roots: eigenvalue computation failed");
    std::vector<std::complex<double>> roots(static_cast<size_t>(degree));
    for (int i = 0; i < degree; ++i) roots[static_cast<size_t>(i)] = es.eigenvalues()(i);
    return roots;
}

SpectralSplit split_by_unit_circle(const MatrixXd& A, double margin) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw std::invalid_argument("split_by_unit_circle: A must be square");
    SpectralSplit out;
    if (n == 0) {
        out.stable = out.unstable = MatrixXd(0, 0);
        out.transform = out.transform_inv = MatrixXd(0, 0);
        return out;
    }

    {
        const Eigen::EigenSolver<MatrixXd> es(A, false);
        for (int i = 0; i < n; ++i) {
            if (std::abs(std::abs(es.eigenvalues()(i)) - 1.0) < margin)
                throw std::runtime_error("marginal mode, cannot split");
        }
    }

    const Eigen::RealSchur<MatrixXd> schur(A);
    if (schur.info() != Eigen::Success)
        throw std::runtime_error("split_by_unit_circle: Schur factorization failed");
    MatrixXd T = schur.matrixT();
    MatrixXd U = schur.matrixU();

    // Bubble unstable blocks below the stable ones.
    bool swapped = true;
    while (swapped) {
        swapped = false;
        const auto blocks = schur_blocks(T);
        for (size_t k = 0; k + 1 < blocks.size(); ++k) {
            const auto [p1, s1] = blocks[k];
            const auto [p2, s2] = blocks[k + 1];
            const bool first_unstable = block_modulus(T, p1, s1) > 1.0;
            const bool second_stable = block_modulus(T, p2, s2) < 1.0;
            if (first_unstable && second_stable) {
                swap_adjacent_blocks(T, U, p1, s1, s2);
                swapped = true;
                break;
            }
        }
    }

    int ns = 0;
    for (const auto& [start, size] : schur_blocks(T)) {
        if (block_modulus(T, start, size) < 1.0) ns += size;
    }
    const int nu = n - ns;

    out.stable = T.topLeftCorner(ns, ns);
    out.unstable = T.bottomRightCorner(nu, nu);

    // Decouple the cross term: W = [I Y; 0 I] with Tss Y - Y Tuu = -Tsu.
    const MatrixXd Y = solve_sylvester(out.stable, out.unstable, -T.topRightCorner(ns, nu));
    MatrixXd V = U;
    V.rightCols(nu) = U.leftCols(ns) * Y + U.rightCols(nu);
    MatrixXd Winv = MatrixXd::Identity(n, n);
    Winv.topRightCorner(ns, nu) = -Y;
    out.transform = V;
    out.transform_inv = Winv * U.transpose();
    return out;
}

MatrixXd psd_sqrt(const MatrixXd& S) {
    if (S.rows() == 0) return S;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigendecomposition failed");
    VectorXd d = es.eigenvalues();
    for (int i = 0; i < d.size(); ++i) d(i) = d(i) > 0.0 ? std::sqrt(d(i)) : 0.0;
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace fbcap
