#include "fbcap/state_space.hpp"

#include "fbcap/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace fbcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

StateSpace::StateSpace(MatrixXd A_, MatrixXd B_, MatrixXd C_, MatrixXd D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
    if (A.rows() != A.cols()) throw std::invalid_argument("StateSpace: A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("StateSpace: B row count mismatch");
    if (C.cols() != A.cols()) throw std::invalid_argument("StateSpace: C column count mismatch");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw std::invalid_argument("StateSpace: D dimension mismatch");
}

double StateSpace::spectral_radius() const {
    if (order() == 0) return 0.0;
    const Eigen::EigenSolver<MatrixXd> es(A, false);
    double r = 0.0;
    for (int i = 0; i < order(); ++i) r = std::max(r, std::abs(es.eigenvalues()(i)));
    return r;
}

bool StateSpace::is_stable(double margin) const { return spectral_radius() < 1.0 - margin; }

std::complex<double> StateSpace::transfer(std::complex<double> z) const {
    if (inputs() != 1 || outputs() != 1)
        throw std::invalid_argument("StateSpace::transfer: SISO only");
    if (order() == 0) return {D(0, 0), 0.0};
    const Eigen::MatrixXcd zi = z * Eigen::MatrixXcd::Identity(order(), order()) - A.cast<std::complex<double>>();
    const Eigen::VectorXcd x = zi.partialPivLu().solve(B.cast<std::complex<double>>());
    return (C.cast<std::complex<double>>() * x)(0, 0) + D(0, 0);
}

std::vector<double> StateSpace::impulse(int n) const {
    if (inputs() != 1 || outputs() != 1)
        throw std::invalid_argument("StateSpace::impulse: SISO only");
    std::vector<double> h(static_cast<size_t>(n));
    if (n == 0) return h;
    h[0] = D(0, 0);
    VectorXd x = B.col(0);
    for (int k = 1; k < n; ++k) {
        h[static_cast<size_t>(k)] = (C * x)(0, 0);
        x = A * x;
    }
    return h;
}

StateSpace StateSpace::series(const StateSpace& first, const StateSpace& second) {
    if (second.inputs() != first.outputs())
        throw std::invalid_argument("StateSpace::series: interconnection dimension mismatch");
    const int n1 = first.order(), n2 = second.order();
    MatrixXd A = MatrixXd::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = first.A;
    A.bottomLeftCorner(n2, n1) = second.B * first.C;
    A.bottomRightCorner(n2, n2) = second.A;
    MatrixXd B(n1 + n2, first.inputs());
    B.topRows(n1) = first.B;
    B.bottomRows(n2) = second.B * first.D;
    MatrixXd C(second.outputs(), n1 + n2);
    C.leftCols(n1) = second.D * first.C;
    C.rightCols(n2) = second.C;
    return StateSpace(std::move(A), std::move(B), std::move(C), second.D * first.D);
}

double h2_norm_sq(const StateSpace& ss) {
    if (!ss.is_stable()) throw std::domain_error("not H2");
    if (ss.order() == 0) return (ss.D * ss.D.transpose()).trace();
    const MatrixXd wc = solve_discrete_lyapunov(ss.A, ss.B * ss.B.transpose());
    return (ss.C * wc * ss.C.transpose() + ss.D * ss.D.transpose()).trace();
}

}  // namespace fbcap
