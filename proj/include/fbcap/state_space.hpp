#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace fbcap {

// Discrete-time LTI model x(k+1) = A x(k) + B u(k), y(k) = C x(k) + D u(k).
// Zero state dimension (static gains) is allowed: A is 0x0 and D carries the map.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd D;

    StateSpace() : A(0, 0), B(0, 1), C(1, 0), D(Eigen::MatrixXd::Zero(1, 1)) {}
    StateSpace(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_, Eigen::MatrixXd D_);

    int order() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(D.cols()); }
    int outputs() const { return static_cast<int>(D.rows()); }

    double spectral_radius() const;
    bool is_stable(double margin = 0.0) const;  // spectral radius < 1 - margin

    // SISO frequency response C (zI - A)^{-1} B + D.
    std::complex<double> transfer(std::complex<double> z) const;

    // First n Markov parameters h_0 .. h_{n-1} (SISO).
    std::vector<double> impulse(int n) const;

    // Series interconnection: the output of `first` drives `second`.
    static StateSpace series(const StateSpace& first, const StateSpace& second);
};

// H2 norm squared from the controllability Gramian of the discrete Lyapunov
// equation; equals the mean of |G(e^{i theta})|^2 over the circle.
// Throws std::domain_error("not H2") when the system is not strictly stable.
double h2_norm_sq(const StateSpace& ss);

}  // namespace fbcap
