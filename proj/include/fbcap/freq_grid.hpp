#pragma once

#include "fbcap/noise_model.hpp"

#include <Eigen/Dense>

namespace fbcap {

// Uniform frequency grid theta_i = -pi + (pi/m)(i-1), i = 1..2m, with cached PSD
// samples. h is the number of cosine/sine causality constraints carried by eta;
// the n = 0 constraint is carried by the separate scalar eta0.
struct FrequencyGrid {
    int m = 0;
    int h = 0;
    Eigen::VectorXd thetas;  // size 2m, left-closed [-pi, pi)
    Eigen::VectorXd sw;      // S_w(theta_i), all > 0

    int size() const { return 2 * m; }
};

FrequencyGrid build_grid(int m, int h, const NoiseModel& model);

// Dual variables of the discretized problem. nu may be left empty where the
// closed-form stationary value is implied.
struct DualPoint {
    double lambda = 0.0;
    Eigen::VectorXd eta;  // length h
    double eta0 = 0.0;
    Eigen::VectorXd nu;   // length 2m, each in (0, 2*lambda*S_w(theta_i))
};

// A_k = cos(k theta), B_k = sin(k theta) for k = 1..h.
void trig_basis(int h, double theta, Eigen::VectorXd& A, Eigen::VectorXd& B);

// r^2(theta) = (2 lambda Sw + eta'A(theta) + eta0)^2 + (eta'B(theta))^2.
double r_squared(const DualPoint& dp, double theta, double sw);

}  // namespace fbcap
