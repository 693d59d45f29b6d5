#include "fbcap/reduction.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace fbcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// H0(i,j) = g_{i+j+1}, H1(i,j) = g_{i+j+2} (1-based Markov indices).
void build_hankel(std::span<const double> g, int rows, bool pad_zero, MatrixXd& H0, MatrixXd& H1) {
    const int n = static_cast<int>(g.size());
    H0.setZero(rows, rows);
    H1.setZero(rows, rows);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < rows; ++j) {
            const int k0 = i + j;
            const int k1 = i + j + 1;
            if (k0 < n) H0(i, j) = g[static_cast<size_t>(k0)];
            else if (!pad_zero) throw std::logic_error("hankel window exceeds data");
            if (k1 < n) H1(i, j) = g[static_cast<size_t>(k1)];
            else if (!pad_zero) throw std::logic_error("hankel window exceeds data");
        }
    }
}

}  // namespace

HankelSpectrum hankel_singular_values(std::span<const double> impulse, bool tail_is_zero) {
    if (impulse.empty()) throw std::invalid_argument("hankel_singular_values: empty sequence");
    const int n = static_cast<int>(impulse.size());
    const int rows = tail_is_zero ? n : std::max(1, n / 2);
    if (!tail_is_zero && 2 * rows > n)
        throw std::invalid_argument("hankel_singular_values: sequence too short for a windowed Hankel");
    MatrixXd H0, H1;
    build_hankel(impulse, rows, tail_is_zero, H0, H1);
    const Eigen::BDCSVD<MatrixXd> svd(H0);
    HankelSpectrum out;
    out.singular_values.assign(svd.singularValues().data(),
                               svd.singularValues().data() + svd.singularValues().size());
    const double top = out.singular_values.front();
    int r = static_cast<int>(out.singular_values.size());
    for (int i = 0; i < static_cast<int>(out.singular_values.size()); ++i) {
        if (top == 0.0 || out.singular_values[static_cast<size_t>(i)] / top < 1e-6) {
            r = i;
            break;
        }
    }
    out.chosen_order = std::max(r, 1);
    for (size_t i = static_cast<size_t>(out.chosen_order); i < out.singular_values.size(); ++i)
        out.truncation_error_bound += 2.0 * out.singular_values[i];
    return out;
}

StateSpace kung_reduce(std::span<const double> impulse, int order, bool tail_is_zero) {
    if (impulse.empty()) throw std::invalid_argument("kung_reduce: empty sequence");
    if (order < 1) throw std::invalid_argument("kung_reduce: order must be >= 1");
    const int n = static_cast<int>(impulse.size());
    const int rows = tail_is_zero ? n : std::max(1, n / 2);
    if (!tail_is_zero && 2 * rows > n)
        throw std::invalid_argument("kung_reduce: sequence too short for a windowed Hankel");
    MatrixXd H0, H1;
    build_hankel(impulse, rows, tail_is_zero, H0, H1);

    Eigen::BDCSVD<MatrixXd> svd(H0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sigma = svd.singularValues();
    int numerical_rank = 0;
    for (int i = 0; i < sigma.size(); ++i)
        if (sigma(i) > sigma(0) * 1e-12) ++numerical_rank;
    if (order > numerical_rank)
        throw std::invalid_argument("kung_reduce: order exceeds the numerical rank");

    const VectorXd s_half = sigma.head(order).cwiseSqrt();
    const MatrixXd U = svd.matrixU().leftCols(order);
    const MatrixXd V = svd.matrixV().leftCols(order);
    // Shift-invariance realization: A = S^{-1/2} U' H1 V S^{-1/2}.
    const MatrixXd A = s_half.cwiseInverse().asDiagonal() * U.transpose() * H1 * V *
                       s_half.cwiseInverse().asDiagonal();
    MatrixXd B = (s_half.asDiagonal() * V.transpose()).leftCols(1);
    MatrixXd C = (U * s_half.asDiagonal()).topRows(1);
    return StateSpace(A, std::move(B), std::move(C), MatrixXd::Zero(1, 1));
}

}  // namespace fbcap
