#pragma once

#include "fbcap/state_space.hpp"

#include <cstdint>
#include <vector>

namespace fbcap {

// Rational noise-shaping filter H(z) = num(z^{-1}) / den(z^{-1}) driven by zero-mean,
// unit-variance white Gaussian noise; the noise PSD is S_w(theta) = |H(e^{i theta})|^2.
//
// Coefficients are powers of z^{-1}, constant term first. Construction enforces:
//   * denominator constant term nonzero (normalized to 1),
//   * all poles strictly inside the unit disc (companion eigenvalues, margin 1e-8),
//   * numerator constant term nonzero,
//   * S_w > 0 on a dense grid.
class NoiseModel {
  public:
    NoiseModel(std::vector<double> numerator, std::vector<double> denominator = {1.0});

    const std::vector<double>& numerator() const { return num_; }
    const std::vector<double>& denominator() const { return den_; }
    bool is_flat(double rel_tol = 1e-12) const;

  private:
    std::vector<double> num_;
    std::vector<double> den_;
};

// |H(e^{i theta})|^2, total on valid models.
double eval_psd(const NoiseModel& model, double theta);

// Controllable canonical realization of H(z).
StateSpace to_state_space(const NoiseModel& model);

// Deterministic standard-normal stream (splitmix64 + Box-Muller); identical seeds
// produce identical sequences on every platform.
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {
        // warm up past the seed-dependent low-entropy start
        for (int i = 0; i < 8; ++i) next_u64();
    }
    double next();

  private:
    std::uint64_t next_u64();
    double next_unit();  // uniform in (0, 1)
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stationary Gaussian sample path of length n. The initial state is drawn from the
// Lyapunov state covariance so the path carries no startup transient.
std::vector<double> sample_noise(const NoiseModel& model, int n, std::uint64_t seed);

}  // namespace fbcap
