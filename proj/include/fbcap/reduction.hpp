#pragma once

#include "fbcap/state_space.hpp"

#include <span>
#include <vector>

namespace fbcap {

struct HankelSpectrum {
    std::vector<double> singular_values;  // nonincreasing
    int chosen_order = 0;                 // smallest r with sigma_{r+1}/sigma_1 < 1e-6
    double truncation_error_bound = 0.0;  // 2 * sum of discarded singular values
};

// Singular values of the Hankel matrix built from the impulse response g_1, g_2, ...
// (strictly causal Markov parameters). tail_is_zero selects between exact FIR
// semantics and the windowed matrix used when the data truncates an infinite
// response; it must match the kung_reduce call the spectrum feeds.
HankelSpectrum hankel_singular_values(std::span<const double> impulse, bool tail_is_zero = true);

// Kung realization of the given order from Markov parameters g_1.. (D = 0).
// tail_is_zero selects exact FIR semantics (Hankel padded with zeros beyond the
// data) versus a windowed Hankel that never references unknown samples — the latter
// is what reducing a truncated response of an infinite (possibly unstable) system
// needs. Throws std::invalid_argument when order exceeds the numerical rank.
StateSpace kung_reduce(std::span<const double> impulse, int order, bool tail_is_zero = true);

}  // namespace fbcap
