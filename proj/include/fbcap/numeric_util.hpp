#pragma once

namespace fbcap {

// Deterministic pairwise-tree reduction of f(lo) + ... + f(hi-1).
// The association order depends only on (lo, hi), so results are reproducible
// regardless of how callers schedule the per-index work.
template <typename T, typename F>
T pairwise_sum(int lo, int hi, F&& f) {
    if (hi - lo <= 8) {
        T acc = f(lo);
        for (int i = lo + 1; i < hi; ++i) acc += f(i);
        return acc;
    }
    const int mid = lo + (hi - lo) / 2;
    T left = pairwise_sum<T>(lo, mid, f);
    T right = pairwise_sum<T>(mid, hi, f);
    left += right;
    return left;
}

}  // namespace fbcap
