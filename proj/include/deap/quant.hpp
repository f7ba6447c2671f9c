#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace deap {

// Uniform quantization onto 2^bits evenly spaced levels spanning a closed
// interval. Both endpoints are on the grid; for a signed interval like
// [-1, 1] with an even level count this means zero itself is not a level.
struct QuantSpec {
    int bits = 7;
    bool enabled = false;

    void validate() const {
        if (bits < 1 || bits > 16)
            throw ConfigError("QuantSpec: bits must be in [1,16], got " +
                              std::to_string(bits));
    }

    int levels() const { return 1 << bits; }
};

// Snap v to the nearest level of the [lo, hi] grid. Values outside the
// interval clamp to the nearest endpoint first. Halfway cases round away
// from zero in value space (for a tie between levels of equal magnitude,
// the positive one wins, which keeps the map deterministic).
inline double quantize(double v, double lo, double hi, const QuantSpec& q) {
    if (!q.enabled) return v;
    q.validate();
    if (!(hi > lo))
        throw ContractError("quantize: interval must satisfy lo < hi");
    v = std::clamp(v, lo, hi);
    const int n = q.levels() - 1;
    const double span = hi - lo;
    const double t = (v - lo) * n / span;
    double k = std::floor(t);
    const double frac = t - k;
    if (frac > 0.5) {
        k += 1.0;
    } else if (frac == 0.5) {
        // Decide the tie from the sign of v itself: reconstructing the two
        // candidate levels and comparing magnitudes can be off by one ULP.
        // For v >= 0 "away from zero" is upward (at v == 0 the positive
        // level wins); for v < 0 it is downward, which floor already gave.
        if (v >= 0.0) k += 1.0;
    }
    if (k < 0.0) k = 0.0;
    if (k > n) k = n;
    // Reconstruct from the level index so lo and hi are hit exactly.
    return lo + k * span / n;
}

}  // namespace deap
