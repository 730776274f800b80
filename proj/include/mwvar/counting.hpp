#pragma once

#include <cmath>
#include <stdexcept>

namespace mwvar {

// Counting statistic c(x,y): 0 if x > y, 1/2 if x == y, 1 if x < y.
// Ties are decided by exact value equality; callers with measured
// continuous data own any rounding policy.
inline double count(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        throw std::invalid_argument("count: non-finite input");
    }
    if (x > y) return 0.0;
    if (x < y) return 1.0;
    return 0.5;
}

// Right-continuous version: 1 iff x <= y.
inline int count_plus(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        throw std::invalid_argument("count_plus: non-finite input");
    }
    return x <= y ? 1 : 0;
}

// Left-continuous version: 1 iff x < y.
// Pointwise, count == (count_plus + count_minus) / 2.
inline int count_minus(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        throw std::invalid_argument("count_minus: non-finite input");
    }
    return x < y ? 1 : 0;
}

}  // namespace mwvar
