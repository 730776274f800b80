#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mwvar {

/// Two independent samples, ties allowed. Group sizes must be at least 1;
/// the variance estimators additionally require n1, n2 >= 2 and check that
/// themselves.
struct TwoSample {
    std::vector<double> group1;
    std::vector<double> group2;

    TwoSample(std::vector<double> g1, std::vector<double> g2)
        : group1(std::move(g1)), group2(std::move(g2)) {
        if (group1.empty() || group2.empty()) {
            throw std::invalid_argument("TwoSample: each group needs at least one observation");
        }
        for (double v : group1) {
            if (!std::isfinite(v)) throw std::invalid_argument("TwoSample: non-finite value in group 1");
        }
        for (double v : group2) {
            if (!std::isfinite(v)) throw std::invalid_argument("TwoSample: non-finite value in group 2");
        }
    }

    std::size_t n1() const { return group1.size(); }
    std::size_t n2() const { return group2.size(); }
    std::size_t total() const { return group1.size() + group2.size(); }
};

inline void require_min_group_size(const TwoSample& s, std::size_t m) {
    if (s.n1() < m || s.n2() < m) {
        throw std::invalid_argument("insufficient sample size: need at least " +
                                    std::to_string(m) + " observations per group");
    }
}

}  // namespace mwvar
