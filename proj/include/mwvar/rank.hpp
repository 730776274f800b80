#pragma once

#include <cstddef>
#include <vector>

#include "mwvar/sample.hpp"

namespace mwvar {

/// Ranks of one group within the pooled sample and within itself.
///
/// For observation k of the group:
///   overall_*   rank among all N observations (min / mid / max over its tie run)
///   internal_*  rank among the group's own observations
///   placement   overall_mid - internal_mid, i.e. the observation's mid-rank
///               within the *other* group, in [0, n_other]
struct GroupRanks {
    std::vector<double> overall_min;
    std::vector<double> overall_mid;
    std::vector<double> overall_max;
    std::vector<double> internal_min;
    std::vector<double> internal_mid;
    std::vector<double> internal_max;
    std::vector<double> placement;
};

struct RankTables {
    GroupRanks g1;
    GroupRanks g2;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    // Number of tied cross-group pairs {(k,l): X_1k == X_2l}, an integer.
    long long tied_cross_pairs = 0;
};

/// Mid/min/max ranks and placements for both groups, computed by one pooled
/// stable sort with tie-run detection (O(N log N)). Tie runs spanning the
/// group boundary are handled in the pooled pass.
RankTables rank_tables(const TwoSample& sample);

/// Mid-ranks of a single sequence (1-based, ties averaged).
std::vector<double> midranks(const std::vector<double>& values);

}  // namespace mwvar
