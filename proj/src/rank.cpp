#include "mwvar/rank.hpp"

#include <algorithm>
#include <numeric>

namespace mwvar {

namespace {

struct Tagged {
    double value;
    std::size_t group;  // 0 or 1
    std::size_t index;  // index within its group
};

// Fill min/mid/max ranks (1-based) for a sorted run of equal values.
template <typename Assign>
void assign_tie_runs(const std::vector<Tagged>& sorted, Assign&& assign) {
    const std::size_t n = sorted.size();
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && sorted[j].value == sorted[i].value) ++j;
        const double rmin = static_cast<double>(i + 1);
        const double rmax = static_cast<double>(j);
        const double rmid = 0.5 * (rmin + rmax);
        for (std::size_t k = i; k < j; ++k) {
            assign(sorted[k], rmin, rmid, rmax, j - i);
        }
        i = j;
    }
}

}  // namespace

std::vector<double> midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> out(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) out[order[k]] = mid;
        i = j;
    }
    return out;
}

RankTables rank_tables(const TwoSample& sample) {
    const std::size_t n1 = sample.n1();
    const std::size_t n2 = sample.n2();
    const std::size_t n = n1 + n2;

    RankTables t;
    t.n1 = n1;
    t.n2 = n2;
    for (GroupRanks* g : {&t.g1, &t.g2}) {
        const std::size_t sz = (g == &t.g1) ? n1 : n2;
        g->overall_min.resize(sz);
        g->overall_mid.resize(sz);
        g->overall_max.resize(sz);
        g->internal_min.resize(sz);
        g->internal_mid.resize(sz);
        g->internal_max.resize(sz);
        g->placement.resize(sz);
    }

    // Pooled pass: overall ranks and cross-group tie counts.
    std::vector<Tagged> pooled;
    pooled.reserve(n);
    for (std::size_t k = 0; k < n1; ++k) pooled.push_back({sample.group1[k], 0, k});
    for (std::size_t k = 0; k < n2; ++k) pooled.push_back({sample.group2[k], 1, k});
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && pooled[j].value == pooled[i].value) ++j;
            const double rmin = static_cast<double>(i + 1);
            const double rmax = static_cast<double>(j);
            const double rmid = 0.5 * (rmin + rmax);
            long long run1 = 0;
            long long run2 = 0;
            for (std::size_t k = i; k < j; ++k) {
                GroupRanks& g = pooled[k].group == 0 ? t.g1 : t.g2;
                g.overall_min[pooled[k].index] = rmin;
                g.overall_mid[pooled[k].index] = rmid;
                g.overall_max[pooled[k].index] = rmax;
                if (pooled[k].group == 0) ++run1; else ++run2;
            }
            t.tied_cross_pairs += run1 * run2;
            i = j;
        }
    }

    // Per-group pass: internal ranks, then placements.
    for (std::size_t gi = 0; gi < 2; ++gi) {
        const std::vector<double>& values = gi == 0 ? sample.group1 : sample.group2;
        GroupRanks& g = gi == 0 ? t.g1 : t.g2;
        std::vector<Tagged> within;
        within.reserve(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) within.push_back({values[k], gi, k});
        std::stable_sort(within.begin(), within.end(),
                         [](const Tagged& a, const Tagged& b) { return a.value < b.value; });
        assign_tie_runs(within, [&](const Tagged& obs, double rmin, double rmid, double rmax,
                                    std::size_t) {
            g.internal_min[obs.index] = rmin;
            g.internal_mid[obs.index] = rmid;
            g.internal_max[obs.index] = rmax;
        });
        for (std::size_t k = 0; k < values.size(); ++k) {
            g.placement[k] = g.overall_mid[k] - g.internal_mid[k];
        }
    }

    return t;
}

}  // namespace mwvar
