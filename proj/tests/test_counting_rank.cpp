#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mwvar/counting.hpp"
#include "mwvar/estimators.hpp"
#include "mwvar/rank.hpp"
#include "test_util.hpp"

using namespace mwvar;

TEST_SUITE("counting") {
    TEST_CASE("basic values") {
        CHECK(count(1, 2) == 1.0);
        CHECK(count(2, 2) == 0.5);
        CHECK(count(3, 1) == 0.0);
    }

    TEST_CASE("one-sided versions") {
        CHECK(count_plus(2, 2) == 1);
        CHECK(count_minus(2, 2) == 0);
        CHECK(count_plus(1, 2) == 1);
        CHECK(count_minus(1, 2) == 1);
        CHECK(count_plus(3, 1) == 0);
        CHECK(count_minus(3, 1) == 0);
    }

    TEST_CASE("half-sum identity on random pairs") {
        StreamRng rng(42, 0, 0);
        for (int i = 0; i < 2000; ++i) {
            // coarse grid makes exact ties frequent
            const double x = static_cast<double>(static_cast<int>(rng.next_unit() * 6.0));
            const double y = static_cast<double>(static_cast<int>(rng.next_unit() * 6.0));
            CHECK(count(x, y) == 0.5 * (count_plus(x, y) + count_minus(x, y)));
        }
    }

    TEST_CASE("non-finite input rejected") {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const double inf = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(count(nan, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(count(1.0, inf), std::invalid_argument);
        CHECK_THROWS_AS(count_plus(nan, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(count_minus(1.0, -inf), std::invalid_argument);
    }
}

TEST_SUITE("ranks") {
    TEST_CASE("midranks with a tie pair") {
        const std::vector<double> pooled{3, 1, 4, 1};
        const std::vector<double> expected{3.0, 1.5, 4.0, 1.5};
        CHECK(midranks(pooled) == expected);
    }

    TEST_CASE("placements of the tied counter-example") {
        const TwoSample s({1, 1, 2, 2, 3}, {3, 4, 4, 4, 5});
        const RankTables t = rank_tables(s);
        CHECK(t.g1.placement == std::vector<double>{0, 0, 0, 0, 0.5});
        CHECK(t.g2.placement == std::vector<double>{4.5, 5, 5, 5, 5});
        CHECK(t.tied_cross_pairs == 1);
    }

    TEST_CASE("placements under full separation") {
        const TwoSample s({1, 2}, {3, 4});
        const RankTables t = rank_tables(s);
        CHECK(t.g1.placement == std::vector<double>{0, 0});
        CHECK(t.g2.placement == std::vector<double>{2, 2});
    }

    TEST_CASE("rank-table invariants on random tied samples") {
        StreamRng rng(7, 1, 0);
        for (int i = 0; i < 300; ++i) {
            StreamRng sample_rng(7, 2, static_cast<std::uint64_t>(i));
            const TwoSample s =
                testutil::random_sample(sample_rng, testutil::style_for(i), 2, 12);
            const RankTables t = rank_tables(s);
            const double n1 = static_cast<double>(t.n1);
            const double n2 = static_cast<double>(t.n2);
            const double n = n1 + n2;

            double mid_sum = 0.0;
            for (std::size_t g = 0; g < 2; ++g) {
                const GroupRanks& gr = g == 0 ? t.g1 : t.g2;
                const double other = g == 0 ? n2 : n1;
                for (std::size_t k = 0; k < gr.overall_mid.size(); ++k) {
                    CHECK(gr.overall_mid[k] ==
                          0.5 * (gr.overall_min[k] + gr.overall_max[k]));
                    CHECK(gr.internal_mid[k] ==
                          0.5 * (gr.internal_min[k] + gr.internal_max[k]));
                    CHECK(gr.placement[k] >= 0.0);
                    CHECK(gr.placement[k] <= other);
                    mid_sum += gr.overall_mid[k];
                }
            }
            CHECK(mid_sum == n * (n + 1.0) / 2.0);

            const double p1 = std::accumulate(t.g1.placement.begin(), t.g1.placement.end(), 0.0);
            const double p2 = std::accumulate(t.g2.placement.begin(), t.g2.placement.end(), 0.0);
            CHECK(p1 + p2 == n1 * n2);
        }
    }

    TEST_CASE("placement equals scaled empirical distribution function") {
        StreamRng rng(11, 0, 0);
        for (int i = 0; i < 200; ++i) {
            StreamRng sample_rng(11, 1, static_cast<std::uint64_t>(i));
            const TwoSample s =
                testutil::random_sample(sample_rng, testutil::style_for(i), 2, 10);
            const RankTables t = rank_tables(s);
            for (std::size_t l = 0; l < s.n2(); ++l) {
                double edf = 0.0;  // n1 * normalized EDF of group 1 at X_2l
                for (double x : s.group1) edf += count(x, s.group2[l]);
                CHECK(std::abs(t.g2.placement[l] - edf) <= 1e-12);
            }
        }
    }

    TEST_CASE("mean-placement identity ties the two theta representations") {
        StreamRng rng(13, 0, 0);
        for (int i = 0; i < 200; ++i) {
            StreamRng sample_rng(13, 1, static_cast<std::uint64_t>(i));
            const TwoSample s =
                testutil::random_sample(sample_rng, testutil::style_for(i), 1, 10);
            const RankTables t = rank_tables(s);
            const double n1 = static_cast<double>(t.n1);
            const double n2 = static_cast<double>(t.n2);
            const double n = n1 + n2;
            const double mean_p2 =
                std::accumulate(t.g2.placement.begin(), t.g2.placement.end(), 0.0) / n2;
            const double mean_r1 =
                std::accumulate(t.g1.overall_mid.begin(), t.g1.overall_mid.end(), 0.0) / n1;
            const double mean_r2 =
                std::accumulate(t.g2.overall_mid.begin(), t.g2.overall_mid.end(), 0.0) / n2;
            const double lhs = mean_p2 / n1;
            const double rhs = (mean_r2 - mean_r1) / n + 0.5;
            CHECK(std::abs(lhs - rhs) <= 1e-12);
            CHECK(std::abs(lhs - theta_hat(s)) <= 1e-12);
        }
    }

    TEST_CASE("permutation within a group permutes placements identically") {
        StreamRng rng(17, 0, 0);
        const TwoSample s({2, 1, 1, 3, 2}, {2, 2, 4, 1, 3});
        const RankTables base = rank_tables(s);

        std::vector<std::size_t> perm{3, 0, 4, 1, 2};
        std::vector<double> g1p(5);
        for (std::size_t i = 0; i < 5; ++i) g1p[i] = s.group1[perm[i]];
        const RankTables permuted = rank_tables(TwoSample(g1p, s.group2));

        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(permuted.g1.placement[i] == base.g1.placement[perm[i]]);
        }
        CHECK(permuted.g2.placement == base.g2.placement);
        const double sum_base =
            std::accumulate(base.g1.placement.begin(), base.g1.placement.end(), 0.0);
        const double sum_perm =
            std::accumulate(permuted.g1.placement.begin(), permuted.g1.placement.end(), 0.0);
        CHECK(sum_base == sum_perm);
    }
}
