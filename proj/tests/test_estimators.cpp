#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mwvar/estimators.hpp"
#include "mwvar/rank.hpp"
#include "test_util.hpp"

using namespace mwvar;

namespace {

const TwoSample& counter_example() {
    static const TwoSample s({1, 1, 2, 2, 3}, {3, 4, 4, 4, 5});
    return s;
}

}  // namespace

TEST_SUITE("point estimators") {
    TEST_CASE("theta_hat") {
        CHECK(std::abs(theta_hat(counter_example()) - 0.98) <= 1e-12);
        CHECK(theta_hat(TwoSample({1, 2}, {3, 4})) == 1.0);
        CHECK(theta_hat(TwoSample({1, 2, 3}, {1, 2, 3})) == 0.5);
    }

    TEST_CASE("tau_hat") {
        CHECK(std::abs(tau_hat(counter_example()) - 0.04) <= 1e-12);
        CHECK(tau_hat(TwoSample({1, 2}, {3, 4})) == 0.0);
        CHECK(tau_hat(TwoSample({1}, {1})) == 1.0);
    }

    TEST_CASE("tau_hat counts tied cross pairs") {
        for (int i = 0; i < 300; ++i) {
            StreamRng rng(23, 0, static_cast<std::uint64_t>(i));
            const TwoSample s =
                testutil::random_sample(rng, testutil::SampleStyle::heavily_tied, 1, 12);
            long long tied = 0;
            for (double x : s.group1) {
                for (double y : s.group2) tied += x == y ? 1 : 0;
            }
            const double expected =
                static_cast<double>(tied) / (static_cast<double>(s.n1()) * s.n2());
            CHECK(std::abs(tau_hat(s) - expected) <= 1e-12);
        }
    }

    TEST_CASE("q forms") {
        const auto [q1, q2] = q_forms(rank_tables(counter_example()));
        CHECK(std::abs(q1 - 0.2) <= 1e-12);
        CHECK(std::abs(q2 - 0.2) <= 1e-12);

        const auto [s1, s2] = q_forms(rank_tables(TwoSample({1, 2}, {3, 4})));
        CHECK(s1 == 0.0);
        CHECK(s2 == 0.0);

        const auto [b1, b2] = q_forms(rank_tables(TwoSample({1, 4}, {2, 3})));
        CHECK(b1 == 2.0);
        CHECK(b2 == 0.0);
    }
}

TEST_SUITE("variance estimators") {
    TEST_CASE("tied counter-example values") {
        CHECK(std::abs(sigma_n_sq(counter_example()) - 0.0004) <= 1e-12);
        CHECK(std::abs(sigma_shs_sq(counter_example()) - (-0.000225)) <= 1e-12);
        CHECK(std::abs(sigma_dl_sq(counter_example()) - 0.0008) <= 1e-12);
        CHECK(std::abs(sigma_pm_sq(counter_example()) - 0.001424) <= 1e-12);
    }

    TEST_CASE("full separation collapses every estimator") {
        const TwoSample s({1, 2}, {3, 4});
        CHECK(sigma_n_sq(s) == 0.0);
        CHECK(sigma_shs_sq(s) == 0.0);
        CHECK(sigma_dl_sq(s) == 0.0);
        CHECK(sigma_pm_sq(s) == 0.0);
        CHECK(sigma_hm_sq(s) == 0.0);
    }

    TEST_CASE("reversed separation collapses too") {
        const TwoSample s({3, 4}, {1, 2});
        CHECK(theta_hat(s) == 0.0);
        CHECK(sigma_n_sq(s) == 0.0);
    }

    TEST_CASE("sharp upper bound attained") {
        const TwoSample s({1, 4}, {2, 3});
        const EffectSummary sum = effect_summary(s);
        CHECK(sum.theta_hat == 0.5);
        CHECK(sigma_n_sq(s) == 0.25);
        CHECK(sigma_n_sq_upper_bound(sum) == 0.25);
        CHECK(sigma_dl_sq(s) == 0.25);
    }

    TEST_CASE("perme-manevski on identical constant samples") {
        const TwoSample s({1, 1}, {1, 1});
        CHECK(std::abs(sigma_pm_sq(s) - 0.0625) <= 1e-15);
    }

    TEST_CASE("hanley-mcneil closed form") {
        CHECK(std::abs(hanley_mcneil_variance(0.5, 10, 10) - 0.0175) <= 1e-15);
        CHECK(hanley_mcneil_variance(0.0, 7, 9) == 0.0);
        CHECK(hanley_mcneil_variance(1.0, 7, 9) == 0.0);
        // independent substitution at theta = 0.98, n1 = n2 = 5
        const double th = 0.98;
        const double expected = th * (1 - th) / 25.0 *
                                (1.0 + 4.0 * (1 - th) / (2 - th) + 4.0 * th / (1 + th));
        CHECK(std::abs(hanley_mcneil_variance(th, 5, 5) - expected) <= 1e-15);
    }

    TEST_CASE("no ties makes SHS and the unbiased estimator identical") {
        for (int i = 0; i < 200; ++i) {
            StreamRng rng(29, 0, static_cast<std::uint64_t>(i));
            const TwoSample s =
                testutil::random_sample(rng, testutil::SampleStyle::continuous, 2, 20);
            CHECK(sigma_shs_sq(s) == sigma_n_sq(s));
        }
    }

    TEST_CASE("group-size preconditions") {
        CHECK_THROWS_WITH_AS(sigma_n_sq(TwoSample({1.0}, {1, 2})),
                             doctest::Contains("insufficient sample size"),
                             std::invalid_argument);
        CHECK_THROWS_AS(sigma_dl_sq(TwoSample({1, 2}, {3.0})), std::invalid_argument);
        CHECK_THROWS_AS(TwoSample({}, {1.0}), std::invalid_argument);
    }

    TEST_CASE("bounds and identities over a random sweep") {
        for (int i = 0; i < 1000; ++i) {
            StreamRng rng(31, 0, static_cast<std::uint64_t>(i));
            const TwoSample s = testutil::random_sample(rng, testutil::style_for(i), 2, 30);
            const EffectSummary sum = effect_summary(s);
            const VarianceEstimates v = variance_estimates(sum);
            const double m = static_cast<double>(std::min(s.n1(), s.n2()));

            CHECK(v.sigma_n_sq >= 0.0);
            CHECK(v.sigma_n_sq <= sigma_n_sq_upper_bound(sum) + 1e-12);
            CHECK(v.sigma_n_sq <= 0.25 / (m - 1.0) + 1e-12);
            CHECK(v.sigma_dl_sq >= 0.0);
            CHECK(v.sigma_pm_sq >= 0.0);

            const CountSums cs = count_sums(s);
            CHECK(std::abs(v.sigma_n_sq -
                           (sum.theta_hat * sum.theta_hat -
                            cs.d / static_cast<double>(cs.d_n))) <= 1e-12);
            CHECK(cs.a + cs.b + cs.c + cs.d == cs.e * cs.e);
            CHECK(cs.a == cs.e - cs.f / 4.0);
            const double n1 = static_cast<double>(s.n1());
            const double n2 = static_cast<double>(s.n2());
            CHECK(std::abs(cs.e - n1 * n2 * sum.theta_hat) <= 1e-12);
            CHECK(std::abs(cs.f - n1 * n2 * sum.tau_hat) <= 1e-12);
            const double alt = (cs.a + cs.b + cs.c -
                                (n1 + n2 - 1.0) / ((n1 - 1.0) * (n2 - 1.0)) * cs.d) /
                               (n1 * n1 * n2 * n2);
            CHECK(std::abs(v.sigma_n_sq - alt) <= 1e-12);
        }
    }
}

TEST_SUITE("count sums") {
    TEST_CASE("full separation") {
        const CountSums cs = count_sums(TwoSample({1, 2}, {3, 4}));
        CHECK(cs.a == 4.0);
        CHECK(cs.e == 4.0);
        CHECK(cs.f == 0.0);
        CHECK(cs.a + cs.b + cs.c + cs.d == 16.0);
        CHECK(cs.d_n == 4);
    }

    TEST_CASE("reversed separation zeroes the products") {
        const CountSums cs = count_sums(TwoSample({3, 4}, {1, 2}));
        CHECK(cs.a == 0.0);
        CHECK(cs.b == 0.0);
        CHECK(cs.c == 0.0);
        CHECK(cs.d == 0.0);
    }

    TEST_CASE("tied counter-example sums") {
        const CountSums cs = count_sums(counter_example());
        CHECK(cs.e == 24.5);
        CHECK(cs.f == 1.0);
        CHECK(cs.a == 24.25);
    }
}

TEST_SUITE("wald ci") {
    TEST_CASE("zero variance degenerates") {
        const ConfidenceInterval ci = wald_ci(0.5, 0.0, 0.95);
        CHECK(ci.lower == 0.5);
        CHECK(ci.upper == 0.5);
    }

    TEST_CASE("clipping at the parameter range") {
        const ConfidenceInterval ci = wald_ci(1.0, 0.0004, 0.95);
        CHECK(ci.upper == 1.0);
        CHECK(ci.lower < 1.0);
    }

    TEST_CASE("standard normal quantile") {
        const ConfidenceInterval ci = wald_ci(0.98, 0.0004, 0.95);
        CHECK(std::abs(ci.upper - 1.0) <= 1e-9);  // clipped: 0.98 + 1.95996*0.02 > 1
        CHECK(std::abs(ci.lower - (0.98 - 1.959963985 * 0.02)) <= 1e-6);
    }

    TEST_CASE("input validation") {
        CHECK_THROWS_AS(wald_ci(0.5, -1e-9, 0.95), std::invalid_argument);
        CHECK_THROWS_AS(wald_ci(0.5, 0.1, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(wald_ci(0.5, 0.1, 1.0), std::invalid_argument);
    }
}
