#include "mwvar/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mwvar/counting.hpp"

namespace mwvar {
namespace oracle {

BruteResult brute_estimators(const TwoSample& sample) {
    require_min_group_size(sample, 2);
    const std::size_t n1 = sample.n1();
    const std::size_t n2 = sample.n2();
    const auto& x = sample.group1;
    const auto& y = sample.group2;
    const double n1d = static_cast<double>(n1);
    const double n2d = static_cast<double>(n2);

    double e = 0.0;
    double f = 0.0;
    double a = 0.0;
    for (std::size_t r = 0; r < n1; ++r) {
        for (std::size_t k = 0; k < n2; ++k) {
            const double c = count(x[r], y[k]);
            e += c;
            a += c * c;
            f += count_plus(x[r], y[k]) - count_minus(x[r], y[k]);
        }
    }

    double b = 0.0;
    for (std::size_t k = 0; k < n2; ++k) {
        for (std::size_t r = 0; r < n1; ++r) {
            for (std::size_t r2 = 0; r2 < n1; ++r2) {
                if (r2 == r) continue;
                b += count(x[r], y[k]) * count(x[r2], y[k]);
            }
        }
    }
    double c_sum = 0.0;
    for (std::size_t k = 0; k < n2; ++k) {
        for (std::size_t k2 = 0; k2 < n2; ++k2) {
            if (k2 == k) continue;
            for (std::size_t r = 0; r < n1; ++r) {
                c_sum += count(x[r], y[k]) * count(x[r], y[k2]);
            }
        }
    }
    double d = 0.0;
    for (std::size_t k = 0; k < n2; ++k) {
        for (std::size_t k2 = 0; k2 < n2; ++k2) {
            if (k2 == k) continue;
            for (std::size_t r = 0; r < n1; ++r) {
                for (std::size_t r2 = 0; r2 < n1; ++r2) {
                    if (r2 == r) continue;
                    d += count(x[r], y[k]) * count(x[r2], y[k2]);
                }
            }
        }
    }

    // Placements by definition sums.
    std::vector<double> place1(n1, 0.0);
    std::vector<double> place2(n2, 0.0);
    for (std::size_t r = 0; r < n1; ++r) {
        for (std::size_t k = 0; k < n2; ++k) place1[r] += count(y[k], x[r]);
    }
    for (std::size_t k = 0; k < n2; ++k) {
        for (std::size_t r = 0; r < n1; ++r) place2[k] += count(x[r], y[k]);
    }
    auto q_of = [](const std::vector<double>& p) {
        double mean = 0.0;
        for (double v : p) mean += v;
        mean /= static_cast<double>(p.size());
        double q = 0.0;
        for (double v : p) q += (v - mean) * (v - mean);
        return q;
    };
    const double q1 = q_of(place1);
    const double q2 = q_of(place2);

    BruteResult out;
    out.summary.n1 = n1;
    out.summary.n2 = n2;
    out.summary.theta_hat = e / (n1d * n2d);
    out.summary.tau_hat = f / (n1d * n2d);
    out.summary.q1_sq = q1;
    out.summary.q2_sq = q2;

    out.sums.a = a;
    out.sums.b = b;
    out.sums.c = c_sum;
    out.sums.d = d;
    out.sums.e = e;
    out.sums.f = f;
    out.sums.d_n = static_cast<long long>(n1) * (n1 - 1) * n2 * (n2 - 1);

    const double dn = static_cast<double>(out.sums.d_n);
    const double theta = out.summary.theta_hat;
    out.estimates.sigma_n_sq = theta * theta - d / dn;
    out.estimates.sigma_shs_sq = (q1 + q2 - n1d * n2d * theta * (1.0 - theta)) / dn;
    out.estimates.sigma_dl_sq = ((1.0 - 1.0 / n2d) * q1 + (1.0 - 1.0 / n1d) * q2) / dn;
    const double w1 = 1.0 - 1.0 / n2d;
    const double w2 = 1.0 - 1.0 / n1d;
    out.estimates.sigma_pm_sq =
        (w1 * w1 * q1 + w2 * w2 * q2 + (n1d - 1.0) * (n2d - 1.0) * theta * (1.0 - theta)) / dn;
    out.estimates.sigma_hm_sq = hanley_mcneil_variance(theta, n1, n2);
    return out;
}

// ------------------------------------------------------------ exact algebra

void FiniteDistPair::validate() const {
    auto check = [](const std::vector<double>& support, const std::vector<Rational>& probs) {
        if (support.size() != probs.size() || support.empty()) {
            throw std::invalid_argument("FiniteDistPair: support/probs size mismatch");
        }
        for (std::size_t i = 1; i < support.size(); ++i) {
            if (!(support[i] > support[i - 1])) {
                throw std::invalid_argument("FiniteDistPair: support must be strictly increasing");
            }
        }
        Rational total(0);
        for (const Rational& p : probs) {
            if (!(p > Rational(0))) {
                throw std::invalid_argument("FiniteDistPair: probabilities must be positive");
            }
            total += p;
        }
        if (total != Rational(1)) {
            throw std::invalid_argument("FiniteDistPair: probabilities must sum to exactly 1");
        }
    };
    check(support1, probs1);
    check(support2, probs2);
}

namespace {

int twice_count(double x, double y) {
    if (x > y) return 0;
    if (x < y) return 2;
    return 1;
}

// Normalized CDF (F+ + F-)/2 of a finite distribution, evaluated at x.
Rational normalized_cdf(const std::vector<double>& support, const std::vector<Rational>& probs,
                        double x) {
    Rational below(0);
    Rational at(0);
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (support[i] < x) below += probs[i];
        if (support[i] == x) at = probs[i];
    }
    return below + at / Rational(2);
}

}  // namespace

ExactGroundTruth exact_ground_truth(const FiniteDistPair& dist) {
    dist.validate();
    ExactGroundTruth gt;
    gt.theta = Rational(0);
    Rational m2(0);
    for (std::size_t j = 0; j < dist.support2.size(); ++j) {
        const Rational f = normalized_cdf(dist.support1, dist.probs1, dist.support2[j]);
        gt.theta += dist.probs2[j] * f;
        m2 += dist.probs2[j] * f * f;
    }
    Rational m1(0);
    for (std::size_t i = 0; i < dist.support1.size(); ++i) {
        const Rational f = normalized_cdf(dist.support2, dist.probs2, dist.support1[i]);
        m1 += dist.probs1[i] * f * f;
    }
    gt.sigma2_sq = m2 - gt.theta * gt.theta;
    const Rational one_minus = Rational(1) - gt.theta;
    gt.sigma1_sq = m1 - one_minus * one_minus;
    gt.tau = Rational(0);
    for (std::size_t i = 0; i < dist.support1.size(); ++i) {
        for (std::size_t j = 0; j < dist.support2.size(); ++j) {
            if (dist.support1[i] == dist.support2[j]) gt.tau += dist.probs1[i] * dist.probs2[j];
        }
    }
    return gt;
}

Rational ExactGroundTruth::sigma_n_sq(std::size_t n1, std::size_t n2) const {
    const Rational n1r(static_cast<long long>(n1));
    const Rational n2r(static_cast<long long>(n2));
    return ((n2r - Rational(1)) * sigma1_sq + (n1r - Rational(1)) * sigma2_sq +
            theta * (Rational(1) - theta) - tau / Rational(4)) /
           (n1r * n2r);
}

namespace {

struct OutcomeEstimates {
    Rational sigma_n;
    Rational sigma_shs;
    Rational sigma_dl;
    Rational sigma_pm;
    Rational sigma_hm;
};

// Estimators evaluated exactly on one outcome given per-support-point
// multiplicities. Placements are computed from the counts, so the cost is
// O(|S1| * |S2|) per outcome.
OutcomeEstimates outcome_estimates(const FiniteDistPair& dist, const std::vector<int>& m1,
                                   const std::vector<int>& m2, std::size_t n1, std::size_t n2) {
    const std::size_t s1 = dist.support1.size();
    const std::size_t s2 = dist.support2.size();
    const long long n1i = static_cast<long long>(n1);
    const long long n2i = static_cast<long long>(n2);
    const long long n1n2 = n1i * n2i;

    // t1[i] = 2 * placement of a group-1 observation at support1[i], etc.
    std::vector<long long> t1(s1, 0);
    std::vector<long long> t2(s2, 0);
    long long e2 = 0;
    long long f = 0;
    for (std::size_t i = 0; i < s1; ++i) {
        for (std::size_t j = 0; j < s2; ++j) {
            if (m1[i] == 0 || m2[j] == 0) continue;
            const int tc = twice_count(dist.support1[i], dist.support2[j]);
            t1[i] += static_cast<long long>(2 - tc) * m2[j];
            t2[j] += static_cast<long long>(tc) * m1[i];
            e2 += static_cast<long long>(tc) * m1[i] * m2[j];
            if (dist.support1[i] == dist.support2[j]) {
                f += static_cast<long long>(m1[i]) * m2[j];
            }
        }
    }

    auto q_form = [](const std::vector<long long>& t, const std::vector<int>& mult,
                     long long n) {
        long long total = 0;
        for (std::size_t i = 0; i < t.size(); ++i) total += t[i] * mult[i];
        // Q^2 = sum_k (t_k/2 - T/(2n))^2 = (1/(4n^2)) sum_k (n t_k - T)^2
        Rational q(0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (mult[i] == 0) continue;
            const long long dvi = n * t[i] - total;
            q += Rational(dvi * dvi) * Rational(mult[i]);
        }
        return q / Rational(4 * n * n);
    };

    const Rational q1 = q_form(t1, m1, n1i);
    const Rational q2 = q_form(t2, m2, n2i);
    const Rational theta(e2, 2 * n1n2);
    const Rational tau(f, n1n2);
    const Rational dn(n1i * (n1i - 1) * n2i * (n2i - 1));
    const Rational n1n2r(n1n2);
    const Rational one(1);

    OutcomeEstimates out;
    const Rational core = q1 + q2 - n1n2r * theta * (one - theta);
    out.sigma_shs = core / dn;
    out.sigma_n = (core + n1n2r * tau / Rational(4)) / dn;
    const Rational w1 = one - Rational(1, n2i);
    const Rational w2 = one - Rational(1, n1i);
    out.sigma_dl = (w1 * q1 + w2 * q2) / dn;
    out.sigma_pm =
        (w1 * w1 * q1 + w2 * w2 * q2 + Rational((n1i - 1) * (n2i - 1)) * theta * (one - theta)) /
        dn;
    out.sigma_hm = theta * (one - theta) / n1n2r *
                   (one + Rational(n2i - 1) * (one - theta) / (Rational(2) - theta) +
                    Rational(n1i - 1) * theta / (one + theta));
    return out;
}

long long factorial(int n) {
    long long r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

Rational multinomial_weight(const std::vector<int>& counts, const std::vector<Rational>& probs,
                            int n) {
    long long coeff = factorial(n);
    for (int c : counts) coeff /= factorial(c);
    Rational w(coeff);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (int k = 0; k < counts[i]; ++k) w *= probs[i];
    }
    return w;
}

// All multiplicity vectors of length `slots` summing to n.
void for_each_composition(int n, int slots, std::vector<int>& counts,
                          const std::function<void(const std::vector<int>&)>& fn,
                          int pos = 0) {
    if (pos == slots - 1) {
        counts[pos] = n;
        fn(counts);
        return;
    }
    for (int c = 0; c <= n; ++c) {
        counts[pos] = c;
        for_each_composition(n - c, slots, counts, fn, pos + 1);
    }
}

void check_budget(const FiniteDistPair& dist, std::size_t n1, std::size_t n2, double budget) {
    const double outcomes = std::pow(static_cast<double>(dist.support1.size()),
                                     static_cast<double>(n1)) *
                            std::pow(static_cast<double>(dist.support2.size()),
                                     static_cast<double>(n2));
    if (outcomes > budget) {
        throw BudgetExceeded("enumeration budget exceeded: " + std::to_string(outcomes) +
                             " outcomes > budget " + std::to_string(budget));
    }
}

Rational enumerate_expectation(const FiniteDistPair& dist, std::size_t n1, std::size_t n2,
                               EstimatorId id, double budget) {
    dist.validate();
    if (n1 < 2 || n2 < 2) {
        throw std::invalid_argument("insufficient sample size: enumeration needs n1, n2 >= 2");
    }
    check_budget(dist, n1, n2, budget);

    // Pre-tabulate the group-1 multisets so the group-2 loop reuses them.
    struct Weighted {
        std::vector<int> counts;
        Rational weight;
    };
    std::vector<Weighted> outer;
    {
        std::vector<int> counts(dist.support1.size(), 0);
        for_each_composition(static_cast<int>(n1), static_cast<int>(dist.support1.size()), counts,
                             [&](const std::vector<int>& c) {
                                 outer.push_back({c, multinomial_weight(c, dist.probs1,
                                                                        static_cast<int>(n1))});
                             });
    }

    Rational expectation(0);
    std::vector<int> counts2(dist.support2.size(), 0);
    for_each_composition(
        static_cast<int>(n2), static_cast<int>(dist.support2.size()), counts2,
        [&](const std::vector<int>& c2) {
            const Rational w2 = multinomial_weight(c2, dist.probs2, static_cast<int>(n2));
            for (const Weighted& o : outer) {
                const OutcomeEstimates est = outcome_estimates(dist, o.counts, c2, n1, n2);
                const Rational* value = nullptr;
                switch (id) {
                    case EstimatorId::N: value = &est.sigma_n; break;
                    case EstimatorId::SHS: value = &est.sigma_shs; break;
                    case EstimatorId::DL: value = &est.sigma_dl; break;
                    case EstimatorId::PM: value = &est.sigma_pm; break;
                    case EstimatorId::HM: value = &est.sigma_hm; break;
                }
                expectation += o.weight * w2 * (*value);
            }
        });
    return expectation;
}

}  // namespace

EstimatorId estimator_from_string(const std::string& s) {
    if (s == "N") return EstimatorId::N;
    if (s == "SHS") return EstimatorId::SHS;
    if (s == "DL") return EstimatorId::DL;
    if (s == "PM") return EstimatorId::PM;
    if (s == "HM") return EstimatorId::HM;
    throw std::invalid_argument("unknown estimator id '" + s + "'");
}

std::string to_string(EstimatorId id) {
    switch (id) {
        case EstimatorId::N: return "N";
        case EstimatorId::SHS: return "SHS";
        case EstimatorId::DL: return "DL";
        case EstimatorId::PM: return "PM";
        case EstimatorId::HM: return "HM";
    }
    return "?";
}

ExactExpectation exact_unbiasedness(const FiniteDistPair& dist, std::size_t n1, std::size_t n2,
                                    double budget) {
    ExactExpectation out;
    out.n1 = n1;
    out.n2 = n2;
    out.expected_sigma_n_sq = enumerate_expectation(dist, n1, n2, EstimatorId::N, budget);
    out.sigma_n_sq_true = exact_ground_truth(dist).sigma_n_sq(n1, n2);
    return out;
}

Rational exact_bias(const FiniteDistPair& dist, std::size_t n1, std::size_t n2,
                    EstimatorId estimator, double budget) {
    const Rational expectation = enumerate_expectation(dist, n1, n2, estimator, budget);
    return expectation - exact_ground_truth(dist).sigma_n_sq(n1, n2);
}

// --------------------------------------------------------------- bound search

namespace {

void for_each_multiset(const std::vector<double>& grid, std::size_t n,
                       std::vector<double>& current,
                       const std::function<void(const std::vector<double>&)>& fn,
                       std::size_t from = 0) {
    if (current.size() == n) {
        fn(current);
        return;
    }
    for (std::size_t i = from; i < grid.size(); ++i) {
        current.push_back(grid[i]);
        for_each_multiset(grid, n, current, fn, i);
        current.pop_back();
    }
}

}  // namespace

BoundSearchResult bound_search(std::size_t n1, std::size_t n2, const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("bound_search: empty grid");
    BoundSearchResult best;
    best.ratio = -1.0;
    std::vector<double> g1;
    std::vector<double> g2;
    for_each_multiset(grid, n1, g1, [&](const std::vector<double>& a) {
        for_each_multiset(grid, n2, g2, [&](const std::vector<double>& b) {
            const TwoSample sample(a, b);
            const EffectSummary s = effect_summary(sample);
            const VarianceEstimates v = variance_estimates(s);
            const double denom = sigma_n_sq_upper_bound(s);
            const double ratio = denom > 0.0 ? v.sigma_n_sq / denom : 0.0;
            if (ratio > best.ratio) {
                best.ratio = ratio;
                best.group1 = a;
                best.group2 = b;
                best.sigma_n_sq = v.sigma_n_sq;
                best.bound = denom;
            }
        });
    });
    return best;
}

// -------------------------------------------------------------------- fixtures

FiniteDistPair fixture(const std::string& name) {
    const Rational h(1, 2);
    const Rational q(1, 4);
    const Rational t(1, 3);
    if (name == "bernoulli_half") {
        return {{0.0, 1.0}, {0.0, 1.0}, {h, h}, {h, h}};
    }
    if (name == "bernoulli_skew") {
        return {{0.0, 1.0}, {0.0, 1.0}, {h, h}, {q, Rational(3, 4)}};
    }
    if (name == "three_point") {
        return {{0.0, 1.0, 2.0}, {0.0, 1.0, 2.0}, {h, q, q}, {q, q, h}};
    }
    if (name == "three_point_shift") {
        return {{0.0, 1.0, 2.0}, {1.0, 2.0, 3.0}, {t, t, t}, {t, t, t}};
    }
    if (name == "point_mass") {
        return {{5.0}, {5.0}, {Rational(1)}, {Rational(1)}};
    }
    if (name == "separated") {
        return {{0.0, 1.0}, {5.0, 6.0}, {h, h}, {h, h}};
    }
    throw std::invalid_argument("unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() {
    return {"bernoulli_half", "bernoulli_skew", "three_point",
            "three_point_shift", "point_mass", "separated"};
}

}  // namespace oracle
}  // namespace mwvar
