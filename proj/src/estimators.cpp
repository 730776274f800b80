#include "mwvar/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mwvar/special.hpp"

namespace mwvar {

namespace {

// Placements are half-integers, so 2*placement is an exact small integer.
// Working in that unit keeps the estimator algebra exact as long as the
// intermediate integers fit; fits_exact() guards the int64 budget.
struct QInt {
    long long g = 0;      // sum over k of (n*t_k - T)^2, t_k = 2*placement_k
    long long t_sum = 0;  // T = sum of t_k
    bool exact = false;
    double q_sq = 0.0;    // G / (4 n^2), or compensated fallback
};

bool fits_exact(double bound) { return bound < 8.0e18; }

QInt q_form_int(const std::vector<double>& placement, std::size_t n_other) {
    QInt r;
    const std::size_t n = placement.size();
    const double nd = static_cast<double>(n);
    const double mo = static_cast<double>(n_other);
    // G <= n * (2 n n_other)^2
    r.exact = fits_exact(4.0 * nd * nd * nd * mo * mo);
    if (r.exact) {
        long long t_sum = 0;
        for (double p : placement) t_sum += std::llround(2.0 * p);
        long long g = 0;
        const long long nn = static_cast<long long>(n);
        for (double p : placement) {
            const long long d = nn * std::llround(2.0 * p) - t_sum;
            g += d * d;
        }
        r.g = g;
        r.t_sum = t_sum;
        r.q_sq = static_cast<double>(g) / (4.0 * nd * nd);
    } else {
        // Neumaier-compensated sum of squared centered placements.
        double mean = 0.0;
        for (double p : placement) mean += p;
        mean /= nd;
        double sum = 0.0;
        double comp = 0.0;
        for (double p : placement) {
            const double d = p - mean;
            const double term = d * d;
            const double t = sum + term;
            comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
            sum = t;
        }
        r.q_sq = sum + comp;
        for (double p : placement) r.t_sum += std::llround(2.0 * p);
    }
    return r;
}

// Cross-group tie count from max/min rank differences: summing
// (overall span) - (internal span) over group 2 counts, for each
// observation, how many opposite-group values tie with it.
long long tie_count_from_ranks(const RankTables& t) {
    long long total = 0;
    for (std::size_t k = 0; k < t.n2; ++k) {
        total += std::llround((t.g2.overall_max[k] - t.g2.overall_min[k]) -
                              (t.g2.internal_max[k] - t.g2.internal_min[k]));
    }
    return total;
}

struct SummaryInts {
    long long e2 = 0;  // 2 * n1 * n2 * theta_hat
    long long f = 0;   // n1 * n2 * tau_hat (tied cross pairs)
    QInt q1;
    QInt q2;
};

SummaryInts summary_ints(const RankTables& t) {
    SummaryInts s;
    s.q1 = q_form_int(t.g1.placement, t.n2);
    s.q2 = q_form_int(t.g2.placement, t.n1);
    s.e2 = s.q2.t_sum;  // sum of 2*placements of group 2
    s.f = tie_count_from_ranks(t);
    return s;
}

}  // namespace

EffectSummary effect_summary(const RankTables& tables) {
    const SummaryInts si = summary_ints(tables);
    const double n1 = static_cast<double>(tables.n1);
    const double n2 = static_cast<double>(tables.n2);
    EffectSummary s;
    s.n1 = tables.n1;
    s.n2 = tables.n2;
    s.theta_hat = static_cast<double>(si.e2) / (2.0 * n1 * n2);
    s.tau_hat = static_cast<double>(si.f) / (n1 * n2);
    s.q1_sq = si.q1.q_sq;
    s.q2_sq = si.q2.q_sq;
    return s;
}

double theta_hat(const TwoSample& sample) {
    return effect_summary(rank_tables(sample)).theta_hat;
}

double tau_hat(const TwoSample& sample) {
    return effect_summary(rank_tables(sample)).tau_hat;
}

std::pair<double, double> q_forms(const RankTables& tables) {
    return {q_form_int(tables.g1.placement, tables.n2).q_sq,
            q_form_int(tables.g2.placement, tables.n1).q_sq};
}

namespace {

VarianceEstimates estimates_from_ints(const SummaryInts& si, std::size_t n1s, std::size_t n2s) {
    const double n1 = static_cast<double>(n1s);
    const double n2 = static_cast<double>(n2s);
    const double dn = n1 * (n1 - 1.0) * n2 * (n2 - 1.0);
    const double theta = static_cast<double>(si.e2) / (2.0 * n1 * n2);
    const double tau = static_cast<double>(si.f) / (n1 * n2);
    const double q1 = si.q1.q_sq;
    const double q2 = si.q2.q_sq;

    VarianceEstimates v;
    // Unbiased estimator and SHS share the scaled-integer numerator
    //   Z = n2^2 G1 + n1^2 G2 - n1 n2 E2 (2 n1 n2 - E2) [+ n1^2 n2^2 F]
    // so that sigma = Z / (4 n1^2 n2^2 d_N). Sign and the no-ties SHS == N
    // identity are then exact.
    const double zbound = 4.0 * n1 * n1 * n1 * n2 * n2 * n2 * (n1 + n2);
    if (si.q1.exact && si.q2.exact && fits_exact(zbound)) {
        const long long n1i = static_cast<long long>(n1s);
        const long long n2i = static_cast<long long>(n2s);
        const long long n1n2 = n1i * n2i;
        const long long z_shs = n2i * n2i * si.q1.g + n1i * n1i * si.q2.g -
                                n1n2 * si.e2 * (2 * n1n2 - si.e2);
        const long long z_n = z_shs + n1n2 * n1n2 * si.f;
        const double scale = 4.0 * n1 * n1 * n2 * n2 * dn;
        v.sigma_n_sq = static_cast<double>(z_n) / scale;
        v.sigma_shs_sq = static_cast<double>(z_shs) / scale;
    } else {
        const double core = q1 + q2 - n1 * n2 * theta * (1.0 - theta);
        v.sigma_shs_sq = core / dn;
        v.sigma_n_sq = (core + n1 * n2 * tau / 4.0) / dn;
        // Rounding residue only; anything larger is a real defect and must surface.
        if (v.sigma_n_sq < 0.0 && v.sigma_n_sq > -1e-12) v.sigma_n_sq = 0.0;
    }

    v.sigma_dl_sq = ((1.0 - 1.0 / n2) * q1 + (1.0 - 1.0 / n1) * q2) / dn;
    const double w1 = 1.0 - 1.0 / n2;
    const double w2 = 1.0 - 1.0 / n1;
    v.sigma_pm_sq = (w1 * w1 * q1 + w2 * w2 * q2 +
                     (n1 - 1.0) * (n2 - 1.0) * theta * (1.0 - theta)) /
                    dn;
    v.sigma_hm_sq = hanley_mcneil_variance(theta, n1s, n2s);
    return v;
}

SummaryInts summary_ints_checked(const TwoSample& sample) {
    require_min_group_size(sample, 2);
    return summary_ints(rank_tables(sample));
}

}  // namespace

VarianceEstimates variance_estimates(const EffectSummary& s) {
    if (s.n1 < 2 || s.n2 < 2) {
        throw std::invalid_argument("insufficient sample size: variance estimation needs n1, n2 >= 2");
    }
    const double n1 = static_cast<double>(s.n1);
    const double n2 = static_cast<double>(s.n2);
    const double dn = n1 * (n1 - 1.0) * n2 * (n2 - 1.0);
    VarianceEstimates v;
    const double core = s.q1_sq + s.q2_sq - n1 * n2 * s.theta_hat * (1.0 - s.theta_hat);
    v.sigma_shs_sq = core / dn;
    v.sigma_n_sq = (core + n1 * n2 * s.tau_hat / 4.0) / dn;
    if (v.sigma_n_sq < 0.0 && v.sigma_n_sq > -1e-12) v.sigma_n_sq = 0.0;
    v.sigma_dl_sq = ((1.0 - 1.0 / n2) * s.q1_sq + (1.0 - 1.0 / n1) * s.q2_sq) / dn;
    const double w1 = 1.0 - 1.0 / n2;
    const double w2 = 1.0 - 1.0 / n1;
    v.sigma_pm_sq = (w1 * w1 * s.q1_sq + w2 * w2 * s.q2_sq +
                     (n1 - 1.0) * (n2 - 1.0) * s.theta_hat * (1.0 - s.theta_hat)) /
                    dn;
    v.sigma_hm_sq = hanley_mcneil_variance(s.theta_hat, s.n1, s.n2);
    return v;
}

EstimateResult estimate_all(const RankTables& tables) {
    if (tables.n1 < 2 || tables.n2 < 2) {
        throw std::invalid_argument("insufficient sample size: variance estimation needs n1, n2 >= 2");
    }
    const SummaryInts si = summary_ints(tables);
    EstimateResult r;
    r.summary.n1 = tables.n1;
    r.summary.n2 = tables.n2;
    const double n1 = static_cast<double>(tables.n1);
    const double n2 = static_cast<double>(tables.n2);
    r.summary.theta_hat = static_cast<double>(si.e2) / (2.0 * n1 * n2);
    r.summary.tau_hat = static_cast<double>(si.f) / (n1 * n2);
    r.summary.q1_sq = si.q1.q_sq;
    r.summary.q2_sq = si.q2.q_sq;
    r.estimates = estimates_from_ints(si, tables.n1, tables.n2);
    return r;
}

EstimateResult estimate_all(const TwoSample& sample) {
    require_min_group_size(sample, 2);
    return estimate_all(rank_tables(sample));
}

double sigma_n_sq(const TwoSample& sample) {
    const SummaryInts si = summary_ints_checked(sample);
    return estimates_from_ints(si, sample.n1(), sample.n2()).sigma_n_sq;
}

double sigma_shs_sq(const TwoSample& sample) {
    const SummaryInts si = summary_ints_checked(sample);
    return estimates_from_ints(si, sample.n1(), sample.n2()).sigma_shs_sq;
}

double sigma_dl_sq(const TwoSample& sample) {
    const SummaryInts si = summary_ints_checked(sample);
    return estimates_from_ints(si, sample.n1(), sample.n2()).sigma_dl_sq;
}

double sigma_pm_sq(const TwoSample& sample) {
    const SummaryInts si = summary_ints_checked(sample);
    return estimates_from_ints(si, sample.n1(), sample.n2()).sigma_pm_sq;
}

double sigma_hm_sq(const TwoSample& sample) {
    return hanley_mcneil_variance(theta_hat(sample), sample.n1(), sample.n2());
}

double hanley_mcneil_variance(double theta, std::size_t n1, std::size_t n2) {
    const double n1d = static_cast<double>(n1);
    const double n2d = static_cast<double>(n2);
    return theta * (1.0 - theta) / (n1d * n2d) *
           (1.0 + (n2d - 1.0) * (1.0 - theta) / (2.0 - theta) +
            (n1d - 1.0) * theta / (1.0 + theta));
}

double sigma_n_sq_upper_bound(const EffectSummary& s) {
    const double m = static_cast<double>(std::min(s.n1, s.n2));
    return s.theta_hat * (1.0 - s.theta_hat) / (m - 1.0);
}

CountSums count_sums(const TwoSample& sample) {
    require_min_group_size(sample, 2);
    return count_sums(rank_tables(sample));
}

CountSums count_sums(const RankTables& t) {
    if (t.n1 < 2 || t.n2 < 2) {
        throw std::invalid_argument("insufficient sample size: count sums need n1, n2 >= 2");
    }
    const SummaryInts si = summary_ints(t);
    const long long n1 = static_cast<long long>(t.n1);
    const long long n2 = static_cast<long long>(t.n2);
    const double n1d = static_cast<double>(n1);
    const double n2d = static_cast<double>(n2);

    CountSums cs;
    cs.d_n = n1 * (n1 - 1) * n2 * (n2 - 1);
    cs.e = static_cast<double>(si.e2) / 2.0;
    cs.f = static_cast<double>(si.f);
    cs.a = cs.e - cs.f / 4.0;

    // b, c, d from the quadratic-form identities
    //   Q2^2 = a + b - S/n2,  Q1^2 = a + c - S/n1,  S = e^2 = a+b+c+d.
    // Every sum is a multiple of 1/4; when the scaled integers fit, the
    // divisions reproduce them exactly in binary floating point.
    const double bound = 4.0 * n1d * n1d * n1d * n1d * n2d * n2d * n2d +
                         4.0 * n2d * n2d * n2d * n2d * n1d * n1d * n1d;
    if (si.q1.exact && si.q2.exact && fits_exact(bound)) {
        // Scaled by u = 4 n1^2 n2^2: u*a = n1^2 n2^2 (2 e2 - f),
        // u*Q2^2 = n1^2 G2, u*(S/n2) = n1^2 n2 e2^2, and symmetrically for c.
        const long long u = 4 * n1 * n1 * n2 * n2;
        const long long a4 = 2 * si.e2 - si.f;  // 4a
        const long long ua = n1 * n1 * n2 * n2 * a4;
        const long long us_n2 = n1 * n1 * n2 * si.e2 * si.e2;  // 4 n1^2 n2^2 * S/n2
        const long long us_n1 = n2 * n2 * n1 * si.e2 * si.e2;  // 4 n1^2 n2^2 * S/n1
        const long long ub2 = n1 * n1 * si.q2.g - ua + us_n2;
        const long long uc2 = n2 * n2 * si.q1.g - ua + us_n1;
        cs.b = static_cast<double>(ub2) / static_cast<double>(u);
        cs.c = static_cast<double>(uc2) / static_cast<double>(u);
        const double s_total = cs.e * cs.e;
        cs.d = s_total - cs.a - cs.b - cs.c;
    } else {
        const double s_total = cs.e * cs.e;
        cs.b = si.q2.q_sq - cs.a + s_total / n2d;
        cs.c = si.q1.q_sq - cs.a + s_total / n1d;
        cs.d = s_total - cs.a - cs.b - cs.c;
    }
    return cs;
}

ConfidenceInterval wald_ci(double theta, double sigma_sq, double level) {
    if (!(sigma_sq >= 0.0)) {
        throw std::invalid_argument("wald_ci: variance must be non-negative");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("wald_ci: level must be in (0,1)");
    }
    const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    const double half = z * std::sqrt(sigma_sq);
    return {std::max(0.0, theta - half), std::min(1.0, theta + half)};
}

}  // namespace mwvar
