#pragma once

#include <cstdint>
#include <utility>

#include "mwvar/rank.hpp"
#include "mwvar/sample.hpp"

namespace mwvar {

/// Point estimates shared by every variance estimator: the two-sample effect
/// theta_hat = P(X1 < X2) + P(X1 = X2)/2, the cross-group tie probability
/// estimate tau_hat, and the placement sums of squares Q1^2, Q2^2.
struct EffectSummary {
    double theta_hat = 0.0;
    double tau_hat = 0.0;
    double q1_sq = 0.0;
    double q2_sq = 0.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

/// The variance-estimator family for Var(theta_hat).
///   sigma_n_sq    unbiased placement estimator (Bamber 1975), valid with ties
///   sigma_shs_sq  Sen-Hilgers-Shirahata with mid-ranks, returned unclipped
///                 (can go negative under ties)
///   sigma_dl_sq   DeLong et al. (1988)
///   sigma_pm_sq   Perme-Manevski (2019), with plug-in theta_hat
///   sigma_hm_sq   Hanley-McNeil (1982) exponential-model plug-in
struct VarianceEstimates {
    double sigma_n_sq = 0.0;
    double sigma_shs_sq = 0.0;
    double sigma_dl_sq = 0.0;
    double sigma_pm_sq = 0.0;
    double sigma_hm_sq = 0.0;
};

/// Sums of products of counting statistics over cross-group pairs.
/// a: sum of c^2 over pairs; b/c: same-column / same-row cross products;
/// d: fully distinct index products; e = n1*n2*theta_hat; f = n1*n2*tau_hat.
/// Satisfies a + b + c + d = e^2 and a = e - f/4.
struct CountSums {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double e = 0.0;
    double f = 0.0;
    long long d_n = 0;  // n1(n1-1)n2(n2-1)
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
};

EffectSummary effect_summary(const RankTables& tables);
inline EffectSummary effect_summary(const TwoSample& sample) {
    return effect_summary(rank_tables(sample));
}

double theta_hat(const TwoSample& sample);
double tau_hat(const TwoSample& sample);
std::pair<double, double> q_forms(const RankTables& tables);

/// The five Table-style estimators from one summary.
VarianceEstimates variance_estimates(const EffectSummary& s);

struct EstimateResult {
    EffectSummary summary;
    VarianceEstimates estimates;
};

/// Summary plus all five estimators in one pass over the rank tables. The
/// unbiased and SHS estimators use exact integer accumulation whenever it
/// fits 64 bits, so their sign and tie-degeneracy identities are exact.
EstimateResult estimate_all(const TwoSample& sample);
EstimateResult estimate_all(const RankTables& tables);

double sigma_n_sq(const TwoSample& sample);
double sigma_shs_sq(const TwoSample& sample);
double sigma_dl_sq(const TwoSample& sample);
double sigma_pm_sq(const TwoSample& sample);
double sigma_hm_sq(const TwoSample& sample);

/// Hanley-McNeil variance as a function of (theta, n1, n2) alone.
double hanley_mcneil_variance(double theta, std::size_t n1, std::size_t n2);

/// Sharp upper bound theta_hat(1-theta_hat)/(min(n1,n2)-1) for sigma_n_sq.
double sigma_n_sq_upper_bound(const EffectSummary& s);

CountSums count_sums(const TwoSample& sample);
CountSums count_sums(const RankTables& tables);

/// theta_hat +/- z * sqrt(sigma_hat_sq), intersected with [0,1].
ConfidenceInterval wald_ci(double theta, double sigma_sq, double level);

}  // namespace mwvar
