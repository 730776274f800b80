#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mwvar/rng.hpp"
#include "mwvar/sample.hpp"

namespace mwvar {

/// One marginal distribution, continuous or finite-discrete. Discrete
/// marginals expose their support and exact probabilities; continuous ones
/// their CDF and quantile. cdf_plus/cdf_minus are the right-/left-continuous
/// versions; the normalized CDF is their mean.
class Marginal {
public:
    static Marginal normal(double mu, double sd);
    static Marginal exponential(double rate);
    static Marginal dmax_f1(double theta);  // mass theta on (0,1), 1-theta on (2,3)
    static Marginal dmax_f2();              // uniform on (1,2)
    static Marginal discrete(std::vector<double> values, std::vector<double> probs);

    bool is_discrete() const;
    double cdf_plus(double x) const;
    double cdf_minus(double x) const;
    double cdf_normalized(double x) const { return 0.5 * (cdf_plus(x) + cdf_minus(x)); }
    /// Generalized inverse of cdf_plus, defined for u in (0,1).
    double quantile(double u) const;
    /// u-values where the quantile has a kink or jump (quadrature hints).
    std::vector<double> quantile_breakpoints() const;

    const std::vector<double>& support() const;  // discrete only
    const std::vector<double>& probs() const;    // discrete only

private:
    struct Normal {
        double mu, sd;
    };
    struct Exponential {
        double rate;
    };
    struct DmaxF1 {
        double theta;
    };
    struct DmaxF2 {};
    struct Discrete {
        std::vector<double> values;
        std::vector<double> probs;
        std::vector<double> cum;
    };
    using Impl = std::variant<Normal, Exponential, DmaxF1, DmaxF2, Discrete>;
    explicit Marginal(Impl impl) : impl_(std::move(impl)) {}
    Impl impl_;
};

/// A named (F1, F2) pair with parameters; id() is a stable label used in
/// CSV output and RNG stream derivation.
struct DistributionSpec {
    std::string name;
    std::map<std::string, double> params;
    Marginal f1;
    Marginal f2;

    std::string id() const;
    bool is_discrete() const { return f1.is_discrete() && f2.is_discrete(); }
};

/// Analytic characteristics of a pair: effect theta, placement-scale
/// variances sigma_i^2, tie mass tau, and derived finite-sample variances.
struct GroundTruth {
    double theta = 0.0;
    double sigma1_sq = 0.0;
    double sigma2_sq = 0.0;
    double tau = 0.0;

    /// Var(theta_hat) at sample sizes (n1, n2).
    double sigma_n_sq(std::size_t n1, std::size_t n2) const;
    /// Asymptotic variance of sqrt(N) theta_hat: N (n2 sigma1^2 + n1 sigma2^2) / (n1 n2).
    double s_n_sq(std::size_t n1, std::size_t n2) const;
};

/// Exact sums for discrete pairs, adaptive quadrature (abs tol 1e-10) for
/// continuous pairs. Mixed pairs are rejected.
GroundTruth ground_truth(const DistributionSpec& spec);

DistributionSpec normal_spec(double delta, double sd1 = 1.0, double sd2 = 1.0);
DistributionSpec normal_spec_from_theta(double theta, double sd1 = 1.0, double sd2 = 1.0);
DistributionSpec exponential_spec(double rate1, double rate2);
DistributionSpec exponential_spec_from_theta(double theta);
DistributionSpec dmax_spec(double theta);
DistributionSpec poisson_spec(double lambda1, double lambda2);
DistributionSpec ordinal5_spec(double a1, double b1, double a2, double b2);
/// Solves for a2 (a1 = 2, b1 = b2 = 15 fixed) so the pair's effect hits theta.
DistributionSpec ordinal5_spec_from_theta(double theta);

/// {"name": ..., "params": {...}} round trip. Accepts the *_theta
/// convenience names and resolves them to concrete parameters.
DistributionSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const DistributionSpec& spec);

/// Closed-form leading bias terms for the DeLong and Perme-Manevski
/// estimators at sample sizes (n1, n2).
double bias_dl(const GroundTruth& gt, std::size_t n1, std::size_t n2);
double bias_pm(const GroundTruth& gt, std::size_t n1, std::size_t n2);

/// Inverse-transform draw of a full two-group sample; consumes exactly
/// n1 + n2 uniforms from the stream, group 1 first.
TwoSample draw_sample(const DistributionSpec& spec, std::size_t n1, std::size_t n2,
                      StreamRng& rng);

}  // namespace mwvar
