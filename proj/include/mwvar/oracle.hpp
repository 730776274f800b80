#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mwvar/estimators.hpp"
#include "mwvar/rational.hpp"
#include "mwvar/sample.hpp"

namespace mwvar {
namespace oracle {

/// Everything recomputed by explicit nested loops over the counting
/// statistics, with no ranking shortcut. The unbiased estimator is obtained
/// through the count-sum identity sigma = theta^2 - d / d_N, a different
/// algebraic route than the placement form.
struct BruteResult {
    EffectSummary summary;
    VarianceEstimates estimates;
    CountSums sums;
};

BruteResult brute_estimators(const TwoSample& sample);

/// Finite two-point-mass-list pair with exact rational probabilities.
struct FiniteDistPair {
    std::vector<double> support1;
    std::vector<double> support2;
    std::vector<Rational> probs1;
    std::vector<Rational> probs2;

    void validate() const;
};

struct ExactGroundTruth {
    Rational theta;
    Rational sigma1_sq;
    Rational sigma2_sq;
    Rational tau;

    Rational sigma_n_sq(std::size_t n1, std::size_t n2) const;
};

ExactGroundTruth exact_ground_truth(const FiniteDistPair& dist);

struct ExactExpectation {
    Rational expected_sigma_n_sq;
    Rational sigma_n_sq_true;
    std::size_t n1 = 0;
    std::size_t n2 = 0;

    bool equal() const { return expected_sigma_n_sq == sigma_n_sq_true; }
};

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EstimatorId { N, SHS, DL, PM, HM };
EstimatorId estimator_from_string(const std::string& s);
std::string to_string(EstimatorId id);

/// Enumerates every outcome (as value multisets with multinomial weights)
/// and accumulates E[sigma_n_sq] in exact rational arithmetic. Throws
/// BudgetExceeded when |S1|^n1 * |S2|^n2 exceeds the outcome budget.
ExactExpectation exact_unbiasedness(const FiniteDistPair& dist, std::size_t n1,
                                    std::size_t n2, double budget = 1e7);

/// E[estimator] - sigma_n_sq_true by the same enumeration.
Rational exact_bias(const FiniteDistPair& dist, std::size_t n1, std::size_t n2,
                    EstimatorId estimator, double budget = 1e7);

/// Exhaustive search over grid-valued samples for the largest
/// sigma_n_sq / (theta(1-theta)/(m-1)) ratio.
struct BoundSearchResult {
    std::vector<double> group1;
    std::vector<double> group2;
    double ratio = 0.0;
    double sigma_n_sq = 0.0;
    double bound = 0.0;
};

BoundSearchResult bound_search(std::size_t n1, std::size_t n2,
                               const std::vector<double>& grid);

/// Named enumeration fixtures used by the CLI and the test suites.
FiniteDistPair fixture(const std::string& name);
std::vector<std::string> fixture_names();

}  // namespace oracle
}  // namespace mwvar
