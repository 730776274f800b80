#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mwvar/distributions.hpp"
#include "mwvar/oracle.hpp"

namespace mwvar {

struct ExperimentConfig {
    std::string experiment;  // "bias" | "qmse" | "consistency"
    std::vector<DistributionSpec> specs;
    std::size_t n1 = 10;
    std::size_t n2 = 10;
    long long nsim = 100000;
    std::uint64_t seed = 1;
    std::vector<oracle::EstimatorId> estimators;  // default: all five
    std::vector<std::size_t> n_grid;              // consistency: total N per step
};

/// One (spec, sample-size, estimator) cell. mean/variance/se describe the
/// replication stream; bias and qmse are taken against the analytic target
/// (sigma_N^2 for estimator rows, 0 for consistency rows). The identity
/// qmse == (variance + bias^2) / sigma_N^2 holds by construction.
struct ExperimentRow {
    std::string spec_id;
    double theta = 0.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::string estimator;
    double mean = 0.0;
    double bias = 0.0;
    double variance = 0.0;
    double qmse = 0.0;
    double se = 0.0;
    long long nsim = 0;
};

std::vector<ExperimentRow> run_bias(const ExperimentConfig& config, unsigned threads = 1);
std::vector<ExperimentRow> run_qmse(const ExperimentConfig& config, unsigned threads = 1);

struct ConsistencyResult {
    std::vector<ExperimentRow> rows;
    bool decreasing = false;  // monotone decrease of the L2 error up to 2 SE slack
};

/// Estimates E(N sigma_n_hat^2 / s_N^2 - 1)^2 along the N grid with
/// n1 = n2 = N/2. Specs with a degenerate placement variance are rejected.
ConsistencyResult run_consistency(const DistributionSpec& spec,
                                  const std::vector<std::size_t>& n_grid, long long nsim,
                                  std::uint64_t seed, unsigned threads = 1);

/// Dispatch on config.experiment; consistency verdicts are reported through
/// the returned rows (callers wanting the verdict use run_consistency).
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config, unsigned threads = 1);

ExperimentConfig config_from_json_text(const std::string& text);

/// Long-format CSV with header
/// spec,theta,n1,n2,estimator,mean,bias,variance,qmse,se,nsim.
/// Shortest-round-trip number formatting, bit-identical across thread counts.
std::string to_csv(const std::vector<ExperimentRow>& rows);

}  // namespace mwvar
