#include "mwvar/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace mwvar {

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<oracle::EstimatorId> all_estimators() {
    using oracle::EstimatorId;
    return {EstimatorId::N, EstimatorId::SHS, EstimatorId::DL, EstimatorId::PM,
            EstimatorId::HM};
}

double pick(const VarianceEstimates& v, oracle::EstimatorId id) {
    using oracle::EstimatorId;
    switch (id) {
        case EstimatorId::N: return v.sigma_n_sq;
        case EstimatorId::SHS: return v.sigma_shs_sq;
        case EstimatorId::DL: return v.sigma_dl_sq;
        case EstimatorId::PM: return v.sigma_pm_sq;
        case EstimatorId::HM: return v.sigma_hm_sq;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Free property sweep: the unbiased estimator's sample-wise bounds must hold
// for every replication drawn, not just in expectation.
void check_inline_invariants(const EffectSummary& s, double sigma_n) {
    const double m = static_cast<double>(std::min(s.n1, s.n2));
    const double bound = s.theta_hat * (1.0 - s.theta_hat) / (m - 1.0);
    if (!(sigma_n >= -1e-13) || !(sigma_n <= bound + 1e-12) ||
        !(sigma_n <= 0.25 / (m - 1.0) + 1e-12)) {
        throw std::logic_error("sigma_n_sq invariant violated in simulation sweep");
    }
}

// Fill values[e][rep] for rep in [begin, end).
void fill_range(const DistributionSpec& spec, std::size_t n1, std::size_t n2,
                std::uint64_t seed, std::uint64_t cell_id,
                const std::vector<oracle::EstimatorId>& which,
                std::vector<std::vector<double>>& values, long long begin, long long end) {
    for (long long rep = begin; rep < end; ++rep) {
        StreamRng rng(seed, cell_id, static_cast<std::uint64_t>(rep));
        const TwoSample sample = draw_sample(spec, n1, n2, rng);
        const EstimateResult r = estimate_all(sample);
        check_inline_invariants(r.summary, r.estimates.sigma_n_sq);
        for (std::size_t e = 0; e < which.size(); ++e) {
            values[e][static_cast<std::size_t>(rep)] = pick(r.estimates, which[e]);
        }
    }
}

void parallel_fill(const DistributionSpec& spec, std::size_t n1, std::size_t n2,
                   std::uint64_t seed, std::uint64_t cell_id,
                   const std::vector<oracle::EstimatorId>& which,
                   std::vector<std::vector<double>>& values, long long nsim,
                   unsigned threads) {
    if (threads <= 1 || nsim < 256) {
        fill_range(spec, n1, n2, seed, cell_id, which, values, 0, nsim);
        return;
    }
    const long long chunk = (nsim + threads - 1) / threads;
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned t = 0; t < threads; ++t) {
        const long long begin = static_cast<long long>(t) * chunk;
        const long long end = std::min(nsim, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end]() {
            try {
                fill_range(spec, n1, n2, seed, cell_id, which, values, begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct StreamStats {
    double mean = 0.0;
    double pop_variance = 0.0;
    double se = 0.0;  // standard error of the mean
};

// Deterministic reduction: plain left-to-right passes in replication order.
StreamStats reduce(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    StreamStats st;
    st.mean = mean;
    st.pop_variance = ss / n;
    st.se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return st;
}

ExperimentRow make_row(const std::string& spec_id, double theta, std::size_t n1,
                       std::size_t n2, const std::string& estimator,
                       const std::vector<double>& values, double target) {
    const StreamStats st = reduce(values);
    ExperimentRow row;
    row.spec_id = spec_id;
    row.theta = theta;
    row.n1 = n1;
    row.n2 = n2;
    row.estimator = estimator;
    row.mean = st.mean;
    row.bias = st.mean - target;
    row.variance = st.pop_variance;
    row.qmse = target > 0.0 ? (st.pop_variance + row.bias * row.bias) / target
                            : std::numeric_limits<double>::quiet_NaN();
    row.se = st.se;
    row.nsim = static_cast<long long>(values.size());
    return row;
}

std::vector<ExperimentRow> run_cells(const ExperimentConfig& config, unsigned threads) {
    if (config.nsim < 1) throw std::invalid_argument("config: nsim must be >= 1");
    if (config.specs.empty()) throw std::invalid_argument("config: no specs given");
    const std::vector<oracle::EstimatorId> which =
        config.estimators.empty() ? all_estimators() : config.estimators;

    std::vector<ExperimentRow> rows;
    for (std::size_t cell = 0; cell < config.specs.size(); ++cell) {
        const DistributionSpec& spec = config.specs[cell];
        const GroundTruth gt = ground_truth(spec);
        const double target = gt.sigma_n_sq(config.n1, config.n2);

        std::vector<std::vector<double>> values(
            which.size(), std::vector<double>(static_cast<std::size_t>(config.nsim)));
        parallel_fill(spec, config.n1, config.n2, config.seed,
                      static_cast<std::uint64_t>(cell), which, values, config.nsim, threads);
        for (std::size_t e = 0; e < which.size(); ++e) {
            rows.push_back(make_row(spec.id(), gt.theta, config.n1, config.n2,
                                    oracle::to_string(which[e]), values[e], target));
        }
    }
    return rows;
}

}  // namespace

std::vector<ExperimentRow> run_bias(const ExperimentConfig& config, unsigned threads) {
    return run_cells(config, threads);
}

std::vector<ExperimentRow> run_qmse(const ExperimentConfig& config, unsigned threads) {
    return run_cells(config, threads);
}

ConsistencyResult run_consistency(const DistributionSpec& spec,
                                  const std::vector<std::size_t>& n_grid, long long nsim,
                                  std::uint64_t seed, unsigned threads) {
    if (n_grid.empty()) throw std::invalid_argument("consistency: empty N grid");
    if (nsim < 2) throw std::invalid_argument("consistency: nsim must be >= 2");
    const GroundTruth gt = ground_truth(spec);
    if (!(gt.sigma1_sq > 0.0) || !(gt.sigma2_sq > 0.0)) {
        throw std::invalid_argument(
            "consistency: spec rejected, needs sigma1_sq > 0 and sigma2_sq > 0");
    }

    ConsistencyResult result;
    for (std::size_t cell = 0; cell < n_grid.size(); ++cell) {
        const std::size_t n_total = n_grid[cell];
        const std::size_t n1 = n_total / 2;
        const std::size_t n2 = n_total - n1;
        if (n1 < 2) throw std::invalid_argument("consistency: N too small");
        const double s_sq = gt.s_n_sq(n1, n2);

        std::vector<double> values(static_cast<std::size_t>(nsim));
        const long long chunk = threads <= 1 ? nsim : (nsim + threads - 1) / threads;
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&](long long begin, long long end) {
            try {
                for (long long rep = begin; rep < end; ++rep) {
                    StreamRng rng(seed, static_cast<std::uint64_t>(cell),
                                  static_cast<std::uint64_t>(rep));
                    const TwoSample sample = draw_sample(spec, n1, n2, rng);
                    const EstimateResult r = estimate_all(sample);
                    check_inline_invariants(r.summary, r.estimates.sigma_n_sq);
                    const double scaled =
                        static_cast<double>(n_total) * r.estimates.sigma_n_sq / s_sq - 1.0;
                    values[static_cast<std::size_t>(rep)] = scaled * scaled;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        };
        if (threads <= 1 || nsim < 256) {
            worker(0, nsim);
        } else {
            for (unsigned t = 0; t < threads; ++t) {
                const long long begin = static_cast<long long>(t) * chunk;
                const long long end = std::min(nsim, begin + chunk);
                if (begin >= end) break;
                pool.emplace_back(worker, begin, end);
            }
            for (std::thread& th : pool) th.join();
        }
        if (error) std::rethrow_exception(error);

        result.rows.push_back(
            make_row(spec.id(), gt.theta, n1, n2, "N", values, 0.0));
    }

    result.decreasing = true;
    for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
        const ExperimentRow& a = result.rows[i];
        const ExperimentRow& b = result.rows[i + 1];
        const double slack = 2.0 * std::sqrt(a.se * a.se + b.se * b.se);
        if (b.mean > a.mean + slack) result.decreasing = false;
    }
    return result;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config, unsigned threads) {
    if (config.experiment == "bias") return run_bias(config, threads);
    if (config.experiment == "qmse") return run_qmse(config, threads);
    if (config.experiment == "consistency") {
        if (config.specs.size() != 1) {
            throw std::invalid_argument("consistency config: exactly one spec expected");
        }
        return run_consistency(config.specs.front(), config.n_grid, config.nsim, config.seed,
                               threads)
            .rows;
    }
    throw std::invalid_argument("config: unknown experiment '" + config.experiment + "'");
}

ExperimentConfig config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig config;
    try {
        config.experiment = j.at("experiment").get<std::string>();
        for (const auto& spec_json : j.at("specs")) {
            config.specs.push_back(spec_from_json_text(spec_json.dump()));
        }
        config.n1 = j.value("n1", 10);
        config.n2 = j.value("n2", 10);
        config.nsim = j.value("nsim", 100000LL);
        config.seed = j.value("seed", 1ULL);
        if (j.contains("estimators")) {
            for (const auto& e : j.at("estimators")) {
                config.estimators.push_back(
                    oracle::estimator_from_string(e.get<std::string>()));
            }
        }
        if (j.contains("grid")) {
            for (const auto& n : j.at("grid")) {
                config.n_grid.push_back(n.get<std::size_t>());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: malformed field: ") + e.what());
    }
    if (config.experiment != "bias" && config.experiment != "qmse" &&
        config.experiment != "consistency") {
        throw std::invalid_argument("config: unknown experiment '" + config.experiment + "'");
    }
    if (config.specs.empty()) throw std::invalid_argument("config: no specs given");
    if (config.experiment == "consistency" && config.n_grid.empty()) {
        throw std::invalid_argument("config: consistency experiment needs a grid of N values");
    }
    return config;
}

std::string to_csv(const std::vector<ExperimentRow>& rows) {
    std::string out = "spec,theta,n1,n2,estimator,mean,bias,variance,qmse,se,nsim\n";
    for (const ExperimentRow& r : rows) {
        out += r.spec_id;
        out += ',';
        out += format_double(r.theta);
        out += ',';
        out += std::to_string(r.n1);
        out += ',';
        out += std::to_string(r.n2);
        out += ',';
        out += r.estimator;
        out += ',';
        out += format_double(r.mean);
        out += ',';
        out += format_double(r.bias);
        out += ',';
        out += format_double(r.variance);
        out += ',';
        out += format_double(r.qmse);
        out += ',';
        out += format_double(r.se);
        out += ',';
        out += std::to_string(r.nsim);
        out += '\n';
    }
    return out;
}

}  // namespace mwvar
