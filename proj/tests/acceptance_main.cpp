// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Every tolerance is pinned here, not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mwvar/distributions.hpp"
#include "mwvar/estimators.hpp"
#include "mwvar/oracle.hpp"
#include "mwvar/simulation.hpp"
#include "test_util.hpp"

using namespace mwvar;

namespace {

struct SweepOutcome {
    bool bounds_ok = true;       // criterion 3
    bool identities_ok = true;   // criterion 4
    long long checked = 0;
    std::string detail;
};

// One combined pass over the random-sample sweep shared by criteria 3 and 4.
SweepOutcome shared_sweep_result;
bool shared_sweep_done = false;

void run_shared_sweep() {
    constexpr long long total = 1000000;
    SweepOutcome out;
    for (long long i = 0; i < total; ++i) {
        StreamRng rng(2024, 3, static_cast<std::uint64_t>(i));
        const TwoSample s =
            testutil::random_sample(rng, testutil::style_for(static_cast<std::size_t>(i)), 2, 30);
        const RankTables tables = rank_tables(s);
        const EstimateResult r = estimate_all(tables);
        const double m = static_cast<double>(std::min(s.n1(), s.n2()));
        const double bound = sigma_n_sq_upper_bound(r.summary);

        if (!(r.estimates.sigma_n_sq >= 0.0) ||
            !(r.estimates.sigma_n_sq <= bound + 1e-12) ||
            !(r.estimates.sigma_n_sq <= 0.25 / (m - 1.0) + 1e-12)) {
            out.bounds_ok = false;
            out.detail = "bound violated at replication " + std::to_string(i);
            break;
        }

        const CountSums cs = count_sums(tables);
        const double n1 = static_cast<double>(s.n1());
        const double n2 = static_cast<double>(s.n2());
        const double dn = static_cast<double>(cs.d_n);
        const double via_d = r.summary.theta_hat * r.summary.theta_hat - cs.d / dn;
        const double alt = (cs.a + cs.b + cs.c -
                            (n1 + n2 - 1.0) / ((n1 - 1.0) * (n2 - 1.0)) * cs.d) /
                           (n1 * n1 * n2 * n2);
        if (std::abs(r.estimates.sigma_n_sq - via_d) > 1e-12 ||
            std::abs(r.estimates.sigma_n_sq - alt) > 1e-12 ||
            cs.a + cs.b + cs.c + cs.d != cs.e * cs.e || cs.a != cs.e - cs.f / 4.0 ||
            std::abs(cs.e - n1 * n2 * r.summary.theta_hat) > 1e-12 ||
            std::abs(cs.f - n1 * n2 * r.summary.tau_hat) > 1e-12) {
            out.identities_ok = false;
            out.detail = "identity violated at replication " + std::to_string(i);
            break;
        }
        ++out.checked;
    }
    shared_sweep_result = out;
    shared_sweep_done = true;
}

struct MomentStats {
    double mean = 0.0;
    double var = 0.0;      // population variance
    double se_mean = 0.0;
    double se_var = 0.0;   // standard error of the variance estimate
};

MomentStats moments(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    MomentStats st;
    for (double x : v) st.mean += x;
    st.mean /= n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (double x : v) {
        const double d = x - st.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    st.var = m2;
    st.se_mean = std::sqrt(m2 / n);
    st.se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    return st;
}

bool criterion1(std::string& detail) {
    const TwoSample s({1, 1, 2, 2, 3}, {3, 4, 4, 4, 5});
    const EstimateResult r = estimate_all(s);
    std::ostringstream os;
    os.precision(17);
    os << "sigma_N^2 = " << r.estimates.sigma_n_sq
       << ", sigma_SHS^2 = " << r.estimates.sigma_shs_sq;
    detail = os.str();
    return std::abs(r.estimates.sigma_n_sq - 0.0004) <= 1e-12 &&
           std::abs(r.estimates.sigma_shs_sq - (-0.000225)) <= 1e-12;
}

bool criterion2(std::string& detail) {
    using oracle::exact_unbiasedness;
    using oracle::fixture;
    struct Case {
        const char* name;
        std::size_t n1;
        std::size_t n2;
        bool tied;
    };
    const std::vector<Case> cases{{"bernoulli_half", 2, 2, true},
                                  {"bernoulli_half", 3, 3, true},
                                  {"bernoulli_skew", 3, 3, true},
                                  {"three_point", 3, 3, true},
                                  {"three_point_shift", 3, 3, true},
                                  {"separated", 2, 2, false}};
    int tied_count = 0;
    for (const Case& c : cases) {
        const oracle::ExactExpectation res = exact_unbiasedness(fixture(c.name), c.n1, c.n2);
        if (!res.equal()) {
            detail = std::string(c.name) + " failed: E = " + res.expected_sigma_n_sq.to_string() +
                     " vs " + res.sigma_n_sq_true.to_string();
            return false;
        }
        if (c.tied && oracle::exact_ground_truth(fixture(c.name)).tau > Rational(0)) {
            ++tied_count;
        }
    }
    detail = std::to_string(cases.size()) + " fixtures exactly unbiased, " +
             std::to_string(tied_count) + " with positive tie mass";
    return cases.size() >= 5 && tied_count >= 2;
}

bool criterion3(std::string& detail) {
    if (!shared_sweep_done) run_shared_sweep();
    if (!shared_sweep_result.bounds_ok) {
        detail = shared_sweep_result.detail;
        return false;
    }
    // attainment witnesses
    const EstimateResult zero = estimate_all(TwoSample({1, 2}, {3, 4}));
    const EstimateResult sharp = estimate_all(TwoSample({1, 4}, {2, 3}));
    const bool zero_ok = zero.summary.theta_hat == 1.0 && zero.estimates.sigma_n_sq == 0.0;
    const bool sharp_ok =
        sharp.estimates.sigma_n_sq == sigma_n_sq_upper_bound(sharp.summary) &&
        sharp.estimates.sigma_n_sq == 0.25;
    detail = std::to_string(shared_sweep_result.checked) +
             " samples within both bounds; attainment at theta_hat = 1 and at {1,4}/{2,3}";
    return zero_ok && sharp_ok;
}

bool criterion4(std::string& detail) {
    if (!shared_sweep_done) run_shared_sweep();
    detail = shared_sweep_result.identities_ok
                 ? std::to_string(shared_sweep_result.checked) +
                       " samples satisfy sigma_N^2 = theta^2 - d/d_N and the count-sum identities"
                 : shared_sweep_result.detail;
    return shared_sweep_result.identities_ok;
}

bool criterion5(std::string& detail) {
    for (int i = 0; i < 1000; ++i) {
        StreamRng rng(2024, 5, static_cast<std::uint64_t>(i));
        const testutil::SampleStyle style = i % 2 == 0 ? testutil::SampleStyle::heavily_tied
                                                       : testutil::SampleStyle::ordinal;
        const TwoSample s = testutil::random_sample(rng, style, 2, 8);
        const oracle::BruteResult brute = oracle::brute_estimators(s);
        const EstimateResult r = estimate_all(s);
        const CountSums cs = count_sums(s);
        const double diffs[] = {
            std::abs(brute.summary.theta_hat - r.summary.theta_hat),
            std::abs(brute.summary.tau_hat - r.summary.tau_hat),
            std::abs(brute.summary.q1_sq - r.summary.q1_sq),
            std::abs(brute.summary.q2_sq - r.summary.q2_sq),
            std::abs(brute.estimates.sigma_n_sq - r.estimates.sigma_n_sq),
            std::abs(brute.estimates.sigma_shs_sq - r.estimates.sigma_shs_sq),
            std::abs(brute.estimates.sigma_dl_sq - r.estimates.sigma_dl_sq),
            std::abs(brute.estimates.sigma_pm_sq - r.estimates.sigma_pm_sq),
            std::abs(brute.estimates.sigma_hm_sq - r.estimates.sigma_hm_sq),
            std::abs(brute.sums.a - cs.a),
            std::abs(brute.sums.b - cs.b),
            std::abs(brute.sums.c - cs.c),
            std::abs(brute.sums.d - cs.d),
            std::abs(brute.sums.e - cs.e),
            std::abs(brute.sums.f - cs.f)};
        for (double d : diffs) {
            if (!(d <= 1e-12)) {
                detail = "disagreement " + std::to_string(d) + " at replication " +
                         std::to_string(i);
                return false;
            }
        }
    }
    detail = "1000 random tied samples, rank and brute-force paths agree to 1e-12";
    return true;
}

bool criterion6(std::string& detail) {
    using oracle::EstimatorId;
    // exact part
    for (const char* name : {"bernoulli_half", "three_point"}) {
        const oracle::FiniteDistPair dist = oracle::fixture(name);
        const oracle::ExactGroundTruth gt = oracle::exact_ground_truth(dist);
        const std::size_t n = std::string(name) == "bernoulli_half" ? 2 : 3;
        const Rational enumerated = oracle::exact_bias(dist, n, n, EstimatorId::DL);
        const Rational closed = (gt.theta * (Rational(1) - gt.theta) - gt.sigma1_sq -
                                 gt.sigma2_sq - gt.tau / Rational(4)) /
                                Rational(static_cast<long long>(n * n));
        if (enumerated != closed) {
            detail = std::string("exact DL bias mismatch on ") + name;
            return false;
        }
    }
    // Monte-Carlo part at n1 = n2 = 10, nsim = 1e5
    const unsigned threads = std::max(2u, std::thread::hardware_concurrency());
    std::ostringstream os;
    for (const DistributionSpec& spec :
         {normal_spec(1.0), poisson_spec(1.0, 3.0), ordinal5_spec(2, 15, 5, 15)}) {
        const GroundTruth gt = ground_truth(spec);
        ExperimentConfig config;
        config.experiment = "bias";
        config.specs = {spec};
        config.n1 = 10;
        config.n2 = 10;
        config.nsim = 100000;
        config.seed = 606;
        config.estimators = {oracle::EstimatorId::DL};
        const ExperimentRow row = run_bias(config, threads).front();
        const double closed = bias_dl(gt, 10, 10);
        os << spec.name << ": bias " << row.bias << " vs closed " << closed << " (se "
           << row.se << "); ";
        if (std::abs(row.bias - closed) > 3.0 * row.se) {
            detail = os.str() + "outside 3 SE";
            return false;
        }
    }
    detail = os.str() + "all within 3 SE";
    return true;
}

bool criterion7(std::string& detail) {
    const DistributionSpec spec = dmax_spec(0.5);
    const GroundTruth gt = ground_truth(spec);
    constexpr long long nsim = 100000;
    std::vector<double> thetas(nsim);
    std::vector<double> dl(nsim);
    for (long long rep = 0; rep < nsim; ++rep) {
        StreamRng rng(707, 0, static_cast<std::uint64_t>(rep));
        const TwoSample s = draw_sample(spec, 10, 10, rng);
        const EstimateResult r = estimate_all(s);
        thetas[static_cast<std::size_t>(rep)] = r.summary.theta_hat;
        dl[static_cast<std::size_t>(rep)] = r.estimates.sigma_dl_sq;
    }
    const MomentStats theta_stats = moments(thetas);
    const MomentStats dl_stats = moments(dl);
    const double target = 0.025;  // theta(1-theta)/m, the maximal variance
    std::ostringstream os;
    os.precision(6);
    os << "Var(theta_hat) = " << theta_stats.var << " vs " << target << " (se "
       << theta_stats.se_var << "); DL bias = " << dl_stats.mean - gt.sigma_n_sq(10, 10)
       << " (se " << dl_stats.se_mean << ")";
    detail = os.str();
    if (std::abs(gt.sigma_n_sq(10, 10) - target) > 1e-12) return false;
    return std::abs(theta_stats.var - target) <= 3.0 * theta_stats.se_var &&
           std::abs(dl_stats.mean - gt.sigma_n_sq(10, 10)) <= 3.0 * dl_stats.se_mean;
}

bool criterion8(std::string& detail) {
    const std::vector<double> theta_grid{0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    const unsigned threads = std::max(2u, std::thread::hardware_concurrency());
    int cells = 0;
    int ordered = 0;
    std::ostringstream os;
    for (const std::string family : {"normal", "exponential", "ordinal5"}) {
        int family_ordered = 0;
        for (double theta : theta_grid) {
            DistributionSpec spec = family == "normal"       ? normal_spec_from_theta(theta)
                                    : family == "exponential" ? exponential_spec_from_theta(theta)
                                                               : ordinal5_spec_from_theta(theta);
            ExperimentConfig config;
            config.experiment = "qmse";
            config.specs = {spec};
            config.n1 = 10;
            config.n2 = 10;
            config.nsim = 10000;
            config.seed = 808;
            config.estimators = {oracle::EstimatorId::N, oracle::EstimatorId::DL,
                                 oracle::EstimatorId::PM};
            const std::vector<ExperimentRow> rows = run_qmse(config, threads);
            const double q_n = rows[0].qmse;
            const double q_dl = rows[1].qmse;
            const double q_pm = rows[2].qmse;
            ++cells;
            if (q_n <= q_dl && q_n <= q_pm) {
                ++ordered;
                ++family_ordered;
            }
        }
        os << family << " " << family_ordered << "/" << theta_grid.size() << "; ";
    }
    const double fraction = static_cast<double>(ordered) / cells;
    os << "total " << ordered << "/" << cells;
    detail = os.str();
    return fraction >= 0.9;
}

bool criterion9(std::string& detail) {
    const std::vector<std::size_t> n_grid{20, 40, 80, 160};
    const unsigned threads = std::max(2u, std::thread::hardware_concurrency());
    std::ostringstream os;
    os.precision(4);
    for (const DistributionSpec& spec : {exponential_spec(1.0, 2.0), normal_spec(1.0)}) {
        const ConsistencyResult res = run_consistency(spec, n_grid, 20000, 909, threads);
        os << spec.name << ":";
        for (const ExperimentRow& row : res.rows) os << " " << row.mean;
        os << "; ";
        if (!res.decreasing) {
            detail = os.str() + "trend not decreasing";
            return false;
        }
    }
    detail = os.str() + "both trends decreasing within 2 SE slack";
    return true;
}

bool criterion10(std::string& detail) {
    ExperimentConfig config;
    config.experiment = "qmse";
    config.specs = {normal_spec_from_theta(0.8), poisson_spec(1.0, 3.0)};
    config.n1 = 10;
    config.n2 = 10;
    config.nsim = 2000;
    config.seed = 1010;
    const std::string one = to_csv(run_experiment(config, 1));
    const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
    const std::string many = to_csv(run_experiment(config, hw));
    detail = "csv identical for 1 and " + std::to_string(hw) + " threads (" +
             std::to_string(one.size()) + " bytes)";
    return one == many && !one.empty();
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* label;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "counterexample reproduction", criterion1},
        {2, "exact unbiasedness on finite fixtures", criterion2},
        {3, "non-negativity and sharp bound over 1e6 samples", criterion3},
        {4, "count-sum identity on the same sweep", criterion4},
        {5, "oracle equivalence on 1000 tied samples", criterion5},
        {6, "DeLong bias formula, exact and Monte-Carlo", criterion6},
        {7, "D_max maximal variance and vanishing DL bias", criterion7},
        {8, "q-MSE ordering across the theta grid", criterion8},
        {9, "L2-consistency trend along N", criterion9},
        {10, "bit-identical CSV across thread counts", criterion10},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%2d] %s  %s (%.1fs) — %s\n", c.id, ok ? "PASS" : "FAIL", c.label,
                    seconds, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures;
}
