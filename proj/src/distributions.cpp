#include "mwvar/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "mwvar/special.hpp"

namespace mwvar {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------- Marginal

Marginal Marginal::normal(double mu, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("normal marginal: sd must be positive");
    return Marginal(Impl(Normal{mu, sd}));
}

Marginal Marginal::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential marginal: rate must be positive");
    return Marginal(Impl(Exponential{rate}));
}

Marginal Marginal::dmax_f1(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("dmax marginal: theta must be in (0,1)");
    }
    return Marginal(Impl(DmaxF1{theta}));
}

Marginal Marginal::dmax_f2() { return Marginal(Impl(DmaxF2{})); }

Marginal Marginal::discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.size() != probs.size() || values.empty()) {
        throw std::invalid_argument("discrete marginal: values/probs size mismatch");
    }
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) {
            throw std::invalid_argument("discrete marginal: values must be strictly increasing");
        }
    }
    Discrete d;
    d.values = std::move(values);
    d.probs = std::move(probs);
    d.cum.resize(d.probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.probs.size(); ++i) {
        if (!(d.probs[i] > 0.0)) {
            throw std::invalid_argument("discrete marginal: probabilities must be positive");
        }
        acc += d.probs[i];
        d.cum[i] = acc;
    }
    if (std::abs(acc - 1.0) > 1e-9) {
        throw std::invalid_argument("discrete marginal: probabilities must sum to 1");
    }
    return Marginal(Impl(std::move(d)));
}

bool Marginal::is_discrete() const { return std::holds_alternative<Discrete>(impl_); }

double Marginal::cdf_plus(double x) const {
    return std::visit(
        [x](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return normal_cdf((x - m.mu) / m.sd);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return x <= 0.0 ? 0.0 : -std::expm1(-m.rate * x);
            } else if constexpr (std::is_same_v<T, DmaxF1>) {
                if (x <= 0.0) return 0.0;
                if (x <= 1.0) return m.theta * x;
                if (x <= 2.0) return m.theta;
                if (x <= 3.0) return (1.0 - m.theta) * x + 3.0 * m.theta - 2.0;
                return 1.0;
            } else if constexpr (std::is_same_v<T, DmaxF2>) {
                if (x <= 1.0) return 0.0;
                if (x <= 2.0) return x - 1.0;
                return 1.0;
            } else {
                auto it = std::upper_bound(m.values.begin(), m.values.end(), x);
                if (it == m.values.begin()) return 0.0;
                return m.cum[static_cast<std::size_t>(it - m.values.begin()) - 1];
            }
        },
        impl_);
}

double Marginal::cdf_minus(double x) const {
    if (const auto* d = std::get_if<Discrete>(&impl_)) {
        auto it = std::lower_bound(d->values.begin(), d->values.end(), x);
        if (it == d->values.begin()) return 0.0;
        return d->cum[static_cast<std::size_t>(it - d->values.begin()) - 1];
    }
    return cdf_plus(x);
}

double Marginal::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile: u must be in (0,1)");
    return std::visit(
        [u](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return m.mu + m.sd * normal_quantile(u);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log1p(-u) / m.rate;
            } else if constexpr (std::is_same_v<T, DmaxF1>) {
                return u <= m.theta ? u / m.theta : (u - 3.0 * m.theta + 2.0) / (1.0 - m.theta);
            } else if constexpr (std::is_same_v<T, DmaxF2>) {
                return 1.0 + u;
            } else {
                auto it = std::lower_bound(m.cum.begin(), m.cum.end(), u);
                if (it == m.cum.end()) return m.values.back();  // truncation residue
                return m.values[static_cast<std::size_t>(it - m.cum.begin())];
            }
        },
        impl_);
}

std::vector<double> Marginal::quantile_breakpoints() const {
    if (const auto* d = std::get_if<DmaxF1>(&impl_)) return {d->theta};
    if (const auto* dd = std::get_if<Discrete>(&impl_)) {
        std::vector<double> bp(dd->cum.begin(), dd->cum.end() - 1);
        return bp;
    }
    return {};
}

const std::vector<double>& Marginal::support() const {
    const auto* d = std::get_if<Discrete>(&impl_);
    if (!d) throw std::logic_error("support(): marginal is not discrete");
    return d->values;
}

const std::vector<double>& Marginal::probs() const {
    const auto* d = std::get_if<Discrete>(&impl_);
    if (!d) throw std::logic_error("probs(): marginal is not discrete");
    return d->probs;
}

// ---------------------------------------------------------- DistributionSpec

std::string DistributionSpec::id() const {
    std::string out = name;
    out += '[';
    bool first = true;
    for (const auto& [k, v] : params) {
        if (!first) out += ';';
        out += k;
        out += '=';
        out += format_double(v);
        first = false;
    }
    out += ']';
    return out;
}

double GroundTruth::sigma_n_sq(std::size_t n1, std::size_t n2) const {
    const double n1d = static_cast<double>(n1);
    const double n2d = static_cast<double>(n2);
    return ((n2d - 1.0) * sigma1_sq + (n1d - 1.0) * sigma2_sq + theta * (1.0 - theta) -
            0.25 * tau) /
           (n1d * n2d);
}

double GroundTruth::s_n_sq(std::size_t n1, std::size_t n2) const {
    const double n1d = static_cast<double>(n1);
    const double n2d = static_cast<double>(n2);
    return (n1d + n2d) / (n1d * n2d) * (n2d * sigma1_sq + n1d * sigma2_sq);
}

namespace {

GroundTruth ground_truth_discrete(const Marginal& f1, const Marginal& f2) {
    const auto& v1 = f1.support();
    const auto& p1 = f1.probs();
    const auto& v2 = f2.support();
    const auto& p2 = f2.probs();

    GroundTruth gt;
    double theta = 0.0;
    double m2 = 0.0;  // E[F1n(X2)^2]
    for (std::size_t j = 0; j < v2.size(); ++j) {
        const double f = f1.cdf_normalized(v2[j]);
        theta += p2[j] * f;
        m2 += p2[j] * f * f;
    }
    double m1 = 0.0;  // E[F2n(X1)^2]
    for (std::size_t k = 0; k < v1.size(); ++k) {
        const double f = f2.cdf_normalized(v1[k]);
        m1 += p1[k] * f * f;
    }
    double tau = 0.0;
    std::size_t k = 0;
    std::size_t j = 0;
    while (k < v1.size() && j < v2.size()) {
        if (v1[k] == v2[j]) {
            tau += p1[k] * p2[j];
            ++k;
            ++j;
        } else if (v1[k] < v2[j]) {
            ++k;
        } else {
            ++j;
        }
    }
    gt.theta = theta;
    gt.sigma2_sq = m2 - theta * theta;
    gt.sigma1_sq = m1 - (1.0 - theta) * (1.0 - theta);
    gt.tau = tau;
    return gt;
}

GroundTruth ground_truth_continuous(const Marginal& f1, const Marginal& f2) {
    constexpr double tol = 1e-10;
    const auto bp2 = f2.quantile_breakpoints();
    const auto bp1 = f1.quantile_breakpoints();
    const double theta =
        integrate([&](double u) { return f1.cdf_plus(f2.quantile(u)); }, 0.0, 1.0, tol, bp2);
    const double m2 = integrate(
        [&](double u) {
            const double f = f1.cdf_plus(f2.quantile(u));
            return f * f;
        },
        0.0, 1.0, tol, bp2);
    const double m1 = integrate(
        [&](double u) {
            const double f = f2.cdf_plus(f1.quantile(u));
            return f * f;
        },
        0.0, 1.0, tol, bp1);
    GroundTruth gt;
    gt.theta = theta;
    gt.sigma2_sq = m2 - theta * theta;
    gt.sigma1_sq = m1 - (1.0 - theta) * (1.0 - theta);
    gt.tau = 0.0;
    return gt;
}

}  // namespace

GroundTruth ground_truth(const DistributionSpec& spec) {
    const bool d1 = spec.f1.is_discrete();
    const bool d2 = spec.f2.is_discrete();
    if (d1 != d2) {
        throw std::invalid_argument("ground_truth: mixed discrete/continuous pairs not supported");
    }
    return d1 ? ground_truth_discrete(spec.f1, spec.f2)
              : ground_truth_continuous(spec.f1, spec.f2);
}

// ------------------------------------------------------------- spec factories

DistributionSpec normal_spec(double delta, double sd1, double sd2) {
    return {"normal",
            {{"delta", delta}, {"sd1", sd1}, {"sd2", sd2}},
            Marginal::normal(0.0, sd1),
            Marginal::normal(delta, sd2)};
}

DistributionSpec normal_spec_from_theta(double theta, double sd1, double sd2) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("normal_spec_from_theta: theta must be in (0,1)");
    }
    const double delta = normal_quantile(theta) * std::sqrt(sd1 * sd1 + sd2 * sd2);
    return normal_spec(delta, sd1, sd2);
}

DistributionSpec exponential_spec(double rate1, double rate2) {
    return {"exponential",
            {{"rate1", rate1}, {"rate2", rate2}},
            Marginal::exponential(rate1),
            Marginal::exponential(rate2)};
}

DistributionSpec exponential_spec_from_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("exponential_spec_from_theta: theta must be in (0,1)");
    }
    // theta = rate1 / (rate1 + rate2) with rate2 = 1
    return exponential_spec(theta / (1.0 - theta), 1.0);
}

DistributionSpec dmax_spec(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("dmax_spec: theta must be in (0,1)");
    }
    return {"dmax", {{"theta", theta}}, Marginal::dmax_f1(theta), Marginal::dmax_f2()};
}

namespace {

Marginal poisson_marginal(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("poisson: lambda must be positive");
    constexpr double tail_tol = 1e-12;
    constexpr int max_support = 10000;
    std::vector<double> values;
    std::vector<double> probs;
    double p = std::exp(-lambda);
    double cum = 0.0;
    for (int k = 0; k <= max_support; ++k) {
        if (p > 0.0) {
            values.push_back(static_cast<double>(k));
            probs.push_back(p);
            cum += p;
        }
        if (cum >= 1.0 - tail_tol) return Marginal::discrete(std::move(values), std::move(probs));
        p *= lambda / static_cast<double>(k + 1);
    }
    throw std::runtime_error("poisson: truncation unable to reach tail tolerance");
}

}  // namespace

DistributionSpec poisson_spec(double lambda1, double lambda2) {
    return {"poisson",
            {{"lambda1", lambda1}, {"lambda2", lambda2}},
            poisson_marginal(lambda1),
            poisson_marginal(lambda2)};
}

namespace {

Marginal ordinal5_marginal(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("ordinal5: shapes must be positive");
    // X = INT(5 X^B) + 1, X^B ~ Beta(a,b): cell k has mass I_{k/5} - I_{(k-1)/5}.
    std::vector<double> values{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> probs(5);
    double prev = 0.0;
    for (int k = 1; k <= 4; ++k) {
        const double cur = reg_inc_beta(a, b, static_cast<double>(k) / 5.0);
        probs[k - 1] = cur - prev;
        prev = cur;
    }
    probs[4] = 1.0 - prev;
    // Degenerate cells would break the discrete-marginal invariants; nudge
    // zero-mass cells out of the support instead.
    std::vector<double> v2;
    std::vector<double> p2;
    for (int k = 0; k < 5; ++k) {
        if (probs[k] > 0.0) {
            v2.push_back(values[k]);
            p2.push_back(probs[k]);
        }
    }
    return Marginal::discrete(std::move(v2), std::move(p2));
}

}  // namespace

DistributionSpec ordinal5_spec(double a1, double b1, double a2, double b2) {
    return {"ordinal5",
            {{"a1", a1}, {"a2", a2}, {"b1", b1}, {"b2", b2}},
            ordinal5_marginal(a1, b1),
            ordinal5_marginal(a2, b2)};
}

DistributionSpec ordinal5_spec_from_theta(double theta) {
    if (!(theta >= 0.5 && theta < 1.0)) {
        throw std::invalid_argument("ordinal5_spec_from_theta: theta must be in [0.5, 1)");
    }
    double lo = 2.0;
    double hi = 2.0;
    auto theta_at = [](double a2) {
        return ground_truth(ordinal5_spec(2.0, 15.0, a2, 15.0)).theta;
    };
    while (theta_at(hi) < theta) {
        hi *= 2.0;
        if (hi > 1e8) throw std::invalid_argument("ordinal5_spec_from_theta: theta out of reach");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (theta_at(mid) < theta) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return ordinal5_spec(2.0, 15.0, 0.5 * (lo + hi), 15.0);
}

// --------------------------------------------------------------------- JSON

DistributionSpec spec_from_json_text(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const std::string name = j.at("name").get<std::string>();
    const auto& p = j.at("params");
    auto get = [&](const char* key, double fallback = std::nan("")) {
        if (p.contains(key)) return p.at(key).get<double>();
        if (std::isnan(fallback)) {
            throw std::invalid_argument(std::string("spec: missing parameter ") + key);
        }
        return fallback;
    };
    if (name == "normal") return normal_spec(get("delta"), get("sd1", 1.0), get("sd2", 1.0));
    if (name == "normal_theta") {
        return normal_spec_from_theta(get("theta"), get("sd1", 1.0), get("sd2", 1.0));
    }
    if (name == "exponential") return exponential_spec(get("rate1"), get("rate2"));
    if (name == "exponential_theta") return exponential_spec_from_theta(get("theta"));
    if (name == "dmax") return dmax_spec(get("theta"));
    if (name == "poisson") return poisson_spec(get("lambda1"), get("lambda2"));
    if (name == "ordinal5") return ordinal5_spec(get("a1"), get("b1"), get("a2"), get("b2"));
    if (name == "ordinal5_theta") return ordinal5_spec_from_theta(get("theta"));
    throw std::invalid_argument("spec: unknown distribution name '" + name + "'");
}

std::string spec_to_json_text(const DistributionSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [k, v] : spec.params) p[k] = v;
    j["params"] = p;
    return j.dump();
}

// --------------------------------------------------------------------- bias

double bias_dl(const GroundTruth& gt, std::size_t n1, std::size_t n2) {
    return (gt.theta * (1.0 - gt.theta) - gt.sigma1_sq - gt.sigma2_sq - 0.25 * gt.tau) /
           (static_cast<double>(n1) * static_cast<double>(n2));
}

double bias_pm(const GroundTruth& gt, std::size_t n1, std::size_t n2) {
    return (2.0 * (gt.theta * (1.0 - gt.theta) - gt.sigma1_sq - gt.sigma2_sq) - 0.25 * gt.tau) /
           (static_cast<double>(n1) * static_cast<double>(n2));
}

TwoSample draw_sample(const DistributionSpec& spec, std::size_t n1, std::size_t n2,
                      StreamRng& rng) {
    std::vector<double> g1(n1);
    std::vector<double> g2(n2);
    for (std::size_t i = 0; i < n1; ++i) g1[i] = spec.f1.quantile(rng.next_unit());
    for (std::size_t i = 0; i < n2; ++i) g2[i] = spec.f2.quantile(rng.next_unit());
    return TwoSample(std::move(g1), std::move(g2));
}

}  // namespace mwvar
