#pragma once

// The Phi functional and the two-sided bounds on TV(S_p, S_q): the
// anti-concentration upper bounds, the survival-difference profile g(k)
// with its J spread functional, and the pigeonhole lower-bound chain.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pbtv/core.hpp"
#include "pbtv/error.hpp"

namespace pbtv {

inline constexpr double kSlackTolerance = 1e-9;

namespace detail {

inline void require_same_length(const ParamVec& p, const ParamVec& q) {
    if (p.size() != q.size())
        throw Error(ErrorKind::LengthMismatch, "parameter vectors have lengths " + std::to_string(p.size()) +
                                                   " and " + std::to_string(q.size()));
}

/// Sum |p_i - q_i|, compensated.
inline double l1_distance(const ParamVec& p, const ParamVec& q) {
    require_same_length(p, q);
    CompensatedSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return s.value();
}

inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string join_csv(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out;
}

} // namespace detail

/// Pair with p_i >= q_i for every coordinate, compared exactly.
class DominatingPair {
public:
    DominatingPair(ParamVec p, ParamVec q) : p_(std::move(p)), q_(std::move(q)) {
        detail::require_same_length(p_, q_);
        for (std::size_t i = 0; i < p_.size(); ++i)
            if (!(p_[i] >= q_[i]))
                throw Error(ErrorKind::NotDominating, "p[" + std::to_string(i) + "] < q[" + std::to_string(i) + "]");
    }

    static bool dominates(const ParamVec& p, const ParamVec& q) {
        if (p.size() != q.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (!(p[i] >= q[i])) return false;
        return true;
    }

    const ParamVec& p() const noexcept { return p_; }
    const ParamVec& q() const noexcept { return q_; }
    std::size_t size() const noexcept { return p_.size(); }
    double delta_at(std::size_t i) const { return p_[i] - q_[i]; }

private:
    ParamVec p_;
    ParamVec q_;
};

/// min(1, Delta / sqrt(sigma_p^2 + 1)). Not symmetric: the variance is the first argument's.
inline double phi(const ParamVec& p, const ParamVec& q) {
    const double delta = detail::l1_distance(p, q);
    const double var = moments(p).variance;
    return std::min(1.0, delta / std::sqrt(var + 1.0));
}

inline double upper_bound_thm1(const ParamVec& p, const ParamVec& q) {
    return Constants::c_bcv * std::min(phi(p, q), phi(q, p));
}

/// 2 C Delta / (sqrt(sigma_p^2 + 1) + sqrt(sigma_q^2 + 1)).
inline double upper_bound_symmetric(const ParamVec& p, const ParamVec& q) {
    const double delta = detail::l1_distance(p, q);
    const double sp = std::sqrt(moments(p).variance + 1.0);
    const double sq = std::sqrt(moments(q).variance + 1.0);
    return 2.0 * Constants::c_bcv * delta / (sp + sq);
}

/// Survival-difference profile of a dominating pair.
/// g[j] holds g(offset + j) = P(S_p >= k) - P(S_q >= k) for k = 1..n.
struct GProfile {
    std::int64_t offset = 1;
    std::vector<double> g;
    double G = 0.0;
    double J = 0.0;
    double m_p = 0.0;

    double at(std::int64_t k) const noexcept {
        const auto j = k - offset;
        if (j < 0 || j >= static_cast<std::int64_t>(g.size())) return 0.0;
        return g[static_cast<std::size_t>(j)];
    }
    double max_g() const noexcept { return g.empty() ? 0.0 : *std::max_element(g.begin(), g.end()); }
    double min_g() const noexcept { return g.empty() ? 0.0 : *std::min_element(g.begin(), g.end()); }
};

inline GProfile g_profile(const DominatingPair& dp) {
    const std::size_t n = dp.size();
    const auto fp = detail::pb_masses(dp.p().values());
    const auto fq = detail::pb_masses(dp.q().values());

    GProfile out;
    out.offset = 1;
    out.g.assign(n, 0.0);
    out.m_p = moments(dp.p()).mean;
    // g(k) = sum_{j >= k} (fp(j) - fq(j)), built from the top down.
    CompensatedSum tail;
    for (std::size_t k = n; k >= 1; --k) {
        tail += fp[k] - fq[k];
        out.g[k - 1] = tail.value();
    }
    CompensatedSum G, J;
    for (std::size_t k = 1; k <= n; ++k) {
        const double gk = out.g[k - 1];
        const double d = static_cast<double>(k) - out.m_p;
        G += gk;
        J += d * d * gk;
    }
    out.G = G.value();
    out.J = J.value();
    return out;
}

/// 2 Delta (sigma_p^2 + 1 + Delta^2).
inline double j_upper_bound(const DominatingPair& dp) {
    const double delta = detail::l1_distance(dp.p(), dp.q());
    const double var = moments(dp.p()).variance;
    return 2.0 * delta * (var + 1.0 + delta * delta);
}

/// Lower bound on the heaviest atom of a nonnegative measure with mass G and spread J:
/// 3 G^{3/2} / (16 sqrt(J) + 4 sqrt(G)).
inline double pigeonhole_lower(double G, double J) {
    if (!(G > 0.0) || !std::isfinite(G))
        throw Error(ErrorKind::NonPositiveMass, "pigeonhole needs G > 0, got " + std::to_string(G));
    if (!(J >= 0.0) || !std::isfinite(J))
        throw Error(ErrorKind::InvalidParam, "pigeonhole needs finite J >= 0, got " + std::to_string(J));
    return 3.0 * G * std::sqrt(G) / (16.0 * std::sqrt(J) + 4.0 * std::sqrt(G));
}

inline double lower_bound_thm2(const DominatingPair& dp) { return Constants::lower_c * phi(dp.p(), dp.q()); }

/// Intermediate values of the lower-bound argument for one dominating pair.
struct LowerBoundPath {
    double bound = 0.0;                ///< Phi(p,q) / 12
    double sup_g = 0.0;                ///< max_k g(k), itself <= TV
    std::optional<double> pigeonhole;  ///< present iff G > 0
    double G = 0.0;
    double J = 0.0;
    double j_bound = 0.0;
};

inline LowerBoundPath lower_bound_path(const DominatingPair& dp) {
    const GProfile prof = g_profile(dp);
    LowerBoundPath out;
    out.bound = lower_bound_thm2(dp);
    out.sup_g = prof.max_g();
    out.G = prof.G;
    out.J = prof.J;
    out.j_bound = j_upper_bound(dp);
    if (prof.G > 0.0) out.pigeonhole = pigeonhole_lower(prof.G, std::max(0.0, prof.J));
    return out;
}

/// Coordinates split by sign of p_i - q_i: I = {p_i >= q_i}, J the rest (0-based).
struct SignSplit {
    std::vector<std::size_t> I;
    std::vector<std::size_t> J;
};

inline SignSplit sign_split(const ParamVec& p, const ParamVec& q) {
    detail::require_same_length(p, q);
    SignSplit s;
    for (std::size_t i = 0; i < p.size(); ++i) (p[i] >= q[i] ? s.I : s.J).push_back(i);
    return s;
}

/// (1/12) max(Phi(p_I, q_I), Phi(q_J, p_J)), a lower bound on TV(Ber(p), Ber(q)).
/// An empty block contributes 0.
inline double tv_ber_lower(const ParamVec& p, const ParamVec& q) {
    const SignSplit s = sign_split(p, q);
    const double phi_i = s.I.empty() ? 0.0 : phi(p.select(s.I), q.select(s.I));
    const double phi_j = s.J.empty() ? 0.0 : phi(q.select(s.J), p.select(s.J));
    return Constants::lower_c * std::max(phi_i, phi_j);
}

/// One certified inequality, stored as slack = (bound side) - (value side); pass iff slack >= -tol.
struct Check {
    std::string name;
    double slack = 0.0;
    double tol = kSlackTolerance;
    bool pass = true;
};

inline Check make_check(std::string name, double slack, double tol = kSlackTolerance) {
    return Check{std::move(name), slack, tol, slack >= -tol};
}

struct BoundReport {
    std::size_t n = 0;
    double tv_pb = 0.0;
    double delta = 0.0;
    double sigma2_p = 0.0;
    double sigma2_q = 0.0;
    double phi_pq = 0.0;
    double phi_qp = 0.0;
    double upper_thm1 = 0.0;
    double upper_symmetric = 0.0;
    double tv_ber_lower = 0.0;
    bool dominating = false;
    std::optional<double> lower_thm2;
    std::optional<double> sup_g;
    std::optional<double> pigeonhole_lower;
    std::optional<double> j_value;
    std::optional<double> j_bound;
    std::optional<double> g_min;
    std::optional<double> g_sum;
    std::vector<Check> checks;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
    /// Smallest slack over all checks (0 when there are none).
    double min_slack() const {
        double m = 0.0;
        bool first = true;
        for (const auto& c : checks) {
            if (first || c.slack < m) m = c.slack;
            first = false;
        }
        return m;
    }
    const Check* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

/// Exact TV plus every applicable bound for one pair. Lower-bound fields are
/// filled only when p dominates q.
inline BoundReport certify_pair(const ParamVec& p, const ParamVec& q, double tol = kSlackTolerance) {
    detail::require_same_length(p, q);
    BoundReport r;
    r.n = p.size();
    r.tv_pb = tv(pb_pmf(p), pb_pmf(q));
    r.delta = detail::l1_distance(p, q);
    r.sigma2_p = moments(p).variance;
    r.sigma2_q = moments(q).variance;
    r.phi_pq = std::min(1.0, r.delta / std::sqrt(r.sigma2_p + 1.0));
    r.phi_qp = std::min(1.0, r.delta / std::sqrt(r.sigma2_q + 1.0));
    r.upper_thm1 = Constants::c_bcv * std::min(r.phi_pq, r.phi_qp);
    r.upper_symmetric =
        2.0 * Constants::c_bcv * r.delta / (std::sqrt(r.sigma2_p + 1.0) + std::sqrt(r.sigma2_q + 1.0));
    r.tv_ber_lower = tv_ber_lower(p, q);

    r.checks.push_back(make_check("thm1_upper", r.upper_thm1 - r.tv_pb, tol));
    r.checks.push_back(make_check("symmetric_upper", r.upper_symmetric - r.tv_pb, tol));

    r.dominating = DominatingPair::dominates(p, q);
    if (r.dominating) {
        const DominatingPair dp(p, q);
        const GProfile prof = g_profile(dp);
        r.lower_thm2 = Constants::lower_c * r.phi_pq;
        r.sup_g = prof.max_g();
        r.g_min = prof.min_g();
        r.g_sum = prof.G;
        r.j_value = prof.J;
        r.j_bound = 2.0 * r.delta * (r.sigma2_p + 1.0 + r.delta * r.delta);
        r.checks.push_back(make_check("thm2_lower", r.tv_pb - *r.lower_thm2, tol));
        r.checks.push_back(make_check("tv_ge_sup_g", r.tv_pb - *r.sup_g, tol));
        r.checks.push_back(make_check("g_nonnegative", *r.g_min, 1e-12));
        r.checks.push_back(make_check("g_sum_eq_delta", -std::abs(prof.G - r.delta), tol));
        r.checks.push_back(make_check("j_bound", *r.j_bound - prof.J, tol));
        if (prof.G > 0.0) {
            r.pigeonhole_lower = pigeonhole_lower(prof.G, std::max(0.0, prof.J));
            r.checks.push_back(make_check("pigeonhole", *r.sup_g - *r.pigeonhole_lower, tol));
        }
    }
    return r;
}

inline void to_json(nlohmann::json& j, const Check& c) {
    j = nlohmann::json{{"name", c.name}, {"slack", c.slack}, {"tol", c.tol}, {"pass", c.pass}};
}

inline void to_json(nlohmann::json& j, const BoundReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    j = nlohmann::json{
        {"schema", "pbtv/1"},
        {"n", r.n},
        {"tv_pb", r.tv_pb},
        {"delta", r.delta},
        {"sigma2_p", r.sigma2_p},
        {"sigma2_q", r.sigma2_q},
        {"phi_pq", r.phi_pq},
        {"phi_qp", r.phi_qp},
        {"upper_thm1", r.upper_thm1},
        {"upper_symmetric", r.upper_symmetric},
        {"tv_ber_lower", r.tv_ber_lower},
        {"dominating", r.dominating},
        {"lower_thm2", opt(r.lower_thm2)},
        {"sup_g", opt(r.sup_g)},
        {"pigeonhole_lower", opt(r.pigeonhole_lower)},
        {"j_value", opt(r.j_value)},
        {"j_bound", opt(r.j_bound)},
        {"g_min", opt(r.g_min)},
        {"g_sum", opt(r.g_sum)},
        {"checks", r.checks},
        {"all_pass", r.all_pass()},
    };
}

/// CSV column order for BoundReport rows. Stable; append-only.
inline const std::vector<std::string>& bound_report_csv_columns() {
    static const std::vector<std::string> cols{
        "n",        "tv_pb",      "delta",   "sigma2_p", "sigma2_q",         "phi_pq",
        "phi_qp",   "upper_thm1", "upper_symmetric",     "tv_ber_lower",     "dominating",
        "lower_thm2", "sup_g",    "pigeonhole_lower",    "j_value",          "j_bound",
        "min_slack", "all_pass"};
    return cols;
}

inline std::string bound_report_csv_header() { return detail::join_csv(bound_report_csv_columns()); }

inline std::string to_csv_row(const BoundReport& r) {
    auto num = [](double x) { return detail::fmt_double(x); };
    auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    return detail::join_csv({std::to_string(r.n), num(r.tv_pb), num(r.delta), num(r.sigma2_p),
                             num(r.sigma2_q), num(r.phi_pq), num(r.phi_qp), num(r.upper_thm1),
                             num(r.upper_symmetric), num(r.tv_ber_lower), r.dominating ? "1" : "0",
                             opt(r.lower_thm2), opt(r.sup_g), opt(r.pigeonhole_lower), opt(r.j_value),
                             opt(r.j_bound), num(r.min_slack()), r.all_pass() ? "1" : "0"});
}

} // namespace pbtv
