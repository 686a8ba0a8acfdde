#pragma once

// Homogenization p -> (p_bar, ..., p_bar) and the binomial machinery behind
// the homogenization inequality: exact binomial TVs delta_A, the two-block
// split bound, the mixture representation of Bin(n, p_bar), the trial
// deletion kernel, and the end-to-end certificate.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pbtv/bounds.hpp"
#include "pbtv/core.hpp"
#include "pbtv/error.hpp"
#include "pbtv/oracle.hpp"

namespace pbtv {

/// Blocks I, J covering {0..n-1} exactly once (0-based, sorted). Either may be empty here;
/// split_bound_check rejects empty blocks.
class Partition {
public:
    Partition(std::size_t n, std::vector<std::size_t> I, std::vector<std::size_t> J)
        : n_(n), I_(std::move(I)), J_(std::move(J)) {
        std::vector<int> seen(n_, 0);
        auto mark = [&](const std::vector<std::size_t>& block) {
            for (std::size_t k = 0; k < block.size(); ++k) {
                if (block[k] >= n_) throw Error(ErrorKind::BadPartition, "index out of range");
                if (k > 0 && block[k] <= block[k - 1]) throw Error(ErrorKind::BadPartition, "indices must be sorted");
                if (seen[block[k]]++) throw Error(ErrorKind::BadPartition, "blocks overlap");
            }
        };
        mark(I_);
        mark(J_);
        if (I_.size() + J_.size() != n_) throw Error(ErrorKind::BadPartition, "blocks do not cover every index");
    }

    /// I = {0..size_i-1}, J = the rest.
    static Partition prefix(std::size_t n, std::size_t size_i) {
        std::vector<std::size_t> I, J;
        for (std::size_t i = 0; i < n; ++i) (i < size_i ? I : J).push_back(i);
        return Partition(n, std::move(I), std::move(J));
    }

    /// I = indices with mask[i] set.
    static Partition from_mask(const std::vector<bool>& mask) {
        std::vector<std::size_t> I, J;
        for (std::size_t i = 0; i < mask.size(); ++i) (mask[i] ? I : J).push_back(i);
        return Partition(mask.size(), std::move(I), std::move(J));
    }

    std::size_t n() const noexcept { return n_; }
    const std::vector<std::size_t>& I() const noexcept { return I_; }
    const std::vector<std::size_t>& J() const noexcept { return J_; }

private:
    std::size_t n_;
    std::vector<std::size_t> I_;
    std::vector<std::size_t> J_;
};

struct Homogenized {
    double mean = 0.0;
    ParamVec hom;
};

inline Homogenized homogenize(const ParamVec& p) {
    if (p.empty()) throw Error(ErrorKind::EmptyVector, "cannot homogenize an empty vector");
    const double mean = std::clamp(compensated_sum(p) / static_cast<double>(p.size()), 0.0, 1.0);
    return {mean, ParamVec::constant(p.size(), mean)};
}

namespace detail {

inline void require_probability(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::InvalidParam, std::string(what) + " must lie in [0,1]");
}

inline double block_mean(const ParamVec& p, const std::vector<std::size_t>& idx) {
    CompensatedSum s;
    for (auto i : idx) s += p[i];
    return std::clamp(s.value() / static_cast<double>(idx.size()), 0.0, 1.0);
}

/// rows[m] = P(Bin(m, theta) = .), m = 0..n, grown one trial at a time.
inline std::vector<std::vector<double>> binomial_rows(std::size_t n, double theta) {
    std::vector<std::vector<double>> rows;
    rows.reserve(n + 1);
    std::vector<double> f{1.0};
    rows.push_back(f);
    for (std::size_t m = 1; m <= n; ++m) {
        f.push_back(0.0);
        for (std::size_t k = m; k >= 1; --k) f[k] = (1.0 - theta) * f[k] + theta * f[k - 1];
        f[0] *= 1.0 - theta;
        rows.push_back(f);
    }
    return rows;
}

} // namespace detail

/// TV(Bin(n, a), Bin(n, b)); zero for n = 0.
inline double binom_tv(std::size_t n, double a, double b) {
    detail::require_probability(a, "a");
    detail::require_probability(b, "b");
    if (n == 0) return 0.0;
    return tv(binom_pmf(n, a), binom_pmf(n, b));
}

struct SplitCheck {
    double delta_N = 0.0;
    double delta_I = 0.0;
    double delta_J = 0.0;
    bool holds_factor2 = true;
    /// delta_I + delta_J - delta_I delta_J - delta_N. Recorded only; the sharper bound is open.
    double conjecture_slack = 0.0;

    double factor2_slack() const { return 2.0 * (delta_I + delta_J) - delta_N; }
};

/// delta_N <= 2 (delta_I + delta_J), where delta_A compares binomials at the block means.
inline SplitCheck split_bound_check(const ParamVec& p, const ParamVec& q, const Partition& part,
                                    double tol = kSlackTolerance) {
    detail::require_same_length(p, q);
    if (part.n() != p.size()) throw Error(ErrorKind::BadPartition, "partition size differs from vector length");
    if (part.I().empty() || part.J().empty()) throw Error(ErrorKind::EmptyPart, "both blocks must be nonempty");
    std::vector<std::size_t> all(p.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    SplitCheck out;
    out.delta_N = binom_tv(all.size(), detail::block_mean(p, all), detail::block_mean(q, all));
    out.delta_I = binom_tv(part.I().size(), detail::block_mean(p, part.I()), detail::block_mean(q, part.I()));
    out.delta_J = binom_tv(part.J().size(), detail::block_mean(p, part.J()), detail::block_mean(q, part.J()));
    out.holds_factor2 = out.delta_N <= 2.0 * (out.delta_I + out.delta_J) + tol;
    out.conjecture_slack = out.delta_I + out.delta_J - out.delta_I * out.delta_J - out.delta_N;
    return out;
}

/// Law of S_M = U_M + V_M with M ~ Bin(n, size_i / n), U_m ~ Bin(m, p_i),
/// V_m ~ Bin(n - m, p_j), built by explicit convolution and mixing.
inline Pmf mixture_law(std::size_t n, std::size_t size_i, double p_i, double p_j) {
    if (size_i < 1 || size_i + 1 > n)
        throw Error(ErrorKind::BadSplit, "need 1 <= sizeI <= n - 1, got sizeI = " + std::to_string(size_i) +
                                             ", n = " + std::to_string(n));
    detail::require_probability(p_i, "pI");
    detail::require_probability(p_j, "pJ");
    const double w = static_cast<double>(size_i) / static_cast<double>(n);
    const auto weights = detail::pb_masses(std::vector<double>(n, w));
    const auto u = detail::binomial_rows(n, p_i);
    const auto v = detail::binomial_rows(n, p_j);

    std::vector<CompensatedSum> acc(n + 1);
    for (std::size_t m = 0; m <= n; ++m) {
        const double wm = weights[m];
        if (wm == 0.0) continue;
        const auto& um = u[m];
        const auto& vm = v[n - m];
        for (std::size_t s = 0; s <= n; ++s) {
            double conv = 0.0;
            const std::size_t a_lo = s > n - m ? s - (n - m) : 0;
            const std::size_t a_hi = std::min(s, m);
            for (std::size_t a = a_lo; a <= a_hi; ++a) conv += um[a] * vm[s - a];
            acc[s] += wm * conv;
        }
    }
    std::vector<double> mass;
    mass.reserve(acc.size());
    for (const auto& c : acc) mass.push_back(c.value());
    return detail::make_pmf(std::move(mass));
}

/// Delete one uniformly random trial out of m + 1: k successes stay k with
/// probability (m+1-k)/(m+1) and drop to k-1 with probability k/(m+1).
inline Pmf delete_trial_kernel(const Pmf& x, std::size_t m) {
    const auto top = static_cast<std::int64_t>(m) + 1;
    if (x.min_support() < 0 || x.max_support() > top)
        throw Error(ErrorKind::SupportTooLarge, "input must be supported on {0.." + std::to_string(top) + "}");
    const double denom = static_cast<double>(m + 1);
    std::vector<double> out(m + 1, 0.0);
    for (std::size_t k = 0; k <= m; ++k) {
        const auto kk = static_cast<std::int64_t>(k);
        out[k] = x.at(kk) * (denom - static_cast<double>(k)) / denom +
                 x.at(kk + 1) * static_cast<double>(k + 1) / denom;
    }
    return detail::make_pmf(std::move(out));
}

/// f(m) = TV(Bin(m, theta), Bin(m, theta2)) for m = 0..m_max.
inline std::vector<double> binom_tv_family(double theta, double theta2, std::size_t m_max) {
    detail::require_probability(theta, "theta");
    detail::require_probability(theta2, "theta2");
    std::vector<double> f(m_max + 1, 0.0);
    std::vector<double> a{1.0}, b{1.0};
    for (std::size_t m = 1; m <= m_max; ++m) {
        a.push_back(0.0);
        b.push_back(0.0);
        for (std::size_t k = m; k >= 1; --k) {
            a[k] = (1.0 - theta) * a[k] + theta * a[k - 1];
            b[k] = (1.0 - theta2) * b[k] + theta2 * b[k - 1];
        }
        a[0] *= 1.0 - theta;
        b[0] *= 1.0 - theta2;
        CompensatedSum s;
        for (std::size_t k = 0; k <= m; ++k) s += std::abs(a[k] - b[k]);
        f[m] = std::clamp(0.5 * s.value(), 0.0, 1.0);
    }
    return f;
}

struct AveragingCheck {
    double expectation = 0.0;  ///< E f(M), M ~ Bin(n, m0 / n)
    double two_f_m0 = 0.0;
    bool holds = true;
};

/// E f(M) <= 2 f(m0) for M ~ Bin(n, m0/n), which has mean exactly m0.
inline AveragingCheck averaging_bound_check(std::size_t n, std::size_t m0, double theta, double theta2,
                                            double tol = kSlackTolerance) {
    if (m0 < 1 || m0 > n) throw Error(ErrorKind::BadSplit, "need 1 <= m0 <= n");
    const auto f = binom_tv_family(theta, theta2, n);
    const auto weights = detail::pb_masses(std::vector<double>(n, static_cast<double>(m0) / static_cast<double>(n)));
    CompensatedSum e;
    for (std::size_t m = 0; m <= n; ++m) e += weights[m] * f[m];
    AveragingCheck out;
    out.expectation = e.value();
    out.two_f_m0 = 2.0 * f[m0];
    out.holds = out.expectation <= out.two_f_m0 + tol;
    return out;
}

/// Homogenization does not increase Delta and does not decrease the variance.
struct HomogPhiCheck {
    double delta = 0.0;
    double delta_hom = 0.0;
    double sigma2_p = 0.0;
    double sigma2_p_hom = 0.0;
    bool holds = true;
};

inline HomogPhiCheck homog_phi_check(const ParamVec& p, const ParamVec& q, double tol = 1e-12) {
    detail::require_same_length(p, q);
    const auto hp = homogenize(p);
    const auto hq = homogenize(q);
    HomogPhiCheck out;
    out.delta = detail::l1_distance(p, q);
    out.delta_hom = detail::l1_distance(hp.hom, hq.hom);
    out.sigma2_p = moments(p).variance;
    out.sigma2_p_hom = static_cast<double>(p.size()) * hp.mean * (1.0 - hp.mean);
    out.holds = out.delta >= out.delta_hom - tol && out.sigma2_p <= out.sigma2_p_hom + tol;
    return out;
}

enum class LowerBoundSource { Bruteforce, Analytic };

struct HomogReport {
    std::size_t n = 0;
    double p_bar = 0.0;
    double q_bar = 0.0;
    double tv_product_lb = 0.0;  ///< exact TV(Ber(p), Ber(q)) or the analytic lower bound
    double tv_binom = 0.0;
    std::optional<double> ratio;  ///< tv_product_lb / tv_binom when tv_binom > 0
    double constant = Constants::homog_c;
    double slack = 0.0;  ///< tv_product_lb - constant * tv_binom
    bool constant_check = true;
    LowerBoundSource source = LowerBoundSource::Bruteforce;
};

/// TV(Ber(p), Ber(q)) >= TV(Bin(n, p_bar), Bin(n, q_bar)) / (48 C).
/// The left side is exact by enumeration when use_bruteforce (n <= 20), otherwise
/// the sign-split analytic lower bound.
inline HomogReport homog_certificate(const ParamVec& p, const ParamVec& q, bool use_bruteforce,
                                     double tol = kSlackTolerance) {
    detail::require_same_length(p, q);
    if (p.empty()) throw Error(ErrorKind::EmptyVector, "certificate needs n >= 1");
    if (use_bruteforce && p.size() > kMaxBruteforce)
        throw Error(ErrorKind::TooLargeForBruteforce, "n = " + std::to_string(p.size()) + " exceeds the enumeration cap");
    HomogReport r;
    r.n = p.size();
    r.p_bar = homogenize(p).mean;
    r.q_bar = homogenize(q).mean;
    r.tv_binom = binom_tv(r.n, r.p_bar, r.q_bar);
    r.source = use_bruteforce ? LowerBoundSource::Bruteforce : LowerBoundSource::Analytic;
    r.tv_product_lb = use_bruteforce ? product_tv_bruteforce(p, q) : tv_ber_lower(p, q);
    if (r.tv_binom > 0.0) r.ratio = r.tv_product_lb / r.tv_binom;
    r.slack = r.tv_product_lb - r.constant * r.tv_binom;
    r.constant_check = r.slack >= -tol;
    return r;
}

inline void to_json(nlohmann::json& j, const HomogReport& r) {
    j = nlohmann::json{{"schema", "pbtv/1"},
                       {"n", r.n},
                       {"p_bar", r.p_bar},
                       {"q_bar", r.q_bar},
                       {"tv_product_lb", r.tv_product_lb},
                       {"tv_binom", r.tv_binom},
                       {"ratio", r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json(nullptr)},
                       {"constant", r.constant},
                       {"slack", r.slack},
                       {"constant_check", r.constant_check},
                       {"source", r.source == LowerBoundSource::Bruteforce ? "bruteforce" : "analytic"}};
}

inline const std::vector<std::string>& homog_report_csv_columns() {
    static const std::vector<std::string> cols{"n",     "p_bar",    "q_bar", "tv_product_lb", "tv_binom",
                                               "ratio", "constant", "slack", "constant_check", "source"};
    return cols;
}

inline std::string to_csv_row(const HomogReport& r) {
    auto num = [](double x) { return detail::fmt_double(x); };
    return detail::join_csv({std::to_string(r.n), num(r.p_bar), num(r.q_bar), num(r.tv_product_lb), num(r.tv_binom),
                             r.ratio ? num(*r.ratio) : std::string(), num(r.constant), num(r.slack),
                             r.constant_check ? "1" : "0",
                             r.source == LowerBoundSource::Bruteforce ? "bruteforce" : "analytic"});
}

} // namespace pbtv
