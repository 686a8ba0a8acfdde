#pragma once

// Seeded instance generation, certification sweeps over named invariant
// families, derivative-free extremal search, and report serialization.
//
// Every random draw is keyed by (seed, instance index, stream), so instance i
// is the same no matter which worker produces it or in what order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <exception>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "pbtv/bounds.hpp"
#include "pbtv/core.hpp"
#include "pbtv/error.hpp"
#include "pbtv/homog.hpp"
#include "pbtv/oracle.hpp"

namespace pbtv {

// ---------------------------------------------------------------------------
// Random streams

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Engine for one (seed, index, stream) key. Conversions to doubles are done
/// here rather than through <random> distributions, whose output is not
/// specified bit-for-bit across standard libraries.
class InstanceRng {
public:
    InstanceRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0)
        : engine_(splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (stream * 0xd1342543de82ef95ULL))) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0,1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform on {0..n-1}; n > 0.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Configuration

enum class GenMode { Uniform, Dominating, NearEqual, BoundaryHeavy, AdversarialFamily };
enum class Family { Homog, Counterexample };

inline std::string_view to_string(GenMode m) {
    switch (m) {
        case GenMode::Uniform: return "uniform";
        case GenMode::Dominating: return "dominating";
        case GenMode::NearEqual: return "near-equal";
        case GenMode::BoundaryHeavy: return "boundary-heavy";
        case GenMode::AdversarialFamily: return "adversarial-family";
    }
    return "?";
}

inline GenMode parse_mode(std::string_view s) {
    for (auto m : {GenMode::Uniform, GenMode::Dominating, GenMode::NearEqual, GenMode::BoundaryHeavy,
                   GenMode::AdversarialFamily})
        if (to_string(m) == s) return m;
    throw Error(ErrorKind::BadConfig, "unknown generator mode '" + std::string(s) + "'");
}

inline std::string_view to_string(Family f) { return f == Family::Homog ? "homog" : "counterexample"; }

inline Family parse_family(std::string_view s) {
    if (s == "homog") return Family::Homog;
    if (s == "counterexample") return Family::Counterexample;
    throw Error(ErrorKind::BadConfig, "unknown adversarial family '" + std::string(s) + "'");
}

struct GenConfig {
    std::size_t n_min = 1;
    std::size_t n_max = 20;
    GenMode mode = GenMode::Uniform;
    std::optional<double> epsilon;  ///< adversarial-family only; drawn per instance when absent
    Family family = Family::Homog;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    double boundary_fraction = 0.3;  ///< boundary-heavy only

    void validate() const {
        if (n_min > n_max) throw Error(ErrorKind::BadConfig, "n range is empty");
        if (!(boundary_fraction >= 0.0 && boundary_fraction <= 1.0))
            throw Error(ErrorKind::BadConfig, "boundary fraction must lie in [0,1]");
        if (epsilon) {
            const double hi = family == Family::Homog ? 0.25 : 0.5;
            if (!(*epsilon > 0.0 && *epsilon <= hi))
                throw Error(ErrorKind::BadConfig, "epsilon must lie in (0, " + detail::fmt_double(hi) + "]");
        }
    }
};

/// "7", "1..200" or "1-200".
inline std::pair<std::size_t, std::size_t> parse_n_range(std::string_view s) {
    auto to_count = [&](std::string_view part) -> std::size_t {
        if (part.empty()) throw Error(ErrorKind::BadConfig, "bad n range '" + std::string(s) + "'");
        std::size_t v = 0;
        for (char c : part) {
            if (c < '0' || c > '9') throw Error(ErrorKind::BadConfig, "bad n range '" + std::string(s) + "'");
            v = v * 10 + static_cast<std::size_t>(c - '0');
        }
        return v;
    };
    if (auto pos = s.find(".."); pos != std::string_view::npos) {
        const auto lo = to_count(s.substr(0, pos)), hi = to_count(s.substr(pos + 2));
        if (lo > hi) throw Error(ErrorKind::BadConfig, "bad n range '" + std::string(s) + "'");
        return {lo, hi};
    }
    if (auto pos = s.find('-'); pos != std::string_view::npos) {
        const auto lo = to_count(s.substr(0, pos)), hi = to_count(s.substr(pos + 1));
        if (lo > hi) throw Error(ErrorKind::BadConfig, "bad n range '" + std::string(s) + "'");
        return {lo, hi};
    }
    const auto v = to_count(s);
    return {v, v};
}

// ---------------------------------------------------------------------------
// Instances

struct Instance {
    std::size_t index = 0;
    ParamVec p;
    ParamVec q;
};

/// (max, min) coordinatewise: the dominating pair on the same coordinates.
inline std::pair<ParamVec, ParamVec> make_dominating(const ParamVec& p, const ParamVec& q) {
    detail::require_same_length(p, q);
    std::vector<double> hi(p.size()), lo(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        hi[i] = std::max(p[i], q[i]);
        lo[i] = std::min(p[i], q[i]);
    }
    return {ParamVec(std::move(hi)), ParamVec(std::move(lo))};
}

/// p = (1 - 2 eps, 1/2), q = (1, 1/2 + eps): homogenization can increase TV; ratio -> 8/9.
inline std::pair<ParamVec, ParamVec> homog_family(double eps) {
    return {ParamVec{1.0 - 2.0 * eps, 0.5}, ParamVec{1.0, 0.5 + eps}};
}

/// p = (1, 0, 1/2), q = (0, 1, 1/2 + eps): TV(S_p, S_q) = eps while Phi(p, q) = 1.
inline std::pair<ParamVec, ParamVec> counterexample_family(double eps) {
    return {ParamVec{1.0, 0.0, 0.5}, ParamVec{0.0, 1.0, 0.5 + eps}};
}

/// Instance `index` of the stream described by cfg.
inline Instance gen_instance(const GenConfig& cfg, std::size_t index) {
    InstanceRng rng(cfg.seed, index, 0);
    Instance inst;
    inst.index = index;
    if (cfg.mode == GenMode::AdversarialFamily) {
        // 10^-u with u in [1, 4]: eps in [1e-4, 0.1].
        const double eps = cfg.epsilon ? *cfg.epsilon : std::pow(10.0, -rng.uniform(1.0, 4.0));
        auto [p, q] = cfg.family == Family::Homog ? homog_family(eps) : counterexample_family(eps);
        inst.p = std::move(p);
        inst.q = std::move(q);
        return inst;
    }
    const std::size_t n = cfg.n_min + static_cast<std::size_t>(rng.below(cfg.n_max - cfg.n_min + 1));
    std::vector<double> p(n), q(n);
    switch (cfg.mode) {
        case GenMode::Uniform:
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = rng.uniform();
                q[i] = rng.uniform();
            }
            break;
        case GenMode::Dominating:
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = rng.uniform();
                q[i] = p[i] * rng.uniform();
            }
            break;
        case GenMode::NearEqual: {
            const double h = std::pow(10.0, -rng.uniform(1.0, 6.0));
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = rng.uniform();
                q[i] = std::clamp(p[i] + h * rng.uniform(-1.0, 1.0), 0.0, 1.0);
            }
            break;
        }
        case GenMode::BoundaryHeavy:
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = rng.uniform() < cfg.boundary_fraction ? static_cast<double>(rng.below(2)) : rng.uniform();
                q[i] = rng.uniform() < cfg.boundary_fraction ? static_cast<double>(rng.below(2)) : rng.uniform();
            }
            break;
        case GenMode::AdversarialFamily: break;
    }
    inst.p = ParamVec(std::move(p));
    inst.q = ParamVec(std::move(q));
    return inst;
}

inline std::vector<Instance> gen_instances(const GenConfig& cfg) {
    cfg.validate();
    std::vector<Instance> out;
    out.reserve(cfg.count);
    for (std::size_t i = 0; i < cfg.count; ++i) out.push_back(gen_instance(cfg, i));
    return out;
}

// ---------------------------------------------------------------------------
// Records and reports

struct SearchRecord {
    ParamVec p;
    ParamVec q;
    double objective = 0.0;
    std::string objective_kind;
    std::uint64_t seed = 0;
    std::size_t iteration = 0;
    std::optional<std::size_t> split;  ///< |I| for split objectives (I = leading coordinates)
    std::string timestamp;             ///< ISO-8601; left empty by the library
};

struct Observation {
    std::string name;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    std::size_t samples = 0;
};

struct SuiteReport {
    std::string suite;
    GenConfig config;
    std::size_t instances = 0;
    std::size_t checks = 0;
    std::vector<SearchRecord> violations;
    std::optional<SearchRecord> min_slack;
    std::optional<SearchRecord> max_slack;
    std::vector<Observation> observations;
    double duration_seconds = 0.0;

    bool passed() const noexcept { return violations.empty(); }
    const Observation* observation(std::string_view name) const {
        for (const auto& o : observations)
            if (o.name == name) return &o;
        return nullptr;
    }
};

struct Tolerances {
    double slack = kSlackTolerance;  ///< inequality certifications
    double oracle = 1e-12;           ///< agreement with exact oracles
    double derivative = 1e-6;        ///< analytic vs central differences
};

// ---------------------------------------------------------------------------
// Suites

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"thm1",        "thm2",    "thm3",      "j-bound",
                                                "pigeonhole",  "bcv-peak", "split-lemma", "mixture",
                                                "homog-main",  "unimodality", "derivative"};
    return names;
}

struct InstanceOutcome {
    std::vector<Check> checks;
    std::vector<std::pair<std::string, double>> observations;
    std::optional<std::size_t> split;
    ParamVec p;
    ParamVec q;
};

namespace detail {

inline double sup_norm(const Pmf& a, const Pmf& b) {
    const auto lo = std::min(a.min_support(), b.min_support());
    const auto hi = std::max(a.max_support(), b.max_support());
    double m = 0.0;
    for (auto k = lo; k <= hi; ++k) m = std::max(m, std::abs(a.at(k) - b.at(k)));
    return m;
}

inline const Check* check_named(const BoundReport& r, std::string_view name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

inline void copy_checks(const BoundReport& r, std::initializer_list<std::string_view> names, std::vector<Check>& out) {
    for (auto n : names)
        if (const Check* c = check_named(r, n)) out.push_back(*c);
}

inline void shape_checks(const std::string& tag, const Pmf& x, double tol, std::vector<Check>& out) {
    const bool uni = is_unimodal(x);
    out.push_back(make_check(tag + "_unimodal", uni ? 0.0 : -1.0, tol));
    out.push_back(make_check(tag + "_log_concave", is_log_concave(x) ? 0.0 : -1.0, tol));
    if (uni) out.push_back(make_check(tag + "_shift_tv", -std::abs(shift_tv(x) - tv(x, x.shifted(1))), tol));
}

inline void peak_check(const std::string& tag, const ParamVec& p, double tol, std::vector<Check>& out) {
    const double v = moments(p).variance;
    if (!(v > 0.0)) return;
    out.push_back(make_check(tag + "_bcv_peak", Constants::eta_bcv / std::sqrt(v) - pb_pmf(p).peak(), tol));
}

} // namespace detail

inline bool suite_needs_dominating(std::string_view suite) {
    return suite == "thm2" || suite == "j-bound" || suite == "pigeonhole";
}

/// Runs one named invariant family on one instance.
inline InstanceOutcome evaluate_instance(std::string_view suite, const GenConfig& cfg, const Instance& inst,
                                         const Tolerances& tol) {
    InstanceOutcome out;
    out.p = inst.p;
    out.q = inst.q;
    if (suite_needs_dominating(suite)) std::tie(out.p, out.q) = make_dominating(inst.p, inst.q);
    const ParamVec& p = out.p;
    const ParamVec& q = out.q;
    const std::size_t n = p.size();
    // Suite-specific randomness lives on its own stream so the pair itself is unchanged.
    InstanceRng rng(cfg.seed, inst.index, 1);
    auto& checks = out.checks;

    if (suite == "thm1") {
        detail::copy_checks(certify_pair(p, q, tol.slack), {"thm1_upper", "symmetric_upper"}, checks);
    } else if (suite == "thm2") {
        const BoundReport r = certify_pair(p, q, tol.slack);
        detail::copy_checks(r, {"thm2_lower", "g_nonnegative", "g_sum_eq_delta", "tv_ge_sup_g"}, checks);
        if (r.phi_pq > 0.0) out.observations.emplace_back("tv_over_phi", r.tv_pb / r.phi_pq);
    } else if (suite == "j-bound") {
        detail::copy_checks(certify_pair(p, q, tol.slack), {"j_bound"}, checks);
    } else if (suite == "pigeonhole") {
        detail::copy_checks(certify_pair(p, q, tol.slack), {"pigeonhole", "tv_ge_sup_g"}, checks);
    } else if (suite == "thm3") {
        const double lower = tv_ber_lower(p, q);
        if (n <= kMaxBruteforce) {
            const double exact = product_tv_bruteforce(p, q);
            checks.push_back(make_check("thm3_lower", exact - lower, tol.slack));
            checks.push_back(make_check("data_processing", exact - tv(pb_pmf(p), pb_pmf(q)), tol.oracle));
        } else {
            // Beyond enumeration: each block's PB distance lower-bounds the product distance.
            const SignSplit s = sign_split(p, q);
            if (!s.I.empty()) {
                const auto pi = p.select(s.I), qi = q.select(s.I);
                checks.push_back(make_check("thm3_block_I",
                                            tv(pb_pmf(pi), pb_pmf(qi)) - Constants::lower_c * phi(pi, qi), tol.slack));
            }
            if (!s.J.empty()) {
                const auto pj = p.select(s.J), qj = q.select(s.J);
                checks.push_back(make_check("thm3_block_J",
                                            tv(pb_pmf(pj), pb_pmf(qj)) - Constants::lower_c * phi(qj, pj), tol.slack));
            }
        }
    } else if (suite == "bcv-peak") {
        detail::peak_check("p", p, tol.oracle, checks);
        detail::peak_check("q", q, tol.oracle, checks);
    } else if (suite == "split-lemma") {
        std::vector<bool> mask(n);
        for (std::size_t i = 0; i < n; ++i) mask[i] = rng.below(2) == 1;
        // Force both blocks nonempty.
        const std::size_t a = rng.below(n);
        std::size_t b = rng.below(n - 1);
        if (b >= a) ++b;
        mask[a] = true;
        mask[b] = false;
        const SplitCheck sc = split_bound_check(p, q, Partition::from_mask(mask), tol.slack);
        checks.push_back(make_check("split_factor2", sc.factor2_slack(), tol.slack));
        out.observations.emplace_back("conjecture_slack", sc.conjecture_slack);
    } else if (suite == "mixture") {
        const std::size_t size_i = 1 + static_cast<std::size_t>(rng.below(n - 1));
        const double p_i = p[0], p_j = q[0];
        const Pmf mix = mixture_law(n, size_i, p_i, p_j);
        const double pooled = std::clamp(
            (static_cast<double>(size_i) * p_i + static_cast<double>(n - size_i) * p_j) / static_cast<double>(n), 0.0,
            1.0);
        const Pmf bin = binom_pmf(n, pooled);
        checks.push_back(make_check("mixture_identity", -detail::sup_norm(mix, bin), tol.oracle));
        checks.push_back(make_check("mixture_mean", -std::abs(mix.mean() - static_cast<double>(n) * pooled), tol.slack));
        out.split = size_i;
    } else if (suite == "homog-main") {
        const HomogReport r = homog_certificate(p, q, n <= kMaxBruteforce, tol.slack);
        checks.push_back(make_check(n <= kMaxBruteforce ? "homog_bruteforce" : "homog_analytic", r.slack, tol.slack));
        const HomogPhiCheck hc = homog_phi_check(p, q);
        checks.push_back(make_check("homog_delta", hc.delta - hc.delta_hom, tol.oracle));
        checks.push_back(make_check("homog_variance", hc.sigma2_p_hom - hc.sigma2_p, tol.oracle));
        if (r.ratio) out.observations.emplace_back("homog_ratio", *r.ratio);
    } else if (suite == "unimodality") {
        detail::shape_checks("p", pb_pmf(p), tol.oracle, checks);
        detail::shape_checks("q", pb_pmf(q), tol.oracle, checks);
    } else if (suite == "derivative") {
        constexpr double h = 1e-5;
        const InterpPath path(p, q);
        const double t = rng.uniform(h, 1.0 - h);
        std::set<std::int64_t> members;
        for (std::size_t k = 0; k <= n; ++k)
            if (rng.below(2)) members.insert(static_cast<std::int64_t>(k));
        const EventSet A(std::move(members));
        const double analytic = f_A_derivative(path, t, A);
        const double fd = (f_A(path, t + h, A) - f_A(path, t - h, A)) / (2.0 * h);
        checks.push_back(make_check("derivative_fd", -std::abs(analytic - fd), tol.derivative));
        const VariancePathCheck vc = variance_path_check(path, t);
        checks.push_back(make_check("variance_path", vc.var_t - vc.lower_hull, tol.oracle));
    } else {
        throw Error(ErrorKind::UnknownSuite, "unknown suite '" + std::string(suite) + "'");
    }
    return out;
}

inline bool is_known_suite(std::string_view name) {
    const auto& names = suite_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

/// Certification sweep of `suite` over the stream cfg describes. Instances are
/// evaluated on `workers` threads in fixed-size blocks and reduced in index order.
inline SuiteReport run_suite(const std::string& suite, const GenConfig& cfg, const Tolerances& tol = {},
                             unsigned workers = 1) {
    if (!is_known_suite(suite)) throw Error(ErrorKind::UnknownSuite, "unknown suite '" + suite + "'");
    cfg.validate();
    if ((suite == "split-lemma" || suite == "mixture") && cfg.count > 0 && cfg.n_min < 2 &&
        cfg.mode != GenMode::AdversarialFamily)
        throw Error(ErrorKind::BadConfig, "suite '" + suite + "' needs n >= 2");

    const auto start = std::chrono::steady_clock::now();
    SuiteReport report;
    report.suite = suite;
    report.config = cfg;
    workers = std::max(1u, workers);

    constexpr std::size_t kBlock = 1024;
    std::vector<InstanceOutcome> block;
    for (std::size_t base = 0; base < cfg.count; base += kBlock) {
        const std::size_t len = std::min(kBlock, cfg.count - base);
        block.assign(len, InstanceOutcome{});
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        auto work = [&](unsigned w) {
            try {
                for (std::size_t j; (j = next.fetch_add(1)) < len;)
                    block[j] = evaluate_instance(suite, cfg, gen_instance(cfg, base + j), tol);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);

        for (std::size_t j = 0; j < len; ++j) {
            const auto& o = block[j];
            const std::size_t idx = base + j;
            auto record = [&](const Check& c) {
                SearchRecord r;
                r.p = o.p;
                r.q = o.q;
                r.objective = c.slack;
                r.objective_kind = c.name;
                r.seed = cfg.seed;
                r.iteration = idx;
                r.split = o.split;
                return r;
            };
            for (const auto& c : o.checks) {
                ++report.checks;
                if (!c.pass) report.violations.push_back(record(c));
                if (!report.min_slack || c.slack < report.min_slack->objective) report.min_slack = record(c);
                if (!report.max_slack || c.slack > report.max_slack->objective) report.max_slack = record(c);
            }
            for (const auto& [name, value] : o.observations) {
                auto it = std::find_if(report.observations.begin(), report.observations.end(),
                                       [&](const Observation& ob) { return ob.name == name; });
                if (it == report.observations.end()) {
                    report.observations.push_back(Observation{name});
                    it = std::prev(report.observations.end());
                }
                if (value < it->min) {
                    it->min = value;
                    it->argmin = idx;
                }
                it->max = std::max(it->max, value);
                ++it->samples;
            }
        }
        report.instances += len;
    }
    report.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// ---------------------------------------------------------------------------
// Extremal search

enum class SearchKind { HomogRatio, TvOverPhi, SplitConjectureSlack };

inline std::string_view to_string(SearchKind k) {
    switch (k) {
        case SearchKind::HomogRatio: return "homog-ratio";
        case SearchKind::TvOverPhi: return "tv-over-phi";
        case SearchKind::SplitConjectureSlack: return "split-conjecture-slack";
    }
    return "?";
}

inline SearchKind parse_search_kind(std::string_view s) {
    for (auto k : {SearchKind::HomogRatio, SearchKind::TvOverPhi, SearchKind::SplitConjectureSlack})
        if (to_string(k) == s) return k;
    throw Error(ErrorKind::BadConfig, "unknown search kind '" + std::string(s) + "'");
}

inline constexpr std::size_t kHomogSearchMaxN = 16;

/// Objective for one candidate; +infinity where it is undefined (zero denominators).
inline double search_objective(SearchKind kind, const ParamVec& p, const ParamVec& q, std::size_t split = 0) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind) {
        case SearchKind::HomogRatio: {
            const double denom = binom_tv(p.size(), homogenize(p).mean, homogenize(q).mean);
            if (!(denom > 1e-12)) return inf;
            return product_tv_bruteforce(p, q) / denom;
        }
        case SearchKind::TvOverPhi: {
            const double f = phi(p, q);
            if (!(f > 0.0)) return inf;
            return tv(pb_pmf(p), pb_pmf(q)) / f;
        }
        case SearchKind::SplitConjectureSlack:
            return split_bound_check(p, q, Partition::prefix(p.size(), split)).conjecture_slack;
    }
    return inf;
}

inline double recompute_objective(const SearchRecord& r) {
    return search_objective(parse_search_kind(r.objective_kind), r.p, r.q, r.split.value_or(0));
}

namespace detail {

/// Golden-section minimization of f on [lo, hi].
inline std::pair<double, double> golden_section(const std::function<double(double)>& f, double lo, double hi,
                                                int iterations) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iterations; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

} // namespace detail

/// Multi-start random search (cfg.count starts) followed by rounds of coordinate-wise
/// golden-section refinement. Deterministic given cfg.
inline SearchRecord search_min_ratio(SearchKind kind, const GenConfig& cfg, std::size_t refine_steps,
                                     int golden_iterations = 40) {
    cfg.validate();
    if (cfg.count == 0) throw Error(ErrorKind::BadConfig, "search needs at least one start");
    if (kind == SearchKind::HomogRatio && cfg.mode != GenMode::AdversarialFamily && cfg.n_max > kHomogSearchMaxN)
        throw Error(ErrorKind::BadConfig, "homog-ratio search enumerates 2^n outcomes; n must be <= 16");
    if (kind == SearchKind::SplitConjectureSlack && cfg.mode != GenMode::AdversarialFamily && cfg.n_min < 2)
        throw Error(ErrorKind::BadConfig, "split search needs n >= 2");

    std::optional<SearchRecord> best;
    for (std::size_t s = 0; s < cfg.count; ++s) {
        Instance inst = gen_instance(cfg, s);
        std::vector<double> p = inst.p.vec(), q = inst.q.vec();
        if (kind == SearchKind::TvOverPhi) {
            auto [hp, lq] = make_dominating(inst.p, inst.q);
            p = hp.vec();
            q = lq.vec();
        }
        const std::size_t n = p.size();
        std::size_t split = 0;
        if (kind == SearchKind::SplitConjectureSlack) {
            if (n < 2) throw Error(ErrorKind::BadConfig, "split search needs n >= 2");
            InstanceRng rng(cfg.seed, s, 2);
            split = 1 + static_cast<std::size_t>(rng.below(n - 1));
        }
        auto eval = [&](const std::vector<double>& pp, const std::vector<double>& qq) {
            return search_objective(kind, ParamVec(pp), ParamVec(qq), split);
        };
        double value = eval(p, q);
        for (std::size_t round = 0; round < refine_steps; ++round) {
            for (std::size_t c = 0; c < 2 * n; ++c) {
                const bool on_p = c < n;
                const std::size_t i = on_p ? c : c - n;
                double lo = 0.0, hi = 1.0;
                if (kind == SearchKind::TvOverPhi) {
                    if (on_p)
                        lo = q[i];
                    else
                        hi = p[i];
                }
                if (!(hi > lo)) continue;
                auto along = [&](double x) {
                    auto pp = p;
                    auto qq = q;
                    (on_p ? pp : qq)[i] = x;
                    return eval(pp, qq);
                };
                const auto [x, fx] = detail::golden_section(along, lo, hi, golden_iterations);
                if (fx < value) {
                    (on_p ? p : q)[i] = x;
                    value = fx;
                }
            }
        }
        if (!best || value < best->objective) {
            SearchRecord r;
            r.p = ParamVec(p);
            r.q = ParamVec(q);
            r.objective = value;
            r.objective_kind = std::string(to_string(kind));
            r.seed = cfg.seed;
            r.iteration = s;
            if (kind == SearchKind::SplitConjectureSlack) r.split = split;
            best = std::move(r);
        }
    }
    return *best;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr std::string_view kSchema = "pbtv/1";

namespace detail {

inline std::string join_params(const ParamVec& p) {
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ';';
        out += fmt_double(p[i]);
    }
    return out;
}

} // namespace detail

inline void to_json(nlohmann::json& j, const SearchRecord& r) {
    j = nlohmann::json{{"p", r.p.vec()},
                       {"q", r.q.vec()},
                       {"objective", r.objective},
                       {"objective_kind", r.objective_kind},
                       {"seed", r.seed},
                       {"iteration", r.iteration}};
    if (r.split) j["split"] = *r.split;
    if (!r.timestamp.empty()) j["timestamp"] = r.timestamp;
}

inline void to_json(nlohmann::json& j, const Observation& o) {
    j = nlohmann::json{{"name", o.name}, {"min", o.min}, {"max", o.max}, {"argmin", o.argmin}, {"samples", o.samples}};
}

struct EmitOptions {
    bool include_timing = false;  ///< emit wall-clock duration
};

inline nlohmann::json suite_report_json(const SuiteReport& r, const EmitOptions& opt = {}) {
    const auto& c = r.config;
    nlohmann::json j{{"schema", kSchema},
                     {"suite", r.suite},
                     {"config",
                      {{"n_min", c.n_min},
                       {"n_max", c.n_max},
                       {"mode", to_string(c.mode)},
                       {"family", to_string(c.family)},
                       {"epsilon", c.epsilon ? nlohmann::json(*c.epsilon) : nlohmann::json(nullptr)},
                       {"seed", c.seed},
                       {"count", c.count},
                       {"boundary_fraction", c.boundary_fraction}}},
                     {"instances", r.instances},
                     {"checks", r.checks},
                     {"passed", r.passed()},
                     {"violations", r.violations},
                     {"min_slack", r.min_slack ? nlohmann::json(*r.min_slack) : nlohmann::json(nullptr)},
                     {"max_slack", r.max_slack ? nlohmann::json(*r.max_slack) : nlohmann::json(nullptr)},
                     {"observations", r.observations}};
    if (opt.include_timing) j["duration_seconds"] = r.duration_seconds;
    return j;
}

/// CSV layout, one record per row:
///   row_kind,suite,check,instance,seed,n,value,p,q
/// row_kind is violation | min_slack | max_slack | observation_min | summary.
/// p and q are ';'-separated. The summary row carries the instance count in
/// `instance` and the violation count in `value`. An empty report is header-only.
inline const std::vector<std::string>& suite_csv_columns() {
    static const std::vector<std::string> cols{"row_kind", "suite", "check", "instance", "seed",
                                               "n",        "value", "p",     "q"};
    return cols;
}

inline std::string suite_report_csv(const SuiteReport& r, const EmitOptions& opt = {}) {
    std::ostringstream out;
    out << detail::join_csv(suite_csv_columns()) << '\n';
    if (r.instances == 0) return out.str();
    auto row = [&](std::string_view kind, const SearchRecord& rec) {
        out << detail::join_csv({std::string(kind), r.suite, rec.objective_kind, std::to_string(rec.iteration),
                                 std::to_string(rec.seed), std::to_string(rec.p.size()), detail::fmt_double(rec.objective),
                                 detail::join_params(rec.p), detail::join_params(rec.q)})
            << '\n';
    };
    for (const auto& v : r.violations) row("violation", v);
    if (r.min_slack) row("min_slack", *r.min_slack);
    if (r.max_slack) row("max_slack", *r.max_slack);
    for (const auto& o : r.observations)
        out << detail::join_csv({"observation_min", r.suite, o.name, std::to_string(o.argmin),
                                 std::to_string(r.config.seed), "", detail::fmt_double(o.min), "", ""})
            << '\n';
    std::string summary_check = opt.include_timing ? "duration=" + detail::fmt_double(r.duration_seconds) : "";
    out << detail::join_csv({"summary", r.suite, summary_check, std::to_string(r.instances),
                             std::to_string(r.config.seed), "", std::to_string(r.violations.size()), "", ""})
        << '\n';
    return out.str();
}

enum class EmitFormat { Json, Csv };

inline std::string render(const SuiteReport& r, EmitFormat fmt, const EmitOptions& opt = {}) {
    return fmt == EmitFormat::Json ? suite_report_json(r, opt).dump(2) + "\n" : suite_report_csv(r, opt);
}

/// Writes the report to `path`.
inline void emit(const SuiteReport& r, EmitFormat fmt, const std::string& path, const EmitOptions& opt = {}) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
    f << render(r, fmt, opt);
    if (!f) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

} // namespace pbtv
