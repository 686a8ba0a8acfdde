#pragma once

// Exponential-time ground truth for small n, plus the interpolation-path
// identities: f_A(t) = P(S(t) in A) along r_i(t) = (1-t) q_i + t p_i, its
// derivative via leave-one-out laws, and the quadrature reconstruction of g(k).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <vector>

#include "pbtv/bounds.hpp"
#include "pbtv/core.hpp"
#include "pbtv/error.hpp"

namespace pbtv {

inline constexpr std::size_t kMaxBruteforce = 20;

namespace detail {

inline void require_bruteforce_size(std::size_t n) {
    if (n > kMaxBruteforce)
        throw Error(ErrorKind::TooLarge, "enumeration over 2^" + std::to_string(n) + " outcomes exceeds the cap of 2^" +
                                             std::to_string(kMaxBruteforce));
}

// Depth-first walk over {0,1}^n carrying both product masses. Leaves are
// visited in lexicographic order so reductions are bit-stable.
template <class Leaf>
void enumerate_products(std::span<const double> p, std::span<const double> q, std::size_t i, double mp, double mq,
                        std::size_t ones, Leaf& leaf) {
    if (i == p.size()) {
        leaf(mp, mq, ones);
        return;
    }
    enumerate_products(p, q, i + 1, mp * (1.0 - p[i]), mq * (1.0 - q[i]), ones, leaf);
    enumerate_products(p, q, i + 1, mp * p[i], mq * q[i], ones + 1, leaf);
}

} // namespace detail

/// TV(Ber(p), Ber(q)) on {0,1}^n by full enumeration. n <= 20.
inline double product_tv_bruteforce(const ParamVec& p, const ParamVec& q) {
    detail::require_same_length(p, q);
    detail::require_bruteforce_size(p.size());
    CompensatedSum s;
    auto leaf = [&s](double mp, double mq, std::size_t) { s += std::abs(mp - mq); };
    detail::enumerate_products(p.values(), q.values(), 0, 1.0, 1.0, 0, leaf);
    return std::clamp(0.5 * s.value(), 0.0, 1.0);
}

/// Law of S_p accumulated outcome by outcome. n <= 20.
inline Pmf pb_pmf_bruteforce(const ParamVec& p) {
    detail::require_bruteforce_size(p.size());
    std::vector<CompensatedSum> bins(p.size() + 1);
    auto leaf = [&bins](double mp, double, std::size_t ones) { bins[ones] += mp; };
    detail::enumerate_products(p.values(), p.values(), 0, 1.0, 1.0, 0, leaf);
    std::vector<double> mass;
    mass.reserve(bins.size());
    for (const auto& b : bins) mass.push_back(b.value());
    return detail::make_pmf(std::move(mass));
}

/// A finite event A in Z.
class EventSet {
public:
    EventSet() = default;
    explicit EventSet(std::set<std::int64_t> members) : members_(std::move(members)) {}
    EventSet(std::initializer_list<std::int64_t> members) : members_(members) {}

    static EventSet range(std::int64_t lo, std::int64_t hi) {
        std::set<std::int64_t> m;
        for (auto k = lo; k <= hi; ++k) m.insert(k);
        return EventSet(std::move(m));
    }

    bool contains(std::int64_t k) const { return members_.count(k) != 0; }
    const std::set<std::int64_t>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }

private:
    std::set<std::int64_t> members_;
};

/// Linear path between parameter vectors: r(0) = q, r(1) = p.
class InterpPath {
public:
    InterpPath(ParamVec p, ParamVec q) : p_(std::move(p)), q_(std::move(q)) { detail::require_same_length(p_, q_); }

    const ParamVec& p() const noexcept { return p_; }
    const ParamVec& q() const noexcept { return q_; }
    std::size_t size() const noexcept { return p_.size(); }

    std::vector<double> params_at(double t) const {
        std::vector<double> r(p_.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::clamp((1.0 - t) * q_[i] + t * p_[i], 0.0, 1.0);
        return r;
    }

    Pmf law_at(double t) const {
        require_unit(t);
        return detail::make_pmf(detail::pb_masses(params_at(t)));
    }

    static void require_unit(double t) {
        if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidParam, "t must lie in [0,1]");
    }

private:
    ParamVec p_;
    ParamVec q_;
};

namespace detail {

inline double event_mass(std::span<const double> masses, const EventSet& A, std::int64_t shift = 0) {
    CompensatedSum s;
    for (auto k : A.members()) {
        const auto j = k - shift;
        if (j >= 0 && j < static_cast<std::int64_t>(masses.size())) s += masses[static_cast<std::size_t>(j)];
    }
    return s.value();
}

} // namespace detail

/// P(S(t) in A).
inline double f_A(const InterpPath& path, double t, const EventSet& A) {
    InterpPath::require_unit(t);
    return detail::event_mass(detail::pb_masses(path.params_at(t)), A);
}

/// f_A'(t) = sum_i (p_i - q_i) (P(T_i(t) + 1 in A) - P(T_i(t) in A)), T_i the leave-one-out sum.
inline double f_A_derivative(const InterpPath& path, double t, const EventSet& A) {
    InterpPath::require_unit(t);
    const auto r = path.params_at(t);
    CompensatedSum s;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = path.p()[i] - path.q()[i];
        if (d == 0.0) continue;
        const auto ti = detail::pb_masses_without(r, i);
        s += d * (detail::event_mass(ti, A, 1) - detail::event_mass(ti, A, 0));
    }
    return s.value();
}

struct VariancePathCheck {
    double var_t = 0.0;
    double lower_hull = 0.0;
    bool holds = true;
};

/// Var S(t) against the chord (1-t) sigma_q^2 + t sigma_p^2 (concavity of u(1-u)).
inline VariancePathCheck variance_path_check(const InterpPath& path, double t) {
    InterpPath::require_unit(t);
    CompensatedSum var;
    for (double r : path.params_at(t)) var += r * (1.0 - r);
    VariancePathCheck out;
    out.var_t = var.value();
    out.lower_hull = (1.0 - t) * moments(path.q()).variance + t * moments(path.p()).variance;
    out.holds = out.var_t >= out.lower_hull - 1e-12;
    return out;
}

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// m-point Gauss-Legendre rule mapped to [0,1]; exact for polynomials of degree <= 2m - 1.
inline QuadratureRule gauss_legendre_unit(std::size_t m) {
    if (m == 0) throw Error(ErrorKind::InvalidParam, "quadrature needs at least one node");
    QuadratureRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    const double dm = static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dm + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= m; ++k) {
                const double dk = static_cast<double>(k);
                const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            dp = dm * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-15) break;
        }
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

/// Node count that integrates the degree-(n-1) integrand of g_via_interpolation exactly.
inline std::size_t default_quad_points(std::size_t n) { return (n + 1) / 2 + 1; }

/// g(k) = int_0^1 sum_i Delta_i P(T_i(t) = k - 1) dt, by Gauss-Legendre quadrature.
inline double g_via_interpolation(const DominatingPair& dp, std::int64_t k, std::size_t quad_points) {
    const InterpPath path(dp.p(), dp.q());
    const QuadratureRule rule = gauss_legendre_unit(quad_points);
    CompensatedSum integral;
    for (std::size_t j = 0; j < quad_points; ++j) {
        const auto r = path.params_at(rule.nodes[j]);
        CompensatedSum integrand;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double d = dp.delta_at(i);
            if (d == 0.0) continue;
            const auto ti = detail::pb_masses_without(r, i);
            const auto idx = k - 1;
            if (idx >= 0 && idx < static_cast<std::int64_t>(ti.size())) integrand += d * ti[static_cast<std::size_t>(idx)];
        }
        integral += rule.weights[j] * integrand.value();
    }
    return integral.value();
}

struct AffinityProbe {
    std::vector<double> values;
    std::vector<double> second_differences;
    bool non_affine = false;
};

/// P(Z = 2) for Z ~ Bin(n, t/n) over an equally spaced grid in [0,1]. The law of
/// a kernel image of Ber((t,0,...,0)) would be affine in t; this is not.
inline AffinityProbe affinity_probe(std::size_t n, std::span<const double> t_grid) {
    if (n < 2) throw Error(ErrorKind::BadGrid, "affinity probe needs n >= 2");
    if (t_grid.size() < 3) throw Error(ErrorKind::BadGrid, "grid needs at least 3 points");
    const double step = t_grid[1] - t_grid[0];
    if (!(step > 0.0)) throw Error(ErrorKind::BadGrid, "grid must be increasing");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0 && t_grid[i] <= 1.0)) throw Error(ErrorKind::BadGrid, "grid leaves [0,1]");
        if (i > 0 && std::abs((t_grid[i] - t_grid[i - 1]) - step) > 1e-12)
            throw Error(ErrorKind::BadGrid, "grid is not equally spaced");
    }
    AffinityProbe out;
    for (double t : t_grid) {
        const double theta = std::clamp(t / static_cast<double>(n), 0.0, 1.0);
        out.values.push_back(binom_pmf(n, theta).at(2));
    }
    for (std::size_t i = 1; i + 1 < out.values.size(); ++i) {
        const double d2 = out.values[i - 1] - 2.0 * out.values[i] + out.values[i + 1];
        out.second_differences.push_back(d2);
        if (std::abs(d2) > 1e-6) out.non_affine = true;
    }
    return out;
}

} // namespace pbtv
