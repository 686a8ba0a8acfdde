#pragma once

// Exact Poisson-binomial laws, moments and total-variation distances on
// integer-supported pmfs. Everything here is IEEE double; accuracy is
// controlled with compensated summation where masses are accumulated.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pbtv/error.hpp"

namespace pbtv {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

template <class Range>
double compensated_sum(const Range& r) {
    CompensatedSum s;
    for (double x : r) s.add(x);
    return s.value();
}

/// Universal constants of the two-sided TV control.
struct Constants {
    /// Sharp Poisson-binomial anti-concentration constant: max_k P(Z=k) <= eta / sqrt(Var Z).
    static constexpr double eta_bcv = 0.4688223555;
    static inline const double c_bcv = std::sqrt(1.25 + eta_bcv * eta_bcv);
    static constexpr double lower_c = 1.0 / 12.0;
    static inline const double homog_c = 1.0 / (48.0 * c_bcv);
};

/// Bernoulli success probabilities p_1..p_n, each in [0,1].
class ParamVec {
public:
    ParamVec() = default;

    explicit ParamVec(std::vector<double> values) : values_(std::move(values)) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double v = values_[i];
            // NaN fails both comparisons.
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(ErrorKind::InvalidParam,
                            "parameter " + std::to_string(i) + " = " + std::to_string(v) +
                                " is outside [0,1]");
        }
    }

    ParamVec(std::initializer_list<double> values) : ParamVec(std::vector<double>(values)) {}

    static ParamVec constant(std::size_t n, double theta) {
        return ParamVec(std::vector<double>(n, theta));
    }

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vec() const noexcept { return values_; }

    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    /// Subsequence at the given (0-based) indices.
    ParamVec select(std::span<const std::size_t> idx) const {
        std::vector<double> out;
        out.reserve(idx.size());
        for (auto i : idx) out.push_back(values_.at(i));
        return ParamVec(std::move(out));
    }

    friend bool operator==(const ParamVec&, const ParamVec&) = default;

private:
    std::vector<double> values_;
};

/// Finite pmf on the integers: mass[j] = P(X = offset + j).
///
/// Canonical form: no leading or trailing zero masses, every mass >= 0,
/// total within 1e-12 of one. Negatives in [-1e-15, 0) are rounding noise
/// and get clamped; anything below is rejected.
class Pmf {
public:
    static constexpr double kNegativeClamp = 1e-15;
    static constexpr double kTotalTolerance = 1e-12;

    Pmf(std::int64_t offset, std::vector<double> mass) : offset_(offset), mass_(std::move(mass)) {
        CompensatedSum total;
        for (double& m : mass_) {
            if (!std::isfinite(m) || m < -kNegativeClamp)
                throw Error(ErrorKind::InvalidPmf, "mass " + std::to_string(m) + " is not a probability");
            if (m < 0.0) m = 0.0;
            total += m;
        }
        if (std::abs(total.value() - 1.0) > kTotalTolerance)
            throw Error(ErrorKind::InvalidPmf,
                        "total mass " + std::to_string(total.value()) + " differs from 1");
        const auto first = std::find_if(mass_.begin(), mass_.end(), [](double m) { return m != 0.0; });
        const auto last = std::find_if(mass_.rbegin(), mass_.rend(), [](double m) { return m != 0.0; }).base();
        offset_ += first - mass_.begin();
        mass_ = std::vector<double>(first, last);
    }

    static Pmf point(std::int64_t k) { return Pmf(k, {1.0}); }

    std::int64_t offset() const noexcept { return offset_; }
    std::int64_t min_support() const noexcept { return offset_; }
    std::int64_t max_support() const noexcept {
        return offset_ + static_cast<std::int64_t>(mass_.size()) - 1;
    }
    std::span<const double> mass() const noexcept { return mass_; }
    std::size_t size() const noexcept { return mass_.size(); }

    /// P(X = k); zero outside the stored range.
    double at(std::int64_t k) const noexcept {
        const auto j = k - offset_;
        if (j < 0 || j >= static_cast<std::int64_t>(mass_.size())) return 0.0;
        return mass_[static_cast<std::size_t>(j)];
    }

    double peak() const noexcept { return *std::max_element(mass_.begin(), mass_.end()); }

    double mean() const {
        CompensatedSum s;
        for (std::size_t j = 0; j < mass_.size(); ++j)
            s += static_cast<double>(offset_ + static_cast<std::int64_t>(j)) * mass_[j];
        return s.value();
    }

    double variance() const {
        const double mu = mean();
        CompensatedSum s;
        for (std::size_t j = 0; j < mass_.size(); ++j) {
            const double d = static_cast<double>(offset_ + static_cast<std::int64_t>(j)) - mu;
            s += d * d * mass_[j];
        }
        return s.value();
    }

    /// Law of X + d.
    Pmf shifted(std::int64_t d) const {
        Pmf out = *this;
        out.offset_ += d;
        return out;
    }

    friend bool operator==(const Pmf&, const Pmf&) = default;

private:
    std::int64_t offset_;
    std::vector<double> mass_;
};

inline void to_json(nlohmann::json& j, const Pmf& x) {
    j = nlohmann::json{{"offset", x.offset()},
                       {"mass", std::vector<double>(x.mass().begin(), x.mass().end())}};
}

inline void from_json(const nlohmann::json& j, Pmf& x) {
    x = Pmf(j.at("offset").get<std::int64_t>(), j.at("mass").get<std::vector<double>>());
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

namespace detail {

/// P(S = k), k = 0..n, for S a sum of independent Bernoulli(p_i); no validation.
/// f_i(k) = (1 - p_i) f_{i-1}(k) + p_i f_{i-1}(k-1) on a single rolling buffer.
inline std::vector<double> pb_masses(std::span<const double> p) {
    const std::size_t n = p.size();
    std::vector<double> f(n + 1, 0.0);
    f[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pi = p[i];
        const double qi = 1.0 - pi;
        for (std::size_t k = i + 1; k >= 1; --k) f[k] = qi * f[k] + pi * f[k - 1];
        f[0] *= qi;
    }
    return f;
}

/// Same as pb_masses but skipping index `skip`: the law of the leave-one-out sum.
inline std::vector<double> pb_masses_without(std::span<const double> p, std::size_t skip) {
    std::vector<double> rest;
    rest.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        if (i != skip) rest.push_back(p[i]);
    return pb_masses(rest);
}

/// Canonical Pmf from raw masses at offset 0, clamping rounding noise.
inline Pmf make_pmf(std::vector<double> mass, std::int64_t offset = 0) {
    for (double& m : mass)
        if (m < 0.0 && m >= -Pmf::kNegativeClamp) m = 0.0;
    return Pmf(offset, std::move(mass));
}

} // namespace detail

/// Exact law of S_p in O(n^2) time and O(n) space.
inline Pmf pb_pmf(const ParamVec& p) { return detail::make_pmf(detail::pb_masses(p.values())); }

inline Pmf binom_pmf(std::size_t n, double theta) { return pb_pmf(ParamVec::constant(n, theta)); }

inline Moments moments(const ParamVec& p) {
    CompensatedSum mean, var;
    for (double v : p) {
        mean += v;
        var += v * (1.0 - v);
    }
    return {mean.value(), var.value()};
}

/// Half the l1 distance over the union of supports.
inline double tv(const Pmf& a, const Pmf& b) {
    const auto lo = std::min(a.min_support(), b.min_support());
    const auto hi = std::max(a.max_support(), b.max_support());
    CompensatedSum s;
    for (auto k = lo; k <= hi; ++k) s += std::abs(a.at(k) - b.at(k));
    return std::clamp(0.5 * s.value(), 0.0, 1.0);
}

/// P(X >= k).
inline double survival(const Pmf& x, std::int64_t k) {
    if (k <= x.min_support()) return 1.0;
    if (k > x.max_support()) return 0.0;
    CompensatedSum s;
    for (auto j = x.max_support(); j >= k; --j) s += x.at(j);
    return std::min(1.0, s.value());
}

inline constexpr double kShapeTolerance = 1e-12;

/// Nondecreasing then nonincreasing, with plateaus and `tol` slack on every comparison.
inline bool is_unimodal(const Pmf& x, double tol = kShapeTolerance) {
    const auto m = x.mass();
    bool descending = false;
    for (std::size_t k = 1; k < m.size(); ++k) {
        if (!descending) {
            if (m[k] < m[k - 1] - tol) descending = true;
        } else if (m[k] > m[k - 1] + tol) {
            return false;
        }
    }
    return true;
}

/// mass(k)^2 >= mass(k-1) mass(k+1) - tol at every interior k whose neighbours are positive.
inline bool is_log_concave(const Pmf& x, double tol = kShapeTolerance) {
    const auto m = x.mass();
    for (std::size_t k = 1; k + 1 < m.size(); ++k) {
        if (m[k - 1] > 0.0 && m[k + 1] > 0.0 && m[k] * m[k] < m[k - 1] * m[k + 1] - tol) return false;
    }
    return true;
}

/// TV(Z, Z+1) for unimodal Z, which equals the largest atom.
inline double shift_tv(const Pmf& x) {
    if (!is_unimodal(x)) throw Error(ErrorKind::NotUnimodal, "shift_tv requires a unimodal pmf");
    return x.peak();
}

} // namespace pbtv
