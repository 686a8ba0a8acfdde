#include <gtest/gtest.h>

#include <cmath>

#include "pbtv/oracle.hpp"
#include "test_util.hpp"

using namespace pbtv;
using pbtv::testing::Gen;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::IoError;
}

EventSet random_event(Gen& gen, std::int64_t lo, std::int64_t hi) {
    std::set<std::int64_t> m;
    for (auto k = lo; k <= hi; ++k)
        if (gen.coin()) m.insert(k);
    return EventSet(std::move(m));
}

} // namespace

TEST(ProductTv, Examples) {
    const ParamVec p{0.3, 0.8};
    EXPECT_EQ(product_tv_bruteforce(p, p), 0.0);
    EXPECT_EQ(product_tv_bruteforce(ParamVec{1.0}, ParamVec{0.0}), 1.0);
    const ParamVec a{0.9, 0.1}, b{0.2, 0.8};
    EXPECT_NEAR(product_tv_bruteforce(a, b), 0.77, 1e-15);
    EXPECT_GE(product_tv_bruteforce(a, b), tv(pb_pmf(a), pb_pmf(b)));
    EXPECT_NEAR(tv(pb_pmf(a), pb_pmf(b)), 0.14, 1e-15);
}

TEST(ProductTv, HardCap) {
    EXPECT_EQ(kind_of([] { product_tv_bruteforce(ParamVec::constant(21, 0.5), ParamVec::constant(21, 0.5)); }),
              ErrorKind::TooLarge);
    EXPECT_EQ(kind_of([] { pb_pmf_bruteforce(ParamVec::constant(21, 0.5)); }), ErrorKind::TooLarge);
    EXPECT_NO_THROW(pb_pmf_bruteforce(ParamVec::constant(20, 0.5)));
}

TEST(PbBruteforce, Examples) {
    EXPECT_EQ(pb_pmf_bruteforce(ParamVec{0.5, 0.5}), Pmf(0, {0.25, 0.5, 0.25}));
    EXPECT_EQ(pb_pmf_bruteforce(ParamVec{}), Pmf::point(0));
}

TEST(DataProcessing, PropertySumMapAndBlocks) {
    Gen gen(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = gen.size(1, 12);
        const ParamVec p = gen.params(n), q = gen.params(n);
        const double full = product_tv_bruteforce(p, q);
        EXPECT_GE(full, tv(pb_pmf(p), pb_pmf(q)) - 1e-12);
        if (n < 2) continue;
        const std::size_t cut = gen.size(1, n - 1);
        std::vector<std::size_t> I, J;
        for (std::size_t i = 0; i < n; ++i) (i < cut ? I : J).push_back(i);
        const double ti = product_tv_bruteforce(p.select(I), q.select(I));
        const double tj = product_tv_bruteforce(p.select(J), q.select(J));
        EXPECT_GE(full, std::max(ti, tj) - 1e-12);
        EXPECT_LE(full, ti + tj + 1e-12);
    }
}

TEST(DataProcessing, SixteenCoordinates) {
    Gen gen(32);
    for (int trial = 0; trial < 4; ++trial) {
        const ParamVec p = gen.params(16), q = gen.params(16);
        EXPECT_GE(product_tv_bruteforce(p, q), tv(pb_pmf(p), pb_pmf(q)) - 1e-12);
    }
}

TEST(FA, Endpoints) {
    const ParamVec p{0.9, 0.4, 0.7}, q{0.1, 0.4, 0.2};
    const InterpPath path(p, q);
    const EventSet A{0, 2};
    EXPECT_EQ(f_A(path, 0.0, A), pb_pmf(q).at(0) + pb_pmf(q).at(2));
    EXPECT_EQ(f_A(path, 1.0, A), pb_pmf(p).at(0) + pb_pmf(p).at(2));
    EXPECT_NEAR(f_A(path, 0.37, EventSet::range(0, 3)), 1.0, 1e-15);
    EXPECT_EQ(f_A(path, 0.37, EventSet{}), 0.0);
    EXPECT_EQ(kind_of([&] { f_A(path, 1.5, A); }), ErrorKind::InvalidParam);
}

TEST(FADerivative, Trivial) {
    const ParamVec p{0.9, 0.4};
    EXPECT_EQ(f_A_derivative(InterpPath(p, p), 0.5, EventSet{1}), 0.0);
    const InterpPath path(p, ParamVec{0.1, 0.3});
    EXPECT_NEAR(f_A_derivative(path, 0.5, EventSet::range(0, 2)), 0.0, 1e-15);
}

TEST(FADerivative, PropertyMatchesFiniteDifferences) {
    Gen gen(33);
    const double h = 1e-5;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = gen.size(1, 12);
        const InterpPath path(gen.params(n), gen.params(n));
        const double t = h + (1.0 - 2.0 * h) * gen.unit();
        const EventSet A = random_event(gen, 0, static_cast<std::int64_t>(n));
        const double fd = (f_A(path, t + h, A) - f_A(path, t - h, A)) / (2.0 * h);
        EXPECT_NEAR(f_A_derivative(path, t, A), fd, 1e-6);
    }
}

TEST(VariancePath, Examples) {
    const ParamVec p{0.9, 0.4}, q{0.2, 0.5};
    const InterpPath path(p, q);
    auto c = variance_path_check(path, 0.0);
    EXPECT_DOUBLE_EQ(c.var_t, moments(q).variance);
    EXPECT_DOUBLE_EQ(c.lower_hull, moments(q).variance);
    c = variance_path_check(path, 1.0);
    EXPECT_DOUBLE_EQ(c.var_t, moments(p).variance);
    c = variance_path_check(InterpPath(ParamVec{1.0, 1.0}, ParamVec{0.0, 0.0}), 0.5);
    EXPECT_DOUBLE_EQ(c.var_t, 0.5);
    EXPECT_EQ(c.lower_hull, 0.0);
    EXPECT_TRUE(c.holds);
}

TEST(VariancePath, PropertyConcavity) {
    Gen gen(34);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = gen.size(1, 50);
        EXPECT_TRUE(variance_path_check(InterpPath(gen.params(n), gen.params(n)), gen.unit()).holds);
    }
}

TEST(Quadrature, ExactOnPolynomials) {
    for (std::size_t m = 1; m <= 12; ++m) {
        const QuadratureRule rule = gauss_legendre_unit(m);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        EXPECT_NEAR(wsum, 1.0, 1e-14);
        for (std::size_t d = 0; d <= 2 * m - 1; ++d) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += rule.weights[j] * std::pow(rule.nodes[j], static_cast<double>(d));
            EXPECT_NEAR(s, 1.0 / static_cast<double>(d + 1), 1e-14) << "m = " << m << " d = " << d;
        }
    }
    EXPECT_EQ(kind_of([] { gauss_legendre_unit(0); }), ErrorKind::InvalidParam);
}

TEST(GViaInterpolation, Examples) {
    const ParamVec p{0.4, 0.6};
    EXPECT_EQ(g_via_interpolation(DominatingPair(p, p), 1, 2), 0.0);
    EXPECT_NEAR(g_via_interpolation(DominatingPair(ParamVec{1.0}, ParamVec{0.0}), 1, 1), 1.0, 1e-15);
}

TEST(GViaInterpolation, PropertyMatchesProfile) {
    Gen gen(35);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = gen.size(1, 10);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = gen.param(), y = gen.param();
            a[i] = std::max(x, y);
            b[i] = std::min(x, y);
        }
        const DominatingPair dp{ParamVec(a), ParamVec(b)};
        const GProfile prof = g_profile(dp);
        for (std::int64_t k = 0; k <= static_cast<std::int64_t>(n) + 1; ++k)
            EXPECT_NEAR(g_via_interpolation(dp, k, default_quad_points(n)), prof.at(k), 1e-10);
    }
}

TEST(Affinity, Examples) {
    const std::vector<double> grid{0.0, 0.5, 1.0};
    const AffinityProbe a = affinity_probe(2, grid);
    ASSERT_EQ(a.values.size(), 3u);
    EXPECT_EQ(a.values[0], 0.0);
    EXPECT_NEAR(a.values[1], 0.0625, 1e-16);
    EXPECT_NEAR(a.values[2], 0.25, 1e-16);
    ASSERT_EQ(a.second_differences.size(), 1u);
    EXPECT_NEAR(a.second_differences[0], 0.125, 1e-16);
    EXPECT_TRUE(a.non_affine);

    std::vector<double> g11;
    for (int i = 0; i <= 10; ++i) g11.push_back(i / 10.0);
    const AffinityProbe b = affinity_probe(5, g11);
    double m = 0.0;
    for (double d : b.second_differences) m = std::max(m, std::abs(d));
    EXPECT_GT(m, 1e-6);
}

TEST(Affinity, BadGrids) {
    const std::vector<double> ok{0.0, 0.5, 1.0}, short_grid{0.0, 1.0}, uneven{0.0, 0.2, 1.0}, outside{0.5, 1.0, 1.5},
        decreasing{1.0, 0.5, 0.0};
    EXPECT_EQ(kind_of([&] { affinity_probe(1, ok); }), ErrorKind::BadGrid);
    EXPECT_EQ(kind_of([&] { affinity_probe(2, short_grid); }), ErrorKind::BadGrid);
    EXPECT_EQ(kind_of([&] { affinity_probe(2, uneven); }), ErrorKind::BadGrid);
    EXPECT_EQ(kind_of([&] { affinity_probe(2, outside); }), ErrorKind::BadGrid);
    EXPECT_EQ(kind_of([&] { affinity_probe(2, decreasing); }), ErrorKind::BadGrid);
}
