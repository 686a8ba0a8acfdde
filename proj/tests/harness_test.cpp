#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pbtv/harness.hpp"

using namespace pbtv;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::IoError;
}

GenConfig config(GenMode mode, std::size_t n_min, std::size_t n_max, std::uint64_t seed, std::size_t count) {
    GenConfig c;
    c.mode = mode;
    c.n_min = n_min;
    c.n_max = n_max;
    c.seed = seed;
    c.count = count;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

} // namespace

TEST(Rng, CounterBased) {
    InstanceRng a(7, 3, 0), b(7, 3, 0), c(7, 4, 0), d(7, 3, 1);
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_NE(x, d.uniform());
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_LT(a.below(5), 5u);
    }
}

TEST(Config, ParseNRange) {
    EXPECT_EQ(parse_n_range("7"), (std::pair<std::size_t, std::size_t>{7, 7}));
    EXPECT_EQ(parse_n_range("1..200"), (std::pair<std::size_t, std::size_t>{1, 200}));
    EXPECT_EQ(parse_n_range("3-9"), (std::pair<std::size_t, std::size_t>{3, 9}));
    EXPECT_EQ(kind_of([] { parse_n_range("9..3"); }), ErrorKind::BadConfig);
    EXPECT_EQ(kind_of([] { parse_n_range("x"); }), ErrorKind::BadConfig);
    EXPECT_EQ(kind_of([] { parse_mode("gaussian"); }), ErrorKind::BadConfig);
    EXPECT_EQ(parse_mode("near-equal"), GenMode::NearEqual);
}

TEST(Config, Validation) {
    GenConfig c = config(GenMode::Uniform, 5, 2, 0, 1);
    EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::BadConfig);
    c = config(GenMode::AdversarialFamily, 1, 1, 0, 1);
    c.epsilon = 0.3;
    EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::BadConfig);
    c.family = Family::Counterexample;
    EXPECT_NO_THROW(c.validate());
}

TEST(Generator, AdversarialHomogFamilyExact) {
    GenConfig c = config(GenMode::AdversarialFamily, 1, 1, 5, 3);
    c.epsilon = 0.1;
    for (const auto& inst : gen_instances(c)) {
        EXPECT_EQ(inst.p, (ParamVec{0.8, 0.5}));
        EXPECT_EQ(inst.q, (ParamVec{1.0, 0.6}));
    }
}

TEST(Generator, CounterexampleFamily) {
    GenConfig c = config(GenMode::AdversarialFamily, 1, 1, 5, 2);
    c.family = Family::Counterexample;
    for (const auto& inst : gen_instances(c)) {
        ASSERT_EQ(inst.p.size(), 3u);
        const double eps = inst.q[2] - 0.5;
        EXPECT_GE(eps, 1e-4 * (1 - 1e-12));
        EXPECT_LE(eps, 0.1 * (1 + 1e-12));
    }
}

TEST(Generator, DominatingMode) {
    for (const auto& inst : gen_instances(config(GenMode::Dominating, 1, 50, 9, 500))) {
        ASSERT_EQ(inst.p.size(), inst.q.size());
        for (std::size_t i = 0; i < inst.p.size(); ++i) EXPECT_GE(inst.p[i], inst.q[i]);
    }
}

TEST(Generator, BoundaryHeavyMode) {
    GenConfig c = config(GenMode::BoundaryHeavy, 200, 200, 4, 20);
    c.boundary_fraction = 0.5;
    std::size_t hits = 0, total = 0;
    for (const auto& inst : gen_instances(c))
        for (std::size_t i = 0; i < inst.p.size(); ++i, ++total) hits += inst.p[i] == 0.0 || inst.p[i] == 1.0;
    const double frac = static_cast<double>(hits) / static_cast<double>(total);
    EXPECT_NEAR(frac, 0.5, 0.05);
}

TEST(Generator, NRangeAndDeterminism) {
    const GenConfig c = config(GenMode::NearEqual, 3, 7, 123, 200);
    const auto a = gen_instances(c), b = gen_instances(c);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].p, b[i].p);
        EXPECT_EQ(a[i].q, b[i].q);
        EXPECT_GE(a[i].p.size(), 3u);
        EXPECT_LE(a[i].p.size(), 7u);
    }
    // Instance i depends on (seed, i) only.
    EXPECT_EQ(gen_instance(c, 150).p, a[150].p);
}

TEST(RunSuite, EmptyReport) {
    for (const auto& s : suite_names()) {
        const SuiteReport r = run_suite(s, config(GenMode::Uniform, 1, 5, 0, 0));
        EXPECT_EQ(r.instances, 0u);
        EXPECT_TRUE(r.passed());
        EXPECT_EQ(render(r, EmitFormat::Csv), "row_kind,suite,check,instance,seed,n,value,p,q\n");
    }
}

TEST(RunSuite, Errors) {
    EXPECT_EQ(kind_of([] { run_suite("thm9", config(GenMode::Uniform, 1, 5, 0, 1)); }), ErrorKind::UnknownSuite);
    EXPECT_EQ(kind_of([] { run_suite("split-lemma", config(GenMode::Uniform, 1, 5, 0, 1)); }), ErrorKind::BadConfig);
}

TEST(RunSuite, EverySuitePassesSmallSweep) {
    for (const auto& s : suite_names()) {
        const GenConfig c = config(GenMode::Uniform, 2, 12, 77, 150);
        const SuiteReport r = run_suite(s, c);
        EXPECT_TRUE(r.passed()) << s;
        EXPECT_EQ(r.instances, 150u) << s;
        EXPECT_GT(r.checks, 0u) << s;
        ASSERT_TRUE(r.min_slack.has_value()) << s;
        EXPECT_EQ(r.min_slack->seed, 77u);
    }
}

TEST(RunSuite, ObservationsRecorded) {
    const SuiteReport r = run_suite("split-lemma", config(GenMode::Uniform, 2, 10, 3, 200));
    ASSERT_NE(r.observation("conjecture_slack"), nullptr);
    EXPECT_EQ(r.observation("conjecture_slack")->samples, 200u);
    const SuiteReport t = run_suite("thm2", config(GenMode::Dominating, 1, 10, 3, 200));
    ASSERT_NE(t.observation("tv_over_phi"), nullptr);
    EXPECT_GE(t.observation("tv_over_phi")->min, 1.0 / 12.0 - 1e-9);
}

TEST(RunSuite, WorkerCountDoesNotChangeOutput) {
    const GenConfig c = config(GenMode::BoundaryHeavy, 1, 30, 2024, 2500);
    const std::string one = render(run_suite("thm1", c, {}, 1), EmitFormat::Json);
    const std::string four = render(run_suite("thm1", c, {}, 4), EmitFormat::Json);
    EXPECT_EQ(one, four);
}

TEST(RunSuite, ForcedViolationIsReported) {
    Tolerances tight;
    tight.slack = -2.0;  // every check now needs slack >= 2
    const SuiteReport r = run_suite("thm1", config(GenMode::Uniform, 1, 5, 1, 10), tight);
    EXPECT_FALSE(r.passed());
    EXPECT_EQ(r.violations.size(), r.checks);
    const std::string csv = render(r, EmitFormat::Csv);
    std::size_t rows = 0;
    for (std::size_t pos = 0; (pos = csv.find("\nviolation,", pos)) != std::string::npos; ++pos) ++rows;
    EXPECT_EQ(rows, r.violations.size());
    EXPECT_NE(csv.find("\nsummary,thm1,,10,1,,20,,\n"), std::string::npos);
}

TEST(Emit, ByteIdenticalFiles) {
    const SuiteReport r = run_suite("thm3", config(GenMode::Uniform, 1, 10, 8, 100));
    const auto dir = std::filesystem::temp_directory_path() / "pbtv_harness_test";
    std::filesystem::create_directories(dir);
    for (auto fmt : {EmitFormat::Json, EmitFormat::Csv}) {
        emit(r, fmt, (dir / "a").string());
        emit(run_suite("thm3", config(GenMode::Uniform, 1, 10, 8, 100)), fmt, (dir / "b").string());
        EXPECT_EQ(slurp(dir / "a"), slurp(dir / "b"));
    }
    const auto j = nlohmann::json::parse(render(r, EmitFormat::Json));
    EXPECT_EQ(j.at("schema"), "pbtv/1");
    EXPECT_FALSE(j.contains("duration_seconds"));
    EXPECT_TRUE(suite_report_json(r, EmitOptions{true}).contains("duration_seconds"));
    std::filesystem::remove_all(dir);
    EXPECT_EQ(kind_of([&] { emit(r, EmitFormat::Json, "/nonexistent-dir/x.json"); }), ErrorKind::IoError);
}

TEST(Search, HomogRatioNearEightNinths) {
    GenConfig c = config(GenMode::AdversarialFamily, 1, 1, 1, 1);
    c.epsilon = 1e-3;
    const SearchRecord r = search_min_ratio(SearchKind::HomogRatio, c, 0);
    EXPECT_NEAR(r.objective, 8.0 / 9.0, 0.01);
    EXPECT_NEAR(r.objective, 8000.0 / 8997.0, 1e-9);
    EXPECT_NEAR(recompute_objective(r), r.objective, 1e-9);
}

TEST(Search, RefinementNeverWorsens) {
    GenConfig c = config(GenMode::Uniform, 2, 4, 5, 4);
    const double base = search_min_ratio(SearchKind::HomogRatio, c, 0).objective;
    const SearchRecord refined = search_min_ratio(SearchKind::HomogRatio, c, 1);
    EXPECT_LE(refined.objective, base);
    EXPECT_NEAR(recompute_objective(refined), refined.objective, 1e-9);
    EXPECT_GE(refined.objective, Constants::homog_c);
}

TEST(Search, TvOverPhiAboveLowerConstant) {
    const SearchRecord r = search_min_ratio(SearchKind::TvOverPhi, config(GenMode::Uniform, 1, 6, 11, 5), 1);
    EXPECT_GE(r.objective, 1.0 / 12.0 - 1e-9);
    EXPECT_NEAR(recompute_objective(r), r.objective, 1e-9);
    for (std::size_t i = 0; i < r.p.size(); ++i) EXPECT_GE(r.p[i], r.q[i]);
}

TEST(Search, SplitSlackRecordedWithSplit) {
    const SearchRecord r =
        search_min_ratio(SearchKind::SplitConjectureSlack, config(GenMode::Uniform, 2, 5, 12, 5), 1);
    ASSERT_TRUE(r.split.has_value());
    EXPECT_NEAR(recompute_objective(r), r.objective, 1e-9);
    const nlohmann::json j = r;
    EXPECT_EQ(j.at("objective_kind"), "split-conjecture-slack");
    EXPECT_FALSE(j.contains("timestamp"));
}

TEST(Search, Deterministic) {
    const GenConfig c = config(GenMode::Uniform, 2, 4, 99, 3);
    const nlohmann::json a = search_min_ratio(SearchKind::HomogRatio, c, 1);
    const nlohmann::json b = search_min_ratio(SearchKind::HomogRatio, c, 1);
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Search, Errors) {
    EXPECT_EQ(kind_of([] { search_min_ratio(SearchKind::HomogRatio, config(GenMode::Uniform, 1, 17, 0, 1), 0); }),
              ErrorKind::BadConfig);
    EXPECT_EQ(kind_of([] { search_min_ratio(SearchKind::TvOverPhi, config(GenMode::Uniform, 1, 3, 0, 0), 0); }),
              ErrorKind::BadConfig);
    EXPECT_EQ(kind_of([] { parse_search_kind("max"); }), ErrorKind::BadConfig);
}
