// pbtv: exact Poisson-binomial TV computations, bound certification sweeps and
// extremal-instance search from the command line.
//
// Exit status: 0 success, 1 an asserted inequality was violated, 2 usage error.

#include <cerrno>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pbtv/pbtv.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

pbtv::ParamVec parse_params(const std::string& text) {
    std::vector<double> values;
    std::size_t pos = 0;
    auto is_blank = [](const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; };
    if (is_blank(text)) return pbtv::ParamVec{};
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string field = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const auto b = field.find_first_not_of(" \t\r\n");
        const auto e = field.find_last_not_of(" \t\r\n");
        if (b == std::string::npos)
            throw pbtv::Error(pbtv::ErrorKind::InvalidParam, "empty entry in parameter list '" + text + "'");
        const std::string token = field.substr(b, e - b + 1);
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size() || errno == ERANGE)
            throw pbtv::Error(pbtv::ErrorKind::InvalidParam, "'" + token + "' is not a decimal number");
        values.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return pbtv::ParamVec(std::move(values));
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct GenArgs {
    std::string n = "1..20";
    std::string mode = "uniform";
    std::string family = "homog";
    double epsilon = 0.0;
    double boundary_fraction = 0.3;
    std::uint64_t seed = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--n", n, "instance size: <int> or <lo>..<hi>")->capture_default_str();
        cmd->add_option("--mode", mode, "uniform | dominating | near-equal | boundary-heavy | adversarial-family")
            ->capture_default_str();
        cmd->add_option("--family", family, "adversarial family: homog | counterexample")->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "fixed epsilon for adversarial families (0 = random)");
        cmd->add_option("--boundary-fraction", boundary_fraction, "share of coordinates at 0 or 1")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "64-bit seed")->capture_default_str();
    }

    pbtv::GenConfig config(std::size_t count) const {
        pbtv::GenConfig cfg;
        std::tie(cfg.n_min, cfg.n_max) = pbtv::parse_n_range(n);
        cfg.mode = pbtv::parse_mode(mode);
        cfg.family = pbtv::parse_family(family);
        if (epsilon != 0.0) cfg.epsilon = epsilon;
        cfg.boundary_fraction = boundary_fraction;
        cfg.seed = seed;
        cfg.count = count;
        cfg.validate();
        return cfg;
    }
};

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

int run_oracle_check(const std::string& check, std::size_t n, std::size_t count, std::uint64_t seed) {
    using namespace pbtv;
    nlohmann::json out{{"schema", "pbtv/1"}, {"check", check}};
    bool ok = true;
    if (check == "affinity") {
        std::vector<double> grid;
        for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
        const AffinityProbe probe = affinity_probe(n, grid);
        out["n"] = n;
        out["t_grid"] = grid;
        out["values"] = probe.values;
        out["second_differences"] = probe.second_differences;
        out["non_affine"] = probe.non_affine;
        ok = probe.non_affine;
    } else if (check == "derivative") {
        if (n > 12) n = 12;
        GenConfig cfg;
        cfg.n_min = 1;
        cfg.n_max = n;
        cfg.seed = seed;
        cfg.count = count;
        const SuiteReport r = run_suite("derivative", cfg);
        out["instances"] = r.instances;
        out["violations"] = r.violations.size();
        out["worst_slack"] = r.min_slack ? r.min_slack->objective : 0.0;
        ok = r.passed();
    } else if (check == "mixture") {
        GenConfig cfg;
        cfg.n_min = 2;
        cfg.n_max = std::max<std::size_t>(n, 2);
        cfg.seed = seed;
        cfg.count = count;
        const SuiteReport r = run_suite("mixture", cfg);
        out["instances"] = r.instances;
        out["violations"] = r.violations.size();
        out["worst_slack"] = r.min_slack ? r.min_slack->objective : 0.0;
        ok = r.passed();
    } else if (check == "dpi") {
        if (n > 16) n = 16;
        double worst = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            GenConfig cfg;
            cfg.n_min = 2;
            cfg.n_max = std::max<std::size_t>(n, 2);
            cfg.seed = seed;
            const Instance inst = gen_instance(cfg, i);
            const double product = product_tv_bruteforce(inst.p, inst.q);
            const double summed = tv(pb_pmf(inst.p), pb_pmf(inst.q));
            // Split into leading / trailing blocks for the product sub- and superadditivity.
            const std::size_t half = inst.p.size() / 2;
            const auto part = Partition::prefix(inst.p.size(), half);
            const double a = product_tv_bruteforce(inst.p.select(part.I()), inst.q.select(part.I()));
            const double b = product_tv_bruteforce(inst.p.select(part.J()), inst.q.select(part.J()));
            worst = std::min({worst, product - summed, product - std::max(a, b), a + b - product});
        }
        out["instances"] = count;
        out["worst_slack"] = worst;
        ok = worst >= -1e-12;
    } else {
        throw Error(ErrorKind::BadConfig, "unknown oracle check '" + check + "'");
    }
    out["pass"] = ok;
    print_json(out);
    return ok ? kExitOk : kExitViolation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact Poisson-binomial total variation: bounds, certification and search"};
    app.require_subcommand(1);

    // pmf
    auto* pmf_cmd = app.add_subcommand("pmf", "exact law of a sum of independent Bernoullis");
    std::string pmf_params;
    bool pmf_json = false, pmf_brute = false;
    pmf_cmd->add_option("--params", pmf_params, "comma-separated probabilities")->required();
    pmf_cmd->add_flag("--json", pmf_json, "emit {\"offset\", \"mass\"} JSON");
    pmf_cmd->add_flag("--bruteforce", pmf_brute, "enumerate all 2^n outcomes instead (n <= 20)");

    // tv
    auto* tv_cmd = app.add_subcommand("tv", "TV(S_p, S_q), optionally with TV(Ber(p), Ber(q))");
    std::string tv_p, tv_q;
    bool tv_brute = false;
    tv_cmd->add_option("--p", tv_p)->required();
    tv_cmd->add_option("--q", tv_q)->required();
    tv_cmd->add_flag("--bruteforce", tv_brute, "also enumerate the product-measure TV (n <= 20)");

    // bounds
    auto* bounds_cmd = app.add_subcommand("bounds", "all bounds and slacks for one pair (BoundReport JSON)");
    std::string b_p, b_q;
    bool b_csv = false;
    double b_tol = pbtv::kSlackTolerance;
    bounds_cmd->add_option("--p", b_p)->required();
    bounds_cmd->add_option("--q", b_q)->required();
    bounds_cmd->add_flag("--csv", b_csv, "emit header and one CSV row instead of JSON");
    bounds_cmd->add_option("--slack-tol", b_tol)->capture_default_str();

    // certify
    auto* cert_cmd = app.add_subcommand("certify", "randomized certification sweep of one invariant family");
    GenArgs cert_gen;
    std::string cert_suite, cert_out, cert_format;
    std::size_t cert_count = 1000;
    unsigned cert_workers = 1;
    bool cert_timing = false;
    pbtv::Tolerances cert_tol;
    cert_gen.add_to(cert_cmd);
    cert_cmd->add_option("--suite", cert_suite, "thm1 | thm2 | thm3 | j-bound | pigeonhole | bcv-peak | split-lemma | "
                                                "mixture | homog-main | unimodality | derivative")
        ->required();
    cert_cmd->add_option("--count", cert_count)->capture_default_str();
    cert_cmd->add_option("--out", cert_out, "write the report here (.json => JSON, otherwise CSV)");
    cert_cmd->add_option("--format", cert_format, "json | csv (overrides the --out extension)");
    cert_cmd->add_option("--workers", cert_workers)->capture_default_str();
    cert_cmd->add_flag("--timing", cert_timing, "include wall-clock duration (output no longer reproducible)");
    cert_cmd->add_option("--slack-tol", cert_tol.slack)->capture_default_str();
    cert_cmd->add_option("--oracle-tol", cert_tol.oracle)->capture_default_str();
    cert_cmd->add_option("--derivative-tol", cert_tol.derivative)->capture_default_str();

    // search
    auto* search_cmd = app.add_subcommand("search", "multi-start coordinate search for extremal instances");
    GenArgs search_gen;
    search_gen.n = "2..4";
    std::string search_kind, search_out;
    std::size_t search_starts = 20, search_refine = 2;
    bool search_no_ts = false;
    search_gen.add_to(search_cmd);
    search_cmd->add_option("--kind", search_kind, "homog-ratio | tv-over-phi | split-conjecture-slack")->required();
    search_cmd->add_option("--starts", search_starts)->capture_default_str();
    search_cmd->add_option("--refine", search_refine, "coordinate-refinement rounds")->capture_default_str();
    search_cmd->add_option("--out", search_out, "write the SearchRecord JSON here");
    search_cmd->add_flag("--no-timestamp", search_no_ts, "omit the timestamp field");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force and identity checks");
    std::string oracle_check;
    std::size_t oracle_n = 0, oracle_count = 200;
    std::uint64_t oracle_seed = 0;
    oracle_cmd->add_option("--check", oracle_check, "derivative | mixture | affinity | dpi")->required();
    oracle_cmd->add_option("--n", oracle_n, "size (defaults: derivative 12, mixture 200, affinity 5, dpi 16)");
    oracle_cmd->add_option("--count", oracle_count)->capture_default_str();
    oracle_cmd->add_option("--seed", oracle_seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        using namespace pbtv;
        if (*pmf_cmd) {
            const ParamVec p = parse_params(pmf_params);
            const Pmf x = pmf_brute ? pb_pmf_bruteforce(p) : pb_pmf(p);
            if (pmf_json) {
                print_json(nlohmann::json(x));
            } else {
                for (std::size_t j = 0; j < x.size(); ++j)
                    std::cout << x.offset() + static_cast<std::int64_t>(j) << ' ' << detail::fmt_double(x.mass()[j])
                              << '\n';
            }
            return kExitOk;
        }
        if (*tv_cmd) {
            const ParamVec p = parse_params(tv_p), q = parse_params(tv_q);
            detail::require_same_length(p, q);
            nlohmann::json out{{"n", p.size()}, {"tv_pb", tv(pb_pmf(p), pb_pmf(q))}};
            if (tv_brute) out["tv_product"] = product_tv_bruteforce(p, q);
            print_json(out);
            return kExitOk;
        }
        if (*bounds_cmd) {
            const BoundReport r = certify_pair(parse_params(b_p), parse_params(b_q), b_tol);
            if (b_csv)
                std::cout << bound_report_csv_header() << '\n' << to_csv_row(r) << '\n';
            else
                print_json(nlohmann::json(r));
            return r.all_pass() ? kExitOk : kExitViolation;
        }
        if (*cert_cmd) {
            const GenConfig cfg = cert_gen.config(cert_count);
            const SuiteReport r = run_suite(cert_suite, cfg, cert_tol, cert_workers);
            EmitFormat fmt = EmitFormat::Csv;
            if (cert_format == "json" || (cert_format.empty() && cert_out.size() >= 5 &&
                                          cert_out.compare(cert_out.size() - 5, 5, ".json") == 0))
                fmt = EmitFormat::Json;
            else if (!cert_format.empty() && cert_format != "csv")
                throw Error(ErrorKind::BadConfig, "unknown format '" + cert_format + "'");
            const EmitOptions opt{cert_timing};
            if (cert_out.empty())
                std::cout << render(r, fmt, opt);
            else
                emit(r, fmt, cert_out, opt);
            std::cerr << r.suite << ": " << r.instances << " instances, " << r.checks << " checks, "
                      << r.violations.size() << " violations\n";
            return r.passed() ? kExitOk : kExitViolation;
        }
        if (*search_cmd) {
            const GenConfig cfg = search_gen.config(search_starts);
            SearchRecord rec = search_min_ratio(parse_search_kind(search_kind), cfg, search_refine);
            if (!search_no_ts) rec.timestamp = utc_timestamp();
            nlohmann::json j = rec;
            j["schema"] = "pbtv/1";
            if (search_out.empty()) {
                print_json(j);
            } else {
                std::ofstream f(search_out, std::ios::binary | std::ios::trunc);
                if (!f) throw Error(ErrorKind::IoError, "cannot open '" + search_out + "'");
                f << j.dump(2) << '\n';
            }
            return kExitOk;
        }
        if (*oracle_cmd) {
            std::size_t n = oracle_n;
            if (n == 0) n = oracle_check == "mixture" ? 200 : oracle_check == "affinity" ? 5 : 16;
            return run_oracle_check(oracle_check, n, oracle_count, oracle_seed);
        }
    } catch (const pbtv::Error& e) {
        std::cerr << "pbtv: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
