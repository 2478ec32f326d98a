#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "confsphere/suites.hpp"
#include "confsphere/svg.hpp"

using namespace confsphere;

namespace {

SuiteRun small_run(const std::string& suite, const std::string& scenario) {
    SuiteRun run;
    run.suite = suite;
    run.scenario.name = scenario;
    run.scenario.n = 3;
    run.resolution = 20;
    run.samples = 20000;
    run.seed = 11;
    run.probe_count = 200;
    return run;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("identical runs give byte-identical reports") {
    auto run = small_run("regularity", "bubble");
    auto a = run_suite(run);
    auto b = run_suite(run);
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(a[0].to_json().dump(2) == b[0].to_json().dump(2));

    SUBCASE("worker count does not change the bytes") {
        auto parallel = run;
        parallel.workers = 4;
        auto c = run_suite(parallel);
        CHECK(a[0].to_json().dump(2) == c[0].to_json().dump(2));
    }
    SUBCASE("a different seed changes the report") {
        auto other = run;
        other.seed = 12;
        auto c = run_suite(other);
        CHECK(a[0].to_json().dump(2) != c[0].to_json().dump(2));
    }
}

TEST_CASE("suite and scenario contracts") {
    CHECK_THROWS_AS(run_suite(small_run("frobnicate", "round")), std::invalid_argument);
    CHECK_THROWS_AS(run_suite(small_run("singular-set", "round")), std::invalid_argument);
    // 'all' simply skips the sequence-only suite on single-factor scenarios
    auto bundles = run_suite(small_run("all", "round"));
    bool has_singular = false;
    for (const auto& b : bundles) has_singular = has_singular || b.suite == "singular-set";
    CHECK_FALSE(has_singular);
    CHECK(bundles.size() == 4);
}

TEST_CASE("forcing the low variant in high dimension surfaces a contract failure") {
    auto run = small_run("spherical-mean", "round");
    run.scenario.n = 5;
    run.sampling_kind = "monte-carlo";
    run.samples = 5000;
    run.force_variant = "low";
    auto bundles = run_suite(run);
    REQUIRE(bundles.size() == 1);
    bool saw_contract_error = false;
    for (const auto& c : bundles[0].checks) {
        if ((c.check == "elementary-ratio-low" || c.check == "spherical-mean-monotonicity") &&
            c.status == CheckStatus::fail && c.params.contains("error"))
            saw_contract_error = true;
    }
    CHECK(saw_contract_error);
    CHECK_FALSE(bundles[0].passed());
}

TEST_CASE("report bundles round-trip through JSON") {
    auto bundles = run_suite(small_run("total-scalar", "round"));
    REQUIRE(bundles.size() == 1);
    const auto j = bundles[0].to_json();
    auto back = bundle_from_json(nlohmann::ordered_json::parse(j.dump()));
    CHECK(back.suite == bundles[0].suite);
    CHECK(back.checks.size() == bundles[0].checks.size());
    CHECK(back.to_json().dump() == j.dump());
    CHECK(back.passed());
}

TEST_CASE("exit semantics follow check verdicts") {
    auto good = run_suite(small_run("regularity", "round"));
    CHECK(all_passed(good));
    // a perturbation too large to keep curvature nonnegative while claiming it
    auto run = small_run("regularity", "perturbation");
    run.scenario.amplitude = 1.5;
    run.scenario.J = 2;
    auto bad = run_suite(run);
    CHECK_FALSE(all_passed(bad));
}

TEST_CASE("singular-set suite emits tau scans and convergence series") {
    auto run = small_run("singular-set", "spike");
    run.scenario.J = 3;
    run.resolution = 32;
    auto bundles = run_suite(run);
    REQUIRE(bundles.size() == 1);
    std::size_t tau_scans = 0, convergence = 0;
    for (const auto& s : bundles[0].series) {
        if (s.kind == "tau-scan") ++tau_scans;
        if (s.kind == "convergence") ++convergence;
    }
    CHECK(tau_scans == 3);
    CHECK(convergence == 3);
    CHECK(bundles[0].passed());
}

TEST_CASE("plots render deterministically and reject missing kinds") {
    auto run = small_run("singular-set", "spike");
    run.scenario.J = 2;
    run.resolution = 24;
    auto bundles = run_suite(run);
    const auto dir = std::filesystem::temp_directory_path() / "confsphere_plots";
    std::filesystem::create_directories(dir);
    const std::string kinds[] = {"tau-scan"};
    auto written = emit_plots(bundles[0], kinds, dir.string());
    REQUIRE(written.size() == 1);
    const std::string first = slurp(written[0]);
    emit_plots(bundles[0], kinds, dir.string());
    CHECK(slurp(written[0]) == first);
    CHECK(first.find("<svg") == 0);
    const std::string missing[] = {"phi-profile"};
    CHECK_THROWS_AS(emit_plots(bundles[0], missing, dir.string()), std::invalid_argument);
    std::filesystem::remove_all(dir);
}

TEST_CASE("suite context infers usable hypothesis bounds") {
    auto ctx = make_suite_context(small_run("regularity", "bubble"));
    CHECK(ctx.bounds.V > volume(ctx.head(), *ctx.sampling));
    CHECK(ctx.bounds.R0.has_value());
    CHECK(ctx.n == 3);
    CHECK(ctx.is_sequence() == false);
}
