#pragma once

// Named verification suites: each one drives a scenario through a module's
// checks and returns an auditable report bundle. Checks whose hypotheses the
// scenario does not satisfy (verified at probes, never assumed) are recorded
// as not-applicable rather than failed; contract errors surface as failures.
//
// Runs are deterministic given (run spec, seed): all randomness flows through
// seeds derived per check, and parallel execution merges records in a fixed
// order.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "confsphere/mean_inequalities.hpp"
#include "confsphere/report.hpp"
#include "confsphere/scenarios.hpp"
#include "confsphere/sequence.hpp"
#include "confsphere/truncation.hpp"

namespace confsphere {

struct SuiteRun {
    std::string suite = "all";  // regularity | spherical-mean | truncation | singular-set | total-scalar | all
    ScenarioSpec scenario;
    std::string sampling_kind = "auto";  // auto | monte-carlo | product-rule
    std::size_t samples = 100000;
    int resolution = 48;
    std::uint64_t seed = 42;
    double h = kDefaultStep;
    double tolerance = 1e-3;  // residual / nonnegativity tolerance
    int workers = 1;
    std::string force_variant;  // "", "low", "high" (spherical-mean dispatch override)
    int probe_count = 1000;
    std::string out_dir;  // when set, suites also write CSV artifacts here

    json to_json() const {
        json j;
        j["suite"] = suite;
        json sc;
        confsphere::to_json(sc, scenario);
        j["scenario"] = sc;
        j["sampling_kind"] = sampling_kind;
        j["samples"] = samples;
        j["resolution"] = resolution;
        j["seed"] = seed;
        j["h"] = h;
        j["tolerance"] = tolerance;
        j["workers"] = workers;
        j["force_variant"] = force_variant;
        j["probe_count"] = probe_count;
        return j;
    }
};

namespace detail {

inline std::string fmt_exponent(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", p);
    return buf;
}

struct TaskOutput {
    std::vector<CheckRecord> checks;
    std::vector<Series> series;
};

using Task = std::function<TaskOutput()>;

inline void merge(ReportBundle& bundle, TaskOutput&& out) {
    for (auto& c : out.checks) bundle.checks.push_back(std::move(c));
    for (auto& s : out.series) bundle.series.push_back(std::move(s));
}

// Executes tasks on `workers` threads; outputs merge in submission order so
// reports are identical regardless of the worker count.
inline void run_tasks(ReportBundle& bundle, std::vector<Task>& tasks, int workers) {
    if (workers <= 1) {
        for (auto& t : tasks) merge(bundle, t());
        return;
    }
    std::vector<TaskOutput> outs(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                outs[i] = tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(workers, static_cast<int>(tasks.size()));
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (auto& o : outs) merge(bundle, std::move(o));
}

}  // namespace detail

// Shared per-run state: the scenario instance, the quadrature backend, probe
// points, and the hypothesis package inferred from the family.
struct SuiteContext {
    SuiteRun run;
    ScenarioInstance inst;
    std::shared_ptr<const SphereSampling> sampling;
    std::vector<Vec> probes;
    HypothesisBounds bounds;
    int n = 0;
    std::size_t cap_count = 2000;

    const ConformalFactor& head() const { return inst.factors.front(); }
    bool is_sequence() const { return inst.factors.size() > 1 && inst.limit.has_value(); }

    std::uint64_t check_seed(std::string_view slug) const {
        SeedChain chain(run.seed);
        chain.mix(run.suite).mix(slug);
        return chain.value();
    }
};

inline SuiteContext make_suite_context(const SuiteRun& run) {
    SuiteContext ctx;
    ctx.run = run;
    ctx.inst = build_scenario(run.scenario);
    ctx.n = ctx.inst.spec.n;

    std::string kind = run.sampling_kind;
    if (kind == "auto") kind = ctx.n <= 4 ? "product-rule" : "monte-carlo";
    if (kind == "product-rule") {
        ctx.sampling = std::make_shared<SphereSampling>(product_rule_sampling(ctx.n, run.resolution));
    } else if (kind == "monte-carlo") {
        ctx.sampling =
            std::make_shared<SphereSampling>(uniform_sphere_sampling(ctx.n, run.samples, run.seed));
    } else {
        throw std::invalid_argument("unknown sampling kind '" + kind + "'");
    }
    ctx.probes = sample_probe_points(ctx.n, run.probe_count,
                                     SeedChain(run.seed).mix("probes").value());
    ctx.cap_count = std::max<std::size_t>(500, std::min<std::size_t>(4000, run.samples / 25));

    // hypothesis package inferred from the family: a generous two-sided
    // volume bound, a fixed uniform-integrability budget, and the total
    // scalar curvature of the head element as the curvature cap
    double vmax = 1.0;
    for (const auto& cf : ctx.inst.factors) {
        const double v = volume(cf, *ctx.sampling);
        vmax = std::max({vmax, v, 1.0 / v});
    }
    if (ctx.inst.limit) {
        const double v = volume(*ctx.inst.limit, *ctx.sampling);
        vmax = std::max({vmax, v, 1.0 / v});
    }
    ctx.bounds.V = 1.05 * vmax;
    ctx.bounds.alpha = 0.5;
    ctx.bounds.Lambda = 4.0 * std::pow(sphere_volume_constant(ctx.n), 0.5);
    double worst_total = 0.0;
    for (const auto& cf : ctx.inst.factors)
        worst_total = std::max(worst_total, total_scalar_curvature(cf, *ctx.sampling, run.h).lhs);
    ctx.bounds.R0 = 1.001 * worst_total;
    return ctx;
}

namespace detail {

inline CheckRecord not_applicable(std::string slug, int n, std::uint64_t seed, std::string reason) {
    CheckRecord rec;
    rec.check = std::move(slug);
    rec.n = n;
    rec.params["reason"] = std::move(reason);
    rec.status = CheckStatus::not_applicable;
    rec.seed = seed;
    return rec;
}

inline CheckRecord contract_failure(std::string slug, int n, std::uint64_t seed, std::string error) {
    CheckRecord rec;
    rec.check = std::move(slug);
    rec.n = n;
    rec.params["error"] = std::move(error);
    rec.status = CheckStatus::fail;
    rec.seed = seed;
    return rec;
}

inline CheckRecord boolean_record(std::string slug, int n, std::uint64_t seed, bool pass,
                                  json params = json::object()) {
    CheckRecord rec;
    rec.check = std::move(slug);
    rec.n = n;
    rec.params = std::move(params);
    rec.status = pass ? CheckStatus::pass : CheckStatus::fail;
    rec.seed = seed;
    return rec;
}

}  // namespace detail

// --- regularity suite ---------------------------------------------------------------

inline ReportBundle regularity_suite(const SuiteContext& ctx) {
    ReportBundle bundle;
    bundle.suite = "regularity";
    to_json(bundle.scenario, ctx.inst.spec);
    bundle.sampling = ctx.sampling->descriptor();
    bundle.seed = ctx.run.seed;
    bundle.h = ctx.run.h;

    const ConformalFactor& cf = ctx.head();
    const int n = ctx.n;
    const double h = ctx.run.h;
    const double tol = ctx.run.tolerance;
    const SphereSampling& sampling = *ctx.sampling;

    const auto curv = curvature_report(cf, ctx.probes, h, tol);
    // the integral bounds below are theorems under Sc_g >= 0; when the
    // scenario has genuinely negative curvature they are vacuous, not failed
    const bool sc_ok = curv.nonnegative;
    const char* sc_reason = "scenario has negative scalar curvature at probes";

    std::vector<detail::Task> tasks;
    tasks.push_back([&, curv] {
        detail::TaskOutput out;
        CheckRecord rec;
        rec.check = "scalar-curvature-nonnegative";
        rec.n = n;
        rec.lhs = -curv.min_value;
        rec.rhs = 0.0;
        rec.slack = curv.min_value;
        rec.tolerance = tol;
        rec.seed = ctx.check_seed(rec.check);
        rec.params["probes"] = curv.probe_count();
        rec.params["min"] = curv.min_value;
        rec.params["max"] = curv.max_value;
        if (curv.nonnegative)
            rec.status = CheckStatus::pass;
        else if (ctx.inst.claims_nonnegative_curvature)
            rec.status = CheckStatus::fail;
        else {
            rec.status = CheckStatus::not_applicable;
            rec.params["reason"] = "family does not assert nonnegative curvature";
        }
        out.checks.push_back(std::move(rec));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const double defect = conformal_covariance_defect(cf, 0.7, ctx.probes, h);
        out.checks.push_back(record_from(make_check("conformal-covariance", defect, 1e-8, 0.0), n,
                                         ctx.check_seed("conformal-covariance"),
                                         json{{"shift", 0.7}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const double vol = volume(cf, sampling);
        out.checks.push_back(record_from(make_check("volume-lower-bound", 1.0 / ctx.bounds.V, vol),
                                         n, ctx.check_seed("volume-lower-bound")));
        out.checks.push_back(record_from(make_check("volume-upper-bound", vol, ctx.bounds.V), n,
                                         ctx.check_seed("volume-upper-bound")));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        if (!sc_ok) {
            out.checks.push_back(detail::not_applicable("gradient-l2-bound", n,
                                                        ctx.check_seed("gradient-l2-bound"),
                                                        sc_reason));
            return out;
        }
        out.checks.push_back(record_from(gradient_l2_bound_check(cf, sampling, h), n,
                                         ctx.check_seed("gradient-l2-bound")));
        return out;
    });
    for (double p : {0.0, 0.25}) {
        tasks.push_back([&, p] {
            detail::TaskOutput out;
            if (!sc_ok) {
                out.checks.push_back(detail::not_applicable(
                    "weighted-gradient-bound", n, ctx.check_seed("weighted-gradient-bound"),
                    sc_reason));
                return out;
            }
            auto chk = weighted_gradient_bound_check(cf, p, ctx.bounds.V, sampling, h);
            out.checks.push_back(
                record_from(chk, n, ctx.check_seed("weighted-gradient-bound"), json{{"p", p}}));
            return out;
        });
    }
    const double q_direct = 0.5 * (1.0 + n / (n - 1.0));
    const double q_interp = n == 3 ? 1.6 : 0.5 * (n / (n - 1.0) + 4.0 * n / (3.0 * n - 2.0));
    for (double q : {q_direct, q_interp}) {
        tasks.push_back([&, q] {
            detail::TaskOutput out;
            if (!sc_ok) {
                out.checks.push_back(detail::not_applicable(
                    "w1q-gradient-bound", n, ctx.check_seed("w1q-gradient-bound"), sc_reason));
                return out;
            }
            auto rep = w1q_bound_check(cf, q, ctx.bounds.V, sampling, h);
            json params{{"q", q}, {"route", rep.route},
                        {"factor_gradient", rep.factor_gradient},
                        {"factor_volume", rep.factor_volume}};
            if (rep.route == "interpolated") params["theta"] = rep.theta;
            out.checks.push_back(
                record_from(rep.check, n, ctx.check_seed("w1q-gradient-bound"), std::move(params)));
            return out;
        });
    }
    tasks.push_back([&] {
        detail::TaskOutput out;
        if (!sc_ok) {
            out.checks.push_back(detail::not_applicable("weak-psc-residual", n,
                                                        ctx.check_seed("weak-psc-residual"),
                                                        sc_reason));
            return out;
        }
        const double radii[] = {0.6, 1.0, 1.4};
        const auto family = weak_psc_test_family(n, radii);
        double min_residual = std::numeric_limits<double>::infinity();
        for (const auto& phi : family)
            min_residual = std::min(min_residual, weak_psc_residual(cf.u, phi, sampling, h));
        out.checks.push_back(record_from(
            make_check("weak-psc-residual", -min_residual, 0.0, tol), n,
            ctx.check_seed("weak-psc-residual"),
            json{{"family_size", family.size()},
                 {"family_coverage", "finite bump family: verifies the inequality, "
                                     "cannot certify its failure"}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        std::vector<CapProbe> caps;
        for (double r : {0.2, 0.5, 1.0, 0.5 * M_PI}) caps.push_back({ctx.inst.focus, r});
        Rng rng(ctx.check_seed("uniform-integrability"));
        caps.push_back({rng.unit_vector(n + 1), 0.5});
        auto rep = uniform_integrability_audit(cf, ctx.bounds, caps, sampling);
        out.checks.push_back(record_from(
            make_check("uniform-integrability", rep.worst_ratio, rep.lambda), n,
            ctx.check_seed("uniform-integrability"),
            json{{"alpha", ctx.bounds.alpha}, {"cap_count", caps.size()}}));
        return out;
    });
    tasks.push_back([&, curv] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("superharmonic-factor");
        if (!curv.nonnegative) {
            out.checks.push_back(detail::not_applicable(
                "superharmonic-factor", n, seed, "scalar curvature is not nonnegative at probes"));
            return out;
        }
        const double defect = max_superharmonic_defect(cf.u, 0.25 * n * (n - 2.0), ctx.probes, h);
        out.checks.push_back(record_from(make_check("superharmonic-factor", defect, 0.0, 1e-5), n,
                                         seed, json{{"C", 0.25 * n * (n - 2.0)}}));
        return out;
    });

    std::vector<detail::Task> owned = std::move(tasks);
    detail::run_tasks(bundle, owned, ctx.run.workers);
    return bundle;
}

// --- spherical-mean suite -------------------------------------------------------------

inline ReportBundle spherical_mean_suite(const SuiteContext& ctx) {
    ReportBundle bundle;
    bundle.suite = "spherical-mean";
    to_json(bundle.scenario, ctx.inst.spec);
    bundle.sampling = ctx.sampling->descriptor();
    bundle.seed = ctx.run.seed;
    bundle.h = ctx.run.h;

    const ConformalFactor& cf = ctx.head();
    const int n = ctx.n;
    const double h = ctx.run.h;
    const SphereSampling& sampling = *ctx.sampling;
    const Vec& focus = ctx.inst.focus;

    std::optional<MeanVariant> forced;
    if (ctx.run.force_variant == "low") forced = MeanVariant::low;
    if (ctx.run.force_variant == "high") forced = MeanVariant::high;

    const double uC = 0.25 * n * (n - 2.0);
    const bool u_hypothesis = max_superharmonic_defect(cf.u, uC, ctx.probes, h) <= 1e-5;
    // the f-variant needs the constant bound laplace f <= n/2
    const bool f_hypothesis = max_laplacian_excess(cf.f, 0.5 * n, ctx.probes, h) <= 1e-5;

    std::vector<detail::Task> tasks;
    tasks.push_back([&] {
        detail::TaskOutput out;
        const auto pc = mean_constants(n);
        const auto rule = gauss_legendre(64, 0.0, 0.5 * M_PI);
        const double gl =
            integrate_rule([&](double s) { return std::pow(std::sin(s), n - 1); }, rule);
        out.checks.push_back(record_from(
            make_check("drift-constants-quadrature", std::abs(pc.f_drift - 0.5 * n * gl), 1e-10),
            n, ctx.check_seed("drift-constants-quadrature"),
            json{{"c_low", pc.c_low}, {"c_high", pc.c_high}, {"f_drift", pc.f_drift}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("elementary-ratio-low");
        auto grid = RadialGrid::uniform(500, 0.003, 0.5 * M_PI - 0.003);
        const bool requested = forced.has_value() ? *forced == MeanVariant::low : n <= 4;
        if (!requested) {
            out.checks.push_back(detail::not_applicable("elementary-ratio-low", n, seed,
                                                        "dimension dispatch selects the power variant"));
            return out;
        }
        try {
            auto rep = elementary_ratio_low(n, grid, 1e-9);
            out.checks.push_back(record_from(
                make_check("elementary-ratio-low", rep.max_ratio, rep.bound, 1e-9), n, seed,
                json{{"grid_points", grid.size()}, {"argmax_radius", rep.argmax_radius}}));
        } catch (const std::invalid_argument& e) {
            out.checks.push_back(detail::contract_failure("elementary-ratio-low", n, seed, e.what()));
        }
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        auto grid = RadialGrid::uniform(500, 0.003, 0.5 * M_PI - 0.003);
        auto rep = elementary_ratio_high(n, grid, 1e-9);
        out.checks.push_back(record_from(
            make_check("elementary-ratio-high", rep.max_ratio, rep.bound, 1e-9), n,
            ctx.check_seed("elementary-ratio-high"),
            json{{"grid_points", grid.size()}, {"argmax_radius", rep.argmax_radius}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("phi-derivative-identity");
        CapQuadratureOptions opts;
        opts.cap_count = ctx.cap_count;
        opts.seed = seed;
        double worst = 0.0;
        for (double r : {0.3, 0.6, 0.9, 1.2}) {
            auto rep = phi_derivative_identity_check(cf.u, focus, r, h, opts);
            worst = std::max(worst, rep.relative_discrepancy);
        }
        out.checks.push_back(record_from(make_check("phi-derivative-identity", worst, 0.02), n,
                                         seed, json{{"radii", {0.3, 0.6, 0.9, 1.2}}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("spherical-mean-monotonicity");
        if (!u_hypothesis) {
            out.checks.push_back(detail::not_applicable(
                "spherical-mean-monotonicity", n, seed,
                "laplace u <= C u fails at probes for this scenario"));
            return out;
        }
        auto grid = RadialGrid::uniform(15, 0.1, 1.4);
        try {
            const double K = hypothesis_drift(cf.u, sampling, forced);
            auto rep = spherical_mean_monotonicity_check(cf.u, K, focus, grid, sampling,
                                                         ctx.cap_count, seed, forced);
            out.checks.push_back(record_from(
                make_check("spherical-mean-monotonicity", rep.max_uptick, rep.allowed_uptick), n,
                seed, json{{"drift", K}, {"required_drift", rep.required_drift}}));
            Series s;
            s.kind = "phi-profile";
            s.label = "drifted mean about the focus point";
            s.x = rep.profile.radii;
            for (std::size_t i = 0; i < rep.profile.radii.size(); ++i)
                s.y.push_back(rep.profile.drifted(i));
            out.series.push_back(std::move(s));
            if (!ctx.run.out_dir.empty())
                rep.profile.write_csv(ctx.run.out_dir + "/phi-profile.csv");
        } catch (const std::invalid_argument& e) {
            out.checks.push_back(
                detail::contract_failure("spherical-mean-monotonicity", n, seed, e.what()));
        }
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("pointwise-lower-bound");
        if (!u_hypothesis) {
            out.checks.push_back(detail::not_applicable("pointwise-lower-bound", n, seed,
                                                        "laplace u <= C u fails at probes"));
            return out;
        }
        try {
            auto chk = pointwise_lower_bound_check(cf.u, focus, 0.8, sampling, ctx.cap_count, seed,
                                                   forced);
            out.checks.push_back(record_from(chk, n, seed, json{{"radius", 0.8}}));
        } catch (const std::invalid_argument& e) {
            out.checks.push_back(detail::contract_failure("pointwise-lower-bound", n, seed, e.what()));
        }
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("ball-average-monotonicity");
        if (!u_hypothesis) {
            out.checks.push_back(detail::not_applicable("ball-average-monotonicity", n, seed,
                                                        "laplace u <= C u fails at probes"));
            return out;
        }
        const MeanVariant variant = dispatch_variant(n);
        const ScalarField target =
            variant == MeanVariant::low ? cf.u : power_field(cf.u, 2.0 / (n - 2.0));
        const double K = hypothesis_drift(cf.u, sampling);
        auto rep = ball_average_monotonicity_check(target, K, focus, 0.3, 0.9, 32, ctx.cap_count,
                                                   seed);
        out.checks.push_back(record_from(
            make_check("ball-average-monotonicity", rep.average_outer, rep.average_inner,
                       rep.tolerance),
            n, seed, json{{"r0", 0.3}, {"r1", 0.9}, {"drift", K}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("f-ball-average-center");
        if (!f_hypothesis) {
            out.checks.push_back(detail::not_applicable("f-ball-average-center", n, seed,
                                                        "laplace f <= n/2 fails at probes"));
            return out;
        }
        auto chk = f_ball_average_center_check(cf.f, focus, 0.9, 32, ctx.cap_count, seed);
        out.checks.push_back(record_from(chk, n, seed, json{{"radius", 0.9}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("superharmonic-power");
        if (!u_hypothesis) {
            out.checks.push_back(detail::not_applicable("superharmonic-power", n, seed,
                                                        "laplace u <= C u fails at probes"));
            return out;
        }
        const double alpha = n >= 5 ? 2.0 / (n - 2.0) : 0.5;
        auto rep = superharmonic_power_check(cf.u, uC, alpha, ctx.probes, h);
        out.checks.push_back(record_from(
            make_check("superharmonic-power", rep.power_defect, 0.0, rep.tolerance), n, seed,
            json{{"alpha", alpha}, {"C", uC}, {"base_defect", rep.base_defect}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("lower-semicontinuity");
        if (!u_hypothesis) {
            out.checks.push_back(detail::not_applicable("lower-semicontinuity", n, seed,
                                                        "laplace u <= C u fails at probes"));
            return out;
        }
        const MeanVariant variant = dispatch_variant(n);
        const ScalarField target =
            variant == MeanVariant::low ? cf.u : power_field(cf.u, 2.0 / (n - 2.0));
        const double K = hypothesis_drift(cf.u, sampling);
        const std::vector<double> radii{1.2, 0.9, 0.6, 0.3, 0.15};
        auto rep = lower_semicontinuity_probe(target, focus, K, radii, 32, ctx.cap_count, seed);
        out.checks.push_back(detail::boolean_record(
            "lower-semicontinuity", n, seed,
            rep.monotone_nondecreasing && rep.sup_value <= rep.center_value + rep.tolerance,
            json{{"sup", rep.sup_value},
                 {"center_value", rep.center_value},
                 {"tolerance", rep.tolerance}}));
        return out;
    });

    std::vector<detail::Task> owned = std::move(tasks);
    detail::run_tasks(bundle, owned, ctx.run.workers);
    return bundle;
}

// --- truncation suite -------------------------------------------------------------------

inline ReportBundle truncation_suite(const SuiteContext& ctx) {
    ReportBundle bundle;
    bundle.suite = "truncation";
    to_json(bundle.scenario, ctx.inst.spec);
    bundle.sampling = ctx.sampling->descriptor();
    bundle.seed = ctx.run.seed;
    bundle.h = ctx.run.h;

    const ConformalFactor& cf = ctx.head();
    const int n = ctx.n;
    const double h = ctx.run.h;
    const double tol = ctx.run.tolerance;
    const SphereSampling& sampling = *ctx.sampling;
    const double C = 0.25 * n * (n - 2.0);
    const bool u_hypothesis = max_superharmonic_defect(cf.u, C, ctx.probes, h) <= 1e-5;

    std::vector<detail::Task> tasks;
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("log-gradient-bound");
        if (!u_hypothesis) {
            out.checks.push_back(detail::not_applicable("log-gradient-bound", n, seed,
                                                        "laplace u <= C u fails at probes"));
            return out;
        }
        out.checks.push_back(record_from(log_gradient_bound_check(cf.u, C, sampling, ctx.probes, h),
                                         n, seed, json{{"C", C}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const double K = 1.2;
        auto once = truncate(cf.u, K).field();
        auto twice = truncate(once, K).field();
        auto higher = truncate(cf.u, 1.5 * K).field();
        double idem = 0.0, mono = 0.0;
        for (const auto& p : ctx.probes) {
            idem = std::max(idem, std::abs(twice.value(p) - once.value(p)));
            mono = std::max(mono, once.value(p) - higher.value(p));
        }
        out.checks.push_back(record_from(make_check("truncation-idempotent", idem, 0.0), n,
                                         ctx.check_seed("truncation-idempotent"),
                                         json{{"K", K}}));
        out.checks.push_back(record_from(make_check("truncation-monotone", mono, 0.0), n,
                                         ctx.check_seed("truncation-monotone"),
                                         json{{"K", K}, {"K_higher", 1.5 * K}}));
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        const std::uint64_t seed = ctx.check_seed("regular-value-select");
        const double mean_u = integrate(cf.u, sampling) / sphere_volume_constant(n);
        const double target = 1.2 * mean_u;
        try {
            std::vector<ScalarField> fields{cf.u};
            const double K = regular_value_select(fields, target, sampling, h);
            out.checks.push_back(detail::boolean_record("regular-value-select", n, seed, true,
                                                        json{{"target", target}, {"selected", K}}));
            auto t = truncate(cf.u, K);
            if (u_hypothesis) {
                const double radii[] = {0.7, 1.2};
                double min_residual = std::numeric_limits<double>::infinity();
                double excluded = 0.0;
                for (const auto& phi : weak_psc_test_family(n, radii)) {
                    auto rep = truncation_weak_inequality_check(t, phi, C, sampling, h, tol);
                    min_residual = std::min(min_residual, rep.residual);
                    excluded = std::max(excluded, rep.excluded_measure);
                }
                out.checks.push_back(record_from(
                    make_check("truncation-weak-inequality", -min_residual, 0.0, tol), n,
                    ctx.check_seed("truncation-weak-inequality"),
                    json{{"K", K}, {"C", C}, {"max_excluded_measure", excluded}}));
            } else {
                out.checks.push_back(detail::not_applicable(
                    "truncation-weak-inequality", n, ctx.check_seed("truncation-weak-inequality"),
                    "laplace u <= C u fails at probes"));
            }
            if (u_hypothesis) {
                out.checks.push_back(record_from(truncation_w12_bound_check(t, C, sampling, h), n,
                                                 ctx.check_seed("truncation-w12-bound"),
                                                 json{{"K", K}, {"C", C}}));
            } else {
                out.checks.push_back(detail::not_applicable("truncation-w12-bound", n,
                                                            ctx.check_seed("truncation-w12-bound"),
                                                            "laplace u <= C u fails at probes"));
            }
        } catch (const selection_failure& e) {
            out.checks.push_back(detail::contract_failure("regular-value-select", n, seed, e.what()));
        }
        return out;
    });
    tasks.push_back([&] {
        detail::TaskOutput out;
        auto tight = essential_infimum(cf.u, sampling, 0.001);
        auto loose = essential_infimum(cf.u, sampling, 0.01);
        out.checks.push_back(record_from(
            make_check("essential-infimum-monotone", tight.estimate, loose.estimate), n,
            ctx.check_seed("essential-infimum-monotone"),
            json{{"estimate", tight.estimate},
                 {"north", tight.north_estimate},
                 {"south", tight.south_estimate}}));
        return out;
    });
    if (ctx.is_sequence()) {
        tasks.push_back([&] {
            detail::TaskOutput out;
            const std::uint64_t seed = ctx.check_seed("power-l1-transfer");
            if (n < 5) {
                out.checks.push_back(detail::not_applicable(
                    "power-l1-transfer", n, seed, "the transfer inequality applies from dimension 5"));
                return out;
            }
            const double e_inf = essential_infimum(ctx.inst.limit->u, sampling, 0.005).estimate;
            auto chk = power_l1_transfer_check(ctx.inst.factors.back().u, ctx.inst.limit->u,
                                               std::min(e_inf, 1.0), sampling);
            out.checks.push_back(record_from(chk, n, seed, json{{"e_inf", std::min(e_inf, 1.0)}}));
            return out;
        });
        tasks.push_back([&] {
            detail::TaskOutput out;
            const std::uint64_t seed = ctx.check_seed("uniform-lower-bound");
            std::vector<double> grid;
            for (int k = 1; k <= 14; ++k) grid.push_back(0.1 * k);
            auto rep = uniform_lower_bound_experiment(ctx.inst.factors, *ctx.inst.limit, ctx.bounds,
                                                      ctx.probes, sampling, grid);
            const int i0 = rep.i0_certified >= 0 ? rep.i0_certified : rep.i0_observed;
            json params{{"i0_certified", rep.i0_certified},
                        {"i0_observed", rep.i0_observed},
                        {"e_quarter", rep.e_quarter}};
            if (!rep.per_index.empty()) {
                const auto& lastrep = rep.per_index.back();
                params["last_term_l1"] = lastrep.term_l1;
                params["last_term_drift"] = lastrep.term_drift;
                params["last_bound"] = lastrep.bound;
            }
            out.checks.push_back(detail::boolean_record(
                "uniform-lower-bound", n, seed, i0 >= 0 && rep.sampled_min_holds_from_i0,
                std::move(params)));
            return out;
        });
        tasks.push_back([&] {
            detail::TaskOutput out;
            const std::uint64_t seed = ctx.check_seed("dichotomy");
            std::vector<ScalarField> us;
            for (const auto& f : ctx.inst.factors) us.push_back(f.u);
            std::vector<CapProbe> caps;
            for (double r : {0.2, 0.5, 1.0}) caps.push_back({ctx.inst.focus, r});
            auto rep = dichotomy_experiment(us, sampling, ctx.bounds, caps);
            // full evidence bundle: trajectories and audit inline
            json params{{"classification", rep.classification},
                        {"certificate", rep.positivity_certificate},
                        {"volume_violations", rep.volume_violations},
                        {"essinf_trajectory", rep.essinf_trajectory},
                        {"volume_trajectory", rep.volume_trajectory},
                        {"cauchy_l2_steps", rep.cauchy_l2_steps},
                        {"audit_holds", rep.audit.holds},
                        {"audit_worst_ratio", rep.audit.worst_ratio},
                        {"cauchy_like", rep.cauchy_like}};
            const bool consistent = !rep.positivity_certificate ||
                                    rep.classification == "positive-infimum";
            out.checks.push_back(
                detail::boolean_record("dichotomy", n, seed, consistent, std::move(params)));

            const std::uint64_t fseed = ctx.check_seed("f-moment-bound");
            if (rep.positivity_certificate) {
                const double e_inf = essential_infimum(ctx.inst.limit->u, sampling, 0.005).estimate;
                auto frep = f_moment_bound_check(ctx.inst.factors, e_inf, ctx.bounds.V, sampling, h);
                double worst = 0.0;
                for (const auto& chk : frep.checks) worst = std::max(worst, chk.lhs);
                out.checks.push_back(record_from(
                    make_check("f-moment-bound", worst, frep.assembled_bound), n, fseed,
                    json{{"mean_upper", frep.mean_upper},
                         {"mean_lower", frep.mean_lower},
                         {"poincare_constant", frep.poincare_constant}}));
            } else {
                out.checks.push_back(detail::not_applicable("f-moment-bound", n, fseed,
                                                            "no positivity certificate"));
            }
            return out;
        });
    }

    std::vector<detail::Task> owned = std::move(tasks);
    detail::run_tasks(bundle, owned, ctx.run.workers);
    return bundle;
}

// --- singular-set suite --------------------------------------------------------------------

inline ReportBundle singular_set_suite(const SuiteContext& ctx) {
    if (!ctx.is_sequence())
        throw std::invalid_argument("singular-set suite requires a sequence scenario");
    ReportBundle bundle;
    bundle.suite = "singular-set";
    to_json(bundle.scenario, ctx.inst.spec);
    bundle.sampling = ctx.sampling->descriptor();
    bundle.seed = ctx.run.seed;
    bundle.h = ctx.run.h;

    const int n = ctx.n;
    const double h = ctx.run.h;
    auto seq = make_factor_sequence(ctx.inst.factors, *ctx.inst.limit, ctx.bounds, ctx.sampling,
                                    ctx.run.seed);
    const int J = static_cast<int>(seq.factors.size());

    // per-j reports are independent; compute them in parallel, merge by index
    std::vector<SingularSetReport> f_reports(static_cast<std::size_t>(J));
    {
        std::vector<detail::Task> jobs;
        ReportBundle scratch;
        for (int j = 0; j < J; ++j)
            jobs.push_back([&, j] {
                f_reports[static_cast<std::size_t>(j)] =
                    singular_set_decompose(seq, j, DecompositionVariant::f_based, h);
                return detail::TaskOutput{};
            });
        detail::run_tasks(scratch, jobs, ctx.run.workers);
    }

    for (const auto& rep : f_reports) {
        const std::uint64_t seed = ctx.check_seed("singular-set-" + std::to_string(rep.index));
        json params{{"j", rep.index},   {"variant", rep.variant}, {"cj", rep.cj},
                    {"tau", rep.tau},   {"perimeter", rep.perimeter},
                    {"bad_volume_round", rep.bad_volume_round},
                    {"bad_volume_conformal", rep.bad_volume_conformal},
                    {"good_volume_conformal", rep.good_volume_conformal},
                    {"chebyshev_ratio", rep.chebyshev_ratio},
                    {"uniform_integrability_cap", rep.uniform_integrability_cap},
                    {"degenerate", rep.degenerate},
                    {"threshold_convention", "w = |difference|^2 thresholded at tau throughout"}};
        CheckRecord bracket;
        bracket.check = "tau-in-bracket";
        bracket.n = n;
        bracket.params = params;
        bracket.lhs = rep.degenerate ? 0.0 : -std::min(rep.tau - 0.5 * rep.epsilon, rep.epsilon - rep.tau);
        bracket.rhs = 0.0;
        bracket.slack = -bracket.lhs;
        bracket.status = bracket.lhs <= 0.0 ? CheckStatus::pass : CheckStatus::fail;
        bracket.seed = seed;
        bundle.checks.push_back(std::move(bracket));
        bundle.checks.push_back(record_from(
            make_check("perimeter-cap", rep.perimeter, rep.perimeter_cap,
                       0.05 * rep.perimeter_cap),
            n, seed, json{{"j", rep.index}}));
        bundle.checks.push_back(record_from(make_check("good-set-sup", rep.good_sup, rep.tau), n,
                                            seed, json{{"j", rep.index}}));
        bundle.checks.push_back(record_from(
            make_check("chebyshev-volume", rep.bad_volume_round,
                       rep.degenerate ? 0.0 : rep.chebyshev_bound, 1e-12),
            n, seed, json{{"j", rep.index}}));
        if (!rep.selection.scan.empty()) {
            Series s;
            s.kind = "tau-scan";
            s.label = "j=" + std::to_string(rep.index);
            for (const auto& pt : rep.selection.scan) {
                s.x.push_back(pt.tau);
                s.y.push_back(pt.perimeter);
            }
            bundle.series.push_back(std::move(s));
        }
    }
    {
        double worst_increase = -std::numeric_limits<double>::infinity();
        for (int j = 1; j < J; ++j)
            worst_increase = std::max(
                worst_increase, f_reports[static_cast<std::size_t>(j)].bad_volume_round -
                                    f_reports[static_cast<std::size_t>(j - 1)].bad_volume_round);
        bundle.checks.push_back(record_from(
            make_check("bad-volume-monotone", worst_increase, 0.0, 1e-9), n,
            ctx.check_seed("bad-volume-monotone")));
    }
    {
        // the u-based variant refuses to run without the curvature budget
        const std::uint64_t seed = ctx.check_seed("u-variant-requires-r0");
        HypothesisBounds no_r0 = ctx.bounds;
        no_r0.R0.reset();
        auto gated = make_factor_sequence(ctx.inst.factors, *ctx.inst.limit, no_r0, ctx.sampling);
        bool refused = false;
        try {
            singular_set_decompose(gated, 0, DecompositionVariant::u_based, h);
        } catch (const std::invalid_argument&) {
            refused = true;
        }
        bundle.checks.push_back(
            detail::boolean_record("u-variant-requires-r0", n, seed, refused));
    }
    {
        const std::uint64_t seed = ctx.check_seed("u-variant-consistency");
        double worst_rel = 0.0;
        bool ran = true;
        try {
            for (int j = 0; j < J; ++j) {
                auto urep = singular_set_decompose(seq, j, DecompositionVariant::u_based, h);
                const auto& frep = f_reports[static_cast<std::size_t>(j)];
                const double rel = std::abs(urep.good_volume_conformal - frep.good_volume_conformal) /
                                   std::max(frep.good_volume_conformal, 1e-12);
                worst_rel = std::max(worst_rel, rel);
            }
        } catch (const hypothesis_violation& e) {
            bundle.checks.push_back(detail::not_applicable("u-variant-consistency", n, seed, e.what()));
            ran = false;
        }
        if (ran)
            bundle.checks.push_back(record_from(make_check("u-variant-consistency", worst_rel, 0.02),
                                                n, seed));
    }
    {
        const std::vector<double> exponents{1.0, 2.0, 2.0 * n / (n - 2.0)};
        std::vector<ScalarField> tests;
        tests.push_back(cutoff_bump_field(n, ctx.inst.focus, 1.0));
        tests.push_back(constant_field(n, 1.0));
        auto rep = convergence_report(seq, exponents, tests, h);
        bundle.checks.push_back(detail::boolean_record(
            "lp-distance-decay", n, ctx.check_seed("lp-distance-decay"),
            rep.lp_monotone_decay[0] && rep.lp_monotone_decay[1],
            json{{"boundary_exponent_flagged", !rep.exponent_in_range[2]},
                 {"exponents", exponents}}));
        bundle.checks.push_back(detail::boolean_record(
            "weak-pairing-decay", n, ctx.check_seed("weak-pairing-decay"),
            rep.pairing_decay[0] && rep.pairing_decay[1],
            json{{"label", "finite-family weak-pairing decay"}}));
        for (std::size_t pi = 0; pi < exponents.size(); ++pi) {
            Series s;
            s.kind = "convergence";
            s.label = "p=" + detail::fmt_exponent(exponents[pi]);
            for (std::size_t j = 0; j < rep.lp_distances.size(); ++j) {
                s.x.push_back(static_cast<double>(j));
                s.y.push_back(rep.lp_distances[j][pi]);
            }
            bundle.series.push_back(std::move(s));
        }
    }
    if (!ctx.run.out_dir.empty()) {
        // bad-set sample masks as CSV point lists
        for (const auto& rep : f_reports) {
            std::ofstream out(ctx.run.out_dir + "/bad-set-" + std::to_string(rep.index) + ".csv");
            for (int k = 0; k <= n; ++k) out << "x" << k << ",";
            out << "weight\n";
            out.precision(17);
            for (std::uint32_t idx : rep.bad_indices) {
                const auto p = ctx.sampling->point(idx);
                for (double c : p) out << c << ",";
                out << ctx.sampling->weight(idx) << "\n";
            }
        }
    }
    return bundle;
}

// --- total-scalar suite -----------------------------------------------------------------------

inline ReportBundle total_scalar_suite(const SuiteContext& ctx) {
    ReportBundle bundle;
    bundle.suite = "total-scalar";
    to_json(bundle.scenario, ctx.inst.spec);
    bundle.sampling = ctx.sampling->descriptor();
    bundle.seed = ctx.run.seed;
    bundle.h = ctx.run.h;

    const int n = ctx.n;
    const double h = ctx.run.h;
    const SphereSampling& sampling = *ctx.sampling;

    double worst_discrepancy = 0.0;
    json per_factor = json::array();
    for (const auto& cf : ctx.inst.factors) {
        auto rep = total_scalar_curvature(cf, sampling, h);
        worst_discrepancy = std::max(worst_discrepancy, rep.relative_discrepancy);
        per_factor.push_back(rep.relative_discrepancy);
    }
    bundle.checks.push_back(record_from(
        make_check("total-scalar-identity", worst_discrepancy, 0.01), n,
        ctx.check_seed("total-scalar-identity"),
        json{{"per_factor_discrepancy", per_factor}, {"R0", ctx.bounds.R0.value()}}));

    const ScalarField& u_limit = ctx.inst.limit ? ctx.inst.limit->u : ctx.head().u;
    const double radii[] = {0.6, 1.0, 1.4};
    auto family = weak_psc_test_family(n, radii);
    auto rep = limit_weak_psc_check(u_limit, family, sampling, h, ctx.run.tolerance);
    bundle.checks.push_back(record_from(
        make_check("limit-weak-psc", -rep.min_residual, 0.0, rep.tolerance), n,
        ctx.check_seed("limit-weak-psc"),
        json{{"family_size", family.size()},
             {"family_coverage",
              "finite bump family: verifies the inequality, cannot certify its failure"}}));
    return bundle;
}

// --- driver ------------------------------------------------------------------------------------

inline std::vector<ReportBundle> run_suite(const SuiteRun& run) {
    static const std::vector<std::string> known{"regularity", "spherical-mean", "truncation",
                                                "singular-set", "total-scalar", "all"};
    if (std::find(known.begin(), known.end(), run.suite) == known.end())
        throw std::invalid_argument("unknown suite '" + run.suite + "'");
    SuiteContext ctx = make_suite_context(run);
    if (!run.out_dir.empty()) std::filesystem::create_directories(run.out_dir);

    std::vector<ReportBundle> bundles;
    const auto want = [&](const char* name) { return run.suite == "all" || run.suite == name; };
    if (want("regularity")) bundles.push_back(regularity_suite(ctx));
    if (want("spherical-mean")) bundles.push_back(spherical_mean_suite(ctx));
    if (want("truncation")) bundles.push_back(truncation_suite(ctx));
    if (want("singular-set")) {
        if (ctx.is_sequence())
            bundles.push_back(singular_set_suite(ctx));
        else if (run.suite == "singular-set")
            throw std::invalid_argument("singular-set suite requires a sequence scenario");
    }
    if (want("total-scalar")) bundles.push_back(total_scalar_suite(ctx));
    return bundles;
}

inline bool all_passed(std::span<const ReportBundle> bundles) {
    for (const auto& b : bundles)
        if (!b.passed()) return false;
    return true;
}

}  // namespace confsphere
