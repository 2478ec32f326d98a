// Batch verification driver: runs named check suites against canonical
// scenarios or config files, and emits JSON reports, CSV profiles, and SVG
// plots. Reports are byte-reproducible given the same spec and seed; wall
// clock data goes to a separate metadata file.
//
//   confsphere verify --suite all --scenario bubble --n 3 --lambda 2
//       --samples 100000 --seed 42 --out reports/
//   confsphere constants --n 3
//   confsphere scenario-dump --scenario spike --J 5
//   confsphere plot --in reports/singular-set.json --kind tau-scan --out reports/

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "confsphere/suites.hpp"
#include "confsphere/svg.hpp"

namespace {

using namespace confsphere;

struct ScenarioCli {
    std::string name = "round";
    std::string config_path;
    int n = 3;
    double c = 0.0;
    double lambda = 2.0;
    int J = 0;
    std::string base = "0";
    std::string direction = "x0";
    double amplitude = 0.3;
    double decay = 0.5;
    double height = 1.0;
    double width0 = 0.4;
    double width_decay = 0.5;
};

void add_scenario_flags(CLI::App* cmd, ScenarioCli& s) {
    cmd->add_option("--scenario", s.name, "scenario family: round | bubble | perturbation | spike");
    cmd->add_option("--config", s.config_path, "path to a scenario spec JSON file (overrides flags)");
    cmd->add_option("--n", s.n, "sphere dimension (>= 3)");
    cmd->add_option("--c", s.c, "round scenario: constant log factor");
    cmd->add_option("--lambda", s.lambda, "bubble scenario: dilation parameter (>= 1)");
    cmd->add_option("--J", s.J, "sequence length (perturbation/spike; 0 = family default)");
    cmd->add_option("--base", s.base, "expression for the limit log factor");
    cmd->add_option("--direction", s.direction, "perturbation: expression for the direction field");
    cmd->add_option("--amp0", s.amplitude, "perturbation: leading amplitude");
    cmd->add_option("--decay", s.decay, "perturbation: amplitude decay ratio");
    cmd->add_option("--height", s.height, "spike: bump height");
    cmd->add_option("--width0", s.width0, "spike: leading bump width");
    cmd->add_option("--width-decay", s.width_decay, "spike: width decay ratio");
}

ScenarioSpec resolve_scenario(const ScenarioCli& s, std::uint64_t seed) {
    if (!s.config_path.empty()) {
        std::ifstream in(s.config_path);
        if (!in) throw std::invalid_argument("cannot open config file " + s.config_path);
        nlohmann::json j;
        in >> j;
        return scenario_spec_from_json(j);
    }
    ScenarioSpec spec;
    spec.name = s.name;
    spec.n = s.n;
    spec.seed = seed;
    spec.c = s.c;
    spec.lambda = s.lambda;
    spec.J = s.J;
    spec.base = s.base;
    spec.direction = s.direction;
    spec.amplitude = s.amplitude;
    spec.decay = s.decay;
    spec.height = s.height;
    spec.width0 = s.width0;
    spec.width_decay = s.width_decay;
    spec.validate();
    return spec;
}

int run_verify(const ScenarioCli& scen, SuiteRun run, bool export_points) {
    run.scenario = resolve_scenario(scen, run.seed);
    const auto t0 = std::chrono::steady_clock::now();
    auto bundles = run_suite(run);
    const auto t1 = std::chrono::steady_clock::now();

    std::size_t failed = 0, total = 0, skipped = 0;
    for (const auto& bundle : bundles) {
        for (const auto& check : bundle.checks) {
            ++total;
            if (check.status == CheckStatus::fail) ++failed;
            if (check.status == CheckStatus::not_applicable) ++skipped;
            std::cout << "[" << to_string(check.status) << "] " << bundle.suite << "/"
                      << check.check << " (lhs=" << check.lhs << ", rhs=" << check.rhs
                      << ", slack=" << check.slack << ")\n";
        }
    }
    std::cout << total << " checks, " << failed << " failed, " << skipped << " not applicable\n";

    if (!run.out_dir.empty()) {
        std::filesystem::create_directories(run.out_dir);
        if (export_points) {
            SuiteContext ctx = make_suite_context(run);
            ctx.sampling->write_csv(run.out_dir + "/points.csv");
        }
        for (const auto& bundle : bundles) {
            bundle.write_json(run.out_dir + "/" + bundle.suite + ".json");
            for (const char* kind : {"phi-profile", "tau-scan", "convergence"}) {
                bool has = false;
                for (const auto& s : bundle.series) has = has || s.kind == kind;
                if (has) {
                    const std::string kinds[] = {kind};
                    emit_plots(bundle, kinds, run.out_dir);
                }
            }
        }
        json meta;
        meta["spec"] = run.to_json();
        meta["elapsed_seconds"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;
        meta["written_at_unix"] =
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count();
        std::ofstream out(run.out_dir + "/run_meta.json", std::ios::binary);
        out << meta.dump(2) << "\n";
    }
    return failed == 0 ? 0 : 1;
}

int run_constants(int n) {
    const auto pc = mean_constants(n);
    json j;
    j["n"] = n;
    j["omega_n"] = sphere_volume_constant(n);
    j["omega_n_minus_1"] = pc.omega_nm1;
    j["round_scalar_curvature"] = n * (n - 1.0);
    j["drift_low"] = pc.c_low;
    j["drift_high"] = pc.c_high;
    j["drift_f"] = pc.f_drift;
    j["gradient_l2_bound"] = n * sphere_volume_constant(n) / (n - 2.0);
    j["elementary_bound_low"] = n <= 4 ? json(std::pow(0.5 * M_PI, (n + 2.0) / (2.0 * n))) : json();
    j["elementary_bound_high"] = std::pow(0.5 * M_PI, (n - 1.0) / n);
    j["poincare_constant"] = 1.0 / n;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_scenario_dump(const ScenarioCli& scen, std::uint64_t seed, const std::string& out_path) {
    ScenarioSpec spec = resolve_scenario(scen, seed);
    auto inst = build_scenario(spec);
    json j;
    json spec_json;
    to_json(spec_json, inst.spec);
    j["spec"] = spec_json;
    j["factor_count"] = inst.factors.size();
    j["has_limit"] = inst.limit.has_value();
    j["focus"] = inst.focus;
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open " + out_path);
        out << j.dump(2) << "\n";
    }
    return 0;
}

int run_plot(const std::string& in_path, std::vector<std::string> kinds, std::string out_dir) {
    std::ifstream in(in_path);
    if (!in) throw std::invalid_argument("cannot open report " + in_path);
    nlohmann::ordered_json j;
    in >> j;
    auto bundle = bundle_from_json(j);
    if (out_dir.empty()) out_dir = ".";
    std::filesystem::create_directories(out_dir);
    auto written = emit_plots(bundle, kinds, out_dir);
    for (const auto& path : written) std::cout << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical verification toolkit for conformal metrics on the round n-sphere"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help and exit");  // keep --h free for the FD step

    ScenarioCli scen;
    SuiteRun run;
    auto* verify = app.add_subcommand("verify", "run a verification suite against a scenario");
    verify->set_help_flag("--help", "print help and exit");
    verify->add_option("--suite", run.suite,
                       "regularity | spherical-mean | truncation | singular-set | total-scalar | all");
    add_scenario_flags(verify, scen);
    verify->add_option("--samples", run.samples, "Monte Carlo sample count");
    verify->add_option("--resolution", run.resolution, "product-rule polar resolution");
    verify->add_option("--sampling", run.sampling_kind, "auto | monte-carlo | product-rule");
    verify->add_option("--seed", run.seed, "master seed (reports are reproducible given it)");
    verify->add_option("--h", run.h, "finite-difference step");
    verify->add_option("--tol", run.tolerance, "residual tolerance");
    verify->add_option("--workers", run.workers, "parallel worker count");
    verify->add_option("--force-variant", run.force_variant,
                       "force the mean-inequality variant: low | high");
    verify->add_option("--probes", run.probe_count, "pointwise probe count");
    verify->add_option("--out", run.out_dir, "output directory for reports, CSVs, and plots");
    bool export_points = false;
    verify->add_flag("--export-points", export_points, "also write the sampling point set as CSV");

    int constants_n = 3;
    auto* constants = app.add_subcommand("constants", "print the closed-form constants");
    constants->add_option("--n", constants_n, "sphere dimension (>= 3)");

    ScenarioCli dump_scen;
    std::uint64_t dump_seed = 0;
    std::string dump_out;
    auto* dump = app.add_subcommand("scenario-dump", "resolve and print a scenario specification");
    add_scenario_flags(dump, dump_scen);
    dump->add_option("--seed", dump_seed, "seed recorded in the spec");
    dump->add_option("--out", dump_out, "write to a file instead of stdout");

    std::string plot_in, plot_out;
    std::vector<std::string> plot_kinds;
    auto* plot = app.add_subcommand("plot", "render SVG plots from a report bundle");
    plot->add_option("--in", plot_in, "report JSON produced by verify")->required();
    plot->add_option("--kind", plot_kinds, "phi-profile | tau-scan | convergence")->required();
    plot->add_option("--out", plot_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*verify) return run_verify(scen, run, export_points);
        if (*constants) return run_constants(constants_n);
        if (*dump) return run_scenario_dump(dump_scen, dump_seed, dump_out);
        if (*plot) return run_plot(plot_in, plot_kinds, plot_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
