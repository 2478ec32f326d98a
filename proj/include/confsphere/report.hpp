#pragma once

// Report records: every check emits one auditable JSON record with the two
// sides of its inequality, the slack, the verdict, and the exact sampling
// recipe and seed that produced it. Bundles serialize deterministically:
// identical runs give byte-identical files (wall-clock metadata lives in a
// separate file written by the CLI).

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "confsphere/check.hpp"
#include "confsphere/geometry.hpp"

namespace confsphere {

using json = nlohmann::ordered_json;

enum class CheckStatus { pass, fail, not_applicable };

inline std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        default: return "not-applicable";
    }
}

struct CheckRecord {
    std::string check;  // stable slug naming what is verified
    int n = 0;
    json params = json::object();
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double tolerance = 0.0;
    CheckStatus status = CheckStatus::fail;
    std::uint64_t seed = 0;

    json to_json() const {
        json j;
        j["check"] = check;
        j["n"] = n;
        j["parameters"] = params;
        j["lhs"] = lhs;
        j["rhs"] = rhs;
        j["slack"] = slack;
        j["tolerance"] = tolerance;
        j["verdict"] = to_string(status);
        j["seed"] = seed;
        return j;
    }
};

inline CheckRecord record_from(const InequalityCheck& chk, int n, std::uint64_t seed,
                               json params = json::object()) {
    CheckRecord r;
    r.check = chk.name;
    r.n = n;
    r.params = std::move(params);
    r.lhs = chk.lhs;
    r.rhs = chk.rhs;
    r.slack = chk.slack;
    r.tolerance = chk.tolerance;
    r.status = chk.holds ? CheckStatus::pass : CheckStatus::fail;
    r.seed = seed;
    return r;
}

// A named (x, y) series attached to a bundle, the raw material for plots and
// CSV exports.
struct Series {
    std::string kind;   // phi-profile | tau-scan | convergence
    std::string label;
    std::vector<double> x;
    std::vector<double> y;

    json to_json() const {
        json j;
        j["kind"] = kind;
        j["label"] = label;
        j["x"] = x;
        j["y"] = y;
        return j;
    }
};

struct ReportBundle {
    std::string suite;
    json scenario = json::object();
    json sampling = json::object();
    std::uint64_t seed = 0;
    double h = 0.0;
    std::vector<CheckRecord> checks;
    std::vector<Series> series;

    bool passed() const {
        for (const auto& c : checks)
            if (c.status == CheckStatus::fail) return false;
        return true;
    }

    json to_json() const {
        json j;
        j["suite"] = suite;
        j["scenario"] = scenario;
        j["sampling"] = sampling;
        j["seed"] = seed;
        j["h"] = h;
        j["passed"] = passed();
        json checks_json = json::array();
        for (const auto& c : checks) checks_json.push_back(c.to_json());
        j["checks"] = std::move(checks_json);
        json series_json = json::array();
        for (const auto& s : series) series_json.push_back(s.to_json());
        j["series"] = std::move(series_json);
        return j;
    }

    void write_json(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << to_json().dump(2) << "\n";
    }
};

inline ReportBundle bundle_from_json(const nlohmann::ordered_json& j) {
    ReportBundle b;
    b.suite = j.value("suite", "");
    if (j.contains("scenario")) b.scenario = j.at("scenario");
    if (j.contains("sampling")) b.sampling = j.at("sampling");
    b.seed = j.value("seed", std::uint64_t{0});
    b.h = j.value("h", 0.0);
    if (j.contains("checks")) {
        for (const auto& cj : j.at("checks")) {
            CheckRecord c;
            c.check = cj.value("check", "");
            c.n = cj.value("n", 0);
            if (cj.contains("parameters")) c.params = cj.at("parameters");
            c.lhs = cj.value("lhs", 0.0);
            c.rhs = cj.value("rhs", 0.0);
            c.slack = cj.value("slack", 0.0);
            c.tolerance = cj.value("tolerance", 0.0);
            const std::string v = cj.value("verdict", "fail");
            c.status = v == "pass" ? CheckStatus::pass
                                   : (v == "not-applicable" ? CheckStatus::not_applicable
                                                            : CheckStatus::fail);
            c.seed = cj.value("seed", std::uint64_t{0});
            b.checks.push_back(std::move(c));
        }
    }
    if (j.contains("series")) {
        for (const auto& sj : j.at("series")) {
            Series s;
            s.kind = sj.value("kind", "");
            s.label = sj.value("label", "");
            s.x = sj.at("x").get<std::vector<double>>();
            s.y = sj.at("y").get<std::vector<double>>();
            b.series.push_back(std::move(s));
        }
    }
    return b;
}

}  // namespace confsphere
