#pragma once

// Canonical conformal-factor families with known ground truth. Every
// verification suite drives these; nothing here is assumed, the oracles
// (curvature and volume invariance for bubbles, exact linearity for
// perturbations, support construction for spikes) are re-checked by tests.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "confsphere/conformal.hpp"
#include "confsphere/expression.hpp"

namespace confsphere {

// f == c: the round baseline.
inline ConformalFactor round_scenario(int n, double c) {
    return make_conformal_factor(n, constant_field(n, c));
}

// Pullback of the round metric under a stereographic dilation by lambda with
// projection pole P: e^{f} = 2 lambda / ((1-s) + lambda^2 (1+s)), s = <p, P>.
// Smooth and chart-free in this form; volume concentrates at -P as
// lambda -> infinity. lambda = 1 is the identity.
inline ConformalFactor bubble_scenario(int n, double lambda, Vec pole) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("bubble_scenario: lambda must be >= 1");
    if (!is_unit(pole)) throw std::invalid_argument("bubble_scenario: pole must be a unit vector");
    ScalarField s = linear_field(n, std::move(pole));
    ScalarField affine = add(constant_field(n, 1.0 + lambda * lambda),
                             scale(std::move(s), lambda * lambda - 1.0));
    ScalarField f = subtract(constant_field(n, std::log(2.0 * lambda)), log_field(std::move(affine)));
    return make_conformal_factor(n, std::move(f));
}

inline Vec bubble_concentration_point(const Vec& pole) {
    Vec c = pole;
    for (double& x : c) x = -x;
    return c;
}

// f_j = f_inf + a_j psi with a_j monotone to zero; the candidate limit is
// f_inf itself.
struct FactorFamily {
    int dimension = 0;
    std::vector<ConformalFactor> factors;
    ConformalFactor limit;
};

inline FactorFamily perturbation_scenario(int n, ScalarField f_inf, ScalarField psi,
                                          std::vector<double> amplitudes) {
    if (amplitudes.empty()) throw std::invalid_argument("perturbation_scenario: need J >= 1");
    for (std::size_t j = 1; j < amplitudes.size(); ++j)
        if (std::abs(amplitudes[j]) > std::abs(amplitudes[j - 1]))
            throw std::invalid_argument("perturbation_scenario: amplitudes must decay monotonically");
    FactorFamily fam;
    fam.dimension = n;
    for (double a : amplitudes)
        fam.factors.push_back(make_conformal_factor(n, add(f_inf, scale(psi, a))));
    fam.limit = make_conformal_factor(n, std::move(f_inf));
    return fam;
}

// f_j = f_inf + h_j chi(d(x, center)/w_j): smooth spikes on shrinking
// support, exercising the singular-set machinery.
inline FactorFamily spike_scenario(int n, ScalarField f_inf, Vec center,
                                   std::vector<double> heights, std::vector<double> widths) {
    if (heights.size() != widths.size() || heights.empty())
        throw std::invalid_argument("spike_scenario: heights/widths must be nonempty and matched");
    for (std::size_t j = 0; j < widths.size(); ++j) {
        if (!(widths[j] > 0.0)) throw std::invalid_argument("spike_scenario: widths must be positive");
        if (j > 0 && !(widths[j] < widths[j - 1]))
            throw std::invalid_argument("spike_scenario: widths must be strictly decreasing");
    }
    FactorFamily fam;
    fam.dimension = n;
    for (std::size_t j = 0; j < heights.size(); ++j)
        fam.factors.push_back(
            make_conformal_factor(n, add(f_inf, bump_field(n, center, widths[j], heights[j]))));
    fam.limit = make_conformal_factor(n, std::move(f_inf));
    return fam;
}

// --- scenario specifications (config-file form) -------------------------------

struct ScenarioSpec {
    std::string name = "round";  // round | bubble | perturbation | spike
    int n = 3;
    std::uint64_t seed = 0;
    // round
    double c = 0.0;
    // bubble
    double lambda = 2.0;
    std::optional<Vec> pole;  // default -e0 (concentration at e0)
    // perturbation / spike shared
    std::string base = "0";  // expression for f_inf
    int J = 0;               // sequence length; 0 picks the family default
    // perturbation
    std::string direction = "x0";  // expression for psi
    double amplitude = 0.3;
    double decay = 0.5;                      // a_j = amplitude * decay^j
    std::optional<std::vector<double>> amplitudes;  // overrides amplitude/decay
    // spike
    std::optional<Vec> center;  // default e0
    double height = 1.0;
    double width0 = 0.4;
    double width_decay = 0.5;  // w_j = width0 * width_decay^j

    void validate() const {
        if (name != "round" && name != "bubble" && name != "perturbation" && name != "spike")
            throw std::invalid_argument("ScenarioSpec: unknown scenario name '" + name + "'");
        if (n < 3) throw std::invalid_argument("ScenarioSpec: n must be >= 3");
        if (J < 0) throw std::invalid_argument("ScenarioSpec: J must be >= 1");
    }
};

// A constructed scenario: the ordered factors (a single entry for round and
// bubble), the candidate limit when the family defines one, and a focus point
// where the interesting behaviour happens (spike center, bubble concentration
// point), used to aim probes.
struct ScenarioInstance {
    ScenarioSpec spec;
    std::vector<ConformalFactor> factors;
    std::optional<ConformalFactor> limit;
    Vec focus;
    // whether the family is built to satisfy Sc_g >= 0 (spikes are not:
    // they stress the singular-set machinery, which needs no curvature sign)
    bool claims_nonnegative_curvature = true;
};

inline ScenarioInstance build_scenario(const ScenarioSpec& spec_in) {
    ScenarioSpec spec = spec_in;
    spec.validate();
    const int n = spec.n;
    ScenarioInstance inst;
    if (spec.name == "round") {
        inst.factors.push_back(round_scenario(n, spec.c));
        inst.focus = basis_vector(n + 1, 0);
    } else if (spec.name == "bubble") {
        Vec pole = spec.pole.value_or([&] {
            Vec p = basis_vector(n + 1, 0);
            p[0] = -1.0;
            return p;
        }());
        inst.factors.push_back(bubble_scenario(n, spec.lambda, pole));
        inst.focus = bubble_concentration_point(pole);
        spec.pole = pole;
    } else if (spec.name == "perturbation") {
        if (spec.J == 0) spec.J = 6;
        std::vector<double> amps;
        if (spec.amplitudes) {
            amps = *spec.amplitudes;
        } else {
            for (int j = 0; j < spec.J; ++j) amps.push_back(spec.amplitude * std::pow(spec.decay, j));
        }
        auto fam = perturbation_scenario(n, parse_field(spec.base, n), parse_field(spec.direction, n),
                                         amps);
        inst.factors = std::move(fam.factors);
        inst.limit = std::move(fam.limit);
        inst.focus = basis_vector(n + 1, 0);
        spec.amplitudes = amps;
    } else {  // spike
        if (spec.J == 0) spec.J = 5;
        Vec center = spec.center.value_or(basis_vector(n + 1, 0));
        std::vector<double> heights(static_cast<std::size_t>(spec.J), spec.height);
        std::vector<double> widths;
        for (int j = 0; j < spec.J; ++j) widths.push_back(spec.width0 * std::pow(spec.width_decay, j));
        auto fam = spike_scenario(n, parse_field(spec.base, n), center, heights, widths);
        inst.factors = std::move(fam.factors);
        inst.limit = std::move(fam.limit);
        inst.focus = center;
        inst.claims_nonnegative_curvature = false;
        spec.center = center;
    }
    inst.spec = std::move(spec);
    return inst;
}

inline void to_json(nlohmann::ordered_json& j, const ScenarioSpec& s) {
    j = nlohmann::ordered_json{{"name", s.name}, {"n", s.n}, {"seed", s.seed}};
    if (s.name == "round") j["c"] = s.c;
    if (s.name == "bubble") {
        j["lambda"] = s.lambda;
        if (s.pole) j["pole"] = *s.pole;
    }
    if (s.name == "perturbation" || s.name == "spike") {
        j["base"] = s.base;
        j["J"] = s.J;
    }
    if (s.name == "perturbation") {
        j["direction"] = s.direction;
        if (s.amplitudes)
            j["amplitudes"] = *s.amplitudes;
        else {
            j["amplitude"] = s.amplitude;
            j["decay"] = s.decay;
        }
    }
    if (s.name == "spike") {
        if (s.center) j["center"] = *s.center;
        j["height"] = s.height;
        j["width0"] = s.width0;
        j["width_decay"] = s.width_decay;
    }
}

inline ScenarioSpec scenario_spec_from_json(const nlohmann::json& j) {
    ScenarioSpec s;
    s.name = j.value("name", s.name);
    s.n = j.value("n", s.n);
    s.seed = j.value("seed", s.seed);
    s.c = j.value("c", s.c);
    s.lambda = j.value("lambda", s.lambda);
    if (j.contains("pole")) s.pole = j.at("pole").get<Vec>();
    s.base = j.value("base", s.base);
    s.J = j.value("J", s.J);
    s.direction = j.value("direction", s.direction);
    s.amplitude = j.value("amplitude", s.amplitude);
    s.decay = j.value("decay", s.decay);
    if (j.contains("amplitudes")) s.amplitudes = j.at("amplitudes").get<std::vector<double>>();
    if (j.contains("center")) s.center = j.at("center").get<Vec>();
    s.height = j.value("height", s.height);
    s.width0 = j.value("width0", s.width0);
    s.width_decay = j.value("width_decay", s.width_decay);
    s.validate();
    return s;
}

}  // namespace confsphere
