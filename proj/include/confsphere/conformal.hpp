#pragma once

// Conformal metrics g = e^{2f} g_{S^n}: pointwise scalar curvature, volumes,
// the total-scalar-curvature identity, the integral gradient bounds that
// nonnegative scalar curvature forces on f, and the weak form of the
// conformal positive-scalar-curvature inequality.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "confsphere/check.hpp"
#include "confsphere/field.hpp"

namespace confsphere {

// The pair (f, u = e^{(n-2)f/2}); u is derived from f at construction so the
// defining relation holds by construction at every probe.
struct ConformalFactor {
    int dimension = 0;  // n >= 3
    ScalarField f;
    ScalarField u;
};

inline ConformalFactor make_conformal_factor(int n, ScalarField f) {
    if (n < 3) throw std::invalid_argument("make_conformal_factor: dimension must be >= 3");
    if (f.dimension != n) throw std::invalid_argument("make_conformal_factor: field dimension mismatch");
    ConformalFactor cf;
    cf.dimension = n;
    cf.u = exp_field(scale(f, 0.5 * (n - 2)));
    cf.f = std::move(f);
    return cf;
}

// Hypothesis package (V, Lambda, alpha, optional R0) of the compactness-style
// assumptions: two-sided volume bound, uniform integrability of volume, and
// optionally a total scalar curvature cap.
struct HypothesisBounds {
    double V = 1.0;
    double Lambda = 1.0;
    double alpha = 0.5;
    std::optional<double> R0;

    void validate() const {
        if (!(V > 0.0)) throw std::invalid_argument("HypothesisBounds: V must be positive");
        if (!(Lambda > 0.0)) throw std::invalid_argument("HypothesisBounds: Lambda must be positive");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("HypothesisBounds: alpha must lie in (0,1)");
        if (R0 && !(*R0 > 0.0)) throw std::invalid_argument("HypothesisBounds: R0 must be positive");
    }
};

// Sc_g = e^{-2f} (n(n-1) - 2(n-1) laplace f - (n-2)(n-1) |grad f|^2);
// the round curvature n(n-1) enters as a constant, not a computation.
inline double scalar_curvature(const ConformalFactor& cf, std::span<const double> p,
                               double h = kDefaultStep) {
    const int n = cf.dimension;
    const double lap = laplace_beltrami(cf.f, p, h);
    const double grad2 = gradient_norm_sq(cf.f, p, h);
    const double fv = cf.f.value(p);
    return std::exp(-2.0 * fv) * (n * (n - 1.0) - 2.0 * (n - 1.0) * lap - (n - 2.0) * (n - 1.0) * grad2);
}

struct CurvatureReport {
    std::vector<Vec> probes;
    std::vector<double> values;
    double min_value = 0.0;
    double max_value = 0.0;
    double tolerance = 0.0;
    bool nonnegative = false;

    std::size_t probe_count() const { return values.size(); }
};

inline CurvatureReport curvature_report(const ConformalFactor& cf, std::span<const Vec> probes,
                                        double h = kDefaultStep, double tolerance = 1e-6) {
    CurvatureReport rep;
    rep.probes.assign(probes.begin(), probes.end());
    rep.tolerance = tolerance;
    rep.min_value = std::numeric_limits<double>::infinity();
    rep.max_value = -std::numeric_limits<double>::infinity();
    for (const auto& p : probes) {
        const double sc = scalar_curvature(cf, p, h);
        rep.values.push_back(sc);
        rep.min_value = std::min(rep.min_value, sc);
        rep.max_value = std::max(rep.max_value, sc);
    }
    rep.nonnegative = rep.min_value >= -tolerance;
    return rep;
}

// vol_g(S^n) = int e^{n f} dV.
inline double volume(const ConformalFactor& cf, const SphereSampling& sampling) {
    return integrate(exp_field(scale(cf.f, static_cast<double>(cf.dimension))), sampling);
}

// int_U e^{n f} dV for an indicator field (values 0/1 at samples).
inline double region_volume(const ConformalFactor& cf, const ScalarField& indicator,
                            const SphereSampling& sampling) {
    const int n = cf.dimension;
    KahanSum s;
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double ind = indicator.value(p);
        if (ind != 0.0 && std::abs(ind - 1.0) > 1e-12)
            throw std::invalid_argument("region_volume: indicator must take values {0,1}");
        if (ind != 0.0) s.add(sampling.weight(i) * std::exp(n * cf.f.value(p)));
    }
    return s.value();
}

// Indicator of the geodesic ball B_radius(center).
inline ScalarField cap_indicator_field(int n, Vec center, double radius) {
    auto c = std::make_shared<Vec>(std::move(center));
    ScalarField f;
    f.dimension = n;
    f.smoothness = Smoothness::piecewise_smooth;
    f.value = [c, radius](std::span<const double> p) {
        return std::acos(clamp_unit(dot(p, *c))) <= radius ? 1.0 : 0.0;
    };
    return f;
}

// Both sides of the total scalar curvature identity
//   int Sc_g dV_g = int n(n-1) e^{(n-2)f} + (4(n-1)/(n-2)) |grad e^{(n-2)f/2}|^2 dV,
// computed by independent quadratures (the left through the pointwise
// curvature, the right through the gradient of u).
struct TotalScalarReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double relative_discrepancy = 0.0;
};

inline TotalScalarReport total_scalar_curvature(const ConformalFactor& cf,
                                                const SphereSampling& sampling,
                                                double h = kDefaultStep) {
    const int n = cf.dimension;
    KahanSum lhs, rhs;
    double gbuf[kMaxAmbient];
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double w = sampling.weight(i);
        const double fv = cf.f.value(p);
        lhs.add(w * std::exp(n * fv) * scalar_curvature(cf, p, h));
        std::span<double> g(gbuf, p.size());
        field_gradient(cf.u, p, g, h);
        rhs.add(w * (n * (n - 1.0) * std::exp((n - 2.0) * fv) +
                     4.0 * (n - 1.0) / (n - 2.0) * dot(g, g)));
    }
    TotalScalarReport rep;
    rep.lhs = lhs.value();
    rep.rhs = rhs.value();
    const double scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
    rep.relative_discrepancy = scale > 0.0 ? std::abs(rep.lhs - rep.rhs) / scale : 0.0;
    return rep;
}

// residual = (n(n-2)/4) int u phi dV + int <grad phi, grad u> dV; the weak
// conformal PSC inequality holds at phi exactly when residual >= 0.
inline double weak_psc_residual(const ScalarField& u, const ScalarField& phi,
                                const SphereSampling& sampling, double h = kDefaultStep) {
    if (u.dimension != phi.dimension) throw std::invalid_argument("weak_psc_residual: dimension mismatch");
    const int n = u.dimension;
    KahanSum acc;
    double gu[kMaxAmbient];
    double gp[kMaxAmbient];
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double phiv = phi.value(p);
        if (phiv < 0.0)
            throw std::invalid_argument("weak_psc_residual: test function must be nonnegative");
        const double w = sampling.weight(i);
        std::span<double> su(gu, p.size());
        std::span<double> sp(gp, p.size());
        field_gradient(u, p, su, h);
        field_gradient(phi, p, sp, h);
        acc.add(w * (0.25 * n * (n - 2.0) * u.value(p) * phiv + dot(su, sp)));
    }
    return acc.value();
}

// int |grad f|^2 dV <= n omega_n / (n-2), forced by Sc_g >= 0.
inline InequalityCheck gradient_l2_bound_check(const ConformalFactor& cf,
                                               const SphereSampling& sampling,
                                               double h = kDefaultStep, double tolerance = 0.0) {
    const int n = cf.dimension;
    KahanSum acc;
    for (std::size_t i = 0; i < sampling.size(); ++i)
        acc.add(sampling.weight(i) * gradient_norm_sq(cf.f, sampling.point(i), h));
    const double bound = n * sphere_volume_constant(n) / (n - 2.0);
    return make_check("gradient-l2-bound", acc.value(), bound, tolerance);
}

// int e^{pf} |grad f|^2 dV <= n V^{p/n} omega_n^{(n-p)/n} / (n-2-2p) for
// p in [0, (n-2)/2), given Sc_g >= 0 and vol_g <= V.
inline InequalityCheck weighted_gradient_bound_check(const ConformalFactor& cf, double p_exp,
                                                     double V, const SphereSampling& sampling,
                                                     double h = kDefaultStep,
                                                     double tolerance = 0.0) {
    const int n = cf.dimension;
    if (!(p_exp >= 0.0 && p_exp < 0.5 * (n - 2.0)))
        throw std::invalid_argument("weighted_gradient_bound_check: p must lie in [0, (n-2)/2)");
    KahanSum acc;
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto pt = sampling.point(i);
        acc.add(sampling.weight(i) * std::exp(p_exp * cf.f.value(pt)) * gradient_norm_sq(cf.f, pt, h));
    }
    const double omega = sphere_volume_constant(n);
    const double bound = n * std::pow(V, p_exp / n) * std::pow(omega, (n - p_exp) / n) /
                         (n - 2.0 - 2.0 * p_exp);
    return make_check("weighted-gradient-bound", acc.value(), bound, tolerance);
}

// int |grad u|^q dV with u = e^{(n-2)f/2}, against the explicit constant
// assembled from the two Holder factors of the applicable range:
// q in [1, n/(n-1)] splits off the plain gradient bound; q up to 4n/(3n-2)
// interpolates with theta solved from q = 2n/(n + (n-2)(1-theta)).
struct W1qReport {
    InequalityCheck check;
    std::string route;           // "direct" or "interpolated"
    double theta = 0.0;          // interpolated route only
    double factor_gradient = 0.0;
    double factor_volume = 0.0;
};

inline W1qReport w1q_bound_check(const ConformalFactor& cf, double q, double V,
                                 const SphereSampling& sampling, double h = kDefaultStep,
                                 double tolerance = 0.0) {
    const int n = cf.dimension;
    const double q_split = static_cast<double>(n) / (n - 1.0);
    const double q_max = 4.0 * n / (3.0 * n - 2.0);
    if (!(q >= 1.0 && q < q_max))
        throw std::invalid_argument("w1q_bound_check: q must lie in [1, 4n/(3n-2))");

    KahanSum acc;
    double g[kMaxAmbient];
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto pt = sampling.point(i);
        std::span<double> sg(g, pt.size());
        field_gradient(cf.u, pt, sg, h);
        acc.add(sampling.weight(i) * std::pow(std::sqrt(dot(sg, sg)), q));
    }

    const double omega = sphere_volume_constant(n);
    const double half_nm2_pow_q = std::pow(0.5 * (n - 2.0), q);
    W1qReport rep;
    if (q <= q_split) {
        rep.route = "direct";
        const double s = q * (n - 2.0) / (2.0 - q);
        rep.factor_gradient = std::pow(n * omega / (n - 2.0), 0.5 * q);
        rep.factor_volume = std::pow(std::pow(V, s / n) * std::pow(omega, (n - s) / n), 0.5 * (2.0 - q));
    } else {
        rep.route = "interpolated";
        rep.theta = (q * (2.0 * n - 2.0) - 2.0 * n) / (q * (n - 2.0));
        const double p_exp = rep.theta * (n - 2.0);
        rep.factor_volume = std::pow(V, 0.5 * (2.0 - q));
        rep.factor_gradient = std::pow(
            n * std::pow(V, p_exp / n) * std::pow(omega, (n - p_exp) / n) / (n - 2.0 - 2.0 * p_exp),
            0.5 * q);
    }
    const double bound = half_nm2_pow_q * rep.factor_gradient * rep.factor_volume;
    rep.check = make_check("w1q-gradient-bound", acc.value(), bound, tolerance);
    return rep;
}

// Audits vol_g(B) <= Lambda vol_round(B)^alpha over a family of geodesic caps
// (the measurable sets a finite probe family can see). Caps are where
// concentration shows up, which is what the hypothesis exists to exclude.
struct CapProbe {
    Vec center;
    double radius = 0.0;
};

struct AuditEntry {
    CapProbe probe;
    double conformal_volume = 0.0;
    double round_volume = 0.0;
    double ratio = 0.0;  // conformal_volume / round_volume^alpha
};

struct UniformIntegrabilityReport {
    std::vector<AuditEntry> entries;
    double worst_ratio = 0.0;
    double lambda = 0.0;
    bool holds = true;  // vacuous on an empty probe list
};

inline UniformIntegrabilityReport uniform_integrability_audit(const ConformalFactor& cf,
                                                              const HypothesisBounds& bounds,
                                                              std::span<const CapProbe> probes,
                                                              const SphereSampling& sampling) {
    bounds.validate();
    UniformIntegrabilityReport rep;
    rep.lambda = bounds.Lambda;
    for (const auto& probe : probes) {
        AuditEntry e;
        e.probe = probe;
        e.conformal_volume = region_volume(cf, cap_indicator_field(cf.dimension, probe.center, probe.radius),
                                           sampling);
        e.round_volume = ball_volume(cf.dimension, probe.radius);
        e.ratio = e.conformal_volume / std::pow(e.round_volume, bounds.alpha);
        rep.worst_ratio = std::max(rep.worst_ratio, e.ratio);
        rep.entries.push_back(std::move(e));
    }
    // tiny relative headroom so exact-equality cases are not lost to rounding
    rep.holds = rep.entries.empty() || rep.worst_ratio <= bounds.Lambda * (1.0 + 1e-9);
    return rep;
}

// The nonnegative W^{1,2} test family for weak-form checks: radial cutoff
// bumps over axis poles at several radii, plus the constant 1.
inline std::vector<ScalarField> weak_psc_test_family(int n, std::span<const double> radii) {
    std::vector<ScalarField> family;
    family.push_back(constant_field(n, 1.0));
    for (int axis = 0; axis <= n; ++axis) {
        for (double sign : {1.0, -1.0}) {
            Vec c(static_cast<std::size_t>(n + 1), 0.0);
            c[static_cast<std::size_t>(axis)] = sign;
            for (double rho : radii) family.push_back(cutoff_bump_field(n, c, rho));
        }
    }
    return family;
}

// Conformal covariance: shifting f by a constant scales Sc_g pointwise by
// e^{-2c}. Returns the worst relative mismatch over the probes.
inline double conformal_covariance_defect(const ConformalFactor& cf, double c,
                                          std::span<const Vec> probes, double h = kDefaultStep) {
    const ConformalFactor shifted = make_conformal_factor(
        cf.dimension, add(cf.f, constant_field(cf.dimension, c)));
    double worst = 0.0;
    for (const auto& p : probes) {
        const double base = scalar_curvature(cf, p, h);
        const double moved = scalar_curvature(shifted, p, h);
        const double expected = std::exp(-2.0 * c) * base;
        const double scale = std::max({std::abs(expected), std::abs(moved), 1e-12});
        worst = std::max(worst, std::abs(moved - expected) / scale);
    }
    return worst;
}

}  // namespace confsphere
