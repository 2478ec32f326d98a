#pragma once

// Sequence pipelines: finite-prefix convergence reports, the coarea-based
// level-set perimeter estimator, threshold selection inside the
// [sqrt(C_j)/2, sqrt(C_j)] bracket, Chebyshev volume bounds, the good/bad
// set decomposition in both the f-based and u-based variants, and the weak
// inequality for the limit factor.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "confsphere/conformal.hpp"
#include "confsphere/errors.hpp"

namespace confsphere {

struct FactorSequence {
    int dimension = 0;
    std::vector<ConformalFactor> factors;
    ConformalFactor limit;
    HypothesisBounds bounds;
    std::shared_ptr<const SphereSampling> sampling;
    std::uint64_t seed = 0;

    const SphereSampling& sampling_ref() const {
        if (!sampling) throw std::invalid_argument("FactorSequence: sampling not attached");
        return *sampling;
    }
};

inline FactorSequence make_factor_sequence(std::vector<ConformalFactor> factors,
                                           ConformalFactor limit, HypothesisBounds bounds,
                                           std::shared_ptr<const SphereSampling> sampling,
                                           std::uint64_t seed = 0) {
    if (factors.empty()) throw std::invalid_argument("make_factor_sequence: empty sequence");
    FactorSequence seq;
    seq.dimension = limit.dimension;
    for (const auto& cf : factors)
        if (cf.dimension != seq.dimension)
            throw std::invalid_argument("make_factor_sequence: dimension mismatch");
    bounds.validate();
    seq.factors = std::move(factors);
    seq.limit = std::move(limit);
    seq.bounds = bounds;
    seq.sampling = std::move(sampling);
    seq.seed = seed;
    return seq;
}

// --- convergence report -----------------------------------------------------------

struct ConvergenceReport {
    std::vector<double> exponents;
    std::vector<bool> exponent_in_range;             // p < 2n/(n-2), the guaranteed range
    std::vector<std::vector<double>> lp_distances;   // [j][exponent index]
    std::vector<std::vector<double>> weak_pairings;  // [j][test function index]
    std::vector<bool> lp_monotone_decay;             // per exponent
    std::vector<bool> pairing_decay;                 // per test function
};

inline ConvergenceReport convergence_report(const FactorSequence& seq,
                                            std::span<const double> exponents,
                                            std::span<const ScalarField> test_functions,
                                            double h = kDefaultStep) {
    const SphereSampling& sampling = seq.sampling_ref();
    const int n = seq.dimension;
    ConvergenceReport rep;
    rep.exponents.assign(exponents.begin(), exponents.end());
    for (double p : exponents) rep.exponent_in_range.push_back(p < 2.0 * n / (n - 2.0));

    for (const auto& cf : seq.factors) {
        auto diff = subtract(cf.u, seq.limit.u);
        std::vector<double> dists;
        for (double p : exponents) dists.push_back(lp_norm(diff, sampling, p));
        rep.lp_distances.push_back(std::move(dists));
        std::vector<double> pairings;
        double gd[kMaxAmbient];
        double gp[kMaxAmbient];
        for (const auto& phi : test_functions) {
            KahanSum acc;
            for (std::size_t i = 0; i < sampling.size(); ++i) {
                const auto pt = sampling.point(i);
                std::span<double> sd(gd, pt.size());
                std::span<double> sp(gp, pt.size());
                field_gradient(diff, pt, sd, h);
                field_gradient(phi, pt, sp, h);
                acc.add(sampling.weight(i) * dot(sd, sp));
            }
            pairings.push_back(acc.value());
        }
        rep.weak_pairings.push_back(std::move(pairings));
    }

    const std::size_t J = rep.lp_distances.size();
    for (std::size_t pi = 0; pi < exponents.size(); ++pi) {
        bool mono = true;
        for (std::size_t j = 1; j < J; ++j)
            if (rep.lp_distances[j][pi] > rep.lp_distances[j - 1][pi] * 1.05 + 1e-14) mono = false;
        rep.lp_monotone_decay.push_back(mono);
    }
    for (std::size_t fi = 0; fi < test_functions.size(); ++fi) {
        bool decays = true;
        for (std::size_t j = 1; j < J; ++j)
            if (std::abs(rep.weak_pairings[j][fi]) >
                std::abs(rep.weak_pairings[j - 1][fi]) * 1.05 + 1e-12)
                decays = false;
        rep.pairing_decay.push_back(decays);
    }
    return rep;
}

// C(j) = 2 ||f_j - f_inf||_{L^2} (int |grad f_j|^2 + |grad f_inf|^2)^{1/2}:
// the coarea budget of the level-band integral of |f_j - f_inf|^2.
inline double cj_bound(const ScalarField& f_j, const ScalarField& f_inf,
                       const SphereSampling& sampling, double h = kDefaultStep) {
    auto diff = subtract(f_j, f_inf);
    const double l2 = lp_norm(diff, sampling, 2.0);
    KahanSum grads;
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        grads.add(sampling.weight(i) * (gradient_norm_sq(f_j, p, h) + gradient_norm_sq(f_inf, p, h)));
    }
    return 2.0 * l2 * std::sqrt(grads.value());
}

// int 1_{tau1 < w <= tau2} |grad w| dV: the right-hand side of the coarea
// identity over the band of levels (tau1, tau2].
inline double level_band_coarea(const ScalarField& w, double tau1, double tau2,
                                const SphereSampling& sampling, double h = kDefaultStep) {
    if (!(tau1 < tau2)) throw std::invalid_argument("level_band_coarea: need tau1 < tau2");
    KahanSum acc;
    double g[kMaxAmbient];
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double v = w.value(p);
        if (v <= tau1 || v > tau2) continue;
        std::span<double> sg(g, p.size());
        field_gradient(w, p, sg, h);
        acc.add(sampling.weight(i) * std::sqrt(dot(sg, sg)));
    }
    return acc.value();
}

// H^{n-1}-type perimeter of the level set {w = tau} as the coarea difference
// quotient over the band [tau - delta, tau + delta].
inline double perimeter_estimate(const ScalarField& w, double tau, double delta,
                                 const SphereSampling& sampling, double h = kDefaultStep) {
    if (!(delta > 0.0)) throw std::invalid_argument("perimeter_estimate: delta must be positive");
    return level_band_coarea(w, tau - delta, tau + delta, sampling, h) / (2.0 * delta);
}

// --- threshold selection ------------------------------------------------------------

struct TauScanPoint {
    double tau = 0.0;
    double perimeter = 0.0;
};

struct TauSelection {
    double tau = 0.0;
    double perimeter = 0.0;
    double cap = 0.0;  // 2 sqrt(Cj)
    bool within_cap = false;
    bool degenerate = false;
    std::vector<TauScanPoint> scan;
};

// Scans candidate thresholds tiling [sqrt(Cj)/2, sqrt(Cj)] with disjoint
// bands and returns the perimeter minimizer. The mean-value argument
// guarantees the minimum over the tiling never exceeds 2 sqrt(Cj) up to
// estimator error.
inline TauSelection select_tau(const ScalarField& w, double Cj, const SphereSampling& sampling,
                               double h = kDefaultStep, int candidates = 8,
                               double cap_tolerance_factor = 0.05) {
    if (Cj < 0.0) throw std::invalid_argument("select_tau: Cj must be nonnegative");
    TauSelection sel;
    if (Cj == 0.0) {
        sel.degenerate = true;
        sel.within_cap = true;
        return sel;
    }
    const double lo = 0.5 * std::sqrt(Cj);
    const double hi = std::sqrt(Cj);
    const double delta = (hi - lo) / (2.0 * candidates);
    sel.cap = 2.0 * std::sqrt(Cj);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < candidates; ++k) {
        const double tau = lo + (2.0 * k + 1.0) * delta;
        const double perim = perimeter_estimate(w, tau, delta, sampling, h);
        sel.scan.push_back({tau, perim});
        if (perim < best) {
            best = perim;
            sel.tau = tau;
            sel.perimeter = perim;
        }
    }
    sel.within_cap = sel.perimeter <= sel.cap * (1.0 + cap_tolerance_factor);
    return sel;
}

// --- Chebyshev ----------------------------------------------------------------------

struct ChebyshevRecord {
    double measured_volume = 0.0;  // Vol{w >= tau} on the sampling
    double bound = 0.0;            // (1/tau) int w
    bool holds = false;            // exact on the shared sampling
};

inline ChebyshevRecord chebyshev_volume_bound(const ScalarField& w, double tau,
                                              const SphereSampling& sampling) {
    if (!(tau > 0.0)) throw std::invalid_argument("chebyshev_volume_bound: tau must be positive");
    KahanSum vol, mass;
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const double v = w.value(sampling.point(i));
        if (v < 0.0) throw std::invalid_argument("chebyshev_volume_bound: w must be nonnegative");
        const double weight = sampling.weight(i);
        if (v >= tau) vol.add(weight);
        mass.add(weight * v);
    }
    ChebyshevRecord rec;
    rec.measured_volume = vol.value();
    rec.bound = mass.value() / tau;
    rec.holds = rec.measured_volume <= rec.bound * (1.0 + 1e-12);
    return rec;
}

// --- singular set decomposition -------------------------------------------------------

enum class DecompositionVariant { f_based, u_based };

inline std::string to_string(DecompositionVariant v) {
    return v == DecompositionVariant::f_based ? "f-based" : "u-based";
}

struct SingularSetReport {
    int index = 0;
    std::string variant;
    double cj = 0.0;
    double epsilon = 0.0;  // sqrt(Cj)
    double tau = 0.0;
    double perimeter = 0.0;
    double perimeter_cap = 0.0;
    bool perimeter_within_cap = false;
    double bad_volume_round = 0.0;       // Vol_{S^n}(Z_j)
    double bad_volume_conformal = 0.0;   // Vol_{g_j}(Z_j)
    double good_volume_conformal = 0.0;  // Vol_{g_j}(S^n minus Z_j)
    double good_sup = 0.0;               // max of w over good-set samples
    double chebyshev_bound = 0.0;
    double chebyshev_ratio = 0.0;        // chebyshev_bound / Cj (the C' record)
    double uniform_integrability_cap = 0.0;  // Lambda Vol(Z)^alpha
    bool degenerate = false;
    std::vector<std::uint32_t> bad_indices;
    TauSelection selection;
};

inline SingularSetReport singular_set_decompose(const FactorSequence& seq, int j,
                                                DecompositionVariant variant,
                                                double h = kDefaultStep) {
    if (j < 0 || j >= static_cast<int>(seq.factors.size()))
        throw std::invalid_argument("singular_set_decompose: index out of range");
    const SphereSampling& sampling = seq.sampling_ref();
    const ConformalFactor& cf = seq.factors[static_cast<std::size_t>(j)];
    const int n = seq.dimension;

    if (variant == DecompositionVariant::u_based) {
        if (!seq.bounds.R0)
            throw std::invalid_argument(
                "singular_set_decompose: u-based variant requires the total scalar curvature bound R0");
        const double total = total_scalar_curvature(cf, sampling, h).lhs;
        if (total > *seq.bounds.R0 * (1.0 + 1e-9))
            throw hypothesis_violation(
                "singular_set_decompose: total scalar curvature exceeds R0 at index " + std::to_string(j));
    }

    const ScalarField& a = variant == DecompositionVariant::f_based ? cf.f : cf.u;
    const ScalarField& b = variant == DecompositionVariant::f_based ? seq.limit.f : seq.limit.u;
    auto diff = subtract(a, b);
    ScalarField w = multiply(diff, diff);

    SingularSetReport rep;
    rep.index = j;
    rep.variant = to_string(variant);
    rep.cj = cj_bound(a, b, sampling, h);
    rep.epsilon = std::sqrt(rep.cj);
    rep.selection = select_tau(w, rep.cj, sampling, h);
    rep.degenerate = rep.selection.degenerate;
    rep.tau = rep.selection.tau;
    rep.perimeter = rep.selection.perimeter;
    rep.perimeter_cap = rep.selection.cap;
    rep.perimeter_within_cap = rep.selection.within_cap;

    KahanSum bad_round, bad_conf, good_conf;
    double good_sup = 0.0;
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double wv = w.value(p);
        const double weight = sampling.weight(i);
        const double conf = std::exp(n * cf.f.value(p)) * weight;
        if (!rep.degenerate && wv > rep.tau) {
            bad_round.add(weight);
            bad_conf.add(conf);
            rep.bad_indices.push_back(static_cast<std::uint32_t>(i));
        } else {
            good_conf.add(conf);
            good_sup = std::max(good_sup, wv);
        }
    }
    rep.bad_volume_round = bad_round.value();
    rep.bad_volume_conformal = bad_conf.value();
    rep.good_volume_conformal = good_conf.value();
    rep.good_sup = good_sup;
    if (!rep.degenerate) {
        rep.chebyshev_bound = chebyshev_volume_bound(w, rep.tau, sampling).bound;
        rep.chebyshev_ratio = rep.chebyshev_bound / rep.cj;
        rep.uniform_integrability_cap =
            seq.bounds.Lambda * std::pow(rep.bad_volume_round, seq.bounds.alpha);
    }
    return rep;
}

// Weak conformal PSC inequality residuals of the limit factor against a test
// family; min residual >= -tol certifies the finite-family version.
struct LimitWeakPscReport {
    std::vector<double> residuals;
    double min_residual = 0.0;
    double tolerance = 0.0;
    bool holds = false;
};

inline LimitWeakPscReport limit_weak_psc_check(const ScalarField& u_inf,
                                               std::span<const ScalarField> test_family,
                                               const SphereSampling& sampling,
                                               double h = kDefaultStep, double tolerance = 1e-3) {
    if (test_family.empty()) throw std::invalid_argument("limit_weak_psc_check: empty test family");
    LimitWeakPscReport rep;
    rep.tolerance = tolerance;
    rep.min_residual = std::numeric_limits<double>::infinity();
    for (const auto& phi : test_family) {
        const double r = weak_psc_residual(u_inf, phi, sampling, h);
        rep.residuals.push_back(r);
        rep.min_residual = std::min(rep.min_residual, r);
    }
    rep.holds = rep.min_residual >= -tolerance;
    return rep;
}

// Coarea self-consistency: the Riemann sum of the perimeter curve over a
// tau-grid reproduces the band integral across the covering range.
struct CoareaConsistencyReport {
    double riemann_sum = 0.0;
    double band_integral = 0.0;
    double relative_gap = 0.0;
};

inline CoareaConsistencyReport coarea_consistency_check(const ScalarField& w, double tau_lo,
                                                        double tau_hi, int steps,
                                                        const SphereSampling& sampling,
                                                        double h = kDefaultStep) {
    if (steps < 2) throw std::invalid_argument("coarea_consistency_check: need >= 2 steps");
    const double dt = (tau_hi - tau_lo) / steps;
    KahanSum sum;
    for (int k = 0; k < steps; ++k) {
        const double tau = tau_lo + (k + 0.5) * dt;
        sum.add(perimeter_estimate(w, tau, 0.25 * dt, sampling, h) * dt);
    }
    CoareaConsistencyReport rep;
    rep.riemann_sum = sum.value();
    rep.band_integral = level_band_coarea(w, tau_lo, tau_hi, sampling, h);
    rep.relative_gap = std::abs(rep.riemann_sum - rep.band_integral) /
                       std::max({rep.band_integral, rep.riemann_sum, 1e-12});
    return rep;
}

}  // namespace confsphere
