#pragma once

// Truncation machinery: the log-gradient energy bound, level truncations
// u^K = min(u, K) and the weak differential inequality they satisfy above
// regular levels, essential infima by low quantiles, the positivity
// dichotomy experiment, and the constructive uniform lower bound with its
// three proof terms.
//
// Truncation kinks break finite-difference stencils, so every gradient
// integral over a truncated field excludes a small value-band around the
// level set and reports the excluded measure.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "confsphere/check.hpp"
#include "confsphere/conformal.hpp"
#include "confsphere/errors.hpp"
#include "confsphere/mean_inequalities.hpp"

namespace confsphere {

// || grad ln u ||_{L^2} <= sqrt(C omega_n), given laplace u <= C u and u > 0.
inline InequalityCheck log_gradient_bound_check(const ScalarField& u, double C,
                                                const SphereSampling& sampling,
                                                std::span<const Vec> hypothesis_probes,
                                                double h = kDefaultStep, double tolerance = 0.0) {
    if (max_superharmonic_defect(u, C, hypothesis_probes, h) > 1e-5)
        throw hypothesis_violation("log_gradient_bound_check: laplace u <= C u fails at a probe");
    const ScalarField lg = log_field(u);
    KahanSum acc;
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        if (!(u.value(p) > 0.0))
            throw std::invalid_argument("log_gradient_bound_check: u must be positive");
        acc.add(sampling.weight(i) * gradient_norm_sq(lg, p, h));
    }
    const double rhs = std::sqrt(C * sphere_volume_constant(u.dimension));
    return make_check("log-gradient-bound", std::sqrt(acc.value()), rhs, tolerance);
}

// u^K = min(u, K) with the exclusion-band policy for derivative evaluation:
// points with |u - K| < delta_scale * h * |grad u| sit too close to the kink
// for the stencil and are left out of gradient quadratures.
struct TruncatedFactor {
    ScalarField source;
    double level = 0.0;
    double delta_scale = 5.0;

    ScalarField field() const {
        ScalarField f;
        f.dimension = source.dimension;
        f.smoothness = Smoothness::piecewise_smooth;
        auto src = std::make_shared<ScalarField>(source);
        const double K = level;
        f.value = [src, K](std::span<const double> p) { return std::min(src->value(p), K); };
        return f;
    }
};

inline TruncatedFactor truncate(ScalarField u, double K, double delta_scale = 5.0) {
    if (!(K > 0.0)) throw std::invalid_argument("truncate: level must be positive");
    TruncatedFactor t;
    t.source = std::move(u);
    t.level = K;
    t.delta_scale = delta_scale;
    return t;
}

// Deterministic regular-level search: scan K_target (1 + k eps) for
// k = 0, +1, -1, ... and accept the first candidate whose empirical level
// band has gradients above the floor (or is empty) for every field.
struct RegularValueOptions {
    double epsilon = 0.01;
    int max_offset = 10;
    double gradient_floor = 0.05;
    double band = 0.0;  // 0 picks max(0.02, 0.02 |K|)
};

inline double regular_value_select(std::span<const ScalarField> fields, double K_target,
                                   const SphereSampling& sampling, double h = kDefaultStep,
                                   RegularValueOptions opts = {}) {
    if (fields.empty()) throw std::invalid_argument("regular_value_select: no fields");
    for (int step = 0; step <= opts.max_offset; ++step) {
        for (int sign : {1, -1}) {
            if (step == 0 && sign < 0) continue;
            const double K = K_target * (1.0 + sign * step * opts.epsilon);
            const double band = opts.band > 0.0 ? opts.band : std::max(0.02, 0.02 * std::abs(K));
            bool admissible = true;
            for (const auto& u : fields) {
                for (std::size_t i = 0; i < sampling.size() && admissible; ++i) {
                    const auto p = sampling.point(i);
                    if (std::abs(u.value(p) - K) < band &&
                        std::sqrt(gradient_norm_sq(u, p, h)) < opts.gradient_floor)
                        admissible = false;
                }
                if (!admissible) break;
            }
            if (admissible) return K;
        }
    }
    throw selection_failure("regular_value_select: no admissible level near target");
}

// Weak inequality for the truncation: residual = C int phi u^K + int <grad
// phi, grad u^K> with grad u^K = grad u below the level, 0 above, and the
// kink band excluded from quadrature.
struct WeakTruncationReport {
    double residual = 0.0;
    double excluded_measure = 0.0;
    double tolerance = 0.0;
    bool holds = false;
};

inline WeakTruncationReport truncation_weak_inequality_check(const TruncatedFactor& t,
                                                             const ScalarField& phi, double C,
                                                             const SphereSampling& sampling,
                                                             double h = kDefaultStep,
                                                             double tolerance = 1e-3) {
    WeakTruncationReport rep;
    rep.tolerance = tolerance;
    KahanSum acc, excluded;
    double gu[kMaxAmbient];
    double gp[kMaxAmbient];
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double phiv = phi.value(p);
        if (phiv < 0.0)
            throw std::invalid_argument("truncation_weak_inequality_check: phi must be nonnegative");
        const double w = sampling.weight(i);
        const double uv = t.source.value(p);
        std::span<double> su(gu, p.size());
        field_gradient(t.source, p, su, h);
        const double gnorm = std::sqrt(dot(su, su));
        if (std::abs(uv - t.level) < t.delta_scale * h * gnorm) {
            excluded.add(w);
            continue;
        }
        const double ubar = std::min(uv, t.level);
        double pairing = 0.0;
        if (uv < t.level) {
            std::span<double> sp(gp, p.size());
            field_gradient(phi, p, sp, h);
            pairing = dot(su, sp);
        }
        acc.add(w * (C * phiv * ubar + pairing));
    }
    rep.residual = acc.value();
    rep.excluded_measure = excluded.value();
    rep.holds = rep.residual >= -tolerance;
    return rep;
}

// || u^K ||_{W^{1,2}} <= K sqrt((1+C) omega_n) with the band-excluded gradient.
inline InequalityCheck truncation_w12_bound_check(const TruncatedFactor& t, double C,
                                                  const SphereSampling& sampling,
                                                  double h = kDefaultStep, double tolerance = 0.0) {
    KahanSum l2, grad2;
    double gu[kMaxAmbient];
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double w = sampling.weight(i);
        const double uv = t.source.value(p);
        const double ubar = std::min(uv, t.level);
        l2.add(w * ubar * ubar);
        std::span<double> su(gu, p.size());
        field_gradient(t.source, p, su, h);
        const double gnorm2 = dot(su, su);
        if (std::abs(uv - t.level) < t.delta_scale * h * std::sqrt(gnorm2)) continue;
        if (uv < t.level) grad2.add(w * gnorm2);
    }
    const double lhs = std::sqrt(l2.value() + grad2.value());
    const double rhs = t.level * std::sqrt((1.0 + C) * sphere_volume_constant(t.source.dimension));
    return make_check("truncation-w12-bound", lhs, rhs, tolerance);
}

// --- essential infimum ------------------------------------------------------------

// Weighted low quantile of the sampled values: the "up to measure zero"
// semantics of the essential infimum under sampling. Includes the
// north/south hemisphere split (last coordinate sign) used by the dichotomy.
struct InfimumEstimate {
    double estimate = 0.0;
    double north_estimate = 0.0;
    double south_estimate = 0.0;
    double quantile = 0.0;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;  // the sampling's seed, recorded for reproducibility
};

namespace detail {

inline double weighted_quantile(std::vector<std::pair<double, double>>& value_weight, double q) {
    if (value_weight.empty()) throw std::invalid_argument("weighted_quantile: empty sample");
    std::sort(value_weight.begin(), value_weight.end());
    double total = 0.0;
    for (const auto& vw : value_weight) total += vw.second;
    const double target = q * total;
    double cum = 0.0;
    for (const auto& vw : value_weight) {
        cum += vw.second;
        if (cum >= target) return vw.first;
    }
    return value_weight.back().first;
}

}  // namespace detail

inline InfimumEstimate essential_infimum(const ScalarField& field, const SphereSampling& sampling,
                                         double q) {
    if (!(q > 0.0 && q <= 0.01))
        throw std::invalid_argument("essential_infimum: quantile must lie in (0, 0.01]");
    std::vector<std::pair<double, double>> all, north, south;
    const std::size_t last = static_cast<std::size_t>(field.dimension);
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double v = field.value(p);
        const double w = sampling.weight(i);
        all.emplace_back(v, w);
        (p[last] >= 0.0 ? north : south).emplace_back(v, w);
    }
    InfimumEstimate est;
    est.quantile = q;
    est.sample_count = sampling.size();
    est.seed = sampling.seed();
    est.estimate = detail::weighted_quantile(all, q);
    est.north_estimate = north.empty() ? est.estimate : detail::weighted_quantile(north, q);
    est.south_estimate = south.empty() ? est.estimate : detail::weighted_quantile(south, q);
    return est;
}

// --- L^1 transfer to the u^{2/(n-2)} power (n >= 5) --------------------------------

// ||u_j - u_inf||_{L^1} >= e_inf^{(n-3)/2} ||u_j^{2/(n-2)} - u_inf^{2/(n-2)}||_{L^1},
// given u_inf >= e_inf. The check reports lhs' = scaled power distance and
// rhs' = plain distance, so holds means lhs' <= rhs'.
inline InequalityCheck power_l1_transfer_check(const ScalarField& u_j, const ScalarField& u_inf,
                                               double e_inf, const SphereSampling& sampling,
                                               double tolerance = 0.0) {
    const int n = u_j.dimension;
    if (n < 5) throw std::invalid_argument("power_l1_transfer_check: requires n >= 5");
    KahanSum plain, power;
    const double a = 2.0 / (n - 2.0);
    for (std::size_t i = 0; i < sampling.size(); ++i) {
        const auto p = sampling.point(i);
        const double uj = u_j.value(p);
        const double ui = u_inf.value(p);
        if (ui < e_inf - 1e-12)
            throw hypothesis_violation("power_l1_transfer_check: u_inf drops below e_inf at a sample");
        const double w = sampling.weight(i);
        plain.add(w * std::abs(uj - ui));
        power.add(w * std::abs(std::pow(uj, a) - std::pow(ui, a)));
    }
    const double scaled = std::pow(e_inf, 0.5 * (n - 3.0)) * power.value();
    return make_check("power-l1-transfer", scaled, plain.value(), tolerance);
}

// --- constructive uniform lower bound ----------------------------------------------

// The three proof terms of the uniform lower bound at radius r1:
//   u_i(x) >= e_inf - ||u_i - u_inf||_{L^1} / Vol(B_{r1})
//                   - drift_coeff * int_0^{r1} s sin^{n-1} / int_0^{r1} sin^{n-1},
// dispatched to the u^{2/(n-2)} route from dimension 5 on.
struct ConstructiveBoundReport {
    MeanVariant variant = MeanVariant::low;
    double e_target = 0.0;     // essential infimum of the dispatched limit target
    double radius = 0.0;       // the r1 actually used (optimized over the grid)
    double term_l1 = 0.0;
    double term_drift = 0.0;
    double bound = 0.0;        // e_target - term_l1 - term_drift
    double min_probe_value = 0.0;
    bool consistent = false;   // every probed target value >= bound
};

inline double drift_integral_ratio(int n, double r) {
    const double num = integrate_adaptive(
        [n](double s) { return s * std::pow(std::sin(s), n - 1); }, 0.0, r, 1e-13);
    return num / sin_power_integral(n - 1, r);
}

inline ConstructiveBoundReport constructive_lower_bound(
    const ScalarField& u_i, const ScalarField& u_inf, const HypothesisBounds& bounds,
    std::span<const Vec> probes, const SphereSampling& sampling,
    std::span<const double> r1_grid, double quantile = 0.005) {
    if (r1_grid.empty()) throw std::invalid_argument("constructive_lower_bound: empty radius grid");
    bounds.validate();
    const int n = u_i.dimension;
    const MeanVariant variant = dispatch_variant(n);
    const PaperConstants pc = mean_constants(n);

    ConstructiveBoundReport rep;
    rep.variant = variant;
    const ScalarField target_i = variant == MeanVariant::low ? u_i : power_field(u_i, 2.0 / (n - 2.0));
    const ScalarField target_inf =
        variant == MeanVariant::low ? u_inf : power_field(u_inf, 2.0 / (n - 2.0));
    rep.e_target = essential_infimum(target_inf, sampling, quantile).estimate;

    const double l1 = integrate(
        from_function(n,
                      [&](std::span<const double> p) {
                          return std::abs(target_i.value(p) - target_inf.value(p));
                      }),
        sampling);
    const double drift_coeff = variant == MeanVariant::low
                                   ? pc.c_low * std::pow(bounds.V, (n - 2.0) / (2.0 * n))
                                   : pc.c_high * std::pow(bounds.V, 1.0 / n);

    double best_bound = -std::numeric_limits<double>::infinity();
    for (double r : r1_grid) {
        if (!(r > 0.0 && r < 0.5 * M_PI))
            throw std::invalid_argument("constructive_lower_bound: grid radius outside (0, pi/2)");
        const double tl1 = l1 / ball_volume(n, r);
        const double tdrift = drift_coeff * drift_integral_ratio(n, r);
        const double bound = rep.e_target - tl1 - tdrift;
        if (bound > best_bound) {
            best_bound = bound;
            rep.radius = r;
            rep.term_l1 = tl1;
            rep.term_drift = tdrift;
            rep.bound = bound;
        }
    }
    rep.min_probe_value = std::numeric_limits<double>::infinity();
    for (const auto& p : probes) rep.min_probe_value = std::min(rep.min_probe_value, target_i.value(p));
    rep.consistent = rep.min_probe_value >= rep.bound - 1e-9;
    return rep;
}

// Sequence-level restatement of the uniform lower bound: the first index
// from which the constructive bound certifies target >= e/4 (falling back to
// the observed sampled minima when the bound never certifies), with both
// trajectories reported.
struct LowerBoundSequenceReport {
    std::vector<ConstructiveBoundReport> per_index;
    double e_quarter = 0.0;          // (dispatched) e_inf / 4 threshold
    int i0_certified = -1;           // -1 when the bound never certifies
    int i0_observed = -1;
    bool sampled_min_holds_from_i0 = false;
};

inline LowerBoundSequenceReport uniform_lower_bound_experiment(
    std::span<const ConformalFactor> factors, const ConformalFactor& limit,
    const HypothesisBounds& bounds, std::span<const Vec> probes, const SphereSampling& sampling,
    std::span<const double> r1_grid, double quantile = 0.005) {
    LowerBoundSequenceReport rep;
    for (const auto& cf : factors)
        rep.per_index.push_back(
            constructive_lower_bound(cf.u, limit.u, bounds, probes, sampling, r1_grid, quantile));
    if (rep.per_index.empty()) return rep;
    const int n = limit.dimension;
    const double e_target = rep.per_index.front().e_target;
    // Prop-style threshold on the dispatched target: e/4 for n in {3,4},
    // (e/4)^{2/(n-2)} after the power transfer in higher dimensions.
    rep.e_quarter = dispatch_variant(n) == MeanVariant::low
                        ? 0.25 * e_target
                        : std::pow(0.25, 2.0 / (n - 2.0)) * e_target;
    const int J = static_cast<int>(rep.per_index.size());
    for (int i = J - 1; i >= 0; --i) {
        if (rep.per_index[static_cast<std::size_t>(i)].bound >= rep.e_quarter)
            rep.i0_certified = i;
        else
            break;
    }
    for (int i = J - 1; i >= 0; --i) {
        if (rep.per_index[static_cast<std::size_t>(i)].min_probe_value >= rep.e_quarter)
            rep.i0_observed = i;
        else
            break;
    }
    const int i0 = rep.i0_certified >= 0 ? rep.i0_certified : rep.i0_observed;
    rep.sampled_min_holds_from_i0 = i0 >= 0;
    if (i0 >= 0)
        for (int i = i0; i < J; ++i)
            if (rep.per_index[static_cast<std::size_t>(i)].min_probe_value < rep.e_quarter)
                rep.sampled_min_holds_from_i0 = false;
    return rep;
}

// --- dichotomy experiment -----------------------------------------------------------

// Either the limit stays bounded away from zero or it collapses; the
// experiment reports the observable evidence (essential-infimum and volume
// trajectories, Cauchy differences, the uniform-integrability audit on the
// final element) and a classification.
struct DichotomyReport {
    std::vector<double> essinf_trajectory;
    std::vector<double> volume_trajectory;
    std::vector<double> cauchy_l2_steps;  // ||u_{j+1} - u_j||_{L^2}
    std::vector<int> volume_violations;   // indices outside [1/V, V]
    bool cauchy_like = false;
    UniformIntegrabilityReport audit;     // on the final element
    bool positivity_certificate = false;  // audit + volumes + stable infimum
    std::string classification;           // "positive-infimum" | "collapse-to-zero"
};

inline DichotomyReport dichotomy_experiment(std::span<const ScalarField> us,
                                            const SphereSampling& sampling,
                                            const HypothesisBounds& bounds,
                                            std::span<const CapProbe> audit_probes,
                                            double quantile = 0.005) {
    if (us.size() < 2) throw std::invalid_argument("dichotomy_experiment: need at least two elements");
    bounds.validate();
    const int n = us.front().dimension;
    DichotomyReport rep;
    for (std::size_t j = 0; j < us.size(); ++j) {
        rep.essinf_trajectory.push_back(essential_infimum(us[j], sampling, quantile).estimate);
        const double vol = integrate(power_field(us[j], 2.0 * n / (n - 2.0)), sampling);
        rep.volume_trajectory.push_back(vol);
        if (vol < 1.0 / bounds.V - 1e-12 || vol > bounds.V + 1e-12)
            rep.volume_violations.push_back(static_cast<int>(j));
        if (j + 1 < us.size()) {
            auto diff = subtract(us[j + 1], us[j]);
            rep.cauchy_l2_steps.push_back(lp_norm(diff, sampling, 2.0));
        }
    }
    rep.cauchy_like = rep.cauchy_l2_steps.back() <= rep.cauchy_l2_steps.front() + 1e-12;

    const ScalarField& last = us.back();
    const ConformalFactor last_cf =
        make_conformal_factor(n, scale(log_field(last), 2.0 / (n - 2.0)));
    rep.audit = uniform_integrability_audit(last_cf, bounds, audit_probes, sampling);

    const double e_last = rep.essinf_trajectory.back();
    double e_max = 0.0;
    for (double e : rep.essinf_trajectory) e_max = std::max(e_max, e);
    rep.classification = e_last < 0.25 * e_max ? "collapse-to-zero" : "positive-infimum";
    rep.positivity_certificate = rep.classification == "positive-infimum" && rep.audit.holds &&
                                 rep.volume_violations.empty();
    return rep;
}

// --- f-moment bound -----------------------------------------------------------------

// int f_i^2 <= 2 (C_P * gradient-energy bound + omega_n * B^2): Jensen bounds
// the mean from above, the uniform lower bound floors it, and the Poincare
// inequality (C_P = 1/n, spectral gap of the round sphere) controls the
// oscillation.
struct FMomentReport {
    double mean_upper = 0.0;   // (1/n) ln(V / omega_n)
    double mean_lower = 0.0;   // min{ (2/(n-2)) ln(e_inf/4), 0 }
    double poincare_constant = 0.0;
    double assembled_bound = 0.0;
    std::vector<InequalityCheck> checks;  // one per sequence element
    bool holds = true;
};

inline FMomentReport f_moment_bound_check(std::span<const ConformalFactor> factors, double e_inf,
                                          double V, const SphereSampling& sampling,
                                          [[maybe_unused]] double h = kDefaultStep) {
    if (factors.empty()) throw std::invalid_argument("f_moment_bound_check: empty sequence");
    const int n = factors.front().dimension;
    const double omega = sphere_volume_constant(n);
    FMomentReport rep;
    rep.mean_upper = std::log(V / omega) / n;
    rep.mean_lower = std::min(2.0 / (n - 2.0) * std::log(0.25 * e_inf), 0.0);
    rep.poincare_constant = 1.0 / n;
    const double mean_scale = std::max(std::abs(rep.mean_upper), std::abs(rep.mean_lower));
    const double grad_energy_bound = n * omega / (n - 2.0);
    rep.assembled_bound =
        2.0 * (rep.poincare_constant * grad_energy_bound + omega * mean_scale * mean_scale);
    for (const auto& cf : factors) {
        KahanSum f2;
        for (std::size_t i = 0; i < sampling.size(); ++i) {
            const double fv = cf.f.value(sampling.point(i));
            f2.add(sampling.weight(i) * fv * fv);
        }
        auto chk = make_check("f-moment-bound", f2.value(), rep.assembled_bound, 0.0);
        rep.holds = rep.holds && chk.holds;
        rep.checks.push_back(std::move(chk));
    }
    return rep;
}

}  // namespace confsphere
