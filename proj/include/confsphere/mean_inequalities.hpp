#pragma once

// Spherical-mean machinery: the drift constants that make spherical and ball
// means monotone for superharmonic-type factors, the elementary sine-integral
// ratio bounds behind them, profile construction, the derivative identity,
// and monotonicity / lower-semicontinuity checks.
//
// Dimension dispatch mirrors the split forced by the elementary ratio bound:
// the mean inequality applies to u itself in dimensions 3 and 4, to
// u^{2/(n-2)} from dimension 5 on, and to f = (2/(n-2)) ln u with its own
// drift constant in every dimension.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "confsphere/check.hpp"
#include "confsphere/errors.hpp"
#include "confsphere/field.hpp"

namespace confsphere {

struct PaperConstants {
    int n = 0;
    double omega_nm1 = 0.0;  // volume of S^{n-1}
    double c_low = 0.0;      // drift coefficient for u, n in {3,4}
    double c_high = 0.0;     // drift coefficient for u^{2/(n-2)}, n >= 5
    double f_drift = 0.0;    // C(n), drift constant for f
};

inline PaperConstants mean_constants(int n) {
    if (n < 3) throw std::invalid_argument("mean_constants: dimension must be >= 3");
    PaperConstants c;
    c.n = n;
    c.omega_nm1 = sphere_volume_constant(n - 1);
    c.c_low = 0.25 * n * (n - 2.0) * std::pow(0.5 * M_PI, (n + 2.0) / (2.0 * n)) *
              std::pow(c.omega_nm1, (2.0 - n) / (2.0 * n));
    c.c_high = 0.5 * n * std::pow(0.5 * M_PI, n - 1.0) * std::pow(c.omega_nm1, -1.0 / n);
    c.f_drift = 0.5 * n * sin_power_integral(n - 1, 0.5 * M_PI);
    return c;
}

enum class MeanVariant { low, high };

// Variant the dimension calls for; callers may force one for negative tests.
inline MeanVariant dispatch_variant(int n, std::optional<MeanVariant> forced = std::nullopt) {
    if (forced) {
        if (*forced == MeanVariant::low && n > 4)
            throw std::invalid_argument(
                "low-dimension mean inequality is only available for n in {3,4}");
        if (*forced == MeanVariant::high && n < 5)
            throw std::invalid_argument(
                "the power-variant exponent 2/(n-2) leaves (0,1) for n < 5");
        return *forced;
    }
    return n <= 4 ? MeanVariant::low : MeanVariant::high;
}

// Minimal admissible drift constant for the spherical-mean inequality of the
// chosen variant: c_low(n) ||u||_{L^{2n/(n-2)}} or c_high(n) ||u||^{2/(n-2)}.
inline double hypothesis_drift(const ScalarField& u, const SphereSampling& sampling,
                               std::optional<MeanVariant> forced = std::nullopt) {
    const int n = u.dimension;
    const PaperConstants pc = mean_constants(n);
    const double unorm = lp_norm(u, sampling, 2.0 * n / (n - 2.0));
    const MeanVariant v = dispatch_variant(n, forced);
    return v == MeanVariant::low ? pc.c_low * unorm : pc.c_high * std::pow(unorm, 2.0 / (n - 2.0));
}

// --- elementary ratio scans ----------------------------------------------------

struct RatioScanReport {
    double max_ratio = 0.0;
    double argmax_radius = 0.0;
    double bound = 0.0;
    bool holds = false;
};

// (int_0^r sin^{n-1})^{(n+2)/(2n)} / sin^{n-1} r <= (pi/2)^{(n+2)/(2n)};
// the leftover power of r is positive only for n in {3,4}.
inline RatioScanReport elementary_ratio_low(int n, const RadialGrid& grid, double tolerance = 0.0) {
    if (n != 3 && n != 4)
        throw std::invalid_argument("elementary_ratio_low: only dimensions 3 and 4");
    RatioScanReport rep;
    rep.bound = std::pow(0.5 * M_PI, (n + 2.0) / (2.0 * n));
    for (double r : grid.radii()) {
        const double ratio = std::pow(sin_power_integral(n - 1, r), (n + 2.0) / (2.0 * n)) /
                             std::pow(std::sin(r), n - 1.0);
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.argmax_radius = r;
        }
    }
    rep.holds = rep.max_ratio <= rep.bound + tolerance;
    return rep;
}

// (int_0^r sin^{n-1})^{(n-1)/n} / sin^{n-1} r <= (pi/2)^{(n-1)/n}, any n >= 3.
inline RatioScanReport elementary_ratio_high(int n, const RadialGrid& grid, double tolerance = 0.0) {
    if (n < 3) throw std::invalid_argument("elementary_ratio_high: dimension must be >= 3");
    RatioScanReport rep;
    rep.bound = std::pow(0.5 * M_PI, (n - 1.0) / n);
    for (double r : grid.radii()) {
        const double ratio = std::pow(sin_power_integral(n - 1, r), (n - 1.0) / n) /
                             std::pow(std::sin(r), n - 1.0);
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.argmax_radius = r;
        }
    }
    rep.holds = rep.max_ratio <= rep.bound + tolerance;
    return rep;
}

// --- spherical mean profiles ----------------------------------------------------

struct SphericalMeanProfile {
    Vec center;
    std::vector<double> radii;
    std::vector<double> values;           // phi(r_i)
    std::vector<double> standard_errors;  // Monte-Carlo error of each mean
    double drift = 0.0;                   // K

    double drifted(std::size_t i) const { return values[i] - drift * radii[i]; }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << "r,phi,phi_minus_Kr\n";
        out.precision(17);
        for (std::size_t i = 0; i < radii.size(); ++i)
            out << radii[i] << "," << values[i] << "," << drifted(i) << "\n";
    }
};

inline SphericalMeanProfile phi_profile(const ScalarField& u, std::span<const double> x,
                                        const RadialGrid& grid, std::size_t cap_count,
                                        std::uint64_t seed, double drift = 0.0) {
    SphericalMeanProfile prof;
    prof.center.assign(x.begin(), x.end());
    prof.drift = drift;
    for (double r : grid.radii()) {
        CapSampling cap(x, r, cap_count, derive_cap_seed(seed, x, r));
        const MeanStats st = spherical_mean_stats(u, cap);
        prof.radii.push_back(r);
        prof.values.push_back(st.mean);
        prof.standard_errors.push_back(st.standard_error);
    }
    return prof;
}

// --- derivative identity --------------------------------------------------------

struct DerivativeIdentityReport {
    double lhs = 0.0;  // centered difference of phi
    double rhs = 0.0;  // int_{B_r} (laplace u) / (omega_{n-1} sin^{n-1} r)
    double relative_discrepancy = 0.0;
};

struct CapQuadratureOptions {
    int radial_steps = 32;
    std::size_t cap_count = 2000;
    std::uint64_t seed = 1;
    double radial_delta = 1e-3;  // step for the centered phi difference
};

// phi'(r) = int_{B_r} laplace(u) dV / (omega_{n-1} sin^{n-1} r). The centered
// difference uses common random numbers on the two caps so the Monte-Carlo
// noise cancels pointwise instead of being amplified by 1/(2 delta).
inline DerivativeIdentityReport phi_derivative_identity_check(const ScalarField& u,
                                                              std::span<const double> x, double r,
                                                              double h = kDefaultStep,
                                                              CapQuadratureOptions opts = {}) {
    if (!(r > 0.0 && r < 0.5 * M_PI))
        throw std::invalid_argument("phi_derivative_identity_check: r must lie in (0, pi/2)");
    const int n = u.dimension;
    const double omega = sphere_volume_constant(n - 1);
    DerivativeIdentityReport rep;

    const double delta = opts.radial_delta;
    const std::uint64_t cap_seed = derive_cap_seed(opts.seed, x, r);
    CapSampling cap_plus(x, r + delta, opts.cap_count, cap_seed);
    CapSampling cap_minus(x, r - delta, opts.cap_count, cap_seed);
    rep.lhs = (spherical_mean(u, cap_plus) - spherical_mean(u, cap_minus)) / (2.0 * delta);

    const QuadratureRule gl = gauss_legendre(opts.radial_steps, 0.0, r);
    KahanSum ball;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double s = gl.nodes[k];
        CapSampling cap(x, s, opts.cap_count, derive_cap_seed(opts.seed, x, s));
        KahanSum lap_mean;
        for (std::size_t i = 0; i < cap.size(); ++i) lap_mean.add(laplace_beltrami(u, cap.point(i), h));
        const double mean_lap = lap_mean.value() / static_cast<double>(cap.size());
        ball.add(gl.weights[k] * mean_lap * omega * std::pow(std::sin(s), n - 1));
    }
    rep.rhs = ball.value() / (omega * std::pow(std::sin(r), n - 1));

    // discrepancy against the larger side, floored at a fraction of the local
    // mean so a flat profile (both sides ~ 0) does not divide noise by noise
    const double local_mean = std::abs(spherical_mean(u, cap_plus));
    const double scale =
        std::max({std::abs(rep.lhs), std::abs(rep.rhs), 0.1 * local_mean, 1e-12});
    rep.relative_discrepancy = std::abs(rep.lhs - rep.rhs) / scale;
    return rep;
}

// --- monotonicity checks --------------------------------------------------------

struct MonotonicityReport {
    SphericalMeanProfile profile;
    double max_uptick = 0.0;      // worst increase of the drifted profile
    double allowed_uptick = 0.0;  // 3x combined cap standard error at the worst pair
    bool holds = false;
    double required_drift = 0.0;  // hypothesis floor for K
};

// Drifted spherical-mean profile r -> phi(r) - K r must be non-increasing for
// the dispatched target (u itself for n in {3,4}, u^{2/(n-2)} for n >= 5).
// Refuses to run when K is below the computed hypothesis floor.
inline MonotonicityReport spherical_mean_monotonicity_check(
    const ScalarField& u, double K, std::span<const double> x, const RadialGrid& grid,
    const SphereSampling& sampling, std::size_t cap_count = 4000, std::uint64_t seed = 1,
    std::optional<MeanVariant> forced = std::nullopt) {
    const int n = u.dimension;
    const MeanVariant variant = dispatch_variant(n, forced);
    MonotonicityReport rep;
    rep.required_drift = hypothesis_drift(u, sampling, variant);
    if (K < rep.required_drift)
        throw hypothesis_violation("spherical_mean_monotonicity_check: K below the hypothesis floor");
    const ScalarField target =
        variant == MeanVariant::low ? u : power_field(u, 2.0 / (n - 2.0));
    rep.profile = phi_profile(target, x, grid, cap_count, seed, K);
    double worst = -std::numeric_limits<double>::infinity();
    double allowed_at_worst = 0.0;
    for (std::size_t i = 0; i + 1 < rep.profile.radii.size(); ++i) {
        const double uptick = rep.profile.drifted(i + 1) - rep.profile.drifted(i);
        const double se = std::sqrt(rep.profile.standard_errors[i] * rep.profile.standard_errors[i] +
                                    rep.profile.standard_errors[i + 1] * rep.profile.standard_errors[i + 1]);
        if (uptick > worst) {
            worst = uptick;
            allowed_at_worst = 3.0 * se;
        }
    }
    rep.max_uptick = worst;
    rep.allowed_uptick = allowed_at_worst;
    rep.holds = worst <= allowed_at_worst;
    return rep;
}

// u(x) >= mean_{dB_r} u - K r (or the u^{2/(n-2)} form from dimension 5 on),
// with K the computed hypothesis drift.
inline InequalityCheck pointwise_lower_bound_check(const ScalarField& u, std::span<const double> x,
                                                   double r, const SphereSampling& sampling,
                                                   std::size_t cap_count = 4000,
                                                   std::uint64_t seed = 1,
                                                   std::optional<MeanVariant> forced = std::nullopt) {
    if (!(r > 0.0 && r < 0.5 * M_PI))
        throw std::invalid_argument("pointwise_lower_bound_check: r must lie in (0, pi/2)");
    const int n = u.dimension;
    const MeanVariant variant = dispatch_variant(n, forced);
    const double K = hypothesis_drift(u, sampling, variant);
    const ScalarField target = variant == MeanVariant::low ? u : power_field(u, 2.0 / (n - 2.0));
    CapSampling cap(x, r, cap_count, derive_cap_seed(seed, x, r));
    const double mean = spherical_mean(target, cap);
    // lhs <= rhs with lhs = mean - K r and rhs = target(x)
    return make_check("pointwise-lower-bound", mean - K * r, target.value(x), 0.0);
}

// --- ball averages with drift ----------------------------------------------------

struct DriftedBallAverage {
    double value = 0.0;
    double standard_error = 0.0;
};

// Average of (target - K d(., x)) over B_r(x) via the polar decomposition;
// the drift term integrates exactly, only the spherical means carry noise.
inline DriftedBallAverage drifted_ball_average(const ScalarField& target, std::span<const double> x,
                                               double K, double r, int radial_steps,
                                               std::size_t cap_count, std::uint64_t seed) {
    if (!(r > 0.0 && r < 0.5 * M_PI))
        throw std::invalid_argument("drifted_ball_average: radius outside (0, pi/2)");
    const int n = target.dimension;
    const double omega = sphere_volume_constant(n - 1);
    const QuadratureRule gl = gauss_legendre(radial_steps, 0.0, r);
    KahanSum acc;
    double var = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double s = gl.nodes[k];
        CapSampling cap(x, s, cap_count, derive_cap_seed(seed, x, s));
        const MeanStats st = spherical_mean_stats(target, cap);
        const double shell = gl.weights[k] * omega * std::pow(std::sin(s), n - 1);
        acc.add(shell * (st.mean - K * s));
        var += shell * shell * st.standard_error * st.standard_error;
    }
    const double vol = ball_volume(n, r);
    return {acc.value() / vol, std::sqrt(var) / vol};
}

struct BallMonotonicityReport {
    double average_inner = 0.0;  // at r0
    double average_outer = 0.0;  // at r1
    double tolerance = 0.0;      // 3x combined standard error
    bool holds = false;
};

// Drifted ball averages must order: average at r1 <= average at r0 for
// r0 < r1. The caller chooses the target field and matching drift constant
// (u with the hypothesis drift, u^{2/(n-2)} with its own, or f with C(n)).
inline BallMonotonicityReport ball_average_monotonicity_check(const ScalarField& target, double K,
                                                              std::span<const double> x, double r0,
                                                              double r1, int radial_steps = 32,
                                                              std::size_t cap_count = 2000,
                                                              std::uint64_t seed = 1) {
    if (!(0.0 < r0 && r0 < r1 && r1 < 0.5 * M_PI))
        throw std::invalid_argument("ball_average_monotonicity_check: need 0 < r0 < r1 < pi/2");
    const DriftedBallAverage inner = drifted_ball_average(target, x, K, r0, radial_steps, cap_count, seed);
    const DriftedBallAverage outer = drifted_ball_average(target, x, K, r1, radial_steps, cap_count, seed);
    BallMonotonicityReport rep;
    rep.average_inner = inner.value;
    rep.average_outer = outer.value;
    rep.tolerance = 3.0 * std::sqrt(inner.standard_error * inner.standard_error +
                                    outer.standard_error * outer.standard_error);
    rep.holds = outer.value <= inner.value + rep.tolerance;
    return rep;
}

// f-variant endpoint inequality: the drifted ball average never exceeds the
// center value, avg_{B_r}(f - C(n) d) <= f(x).
inline InequalityCheck f_ball_average_center_check(const ScalarField& f, std::span<const double> x,
                                                   double r, int radial_steps = 32,
                                                   std::size_t cap_count = 2000,
                                                   std::uint64_t seed = 1, double tolerance = 0.0) {
    const PaperConstants pc = mean_constants(f.dimension);
    const DriftedBallAverage avg = drifted_ball_average(f, x, pc.f_drift, r, radial_steps, cap_count, seed);
    return make_check("f-ball-average-center", avg.value, f.value(x),
                      tolerance > 0.0 ? tolerance : 3.0 * avg.standard_error);
}

// --- superharmonic powers ---------------------------------------------------------

struct SuperharmonicPowerReport {
    double base_defect = 0.0;   // max of laplace u - C u over probes (hypothesis)
    double power_defect = 0.0;  // max of laplace u^alpha - alpha C u^alpha
    bool holds = false;
    double tolerance = 0.0;
};

// laplace u <= C u implies laplace u^alpha <= alpha C u^alpha for alpha in
// (0,1) and positive u. The hypothesis is verified first and a violation of
// it is reported as such, not as a failure of the conclusion.
inline SuperharmonicPowerReport superharmonic_power_check(const ScalarField& u, double C,
                                                          double alpha, std::span<const Vec> probes,
                                                          double h = kDefaultStep,
                                                          double tolerance = 1e-5) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("superharmonic_power_check: alpha must lie in (0,1)");
    SuperharmonicPowerReport rep;
    rep.tolerance = tolerance;
    rep.base_defect = max_superharmonic_defect(u, C, probes, h);
    if (rep.base_defect > tolerance)
        throw hypothesis_violation("superharmonic_power_check: laplace u <= C u fails at a probe");
    for (const auto& p : probes) {
        if (!(u.value(p) > 0.0))
            throw hypothesis_violation("superharmonic_power_check: u must be positive at probes");
    }
    const ScalarField ua = power_field(u, alpha);
    rep.power_defect = max_superharmonic_defect(ua, alpha * C, probes, h);
    rep.holds = rep.power_defect <= tolerance;
    return rep;
}

// --- lower semicontinuity probe ---------------------------------------------------

struct LowerSemicontinuityReport {
    std::vector<double> radii;     // strictly decreasing
    std::vector<double> averages;  // drifted ball averages
    double sup_value = 0.0;
    double center_value = 0.0;
    bool monotone_nondecreasing = false;  // as the radius shrinks
    double tolerance = 0.0;
};

// The representation u(x) = sup over shrinking radii of the drifted ball
// average: averages must grow (up to noise) as the radius shrinks and, for
// continuous u, approach u(x).
inline LowerSemicontinuityReport lower_semicontinuity_probe(const ScalarField& u,
                                                            std::span<const double> x, double K,
                                                            std::span<const double> radii,
                                                            int radial_steps = 32,
                                                            std::size_t cap_count = 2000,
                                                            std::uint64_t seed = 1) {
    if (radii.size() < 2) throw std::invalid_argument("lower_semicontinuity_probe: need >= 2 radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] < radii[i - 1]))
            throw std::invalid_argument("lower_semicontinuity_probe: radii must strictly decrease");
    LowerSemicontinuityReport rep;
    rep.center_value = u.value(x);
    double max_se = 0.0;
    for (double r : radii) {
        const DriftedBallAverage avg = drifted_ball_average(u, x, K, r, radial_steps, cap_count, seed);
        rep.radii.push_back(r);
        rep.averages.push_back(avg.value);
        max_se = std::max(max_se, avg.standard_error);
    }
    rep.tolerance = 3.0 * max_se;
    rep.monotone_nondecreasing = true;
    for (std::size_t i = 1; i < rep.averages.size(); ++i)
        if (rep.averages[i] < rep.averages[i - 1] - rep.tolerance) rep.monotone_nondecreasing = false;
    rep.sup_value = *std::max_element(rep.averages.begin(), rep.averages.end());
    return rep;
}

}  // namespace confsphere
