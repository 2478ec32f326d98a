#pragma once

// Scalar fields on S^n and their intrinsic calculus. Both first- and
// second-order operators act through the degree-0 homogeneous extension
// F(x) = field(x/|x|): the ambient gradient of F is automatically tangent and
// the ambient Laplacian of F restricted to |x|=1 equals the Laplace-Beltrami
// operator. One identity, every dimension, no chart poles.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "confsphere/geometry.hpp"
#include "confsphere/vecmath.hpp"

namespace confsphere {

inline constexpr double kDefaultStep = 1e-3;

enum class Smoothness { smooth, piecewise_smooth };

// A real-valued function on S^n, evaluable at arbitrary unit vectors.
// The optional `gradient` hook supplies the closed-form intrinsic gradient;
// operators fall back to finite differences when it is absent.
struct ScalarField {
    int dimension = 0;  // n
    Smoothness smoothness = Smoothness::smooth;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;

    double operator()(std::span<const double> p) const { return value(p); }
    bool has_gradient() const { return static_cast<bool>(gradient); }
};

struct TangentVector {
    Vec base;
    Vec components;  // ambient components, orthogonal to base
};

namespace detail {

inline void check_probe(const ScalarField& field, std::span<const double> p) {
    if (static_cast<int>(p.size()) != field.dimension + 1)
        throw std::invalid_argument("field probe has wrong ambient dimension");
    if (!is_unit(p)) throw std::invalid_argument("field probe must be a unit vector");
}

// Evaluates the degree-0 extension at an off-sphere point.
inline double extension_value(const ScalarField& field, std::span<const double> x) {
    double buf[kMaxAmbient];
    const std::size_t m = x.size();
    double r2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) r2 += x[i] * x[i];
    const double inv = 1.0 / std::sqrt(r2);
    for (std::size_t i = 0; i < m; ++i) buf[i] = x[i] * inv;
    return field.value(std::span<const double>(buf, m));
}

}  // namespace detail

// Central-difference intrinsic gradient at p; the residual radial component
// is projected out so the tangency invariant holds exactly.
inline TangentVector intrinsic_gradient(const ScalarField& field, std::span<const double> p,
                                        double h = kDefaultStep) {
    detail::check_probe(field, p);
    if (!(h > 0.0 && h <= 1e-2)) throw std::invalid_argument("intrinsic_gradient: step must be in (0, 1e-2]");
    const std::size_t m = p.size();
    TangentVector g;
    g.base.assign(p.begin(), p.end());
    g.components.assign(m, 0.0);
    double xp[kMaxAmbient];
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < m; ++i) xp[i] = p[i];
        xp[k] = p[k] + h;
        const double fp = detail::extension_value(field, std::span<const double>(xp, m));
        xp[k] = p[k] - h;
        const double fm = detail::extension_value(field, std::span<const double>(xp, m));
        g.components[k] = (fp - fm) / (2.0 * h);
    }
    const double radial = dot(g.components, p);
    for (std::size_t i = 0; i < m; ++i) g.components[i] -= radial * p[i];
    return g;
}

// Laplace-Beltrami via the (n+1)-axis second-difference stencil on the
// degree-0 extension.
inline double laplace_beltrami(const ScalarField& field, std::span<const double> p,
                               double h = kDefaultStep) {
    detail::check_probe(field, p);
    if (!(h > 0.0 && h <= 1e-2)) throw std::invalid_argument("laplace_beltrami: step must be in (0, 1e-2]");
    const std::size_t m = p.size();
    const double fc = field.value(p);
    double xp[kMaxAmbient];
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < m; ++i) xp[i] = p[i];
        xp[k] = p[k] + h;
        const double fp = detail::extension_value(field, std::span<const double>(xp, m));
        xp[k] = p[k] - h;
        const double fm = detail::extension_value(field, std::span<const double>(xp, m));
        acc += fp - 2.0 * fc + fm;
    }
    return acc / (h * h);
}

// Intrinsic gradient through the closed-form hook when present, finite
// differences otherwise. Used by quadrature loops where the hook matters.
inline void field_gradient(const ScalarField& field, std::span<const double> p, std::span<double> out,
                           double h = kDefaultStep) {
    if (field.has_gradient()) {
        field.gradient(p, out);
        return;
    }
    TangentVector g = intrinsic_gradient(field, p, h);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = g.components[i];
}

inline double gradient_norm_sq(const ScalarField& field, std::span<const double> p,
                               double h = kDefaultStep) {
    double buf[kMaxAmbient];
    std::span<double> g(buf, p.size());
    field_gradient(field, p, g, h);
    return dot(g, g);
}

// --- integration -------------------------------------------------------------

inline double integrate(const ScalarField& field, const SphereSampling& sampling) {
    if (field.dimension != sampling.dimension())
        throw std::invalid_argument("integrate: field/sampling dimension mismatch");
    KahanSum s;
    for (std::size_t i = 0; i < sampling.size(); ++i)
        s.add(sampling.weight(i) * field.value(sampling.point(i)));
    return s.value();
}

inline double lp_norm(const ScalarField& field, const SphereSampling& sampling, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: exponent must be >= 1");
    if (field.dimension != sampling.dimension())
        throw std::invalid_argument("lp_norm: field/sampling dimension mismatch");
    KahanSum s;
    for (std::size_t i = 0; i < sampling.size(); ++i)
        s.add(sampling.weight(i) * std::pow(std::abs(field.value(sampling.point(i))), p));
    return std::pow(s.value(), 1.0 / p);
}

struct MeanStats {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t count = 0;
};

// Weighted average over a geodesic-sphere sample (the spherical mean phi(r)),
// with the Monte-Carlo standard error of the mean.
inline MeanStats spherical_mean_stats(const ScalarField& field, const CapSampling& cap) {
    if (cap.size() == 0) throw std::invalid_argument("spherical_mean: empty cap");
    if (field.dimension != cap.dimension())
        throw std::invalid_argument("spherical_mean: field/cap dimension mismatch");
    double sum = 0.0, sum2 = 0.0;
    const std::size_t npts = cap.size();
    for (std::size_t i = 0; i < npts; ++i) {
        const double v = field.value(cap.point(i));
        sum += v;
        sum2 += v * v;
    }
    MeanStats st;
    st.count = npts;
    st.mean = sum / static_cast<double>(npts);
    if (npts > 1) {
        const double var = (sum2 - sum * sum / static_cast<double>(npts)) / static_cast<double>(npts - 1);
        st.standard_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(npts));
    }
    return st;
}

inline double spherical_mean(const ScalarField& field, const CapSampling& cap) {
    return spherical_mean_stats(field, cap).mean;
}

// Ball average by the polar decomposition: Gauss-Legendre in the radius of
// (spherical mean) * omega_{n-1} sin^{n-1}, divided by the ball volume.
// Cap seeds are derived per radius from the base seed.
inline double ball_average(const ScalarField& field, std::span<const double> x, double r,
                           int radial_steps, std::size_t cap_count, std::uint64_t seed) {
    if (!(r > 0.0 && r < 0.5 * M_PI)) throw std::invalid_argument("ball_average: radius outside (0, pi/2)");
    if (radial_steps < 2) throw std::invalid_argument("ball_average: need at least 2 radial nodes");
    const int n = field.dimension;
    const double omega = sphere_volume_constant(n - 1);
    const QuadratureRule gl = gauss_legendre(radial_steps, 0.0, r);
    double acc = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double s = gl.nodes[k];
        CapSampling cap(x, s, cap_count, derive_cap_seed(seed, x, s));
        acc += gl.weights[k] * spherical_mean(field, cap) * omega * std::pow(std::sin(s), n - 1);
    }
    return acc / ball_volume(n, r);
}

// Largest value of (laplace u - C u) over the probes: <= 0 (up to FD noise)
// exactly when the differential inequality laplace u <= C u holds there.
inline double max_superharmonic_defect(const ScalarField& u, double C,
                                       std::span<const Vec> probes, double h = kDefaultStep) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& p : probes) {
        const double defect = laplace_beltrami(u, p, h) - C * u.value(p);
        if (defect > worst) worst = defect;
    }
    return worst;
}

// Largest value of (laplace u - bound) over the probes: the defect of the
// constant-bound inequality laplace u <= bound.
inline double max_laplacian_excess(const ScalarField& u, double bound, std::span<const Vec> probes,
                                   double h = kDefaultStep) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& p : probes) worst = std::max(worst, laplace_beltrami(u, p, h) - bound);
    return worst;
}

// Deterministic uniform probe points (plain points, no quadrature weights).
inline std::vector<Vec> sample_probe_points(int n, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(rng.unit_vector(n + 1));
    return out;
}

// --- field constructors --------------------------------------------------------

inline ScalarField constant_field(int n, double c) {
    ScalarField f;
    f.dimension = n;
    f.value = [c](std::span<const double>) { return c; };
    f.gradient = [](std::span<const double>, std::span<double> out) {
        for (double& x : out) x = 0.0;
    };
    return f;
}

// The ambient coordinate x_i restricted to the sphere; gradient e_i - p_i p.
inline ScalarField coordinate_field(int n, int i) {
    if (i < 0 || i > n) throw std::invalid_argument("coordinate_field: index out of range");
    ScalarField f;
    f.dimension = n;
    f.value = [i](std::span<const double> p) { return p[static_cast<std::size_t>(i)]; };
    f.gradient = [i](std::span<const double> p, std::span<double> out) {
        const double pi = p[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = -pi * p[k];
        out[static_cast<std::size_t>(i)] += 1.0;
    };
    return f;
}

inline ScalarField from_function(int n, std::function<double(std::span<const double>)> fn,
                                 Smoothness s = Smoothness::smooth) {
    ScalarField f;
    f.dimension = n;
    f.smoothness = s;
    f.value = std::move(fn);
    return f;
}

// p -> <a, p> restricted to the sphere; gradient a - <a,p> p.
inline ScalarField linear_field(int n, Vec a) {
    if (static_cast<int>(a.size()) != n + 1)
        throw std::invalid_argument("linear_field: coefficient size must be n+1");
    ScalarField f;
    f.dimension = n;
    auto pa = std::make_shared<Vec>(std::move(a));
    f.value = [pa](std::span<const double> p) { return dot(*pa, p); };
    f.gradient = [pa](std::span<const double> p, std::span<double> out) {
        const double t = dot(*pa, p);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*pa)[i] - t * p[i];
    };
    return f;
}

namespace detail {
inline Smoothness combine(Smoothness a, Smoothness b) {
    return (a == Smoothness::piecewise_smooth || b == Smoothness::piecewise_smooth)
               ? Smoothness::piecewise_smooth
               : Smoothness::smooth;
}
}  // namespace detail

inline ScalarField add(ScalarField a, ScalarField b) {
    if (a.dimension != b.dimension) throw std::invalid_argument("add: dimension mismatch");
    ScalarField f;
    f.dimension = a.dimension;
    f.smoothness = detail::combine(a.smoothness, b.smoothness);
    auto pa = std::make_shared<ScalarField>(std::move(a));
    auto pb = std::make_shared<ScalarField>(std::move(b));
    f.value = [pa, pb](std::span<const double> p) { return pa->value(p) + pb->value(p); };
    if (pa->has_gradient() && pb->has_gradient()) {
        f.gradient = [pa, pb](std::span<const double> p, std::span<double> out) {
            double buf[kMaxAmbient];
            std::span<double> g(buf, out.size());
            pa->gradient(p, out);
            pb->gradient(p, g);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
        };
    }
    return f;
}

inline ScalarField scale(ScalarField a, double c) {
    ScalarField f;
    f.dimension = a.dimension;
    f.smoothness = a.smoothness;
    auto pa = std::make_shared<ScalarField>(std::move(a));
    f.value = [pa, c](std::span<const double> p) { return c * pa->value(p); };
    if (pa->has_gradient()) {
        f.gradient = [pa, c](std::span<const double> p, std::span<double> out) {
            pa->gradient(p, out);
            for (double& x : out) x *= c;
        };
    }
    return f;
}

inline ScalarField multiply(ScalarField a, ScalarField b) {
    if (a.dimension != b.dimension) throw std::invalid_argument("multiply: dimension mismatch");
    ScalarField f;
    f.dimension = a.dimension;
    f.smoothness = detail::combine(a.smoothness, b.smoothness);
    auto pa = std::make_shared<ScalarField>(std::move(a));
    auto pb = std::make_shared<ScalarField>(std::move(b));
    f.value = [pa, pb](std::span<const double> p) { return pa->value(p) * pb->value(p); };
    if (pa->has_gradient() && pb->has_gradient()) {
        f.gradient = [pa, pb](std::span<const double> p, std::span<double> out) {
            double buf[kMaxAmbient];
            std::span<double> g(buf, out.size());
            const double va = pa->value(p);
            const double vb = pb->value(p);
            pa->gradient(p, out);
            pb->gradient(p, g);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = vb * out[i] + va * g[i];
        };
    }
    return f;
}

inline ScalarField exp_field(ScalarField a) {
    ScalarField f;
    f.dimension = a.dimension;
    f.smoothness = a.smoothness;
    auto pa = std::make_shared<ScalarField>(std::move(a));
    f.value = [pa](std::span<const double> p) { return std::exp(pa->value(p)); };
    if (pa->has_gradient()) {
        f.gradient = [pa](std::span<const double> p, std::span<double> out) {
            const double e = std::exp(pa->value(p));
            pa->gradient(p, out);
            for (double& x : out) x *= e;
        };
    }
    return f;
}

inline ScalarField log_field(ScalarField a) {
    ScalarField f;
    f.dimension = a.dimension;
    f.smoothness = a.smoothness;
    auto pa = std::make_shared<ScalarField>(std::move(a));
    f.value = [pa](std::span<const double> p) { return std::log(pa->value(p)); };
    if (pa->has_gradient()) {
        f.gradient = [pa](std::span<const double> p, std::span<double> out) {
            const double v = pa->value(p);
            pa->gradient(p, out);
            for (double& x : out) x /= v;
        };
    }
    return f;
}

// a^alpha for positive-valued a.
inline ScalarField power_field(ScalarField a, double alpha) {
    ScalarField f;
    f.dimension = a.dimension;
    f.smoothness = a.smoothness;
    auto pa = std::make_shared<ScalarField>(std::move(a));
    f.value = [pa, alpha](std::span<const double> p) { return std::pow(pa->value(p), alpha); };
    if (pa->has_gradient()) {
        f.gradient = [pa, alpha](std::span<const double> p, std::span<double> out) {
            const double v = pa->value(p);
            const double c = alpha * std::pow(v, alpha - 1.0);
            pa->gradient(p, out);
            for (double& x : out) x *= c;
        };
    }
    return f;
}

inline ScalarField subtract(ScalarField a, ScalarField b) { return add(std::move(a), scale(std::move(b), -1.0)); }

inline ScalarField divide(ScalarField a, ScalarField b) {
    if (a.dimension != b.dimension) throw std::invalid_argument("divide: dimension mismatch");
    ScalarField f;
    f.dimension = a.dimension;
    f.smoothness = detail::combine(a.smoothness, b.smoothness);
    auto pa = std::make_shared<ScalarField>(std::move(a));
    auto pb = std::make_shared<ScalarField>(std::move(b));
    f.value = [pa, pb](std::span<const double> p) { return pa->value(p) / pb->value(p); };
    if (pa->has_gradient() && pb->has_gradient()) {
        f.gradient = [pa, pb](std::span<const double> p, std::span<double> out) {
            double buf[kMaxAmbient];
            std::span<double> g(buf, out.size());
            const double va = pa->value(p);
            const double vb = pb->value(p);
            pa->gradient(p, out);
            pb->gradient(p, g);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] * vb - va * g[i]) / (vb * vb);
        };
    }
    return f;
}

// fn(a(p)) with chain-rule gradient dfn(a(p)) * grad a.
inline ScalarField chain_unary(ScalarField a, std::function<double(double)> fn,
                               std::function<double(double)> dfn) {
    ScalarField f;
    f.dimension = a.dimension;
    f.smoothness = a.smoothness;
    auto pa = std::make_shared<ScalarField>(std::move(a));
    auto pfn = std::make_shared<std::function<double(double)>>(std::move(fn));
    f.value = [pa, pfn](std::span<const double> p) { return (*pfn)(pa->value(p)); };
    if (pa->has_gradient() && dfn) {
        auto pdfn = std::make_shared<std::function<double(double)>>(std::move(dfn));
        f.gradient = [pa, pdfn](std::span<const double> p, std::span<double> out) {
            const double c = (*pdfn)(pa->value(p));
            pa->gradient(p, out);
            for (double& x : out) x *= c;
        };
    }
    return f;
}

// Geodesic distance to a fixed unit vector. The gradient is undefined at the
// point itself and its antipode; the hook returns zero there (measure-zero
// set, never hit by the samplers).
inline ScalarField distance_field(int n, Vec center) {
    if (!is_unit(center)) throw std::invalid_argument("distance_field: center must be unit");
    ScalarField f;
    f.dimension = n;
    auto c = std::make_shared<Vec>(std::move(center));
    f.value = [c](std::span<const double> p) { return std::acos(clamp_unit(dot(p, *c))); };
    f.gradient = [c](std::span<const double> p, std::span<double> out) {
        const double t = clamp_unit(dot(p, *c));
        const double s2 = 1.0 - t * t;
        if (s2 < 1e-24) {
            for (double& x : out) x = 0.0;
            return;
        }
        const double inv = -1.0 / std::sqrt(s2);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv * ((*c)[i] - t * p[i]);
    };
    return f;
}

// Cutoff chi(s) = (1-s^2)^5 on |s|<1, 0 outside; chi(0)=1. C^4 across the
// support boundary, which keeps second-order stencils accurate while staying
// polynomial inside (flat-at-the-edge exponential bumps choke quadrature
// with their boundary layer).
inline double smooth_bump(double s) {
    const double d = 1.0 - s * s;
    if (d <= 0.0) return 0.0;
    const double d2 = d * d;
    return d2 * d2 * d;
}

inline double smooth_bump_derivative(double s) {
    const double d = 1.0 - s * s;
    if (d <= 0.0) return 0.0;
    const double d2 = d * d;
    return -10.0 * s * d2 * d2;
}

// height * chi(d(p, center)/width): smooth spike supported in B_width(center).
inline ScalarField bump_field(int n, Vec center, double width, double height) {
    if (!(width > 0.0)) throw std::invalid_argument("bump_field: width must be positive");
    ScalarField dist = distance_field(n, std::move(center));
    auto pd = std::make_shared<ScalarField>(std::move(dist));
    ScalarField f;
    f.dimension = n;
    f.value = [pd, width, height](std::span<const double> p) {
        return height * smooth_bump(pd->value(p) / width);
    };
    f.gradient = [pd, width, height](std::span<const double> p, std::span<double> out) {
        const double s = pd->value(p) / width;
        const double c = height * smooth_bump_derivative(s) / width;
        if (c == 0.0) {
            for (double& x : out) x = 0.0;
            return;
        }
        pd->gradient(p, out);
        for (double& x : out) x *= c;
    };
    return f;
}

// (1 - (d/rho)^2)_+^3: the nonnegative W^{1,2} test-function family used by
// the weak-form checks. C^2, closed-form gradient.
inline ScalarField cutoff_bump_field(int n, Vec center, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("cutoff_bump_field: rho must be positive");
    ScalarField dist = distance_field(n, std::move(center));
    auto pd = std::make_shared<ScalarField>(std::move(dist));
    ScalarField f;
    f.dimension = n;
    f.value = [pd, rho](std::span<const double> p) {
        const double t = pd->value(p) / rho;
        const double b = 1.0 - t * t;
        return b > 0.0 ? b * b * b : 0.0;
    };
    f.gradient = [pd, rho](std::span<const double> p, std::span<double> out) {
        const double t = pd->value(p) / rho;
        const double b = 1.0 - t * t;
        if (b <= 0.0) {
            for (double& x : out) x = 0.0;
            return;
        }
        const double c = 3.0 * b * b * (-2.0 * t / rho);
        pd->gradient(p, out);
        for (double& x : out) x *= c;
    };
    return f;
}

}  // namespace confsphere
