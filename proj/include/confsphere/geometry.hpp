#pragma once

// Geometry substrate for the unit round sphere S^n in R^{n+1}: closed-form
// volume constants, geodesic distance, geodesic balls and spheres, and the
// two quadrature backends (Monte Carlo and a deterministic product rule)
// that every downstream integral runs on.
//
// Points are kept in the ambient embedding throughout; no coordinate charts
// means no coordinate poles anywhere downstream.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "confsphere/quadrature.hpp"
#include "confsphere/vecmath.hpp"

namespace confsphere {

// omega_n: volume of S^n with the round metric, 2 pi^{(n+1)/2} / Gamma((n+1)/2).
inline double sphere_volume_constant(int n) {
    if (n < 1) throw std::invalid_argument("sphere_volume_constant: dimension must be >= 1");
    return 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

// \int_0^r sin^k(s) ds, the radial factor of every ball volume and drift term.
inline double sin_power_integral(int k, double r, double tol = 1e-13) {
    if (k < 0) throw std::invalid_argument("sin_power_integral: negative power");
    if (r == 0.0) return 0.0;
    return integrate_adaptive([k](double s) { return std::pow(std::sin(s), k); }, 0.0, r, tol);
}

inline double geodesic_distance(std::span<const double> x, std::span<const double> y) {
    if (!is_unit(x) || !is_unit(y))
        throw std::invalid_argument("geodesic_distance: inputs must be unit vectors");
    return std::acos(clamp_unit(dot(x, y)));
}

// Vol(B_r) = omega_{n-1} \int_0^r sin^{n-1} s ds on S^n, r in [0, pi].
inline double ball_volume(int n, double r) {
    if (n < 2) throw std::invalid_argument("ball_volume: dimension must be >= 2");
    if (r < 0.0 || r > M_PI) throw std::invalid_argument("ball_volume: radius outside [0, pi]");
    return sphere_volume_constant(n - 1) * sin_power_integral(n - 1, r, 1e-13);
}

// --- radial grids -----------------------------------------------------------

// Strictly increasing radii inside (0, pi/2); the r-parameters of the
// spherical-mean machinery.
class RadialGrid {
public:
    RadialGrid(std::vector<double> radii) : radii_(std::move(radii)) { validate(); }

    static RadialGrid uniform(int count, double r_min, double r_max) {
        if (count < 1) throw std::invalid_argument("RadialGrid: count must be >= 1");
        std::vector<double> r(static_cast<std::size_t>(count));
        if (count == 1) {
            r[0] = 0.5 * (r_min + r_max);
        } else {
            for (int i = 0; i < count; ++i)
                r[static_cast<std::size_t>(i)] =
                    r_min + (r_max - r_min) * static_cast<double>(i) / (count - 1);
        }
        return RadialGrid(std::move(r));
    }

    const std::vector<double>& radii() const { return radii_; }
    std::size_t size() const { return radii_.size(); }
    double operator[](std::size_t i) const { return radii_[i]; }

private:
    void validate() const {
        if (radii_.empty()) throw std::invalid_argument("RadialGrid: empty");
        double prev = 0.0;
        for (double r : radii_) {
            if (!(r > 0.0 && r < 0.5 * M_PI))
                throw std::invalid_argument("RadialGrid: radii must lie strictly inside (0, pi/2)");
            if (!(r > prev)) throw std::invalid_argument("RadialGrid: radii must be strictly increasing");
            prev = r;
        }
    }

    std::vector<double> radii_;
};

// --- whole-sphere samplings ---------------------------------------------------

enum class SamplingKind { monte_carlo, product_rule };

inline std::string to_string(SamplingKind k) {
    return k == SamplingKind::monte_carlo ? "monte-carlo" : "product-rule";
}

// A finite sample of S^n with quadrature weights for the round measure.
// Immutable after construction; points stored flat with stride n+1.
class SphereSampling {
public:
    int dimension() const { return n_; }
    int ambient_dimension() const { return n_ + 1; }
    std::size_t size() const { return weights_.size(); }
    SamplingKind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }
    int resolution() const { return resolution_; }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(n_ + 1),
                static_cast<std::size_t>(n_ + 1)};
    }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }

    double total_weight() const {
        KahanSum s;
        for (double w : weights_) s.add(w);
        return s.value();
    }

    // Serializes the construction recipe (not the points).
    nlohmann::ordered_json descriptor() const {
        nlohmann::ordered_json j;
        j["dimension"] = n_;
        j["kind"] = to_string(kind_);
        if (kind_ == SamplingKind::monte_carlo)
            j["count"] = size();
        else
            j["resolution"] = resolution_;
        j["seed"] = seed_;
        return j;
    }

    // CSV with columns x0..xn,weight.
    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        for (int k = 0; k <= n_; ++k) out << "x" << k << ",";
        out << "weight\n";
        out.precision(17);
        for (std::size_t i = 0; i < size(); ++i) {
            auto p = point(i);
            for (double c : p) out << c << ",";
            out << weights_[i] << "\n";
        }
    }

    friend SphereSampling uniform_sphere_sampling(int, std::size_t, std::uint64_t);
    friend SphereSampling product_rule_sampling(int, int);

private:
    SphereSampling(int n, SamplingKind kind) : n_(n), kind_(kind) {}

    int n_ = 0;
    SamplingKind kind_ = SamplingKind::monte_carlo;
    std::uint64_t seed_ = 0;
    int resolution_ = 0;
    std::vector<double> coords_;
    std::vector<double> weights_;
};

// i.i.d. uniform points (normalized Gaussian draws), each weighted
// omega_n / count so the constant 1 integrates to omega_n exactly.
inline SphereSampling uniform_sphere_sampling(int n, std::size_t count, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("uniform_sphere_sampling: dimension must be >= 2");
    if (count == 0) throw std::invalid_argument("uniform_sphere_sampling: count must be >= 1");
    if (n + 1 > kMaxAmbient) throw std::invalid_argument("uniform_sphere_sampling: dimension too large");
    SphereSampling s(n, SamplingKind::monte_carlo);
    s.seed_ = seed;
    s.coords_.reserve(count * static_cast<std::size_t>(n + 1));
    s.weights_.assign(count, sphere_volume_constant(n) / static_cast<double>(count));
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        Vec p = rng.unit_vector(n + 1);
        s.coords_.insert(s.coords_.end(), p.begin(), p.end());
    }
    return s;
}

// Deterministic product rule for n <= 4: Gauss-Legendre nodes in each polar
// angle, uniform nodes in the azimuth. Exact weight total to ~1e-14 for
// resolution >= 16; odd coordinate functions cancel pairwise.
inline SphereSampling product_rule_sampling(int n, int resolution) {
    if (n < 2 || n > 4)
        throw std::invalid_argument("product_rule_sampling: only dimensions 2..4 supported");
    if (resolution < 4) throw std::invalid_argument("product_rule_sampling: resolution too small");
    SphereSampling s(n, SamplingKind::product_rule);
    s.resolution_ = resolution;

    const int polar_count = n - 1;           // angles theta_1..theta_{n-1} on [0, pi]
    const int az_count = 2 * resolution;     // azimuth on [0, 2 pi)
    const QuadratureRule gl = gauss_legendre(resolution, 0.0, M_PI);

    std::vector<int> idx(static_cast<std::size_t>(polar_count), 0);
    std::vector<double> az_cos(static_cast<std::size_t>(az_count));
    std::vector<double> az_sin(static_cast<std::size_t>(az_count));
    for (int j = 0; j < az_count; ++j) {
        const double phi = 2.0 * M_PI * (j + 0.5) / az_count;
        az_cos[static_cast<std::size_t>(j)] = std::cos(phi);
        az_sin[static_cast<std::size_t>(j)] = std::sin(phi);
    }
    const double az_weight = 2.0 * M_PI / az_count;

    std::size_t total = static_cast<std::size_t>(az_count);
    for (int k = 0; k < polar_count; ++k) total *= static_cast<std::size_t>(resolution);
    s.coords_.reserve(total * static_cast<std::size_t>(n + 1));
    s.weights_.reserve(total);

    Vec point(static_cast<std::size_t>(n + 1));
    for (;;) {
        // polar part of the point and weight
        double sin_prod = 1.0;
        double w_polar = 1.0;
        for (int k = 0; k < polar_count; ++k) {
            const double theta = gl.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
            const double wgl = gl.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
            point[static_cast<std::size_t>(k)] = sin_prod * std::cos(theta);
            w_polar *= wgl * std::pow(std::sin(theta), n - 1 - k);
            sin_prod *= std::sin(theta);
        }
        for (int j = 0; j < az_count; ++j) {
            point[static_cast<std::size_t>(n - 1)] = sin_prod * az_cos[static_cast<std::size_t>(j)];
            point[static_cast<std::size_t>(n)] = sin_prod * az_sin[static_cast<std::size_t>(j)];
            s.coords_.insert(s.coords_.end(), point.begin(), point.end());
            s.weights_.push_back(w_polar * az_weight);
        }
        // odometer over the polar indices
        int k = 0;
        for (; k < polar_count; ++k) {
            if (++idx[static_cast<std::size_t>(k)] < resolution) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
        if (k == polar_count) break;
    }
    return s;
}

// --- geodesic sphere (cap boundary) samplings ---------------------------------

// Orthonormal basis of the tangent hyperplane at unit vector x, via a
// Householder reflection taking e_0 to x (columns 1..n of the reflector).
inline std::vector<Vec> tangent_frame(std::span<const double> x) {
    const int m = static_cast<int>(x.size());
    Vec v(x.begin(), x.end());
    const double sign = v[0] >= 0.0 ? 1.0 : -1.0;
    v[0] += sign;  // v = x + sign*e0; H = I - 2 v v^T/|v|^2 maps -sign*e0 -> x direction
    const double vv = dot(v, v);
    std::vector<Vec> frame;
    frame.reserve(static_cast<std::size_t>(m - 1));
    for (int c = 1; c < m; ++c) {
        Vec col(static_cast<std::size_t>(m), 0.0);
        for (int r = 0; r < m; ++r)
            col[static_cast<std::size_t>(r)] =
                (r == c ? 1.0 : 0.0) - 2.0 * v[static_cast<std::size_t>(r)] * v[static_cast<std::size_t>(c)] / vv;
        // columns of a reflection are orthonormal and orthogonal to column 0 = +-x
        frame.push_back(std::move(col));
    }
    return frame;
}

// Sample of the geodesic sphere \partial B_r(x) with weights for the induced
// measure d\sigma (total omega_{n-1} sin^{n-1} r).
class CapSampling {
public:
    CapSampling(std::span<const double> center, double radius, std::size_t count, std::uint64_t seed)
        : center_(center.begin(), center.end()), radius_(radius), seed_(seed) {
        if (!(radius > 0.0 && radius < M_PI))
            throw std::invalid_argument("CapSampling: radius must lie in (0, pi)");
        if (count == 0) throw std::invalid_argument("CapSampling: count must be >= 1");
        if (!is_unit(center)) throw std::invalid_argument("CapSampling: center must be a unit vector");
        const int ambient = static_cast<int>(center.size());
        n_ = ambient - 1;
        frame_ = tangent_frame(center_);
        const auto& frame = frame_;
        const double c = std::cos(radius);
        const double s = std::sin(radius);
        weight_each_ = sphere_volume_constant(n_ - 1) * std::pow(s, n_ - 1) / static_cast<double>(count);
        coords_.reserve(count * static_cast<std::size_t>(ambient));
        Rng rng(seed);
        Vec p(static_cast<std::size_t>(ambient));
        for (std::size_t i = 0; i < count; ++i) {
            Vec dir = rng.unit_vector(n_);  // uniform on the unit sphere of the tangent plane
            for (int r = 0; r < ambient; ++r) {
                double t = 0.0;
                for (int k = 0; k < n_; ++k)
                    t += dir[static_cast<std::size_t>(k)] * frame[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)];
                p[static_cast<std::size_t>(r)] = c * center_[static_cast<std::size_t>(r)] + s * t;
            }
            coords_.insert(coords_.end(), p.begin(), p.end());
        }
        count_ = count;
    }

    int dimension() const { return n_; }
    std::size_t size() const { return count_; }
    double radius() const { return radius_; }
    std::span<const double> center() const { return center_; }
    std::uint64_t seed() const { return seed_; }
    double weight_each() const { return weight_each_; }
    double total_weight() const { return weight_each_ * static_cast<double>(count_); }
    const std::vector<Vec>& frame() const { return frame_; }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(n_ + 1),
                static_cast<std::size_t>(n_ + 1)};
    }

private:
    Vec center_;
    double radius_ = 0.0;
    std::uint64_t seed_ = 0;
    int n_ = 0;
    std::size_t count_ = 0;
    double weight_each_ = 0.0;
    std::vector<Vec> frame_;
    std::vector<double> coords_;
};

inline CapSampling geodesic_sphere_sampling(std::span<const double> x, double r, std::size_t count,
                                            std::uint64_t seed) {
    return CapSampling(x, r, count, seed);
}

// Seed for the cap at (center, radius) derived from a base seed; caps of a
// profile never share a stream.
inline std::uint64_t derive_cap_seed(std::uint64_t base, std::span<const double> center, double radius) {
    SeedChain chain(base);
    chain.mix("cap").mix(center).mix(radius);
    return chain.value();
}

}  // namespace confsphere
