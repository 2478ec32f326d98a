#pragma once

// Ambient-space vector helpers for points on S^n embedded in R^{n+1},
// plus a deterministic random number source used by every stochastic
// operation. Randomness never enters through hidden global state: callers
// pass explicit seeds and derived streams are reproducible bit-for-bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace confsphere {

// Maximum ambient dimension (n+1) supported by the stack buffers used in
// finite-difference stencils. Sphere dimension n <= kMaxAmbient - 1.
inline constexpr int kMaxAmbient = 16;

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void normalize_in_place(std::span<double> a) {
    const double r = norm(a);
    if (r == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
    for (double& x : a) x /= r;
}

inline Vec normalized(std::span<const double> a) {
    Vec v(a.begin(), a.end());
    normalize_in_place(v);
    return v;
}

inline bool is_unit(std::span<const double> a, double tol = 1e-9) {
    return std::abs(norm(a) - 1.0) <= tol;
}

// i-th standard basis vector of R^{dim}.
inline Vec basis_vector(int dim, int i) {
    Vec v(static_cast<std::size_t>(dim), 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    return v;
}

inline double clamp_unit(double t) { return t < -1.0 ? -1.0 : (t > 1.0 ? 1.0 : t); }

// Compensated accumulator; keeps weight sums exact to a few ulps even over
// millions of terms.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// --- deterministic random streams -----------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed derivation: combines a base seed with arbitrary
// tag values (indices, bit patterns of doubles) so that independent
// sub-streams (one per cap, per radius, per check) never collide and are
// reproducible across runs.
class SeedChain {
public:
    explicit SeedChain(std::uint64_t base) : state_(base ^ 0xa0761d6478bd642fULL) {}

    SeedChain& mix(std::uint64_t v) {
        state_ ^= v + 0x9e3779b97f4a7c15ULL + (state_ << 6) + (state_ >> 2);
        splitmix64(state_);
        return *this;
    }
    SeedChain& mix(double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        return mix(bits);
    }
    SeedChain& mix(std::string_view s) {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        return mix(h);
    }
    SeedChain& mix(std::span<const double> v) {
        for (double x : v) mix(x);
        return *this;
    }

    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_;
};

// xoshiro-free minimal generator: splitmix64-seeded 64-bit stream with
// hand-rolled uniform and Box-Muller normal draws. std::normal_distribution
// is implementation-defined; this one is reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x853c49e6748fea9bULL) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; caches the spare draw
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // uniform point on the unit sphere of R^{dim} (normalized Gaussian draws)
    Vec unit_vector(int dim) {
        Vec v(static_cast<std::size_t>(dim));
        double r2 = 0.0;
        do {
            r2 = 0.0;
            for (double& x : v) {
                x = normal();
                r2 += x * x;
            }
        } while (r2 == 0.0);
        const double inv = 1.0 / std::sqrt(r2);
        for (double& x : v) x *= inv;
        return v;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace confsphere
