#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "confsphere/geometry.hpp"

using namespace confsphere;

TEST_CASE("sphere volume constants match closed-form geometry") {
    // oracle: circumference of S^1, area of S^2, volume of S^3 are classic
    CHECK(sphere_volume_constant(1) == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
    CHECK(sphere_volume_constant(2) == doctest::Approx(4.0 * M_PI).epsilon(1e-14));
    CHECK(sphere_volume_constant(3) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-14));
    CHECK(sphere_volume_constant(4) == doctest::Approx(8.0 * M_PI * M_PI / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(sphere_volume_constant(0), std::invalid_argument);
}

TEST_CASE("geodesic distance on axis pairs") {
    const Vec e0 = basis_vector(4, 0);
    const Vec e1 = basis_vector(4, 1);
    Vec me0 = e0;
    me0[0] = -1.0;
    CHECK(geodesic_distance(e0, e0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(geodesic_distance(e0, me0) == doctest::Approx(M_PI).epsilon(1e-14));
    CHECK(geodesic_distance(e0, e1) == doctest::Approx(0.5 * M_PI).epsilon(1e-14));
    Vec bad = e0;
    bad[0] = 2.0;
    CHECK_THROWS_AS(geodesic_distance(bad, e1), std::invalid_argument);
}

TEST_CASE("sin power integrals agree with antiderivatives") {
    // oracle: int sin^2 = (r - sin r cos r)/2, int sin^3 = cos^3 r/3 - cos r + 2/3
    for (double r : {0.3, 0.7, 1.2, 1.5}) {
        CHECK(sin_power_integral(2, r) ==
              doctest::Approx(0.5 * (r - std::sin(r) * std::cos(r))).epsilon(1e-12));
        const double c = std::cos(r);
        CHECK(sin_power_integral(3, r) == doctest::Approx(c * c * c / 3.0 - c + 2.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("ball volume endpoints and closed form on S^3") {
    CHECK(ball_volume(3, 0.0) == 0.0);
    CHECK(ball_volume(3, M_PI) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-12));
    CHECK(ball_volume(3, 0.5 * M_PI) == doctest::Approx(M_PI * M_PI).epsilon(1e-12));
    // strictly increasing
    double prev = 0.0;
    for (int k = 1; k <= 20; ++k) {
        const double v = ball_volume(3, k * M_PI / 20.0);
        CHECK(v > prev);
        prev = v;
    }
    // full sphere within 1e-10 of omega_n for n = 2, 3, 4
    for (int n : {2, 3, 4})
        CHECK(ball_volume(n, M_PI) == doctest::Approx(sphere_volume_constant(n)).epsilon(1e-10));
}

TEST_CASE("monte carlo sampling invariants") {
    SUBCASE("small sample, forced weights") {
        auto s = uniform_sphere_sampling(3, 4, 7);
        CHECK(s.size() == 4);
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(std::abs(norm(s.point(i)) - 1.0) < 1e-12);
            CHECK(s.weight(i) == doctest::Approx(2.0 * M_PI * M_PI / 4.0).epsilon(1e-14));
        }
    }
    SUBCASE("weight sum is exactly omega_n") {
        auto s = uniform_sphere_sampling(2, 100000, 1);
        CHECK(s.total_weight() == doctest::Approx(4.0 * M_PI).epsilon(1e-13));
    }
    SUBCASE("coordinate mean is near zero, statistical oracle") {
        auto s = uniform_sphere_sampling(3, 100000, 1);
        double mean = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) mean += s.point(i)[0];
        mean /= static_cast<double>(s.size());
        // per-point variance of a coordinate is 1/(n+1) = 1/4
        const double sigma = std::sqrt(0.25 / 100000.0);
        CHECK(std::abs(mean) < 3.0 * sigma);
    }
    CHECK_THROWS_AS(uniform_sphere_sampling(1, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(uniform_sphere_sampling(3, 0, 0), std::invalid_argument);
}

TEST_CASE("product rule sampling is exact on constants and odd coordinates") {
    for (int n : {2, 3, 4}) {
        const int res = n == 4 ? 16 : 24;
        auto s = product_rule_sampling(n, res);
        CHECK(std::abs(s.total_weight() - sphere_volume_constant(n)) < 1e-12);
        for (int axis = 0; axis <= n; ++axis) {
            double odd = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i)
                odd += s.weight(i) * s.point(i)[static_cast<std::size_t>(axis)];
            CHECK(std::abs(odd) < 1e-10);
        }
    }
    CHECK_THROWS_AS(product_rule_sampling(5, 16), std::invalid_argument);
}

TEST_CASE("geodesic sphere sampling lies at the right distance with the right measure") {
    const Vec e0 = basis_vector(4, 0);
    SUBCASE("equatorial cap is orthogonal to the center") {
        auto cap = geodesic_sphere_sampling(e0, 0.5 * M_PI, 3, 11);
        for (std::size_t i = 0; i < cap.size(); ++i) CHECK(std::abs(cap.point(i)[0]) < 1e-12);
    }
    SUBCASE("distance invariant") {
        auto cap = geodesic_sphere_sampling(e0, 0.7, 200, 3);
        for (std::size_t i = 0; i < cap.size(); ++i) {
            CHECK(std::abs(norm(cap.point(i)) - 1.0) < 1e-12);
            CHECK(std::abs(geodesic_distance(cap.point(i), e0) - 0.7) < 1e-10);
        }
    }
    SUBCASE("total weight equals omega_{n-1} sin^{n-1} r") {
        auto cap = geodesic_sphere_sampling(e0, 0.7, 10000, 3);
        const double expected = 4.0 * M_PI * std::sin(0.7) * std::sin(0.7);
        CHECK(cap.total_weight() == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("the recorded frame spans the tangent plane at the center") {
        auto cap = geodesic_sphere_sampling(e0, 0.7, 10, 3);
        REQUIRE(cap.frame().size() == 3);
        for (const auto& v : cap.frame()) CHECK(std::abs(dot(v, e0)) < 1e-12);
    }
    CHECK_THROWS_AS(geodesic_sphere_sampling(e0, 0.0, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(geodesic_sphere_sampling(e0, M_PI, 10, 0), std::invalid_argument);
}

TEST_CASE("tangent frame is orthonormal and tangent") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Vec x = rng.unit_vector(5);
        auto frame = tangent_frame(x);
        CHECK(frame.size() == 4);
        for (std::size_t a = 0; a < frame.size(); ++a) {
            CHECK(std::abs(dot(frame[a], x)) < 1e-12);
            for (std::size_t b = 0; b <= a; ++b) {
                const double expected = a == b ? 1.0 : 0.0;
                CHECK(std::abs(dot(frame[a], frame[b]) - expected) < 1e-12);
            }
        }
    }
}

TEST_CASE("radial grid contract") {
    CHECK_THROWS_AS(RadialGrid({0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(RadialGrid({0.0, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(RadialGrid({0.5, 1.6}), std::invalid_argument);
    auto g = RadialGrid::uniform(50, 0.05, 1.5);
    CHECK(g.size() == 50);
    CHECK(g[0] == doctest::Approx(0.05));
    CHECK(g[49] == doctest::Approx(1.5));
}

TEST_CASE("sampling descriptor and csv export") {
    auto s = uniform_sphere_sampling(2, 10, 42);
    auto j = s.descriptor();
    CHECK(j["dimension"] == 2);
    CHECK(j["kind"] == "monte-carlo");
    CHECK(j["count"] == 10);
    CHECK(j["seed"] == 42);

    auto pr = product_rule_sampling(2, 8);
    auto jp = pr.descriptor();
    CHECK(jp["kind"] == "product-rule");
    CHECK(jp["resolution"] == 8);

    const std::string path = (std::filesystem::temp_directory_path() / "confsphere_pts.csv").string();
    s.write_csv(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x0,x1,x2,weight");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 10);
    std::filesystem::remove(path);
}

TEST_CASE("derived cap seeds separate streams") {
    const Vec e0 = basis_vector(4, 0);
    const Vec e1 = basis_vector(4, 1);
    CHECK(derive_cap_seed(1, e0, 0.3) != derive_cap_seed(1, e0, 0.300001));
    CHECK(derive_cap_seed(1, e0, 0.3) != derive_cap_seed(1, e1, 0.3));
    CHECK(derive_cap_seed(1, e0, 0.3) != derive_cap_seed(2, e0, 0.3));
    CHECK(derive_cap_seed(7, e1, 0.5) == derive_cap_seed(7, e1, 0.5));
}
