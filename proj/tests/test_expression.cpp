#include <doctest.h>

#include <cmath>

#include "confsphere/expression.hpp"

using namespace confsphere;

TEST_CASE("grammar covers constants, coordinates, and arithmetic") {
    const int n = 3;
    Rng rng(2);
    auto f = parse_field("1 + 0.5*x0 - x1*x1/2", n);
    for (int i = 0; i < 20; ++i) {
        Vec p = rng.unit_vector(n + 1);
        CHECK(f.value(p) == doctest::Approx(1.0 + 0.5 * p[0] - 0.5 * p[1] * p[1]).epsilon(1e-14));
    }
}

TEST_CASE("functions and composition") {
    const int n = 3;
    Rng rng(3);
    auto f = parse_field("exp(0.3*x2) * pow(2 + x0, 1.5)", n);
    auto g = parse_field("log(exp(x1))", n);
    auto d = parse_field("dist(1, 0, 0, 0)", n);
    auto b = parse_field("bump(dist(0, 1, 0, 0) / 0.8)", n);
    const Vec e1 = basis_vector(n + 1, 1);
    CHECK(b.value(e1) == doctest::Approx(1.0).epsilon(1e-14));  // chi(0) = 1
    for (int i = 0; i < 20; ++i) {
        Vec p = rng.unit_vector(n + 1);
        CHECK(f.value(p) == doctest::Approx(std::exp(0.3 * p[2]) * std::pow(2.0 + p[0], 1.5)).epsilon(1e-13));
        CHECK(g.value(p) == doctest::Approx(p[1]).epsilon(1e-13));
        CHECK(d.value(p) == doctest::Approx(std::acos(clamp_unit(p[0]))).epsilon(1e-13));
    }
}

TEST_CASE("parsed fields carry usable gradients") {
    const int n = 3;
    auto f = parse_field("exp(0.25*x0) + bump(dist(0,0,1,0)/1.2) * 0.7", n);
    REQUIRE(f.has_gradient());
    Rng rng(5);
    double buf[kMaxAmbient];
    for (int i = 0; i < 25; ++i) {
        Vec p = rng.unit_vector(n + 1);
        auto fd = intrinsic_gradient(f, p, 1e-4);
        std::span<double> g(buf, p.size());
        f.gradient(p, g);
        for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(g[k] - fd.components[k]) < 5e-5);
    }
}

TEST_CASE("parse errors are loud") {
    CHECK_THROWS_AS(parse_field("1 +", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_field("x9", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_field("frob(x0)", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_field("dist(1, 0)", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_field("pow(x0)", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_field("(x0", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_field("1 2", 3), std::invalid_argument);
}
