#include <doctest.h>

#include <cmath>

#include "confsphere/conformal.hpp"
#include "confsphere/scenarios.hpp"

using namespace confsphere;

namespace {
const double kOmega3 = 2.0 * M_PI * M_PI;
}

TEST_CASE("scalar curvature of round and rescaled round metrics") {
    auto probes = sample_probe_points(3, 40, 7);
    auto cf0 = round_scenario(3, 0.0);
    auto cfc = round_scenario(3, std::log(2.0));
    for (const auto& p : probes) {
        CHECK(scalar_curvature(cf0, p) == doctest::Approx(6.0).epsilon(1e-7));
        CHECK(scalar_curvature(cfc, p) == doctest::Approx(1.5).epsilon(1e-7));
    }
    auto rep = curvature_report(cf0, probes);
    CHECK(rep.nonnegative);
    CHECK(rep.min_value == doctest::Approx(6.0).epsilon(1e-7));
}

TEST_CASE("conformal covariance under constant shifts") {
    auto probes = sample_probe_points(3, 20, 11);
    auto cf = make_conformal_factor(3, scale(coordinate_field(3, 0), 0.3));
    CHECK(conformal_covariance_defect(cf, 0.7, probes) < 1e-8);
}

TEST_CASE("volumes") {
    auto s = product_rule_sampling(3, 20);
    CHECK(volume(round_scenario(3, 0.0), s) == doctest::Approx(kOmega3).epsilon(1e-12));
    const double c = -0.4;
    CHECK(volume(round_scenario(3, c), s) == doctest::Approx(std::exp(3.0 * c) * kOmega3).epsilon(1e-12));
}

TEST_CASE("region volumes against closed forms") {
    auto s = product_rule_sampling(3, 24);
    auto cf = round_scenario(3, 0.0);
    SUBCASE("full sphere indicator recovers the volume") {
        CHECK(region_volume(cf, constant_field(3, 1.0), s) == doctest::Approx(volume(cf, s)).epsilon(1e-13));
    }
    SUBCASE("empty region") {
        CHECK(region_volume(cf, constant_field(3, 0.0), s) == 0.0);
    }
    SUBCASE("hemisphere has volume pi^2 for the round metric") {
        auto hemi = cap_indicator_field(3, basis_vector(4, 0), 0.5 * M_PI);
        CHECK(region_volume(cf, hemi, s) == doctest::Approx(M_PI * M_PI).epsilon(1e-10));
    }
    SUBCASE("non-indicator field is rejected") {
        CHECK_THROWS_AS(region_volume(cf, constant_field(3, 0.5), s), std::invalid_argument);
    }
}

TEST_CASE("total scalar curvature identity") {
    auto s = product_rule_sampling(3, 16);
    SUBCASE("round") {
        auto rep = total_scalar_curvature(round_scenario(3, 0.0), s);
        CHECK(rep.lhs == doctest::Approx(12.0 * M_PI * M_PI).epsilon(1e-8));
        CHECK(rep.rhs == doctest::Approx(12.0 * M_PI * M_PI).epsilon(1e-8));
    }
    SUBCASE("constant shift") {
        const double c = 0.3;
        auto rep = total_scalar_curvature(round_scenario(3, c), s);
        const double expected = 6.0 * std::exp(c) * kOmega3;
        CHECK(rep.lhs == doctest::Approx(expected).epsilon(1e-7));
        CHECK(rep.rhs == doctest::Approx(expected).epsilon(1e-7));
    }
    SUBCASE("perturbation: the identity itself is the oracle") {
        auto cf = make_conformal_factor(3, scale(coordinate_field(3, 0), 0.3));
        auto rep = total_scalar_curvature(cf, s);
        CHECK(rep.relative_discrepancy < 0.01);
    }
}

TEST_CASE("weak PSC residual") {
    auto s = product_rule_sampling(3, 16);
    auto one = constant_field(3, 1.0);
    SUBCASE("constant test function") {
        const double r = weak_psc_residual(one, constant_field(3, 1.0), s);
        CHECK(r == doctest::Approx(0.75 * kOmega3).epsilon(1e-10));
    }
    SUBCASE("affine test function: odd part integrates away") {
        auto phi = add(constant_field(3, 1.0), scale(coordinate_field(3, 0), 0.5));
        const double r = weak_psc_residual(one, phi, s);
        CHECK(r == doctest::Approx(0.75 * kOmega3).epsilon(1e-9));
    }
    SUBCASE("negative test function is rejected") {
        auto phi = scale(coordinate_field(3, 0), 1.0);  // changes sign
        CHECK_THROWS_AS(weak_psc_residual(one, phi, s), std::invalid_argument);
    }
    SUBCASE("bubble factor against the bump family") {
        auto cf = bubble_scenario(3, 2.0, Vec{-1.0, 0.0, 0.0, 0.0});
        const double radii[] = {0.7, 1.2};
        for (const auto& phi : weak_psc_test_family(3, radii))
            CHECK(weak_psc_residual(cf.u, phi, s) > -1e-3);
    }
}

TEST_CASE("gradient L2 bound") {
    auto s = product_rule_sampling(3, 16);
    SUBCASE("round metric has zero gradient mass") {
        auto chk = gradient_l2_bound_check(round_scenario(3, 0.0), s);
        CHECK(chk.lhs == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(chk.rhs == doctest::Approx(6.0 * M_PI * M_PI).epsilon(1e-12));
        CHECK(chk.holds);
    }
    SUBCASE("linear perturbation against the symmetry oracle") {
        // |grad x0|^2 = 1 - x0^2 and int x0^2 = omega_3/4, so
        // int |grad(0.3 x0)|^2 = 0.09 * (3/4) omega_3
        auto cf = make_conformal_factor(3, scale(coordinate_field(3, 0), 0.3));
        auto chk = gradient_l2_bound_check(cf, s);
        CHECK(chk.lhs == doctest::Approx(0.09 * 0.75 * kOmega3).epsilon(1e-6));
        CHECK(chk.holds);
        CHECK(chk.slack > 0.0);
    }
}

TEST_CASE("weighted gradient bound") {
    auto s = product_rule_sampling(3, 16);
    auto cf = make_conformal_factor(3, scale(coordinate_field(3, 0), 0.3));
    const double V = 1.2 * kOmega3;
    SUBCASE("p = 0 reduces to the plain bound") {
        auto w = weighted_gradient_bound_check(cf, 0.0, V, s);
        auto g = gradient_l2_bound_check(cf, s);
        CHECK(w.rhs == doctest::Approx(g.rhs).epsilon(1e-12));
        CHECK(w.lhs == doctest::Approx(g.lhs).epsilon(1e-12));
    }
    SUBCASE("interior exponent holds with slack") {
        auto w = weighted_gradient_bound_check(cf, 0.25, V, s);
        CHECK(w.holds);
        CHECK(w.slack > 0.0);
    }
    SUBCASE("four-sphere bubble at p = 0.5") {
        auto s4 = product_rule_sampling(4, 12);
        auto cf4 = bubble_scenario(4, 2.0, Vec{-1.0, 0.0, 0.0, 0.0, 0.0});
        const double V4 = 1.05 * volume(cf4, s4);
        auto w = weighted_gradient_bound_check(cf4, 0.5, V4, s4);
        CHECK(w.holds);
        CHECK(w.slack > 0.0);
    }
    CHECK_THROWS_AS(weighted_gradient_bound_check(cf, 0.5, V, s), std::invalid_argument);
    CHECK_THROWS_AS(weighted_gradient_bound_check(cf, -0.1, V, s), std::invalid_argument);
}

TEST_CASE("W^{1,q} gradient bound routes") {
    auto s = product_rule_sampling(3, 16);
    auto cf = make_conformal_factor(3, scale(coordinate_field(3, 0), 0.3));
    const double V = 1.2 * kOmega3;
    SUBCASE("q = 1 on the round metric") {
        auto rep = w1q_bound_check(round_scenario(3, 0.0), 1.0, V, s);
        CHECK(rep.route == "direct");
        CHECK(rep.check.lhs == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rep.check.holds);
    }
    SUBCASE("direct route below n/(n-1)") {
        auto rep = w1q_bound_check(cf, 1.4, V, s);
        CHECK(rep.route == "direct");
        CHECK(rep.check.holds);
        CHECK(rep.check.slack > 0.0);
    }
    SUBCASE("interpolated route: theta solves the exponent relation") {
        auto rep = w1q_bound_check(cf, 1.6, V, s);
        CHECK(rep.route == "interpolated");
        // q = 2n/(n+(n-2)(1-theta)) with n=3, q=1.6 gives theta = 1/4
        CHECK(rep.theta == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(rep.check.holds);
        CHECK(rep.check.slack > 0.0);
    }
    SUBCASE("q at or above 4n/(3n-2) is out of contract") {
        CHECK_THROWS_AS(w1q_bound_check(cf, 12.0 / 7.0, V, s), std::invalid_argument);
        CHECK_THROWS_AS(w1q_bound_check(cf, 0.9, V, s), std::invalid_argument);
    }
}

TEST_CASE("uniform integrability audit") {
    auto s = product_rule_sampling(3, 20);
    auto cf = round_scenario(3, 0.0);
    SUBCASE("round factor passes at equality with Lambda = omega^(1-alpha)") {
        HypothesisBounds b;
        b.V = 2.0 * kOmega3;
        b.alpha = 0.5;
        b.Lambda = std::pow(kOmega3, 1.0 - b.alpha);
        CapProbe full{basis_vector(4, 0), M_PI};
        auto rep = uniform_integrability_audit(cf, b, std::vector<CapProbe>{full}, s);
        CHECK(rep.worst_ratio == doctest::Approx(b.Lambda).epsilon(1e-9));
        CHECK(rep.holds);
    }
    SUBCASE("empty probe list passes vacuously") {
        HypothesisBounds b;
        auto rep = uniform_integrability_audit(cf, b, std::vector<CapProbe>{}, s);
        CHECK(rep.holds);
        CHECK(rep.entries.empty());
    }
    SUBCASE("large bubbles violate a fixed budget on small caps") {
        HypothesisBounds b;
        b.alpha = 0.5;
        b.Lambda = 2.0 * std::pow(kOmega3, 0.5);
        Vec pole{-1.0, 0.0, 0.0, 0.0};
        std::vector<CapProbe> probes;
        for (double r : {0.2, 0.5, 1.0}) probes.push_back({bubble_concentration_point(pole), r});
        auto rep16 = uniform_integrability_audit(bubble_scenario(3, 16.0, pole), b, probes, s);
        CHECK_FALSE(rep16.holds);
        auto rep1 = uniform_integrability_audit(bubble_scenario(3, 1.0, pole), b, probes, s);
        CHECK(rep1.holds);
        // the cap where the violation bites shrinks as the bubble sharpens
        auto worst_radius = [](const UniformIntegrabilityReport& rep) {
            double r = 0.0;
            for (const auto& e : rep.entries)
                if (e.ratio == rep.worst_ratio) r = e.probe.radius;
            return r;
        };
        auto rep64 = uniform_integrability_audit(bubble_scenario(3, 64.0, pole), b, probes, s);
        CHECK(worst_radius(rep64) <= worst_radius(rep16));
        CHECK(rep64.worst_ratio > rep16.worst_ratio);
    }
}

TEST_CASE("identity and covariance hold on randomized composite factors") {
    // property-style: the total-scalar identity and conformal covariance are
    // oracle checks valid for any smooth factor, so random small fields from
    // the combinator stack must satisfy them
    auto s = product_rule_sampling(3, 16);
    auto probes = sample_probe_points(3, 15, 57);
    for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
        Rng rng(seed);
        auto f = add(scale(coordinate_field(3, 0), 0.2 * rng.uniform01()),
                     add(scale(multiply(coordinate_field(3, 1), coordinate_field(3, 2)),
                               0.3 * rng.uniform01()),
                         scale(exp_field(scale(coordinate_field(3, 3), 0.4)),
                               0.1 * rng.uniform01())));
        auto cf = make_conformal_factor(3, std::move(f));
        CHECK(total_scalar_curvature(cf, s).relative_discrepancy < 0.01);
        CHECK(conformal_covariance_defect(cf, -0.4, probes) < 1e-7);
    }
}

TEST_CASE("superharmonicity defect of conformal factors with Sc >= 0") {
    // Sc_g >= 0 is equivalent to laplace u <= (n(n-2)/4) u for u = e^{(n-2)f/2}
    auto probes = sample_probe_points(3, 30, 13);
    auto cf = bubble_scenario(3, 2.0, Vec{-1.0, 0.0, 0.0, 0.0});
    CHECK(max_superharmonic_defect(cf.u, 0.75, probes) < 1e-5);
}
