#include <doctest.h>

#include <cmath>

#include "confsphere/scenarios.hpp"

using namespace confsphere;

namespace {
const double kOmega3 = 2.0 * M_PI * M_PI;
const Vec kPole{-1.0, 0.0, 0.0, 0.0};
}

TEST_CASE("round scenario ground truth") {
    auto probes = sample_probe_points(3, 10, 3);
    auto cf = round_scenario(3, std::log(2.0));
    for (const auto& p : probes) CHECK(scalar_curvature(cf, p) == doctest::Approx(1.5).epsilon(1e-7));
    auto s = product_rule_sampling(3, 12);
    CHECK(volume(round_scenario(3, -1.0), s) == doctest::Approx(std::exp(-3.0) * kOmega3).epsilon(1e-10));
}

TEST_CASE("bubble scenario is a curvature and volume invariant family") {
    SUBCASE("lambda = 1 is the identity map") {
        auto cf = bubble_scenario(3, 1.0, kPole);
        for (const auto& p : sample_probe_points(3, 20, 5))
            CHECK(std::abs(cf.f.value(p)) < 1e-14);
    }
    SUBCASE("curvature invariance (Mobius oracle)") {
        for (double lambda : {2.0, 4.0}) {
            auto cf = bubble_scenario(3, lambda, kPole);
            for (const auto& p : sample_probe_points(3, 100, 7)) {
                CHECK(std::abs(scalar_curvature(cf, p) - 6.0) < 6.0 * 1e-3);
            }
        }
    }
    SUBCASE("volume invariance (change-of-variables oracle)") {
        auto s = product_rule_sampling(3, 32);
        for (double lambda : {2.0, 4.0})
            CHECK(volume(bubble_scenario(3, lambda, kPole), s) == doctest::Approx(kOmega3).epsilon(0.01));
    }
    SUBCASE("factor range and concentration point") {
        auto cf = bubble_scenario(3, 4.0, kPole);
        const Vec conc = bubble_concentration_point(kPole);
        CHECK(conc[0] == doctest::Approx(1.0));
        CHECK(std::exp(cf.f.value(conc)) == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(std::exp(cf.f.value(kPole)) == doctest::Approx(0.25).epsilon(1e-12));
    }
    CHECK_THROWS_AS(bubble_scenario(3, 0.5, kPole), std::invalid_argument);
}

TEST_CASE("perturbation scenario is exactly linear in the amplitude") {
    const int n = 3;
    auto fam = perturbation_scenario(n, constant_field(n, 0.0), coordinate_field(n, 0),
                                     {0.3, 0.15, 0.075});
    auto s = product_rule_sampling(n, 16);
    // oracle: ||f_j - f_inf||_L2 = a_j ||x0||_L2 with ||x0||_L2 = sqrt(omega_3/4)
    const double x0_l2 = std::sqrt(kOmega3 / 4.0);
    for (std::size_t j = 0; j < fam.factors.size(); ++j) {
        auto diff = subtract(fam.factors[j].f, fam.limit.f);
        const double a = 0.3 * std::pow(0.5, static_cast<double>(j));
        CHECK(lp_norm(diff, s, 2.0) == doctest::Approx(a * x0_l2).epsilon(1e-9));
    }
    // amplitude 0.3 keeps the head of the family at nonnegative curvature
    auto probes = sample_probe_points(n, 200, 11);
    auto rep = curvature_report(fam.factors[0], probes);
    CHECK(rep.nonnegative);
    CHECK_THROWS_AS(
        perturbation_scenario(n, constant_field(n, 0.0), coordinate_field(n, 0), {0.1, 0.2}),
        std::invalid_argument);
}

TEST_CASE("spike scenario support and sup") {
    const int n = 3;
    const Vec center = basis_vector(n + 1, 0);
    std::vector<double> heights{1.0, 1.0, 1.0};
    std::vector<double> widths{0.4, 0.2, 0.1};
    auto fam = spike_scenario(n, constant_field(n, 0.0), center, heights, widths);
    // sup of f_j - f_inf is h_j at the center (chi(0) = 1)
    for (std::size_t j = 0; j < fam.factors.size(); ++j) {
        CHECK(fam.factors[j].f.value(center) == doctest::Approx(heights[j]).epsilon(1e-12));
        // support is exactly the ball of radius w_j
        auto cap = geodesic_sphere_sampling(center, widths[j] * 1.01, 50, 3);
        for (std::size_t i = 0; i < cap.size(); ++i)
            CHECK(fam.factors[j].f.value(cap.point(i)) == 0.0);
        auto inside = geodesic_sphere_sampling(center, widths[j] * 0.99, 50, 3);
        for (std::size_t i = 0; i < inside.size(); ++i)
            CHECK(fam.factors[j].f.value(inside.point(i)) > 0.0);
    }
    CHECK_THROWS_AS(spike_scenario(n, constant_field(n, 0.0), center, {1.0, 1.0}, {0.2, 0.2}),
                    std::invalid_argument);
}

TEST_CASE("scenario specs build and round-trip through JSON") {
    ScenarioSpec spec;
    spec.name = "spike";
    spec.n = 3;
    spec.J = 4;
    auto inst = build_scenario(spec);
    CHECK(inst.factors.size() == 4);
    CHECK(inst.limit.has_value());
    CHECK(inst.focus == basis_vector(4, 0));

    nlohmann::ordered_json j;
    to_json(j, inst.spec);
    auto back = scenario_spec_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.name == "spike");
    CHECK(back.J == 4);
    CHECK(back.width0 == doctest::Approx(0.4));

    ScenarioSpec bubble;
    bubble.name = "bubble";
    bubble.lambda = 2.0;
    auto binst = build_scenario(bubble);
    CHECK(binst.factors.size() == 1);
    CHECK_FALSE(binst.limit.has_value());
    CHECK(binst.focus[0] == doctest::Approx(1.0));  // concentration opposite the default pole

    ScenarioSpec bad;
    bad.name = "wiggle";
    CHECK_THROWS_AS(build_scenario(bad), std::invalid_argument);
}

TEST_CASE("perturbation default amplitudes decay geometrically") {
    ScenarioSpec spec;
    spec.name = "perturbation";
    spec.J = 5;
    auto inst = build_scenario(spec);
    REQUIRE(inst.spec.amplitudes.has_value());
    const auto& a = *inst.spec.amplitudes;
    CHECK(a.size() == 5);
    CHECK(a[0] == doctest::Approx(0.3));
    CHECK(a[4] == doctest::Approx(0.3 * std::pow(0.5, 4)));
}
