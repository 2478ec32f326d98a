#include <doctest.h>

#include <cmath>

#include "confsphere/scenarios.hpp"
#include "confsphere/sequence.hpp"

using namespace confsphere;

namespace {

const double kOmega3 = 2.0 * M_PI * M_PI;

FactorSequence spike_sequence(int J, std::shared_ptr<const SphereSampling> sampling) {
    ScenarioSpec spec;
    spec.name = "spike";
    spec.n = 3;
    spec.J = J;
    auto inst = build_scenario(spec);
    HypothesisBounds bounds;
    bounds.V = 50.0;
    bounds.alpha = 0.5;
    bounds.Lambda = 4.0 * std::sqrt(kOmega3);
    return make_factor_sequence(inst.factors, *inst.limit, bounds, std::move(sampling));
}

}  // namespace

TEST_CASE("cj bound closed form for linear differences") {
    auto s = product_rule_sampling(3, 24);
    auto f_inf = constant_field(3, 0.0);
    SUBCASE("identical fields give zero") {
        CHECK(cj_bound(f_inf, f_inf, s) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("f_j = a x0 against zero") {
        // 2 a ||x0||_{L2} * (a^2 int (1 - x0^2))^{1/2}
        //   = 2 a^2 sqrt(omega3/4) sqrt(3 omega3 / 4) = a^2 omega3 sqrt(3) / 2
        for (double a : {0.3, 0.15}) {
            auto fj = scale(coordinate_field(3, 0), a);
            const double expected = a * a * kOmega3 * std::sqrt(3.0) / 2.0;
            CHECK(cj_bound(fj, f_inf, s) == doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("level band coarea against the slab closed form") {
    auto s = product_rule_sampling(3, 48);
    auto w = subtract(constant_field(3, 1.0), coordinate_field(3, 0));  // w = 1 - x0
    SUBCASE("constant field contributes nothing") {
        CHECK(level_band_coarea(constant_field(3, 5.0), 4.0, 6.0, s) == 0.0);
        CHECK(level_band_coarea(constant_field(3, 5.0), 0.9, 1.1, s) == 0.0);
    }
    SUBCASE("slab around the equator") {
        // band (0.9, 1.1) <-> x0 in (-0.1, 0.1); with |grad w| = sqrt(1 - x0^2)
        // the integral is 4 pi int_{-0.1}^{0.1} (1 - t^2) dt
        const double expected = 4.0 * M_PI * (0.2 - 2.0 * std::pow(0.1, 3) / 3.0);
        CHECK(level_band_coarea(w, 0.9, 1.1, s) == doctest::Approx(expected).epsilon(0.02));
    }
    CHECK_THROWS_AS(level_band_coarea(w, 1.1, 0.9, s), std::invalid_argument);
}

TEST_CASE("perimeter estimate at the equator recovers 4 pi") {
    // the band must straddle several quadrature cells, so this runs at the
    // resolution the estimator is rated for
    auto s = product_rule_sampling(3, 96);
    auto w = subtract(constant_field(3, 1.0), coordinate_field(3, 0));
    const double perim = perimeter_estimate(w, 1.0, 0.2, s);
    CHECK(perim == doctest::Approx(4.0 * M_PI).epsilon(0.05));
    SUBCASE("level set of a constant far from the level is empty") {
        CHECK(perimeter_estimate(constant_field(3, 2.0), 1.0, 0.1, s) == 0.0);
    }
}

TEST_CASE("tau selection") {
    auto s = product_rule_sampling(3, 32);
    SUBCASE("degenerate budget") {
        auto sel = select_tau(constant_field(3, 0.0), 0.0, s);
        CHECK(sel.degenerate);
        CHECK(sel.tau == 0.0);
        CHECK(sel.within_cap);
    }
    SUBCASE("scan stays inside the bracket and under the cap") {
        auto diff = scale(coordinate_field(3, 0), 0.3);
        auto w = multiply(diff, diff);
        const double Cj = cj_bound(diff, constant_field(3, 0.0), s);
        auto sel = select_tau(w, Cj, s);
        CHECK(sel.scan.size() == 8);
        CHECK(sel.tau >= 0.5 * std::sqrt(Cj));
        CHECK(sel.tau <= std::sqrt(Cj));
        CHECK(sel.perimeter <= sel.cap * 1.05);
        CHECK(sel.within_cap);
    }
    SUBCASE("artificial budget on the slab field finds the flattest level") {
        // level sets of w = 1 - x0 are spheres x0 = 1 - tau with closed-form
        // area 4 pi (1 - (1-tau)^2), smallest at the bracket's low end
        auto s96 = product_rule_sampling(3, 96);
        auto w = subtract(constant_field(3, 1.0), coordinate_field(3, 0));
        auto sel = select_tau(w, 1.0, s96, 1e-3, 4);
        CHECK(sel.tau == doctest::Approx(sel.scan.front().tau));
        CHECK(sel.scan.size() == 4);
        for (std::size_t k = 1; k < sel.scan.size(); ++k)
            CHECK(sel.perimeter <= sel.scan[k].perimeter);
    }
    CHECK_THROWS_AS(select_tau(constant_field(3, 0.0), -1.0, s), std::invalid_argument);
}

TEST_CASE("chebyshev volume bound is exact on the shared sampling") {
    auto s = product_rule_sampling(3, 24);
    SUBCASE("constant field, threshold below") {
        auto rec = chebyshev_volume_bound(constant_field(3, 2.0), 1.0, s);
        CHECK(rec.measured_volume == doctest::Approx(kOmega3).epsilon(1e-12));
        CHECK(rec.bound == doctest::Approx(2.0 * kOmega3).epsilon(1e-12));
        CHECK(rec.holds);
    }
    SUBCASE("constant field, threshold above") {
        auto rec = chebyshev_volume_bound(constant_field(3, 0.5), 1.0, s);
        CHECK(rec.measured_volume == 0.0);
        CHECK(rec.holds);
    }
    SUBCASE("spike mass") {
        auto w = bump_field(3, basis_vector(4, 0), 0.4, 1.0);
        auto rec = chebyshev_volume_bound(w, 0.25, s);
        CHECK(rec.holds);
        CHECK(rec.measured_volume > 0.0);
        CHECK(rec.measured_volume < rec.bound);
    }
    CHECK_THROWS_AS(chebyshev_volume_bound(scale(coordinate_field(3, 0), 1.0), 0.5, s),
                    std::invalid_argument);
}

TEST_CASE("singular set decomposition on the spike family") {
    auto sampling = std::make_shared<SphereSampling>(product_rule_sampling(3, 48));
    auto seq = spike_sequence(5, sampling);
    std::vector<SingularSetReport> reports;
    for (int j = 0; j < 5; ++j)
        reports.push_back(singular_set_decompose(seq, j, DecompositionVariant::f_based));
    for (const auto& rep : reports) {
        CHECK_FALSE(rep.degenerate);
        CHECK(rep.tau >= 0.5 * rep.epsilon);
        CHECK(rep.tau <= rep.epsilon);
        CHECK(rep.perimeter_within_cap);
        CHECK(rep.good_sup <= rep.tau);
        CHECK(rep.bad_volume_round <= rep.chebyshev_bound * (1.0 + 1e-12));
    }
    for (std::size_t j = 1; j < reports.size(); ++j) {
        CHECK(reports[j].cj < reports[j - 1].cj);
        CHECK(reports[j].bad_volume_round <= reports[j - 1].bad_volume_round + 1e-12);
    }
    // the spike center sits inside Z_j while its height squared exceeds tau
    const Vec center = basis_vector(4, 0);
    for (const auto& rep : reports) {
        auto diff = subtract(seq.factors[static_cast<std::size_t>(rep.index)].f, seq.limit.f);
        const double w_center = diff.value(center) * diff.value(center);
        if (w_center > rep.tau) CHECK(rep.bad_volume_round > 0.0);
    }
}

TEST_CASE("singular set decomposition trivial and gated cases") {
    auto sampling = std::make_shared<SphereSampling>(product_rule_sampling(3, 24));
    SUBCASE("identical sequence is degenerate with full good volume") {
        HypothesisBounds bounds;
        auto cf = round_scenario(3, 0.1);
        auto seq = make_factor_sequence({cf}, cf, bounds, sampling);
        auto rep = singular_set_decompose(seq, 0, DecompositionVariant::f_based);
        CHECK(rep.degenerate);
        CHECK(rep.bad_volume_round == 0.0);
        CHECK(rep.good_volume_conformal == doctest::Approx(std::exp(0.3) * kOmega3).epsilon(1e-10));
    }
    SUBCASE("u-based variant requires R0") {
        HypothesisBounds bounds;  // no R0
        auto cf = round_scenario(3, 0.0);
        auto seq = make_factor_sequence({cf}, cf, bounds, sampling);
        CHECK_THROWS_AS(singular_set_decompose(seq, 0, DecompositionVariant::u_based),
                        std::invalid_argument);
    }
    SUBCASE("u-based variant refuses factors beyond the curvature budget") {
        HypothesisBounds bounds;
        bounds.R0 = 1.0;  // far below the actual total of ~12 pi^2
        auto cf = round_scenario(3, 0.0);
        auto seq = make_factor_sequence({cf}, cf, bounds, sampling);
        CHECK_THROWS_AS(singular_set_decompose(seq, 0, DecompositionVariant::u_based),
                        hypothesis_violation);
    }
}

TEST_CASE("u-based and f-based decompositions agree on a perturbation family") {
    auto sampling = std::make_shared<SphereSampling>(product_rule_sampling(3, 32));
    ScenarioSpec spec;
    spec.name = "perturbation";
    spec.J = 4;
    auto inst = build_scenario(spec);
    HypothesisBounds bounds;
    bounds.V = 50.0;
    bounds.R0 = total_scalar_curvature(inst.factors.front(), *sampling).lhs * 1.001;
    auto seq = make_factor_sequence(inst.factors, *inst.limit, bounds, sampling);
    for (int j = 2; j < 4; ++j) {
        auto f_rep = singular_set_decompose(seq, j, DecompositionVariant::f_based);
        auto u_rep = singular_set_decompose(seq, j, DecompositionVariant::u_based);
        CHECK(u_rep.good_volume_conformal ==
              doctest::Approx(f_rep.good_volume_conformal).epsilon(0.02));
    }
}

TEST_CASE("limit weak PSC residuals") {
    auto s = product_rule_sampling(3, 16);
    const double radii[] = {0.7, 1.2};
    auto family = weak_psc_test_family(3, radii);
    auto rep = limit_weak_psc_check(constant_field(3, 1.0), family, s);
    CHECK(rep.holds);
    CHECK(rep.min_residual > 0.0);
    CHECK(rep.residuals.size() == family.size());
}

TEST_CASE("convergence report on a perturbation family") {
    auto sampling = std::make_shared<SphereSampling>(product_rule_sampling(3, 24));
    std::vector<double> amps;
    for (int j = 0; j < 5; ++j) amps.push_back(0.3 * std::pow(0.5, j));
    auto fam = perturbation_scenario(3, constant_field(3, 0.0), coordinate_field(3, 0), amps);
    HypothesisBounds bounds;
    auto seq = make_factor_sequence(fam.factors, fam.limit, bounds, sampling);

    const std::vector<double> exponents{1.0, 2.0, 6.0};
    std::vector<ScalarField> tests;
    tests.push_back(cutoff_bump_field(3, basis_vector(4, 0), 1.0));
    auto rep = convergence_report(seq, exponents, tests);

    CHECK(rep.exponent_in_range[0]);
    CHECK(rep.exponent_in_range[1]);
    CHECK_FALSE(rep.exponent_in_range[2]);  // p = 2n/(n-2) is the boundary
    // L2 distance halves per step within 10%
    for (std::size_t j = 1; j < 5; ++j) {
        const double ratio = rep.lp_distances[j][1] / rep.lp_distances[j - 1][1];
        CHECK(ratio == doctest::Approx(0.5).epsilon(0.1));
    }
    CHECK(rep.lp_monotone_decay[1]);
    CHECK(rep.pairing_decay[0]);

    SUBCASE("identical sequence has zero distances") {
        auto seq0 = make_factor_sequence({fam.limit}, fam.limit, bounds, sampling);
        auto rep0 = convergence_report(seq0, exponents, tests);
        CHECK(rep0.lp_distances[0][0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rep0.lp_distances[0][1] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("coarea consistency over a tau grid") {
    auto s = product_rule_sampling(3, 96);
    auto w = subtract(constant_field(3, 1.0), coordinate_field(3, 0));
    auto rep = coarea_consistency_check(w, 0.5, 1.5, 5, s);
    CHECK(rep.relative_gap < 0.05);
    CHECK(rep.band_integral > 0.0);
}
