#include <doctest.h>

#include <cmath>
#include <vector>

#include "circlift/assumptions.hpp"
#include "circlift/bottleneck.hpp"
#include "circlift/errors.hpp"
#include "circlift/fit.hpp"
#include "circlift/lift_family.hpp"

using namespace circlift;

namespace {

// independent brute-force passage oracle
int64_t oracle_steps(int k, double lambda, double eps, double from, double to) {
    double x = from;
    int64_t steps = 0;
    while (x < to) {
        double p = x;
        for (int i = 1; i < 2 * k; ++i) p *= x;
        x = x + lambda * p + eps;
        ++steps;
    }
    return steps;
}

} // namespace

TEST_CASE("printed constants C1, N1") {
    UpperStepBound b1 = bound_n1(1, 1.0, 1e-4);
    CHECK(b1.C1 == doctest::Approx(6.0).epsilon(1e-12)); // 1 + 2 + 2 + 1
    CHECK(b1.N1 == 600);

    UpperStepBound b2 = bound_n1(2, 1.0, 1e-4);
    CHECK(b2.C1 == doctest::Approx(1.0 / 3 + 2 + 8.0 / 7 + 1).epsilon(1e-12));
    CHECK(b2.N1 == 4477); // ceil(4.47619... * 1000)

    // lambda -> infinity leaves the collar and tail terms
    CHECK(bound_n1(1, 1e12, 1.0).C1 == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("printed constants C2, N2") {
    LowerStepBound b1 = bound_n2(1, 1.0, 1e-4);
    CHECK(b1.C2 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b1.N2 == 50);

    CHECK(bound_n2(1, 0.0, 0.5).C2 == doctest::Approx(1.0));

    LowerStepBound b3 = bound_n2(2, 3.0, 1e-4);
    CHECK(b3.C2 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(b3.N2 == 250); // floor(0.25 * 1000)
}

TEST_CASE("passage through the full window matches the continuum estimate and the N1 bound") {
    BottleneckMap map = BottleneckMap::lower_envelope(1, 1.0, 1e-4, 0.1);
    PassageTimeReport report = measure_passage(map, -0.1, 0.1);
    // continuum value 2 * 100 * atan(10) = 294.2
    CHECK(std::abs(report.steps_total - 294.2) <= 5.0);
    CHECK(report.steps_total <= report.N1);
    CHECK(report.N1 == 600);
    CHECK(report.steps_total == oracle_steps(1, 1.0, 1e-4, -0.1, 0.1));
    CHECK(report.steps_total == report.m1 + report.m2 + report.m3);
    CHECK(report.final_x >= 0.1);
}

TEST_CASE("collar crossing beats the N2 bound") {
    BottleneckMap map = BottleneckMap::upper_envelope(1, 1.0, 1e-4, 0.1);
    PassageTimeReport report = measure_passage(map, -0.01, 0.0);
    // continuum value 100 * atan(1) = 78.5
    CHECK(std::abs(report.steps_total - 78.5) <= 5.0);
    CHECK(report.steps_total >= report.N2);
    CHECK(report.N2 == 50);
}

TEST_CASE("a jump larger than the window clears it in one step") {
    BottleneckMap map = BottleneckMap::upper_envelope(1, 0.0, 0.3, 0.1);
    PassageTimeReport report = measure_passage(map, -0.1, 0.1);
    CHECK(report.steps_total == 1);
}

TEST_CASE("passage time is monotone in eps") {
    int64_t prev = 0;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        BottleneckMap map = BottleneckMap::lower_envelope(1, 1.0, eps, 0.1);
        int64_t steps = measure_passage(map, -0.1, 0.1).steps_total;
        CHECK(steps >= prev);
        prev = steps;
    }
}

TEST_CASE("realized phase-1 count obeys the phase-1 bound") {
    for (double eps : {1e-3, 1e-4, 1e-5, 1e-6}) {
        BottleneckMap map = BottleneckMap::lower_envelope(1, 1.0, eps, 0.1);
        PassageTimeReport report = measure_passage(map, -0.1, 0.1);
        double bound = std::pow(eps, -0.5) / (1.0 * (2 * 1 - 1)) + 1;
        CHECK(static_cast<double>(report.m1) <= bound);
    }
}

TEST_CASE("step cap raises a budget error with the partial report") {
    BottleneckMap map = BottleneckMap::lower_envelope(1, 1.0, 1e-8, 0.1);
    PassageTimeReport partial;
    CHECK_THROWS_AS(measure_passage(map, -0.1, 0.1, 100, &partial), BudgetError);
    CHECK(partial.capped);
    CHECK(partial.final_x > -0.1);
    CHECK(partial.final_x < 0.1);
}

TEST_CASE("non-positive increments are rejected") {
    ModelMap model;
    Word big(1, 4);
    for (int i = 0; i < 4; ++i) big.letter(i)[0] = 0.5; // strong pull-back near x = 0
    BottleneckMap map = BottleneckMap::family_driven(std::make_shared<ModelMap>(model), 0.0, big, 1.0, 1e-4, 0.1);
    CHECK_THROWS_AS(measure_passage(map, -0.1, 0.1), ValidationError);
}

TEST_CASE("scaling sweep recovers the passage exponent") {
    const std::vector<double> grid = {1e-3, 1e-4, 1e-5, 1e-6};

    SUBCASE("k=1, window wide enough for the whole grid") {
        ScalingSweep sweep = scaling_sweep(1, 1.0, 0.5, grid);
        // oracle regression over the same brute-force counts
        std::vector<double> lx, lz;
        for (double eps : grid) {
            lx.push_back(std::log(eps));
            lz.push_back(std::log(static_cast<double>(oracle_steps(1, 1.0, eps, -0.5, 0.5))));
        }
        LinearFit oracle = linear_fit(lx, lz);
        CHECK(sweep.slope == doctest::Approx(oracle.slope).epsilon(1e-12));
        CHECK(sweep.slope == doctest::Approx(-0.506).epsilon(0.01));
    }

    SUBCASE("k=1, delta = 0.1: the window-edge transient steepens the fit") {
        ScalingSweep sweep = scaling_sweep(1, 1.0, 0.1, grid);
        CHECK(sweep.slope == doctest::Approx(-0.5294).epsilon(0.01));
    }

    SUBCASE("k=2 needs the wide window to stay inside eps0") {
        ScalingSweep sweep = scaling_sweep(2, 1.0, 0.5, grid);
        CHECK(sweep.slope == doctest::Approx(-0.752).epsilon(0.01));
        CHECK_THROWS_AS(scaling_sweep(2, 1.0, 0.1, grid), ValidationError);
    }

    SUBCASE("single-point grids are rejected") {
        const std::vector<double> single = {1e-4};
        CHECK_THROWS_AS(scaling_sweep(1, 1.0, 0.5, single), ValidationError);
    }
}

TEST_CASE("family-driven passage with a good word obeys the reduced N1 bound") {
    auto model = std::make_shared<ModelMap>();
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
    LocalBounds bounds = local_bounds(*model, 0.1);
    const double E = 0.002;
    // good letters lie in [0, bE]; increments then beat c1 x^2 + gamma_E E/2
    BlockSpec spec = BlockSpec::for_family(*model, mu, bounds, 1);
    const double eps_eff = bounds.gamma_E * E / 2;
    UpperStepBound n1 = bound_n1(1, bounds.c1, eps_eff);

    // for a uniform measure, conditioning on the good box is uniform on [0, bE]
    Word good = sample_word(DisorderMeasure::uniform_box(1, {spec.b * E}), 55, static_cast<std::size_t>(2 * n1.N1));
    REQUIRE(is_good_block(good, E, spec.b));
    BottleneckMap map = BottleneckMap::family_driven(model, E, good, bounds.c1, eps_eff, 0.1);
    PassageTimeReport report = measure_passage(map, -0.1, 0.1);
    CHECK(report.steps_total <= n1.N1);
    CHECK(report.N1 == n1.N1);
}
