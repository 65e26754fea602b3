#include <doctest.h>

#include <cmath>
#include <vector>

#include "circlift/assumptions.hpp"
#include "circlift/errors.hpp"
#include "circlift/rotation.hpp"

using namespace circlift;

namespace {

DisorderMeasure tiny_disorder() { return DisorderMeasure::uniform_box(1, {1e-9}); }

} // namespace

TEST_CASE("rigid rotation estimates exactly") {
    RigidRotation rigid(0.3);
    DisorderMeasure mu = DisorderMeasure::bernoulli_product(1, {0.0, 1.0}, {1.0, 0.0});
    RotationEstimate est = estimate_rotation_number(rigid, 0.0, mu, 1000, 2, 0.0, 5);
    CHECK(est.rho_hat == doctest::Approx(0.3).epsilon(1e-12));
    // per-replicate winding is 299 or 300 depending on the last rounding
    CHECK(est.windings >= 2 * 299);
    CHECK(est.windings <= 2 * 300);
}

TEST_CASE("model map at E=0 stays confined: zero rotation, zero windings") {
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
    RotationEstimate est = estimate_rotation_number(model, 0.0, mu, 100'000, 4, model.x_star(), 11);
    CHECK(est.windings == 0);
    CHECK(std::abs(est.rho_hat) < 1e-5); // |final - x0| <= 1/2 over n = 1e5
}

TEST_CASE("near-degenerate disorder reproduces the deterministic winding rate") {
    ModelMap model;
    // deterministic oracle at E = 0.3
    double x = 0.0;
    const int64_t n = 1'000'000;
    for (int64_t i = 0; i < n; ++i) {
        double s = std::sin(M_PI * x);
        x = x + 0.2 * s * s + 0.3;
    }
    const double deterministic_rate = x / n;
    RotationEstimate est = estimate_rotation_number(model, 0.3, tiny_disorder(), n, 1, 0.0, 3);
    CHECK(est.rho_hat > 0);
    CHECK(std::abs(est.rho_hat - deterministic_rate) < 1e-3);
}

TEST_CASE("starting-point independence") {
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
    const uint64_t n = 100'000;

    SUBCASE("same words: estimates agree within 2/n exactly") {
        RotationEstimate a = estimate_rotation_number(model, 0.1, mu, n, 4, 0.0, 21);
        RotationEstimate b = estimate_rotation_number(model, 0.1, mu, n, 4, 0.3, 21);
        RotationEstimate c = estimate_rotation_number(model, 0.1, mu, n, 4, 0.7, 21);
        CHECK(std::abs(a.rho_hat - b.rho_hat) <= 2.0 / n);
        CHECK(std::abs(a.rho_hat - c.rho_hat) <= 2.0 / n);
        for (int r = 0; r < 4; ++r) // winding difference per path is at most 1
            CHECK(std::abs(a.per_replicate[r] - b.per_replicate[r]) <= 2.0 / n);
    }

    SUBCASE("different words: estimates agree within 3 combined standard errors") {
        RotationEstimate a = estimate_rotation_number(model, 0.1, mu, n, 8, 0.0, 100);
        RotationEstimate b = estimate_rotation_number(model, 0.1, mu, n, 8, 0.3, 200);
        double combined = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
        CHECK(std::abs(a.rho_hat - b.rho_hat) <= 3 * combined + 2.0 / n);
    }
}

TEST_CASE("pathwise monotonicity in E over sampled words") {
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
    const std::size_t len = 200;
    for (uint64_t w = 0; w < 1000; ++w) {
        OrbitResult lo = iterate_orbit_streamed(model, 0.02, mu, 400, w, len, 0.0);
        OrbitResult hi = iterate_orbit_streamed(model, 0.05, mu, 400, w, len, 0.0);
        REQUIRE(lo.final_lift <= hi.final_lift);
    }
}

TEST_CASE("estimator consistency under doubling n") {
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
    RotationEstimate base = estimate_rotation_number(model, 0.1, mu, 100'000, 6, 0.0, 9);
    RotationEstimate twice = estimate_rotation_number(model, 0.1, mu, 200'000, 6, 0.0, 9);
    double allowance = 2.0 / 100'000 + 3 * (base.stderr_ + twice.stderr_);
    CHECK(std::abs(base.rho_hat - twice.rho_hat) <= allowance);
}

TEST_CASE("no-backtracking checks") {
    ModelMap model;

    SUBCASE("admissible disorder keeps orbits above the reference point") {
        DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
        BacktrackReport r0 = check_no_backtracking(model, 0.0, mu, 2000, 1000, 17);
        CHECK(r0.ok);
        CHECK(r0.infimum >= model.x_star());
        BacktrackReport r1 = check_no_backtracking(model, 0.05, mu, 2000, 1000, 17);
        CHECK(r1.ok);
    }

    SUBCASE("overly wide disorder produces a witness") {
        DisorderMeasure wide = DisorderMeasure::uniform_box(1, {0.3});
        BacktrackReport r = check_no_backtracking(model, 0.0, wide, 2000, 2000, 17);
        CHECK_FALSE(r.ok);
        CHECK(r.infimum <= -1.0);
    }

    SUBCASE("negative E is rejected") {
        DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
        CHECK_THROWS_AS(check_no_backtracking(model, -0.1, mu, 10, 10, 1), ValidationError);
    }
}

TEST_CASE("plateau detection") {
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});

    SUBCASE("negative E on the model map is a plateau") {
        const double e_list[] = {-0.01};
        PlateauReport report = detect_plateau(model, mu, e_list, 1'000'000, 4, 23);
        CHECK(report.plateau);
        CHECK(report.windings[0] == 0);
    }

    SUBCASE("rigid rotation is not a plateau") {
        RigidRotation rigid(0.3);
        const double e_list[] = {-0.01};
        PlateauReport report = detect_plateau(rigid, mu, e_list, 100'000, 2, 23);
        CHECK_FALSE(report.plateau);
    }

    SUBCASE("positive E is rejected by the precondition") {
        const double e_list[] = {0.3};
        CHECK_THROWS_AS(detect_plateau(model, mu, e_list, 1000, 1, 23), ValidationError);
    }
}

TEST_CASE("adaptive estimator resolves strong signal and caps hopeless ones") {
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});

    AdaptiveRotationEstimate strong = estimate_rotation_adaptive(model, 0.1, mu, 4, 0.0, 31, 50, 100'000'000);
    CHECK(strong.resolved);
    CHECK_FALSE(strong.capped);
    CHECK(strong.estimate.windings >= 50);

    AdaptiveRotationEstimate hopeless = estimate_rotation_adaptive(model, -0.01, mu, 2, model.x_star(), 31, 50, 400'000);
    CHECK_FALSE(hopeless.resolved);
    CHECK(hopeless.capped);
    CHECK(hopeless.estimate.rho_hat == 0.0);
    CHECK(hopeless.rho_upper_bound == doctest::Approx(3.0 / 400'000).epsilon(0.5));
}

TEST_CASE("rotation bracket closed forms in log space") {
    BracketConstants constants; // A=1, a=1, b=1, C=1, l=1, p1=0.5
    RotationBracket bracket = rotation_bracket(1e-4, 1, constants);
    CHECK(bracket.N == 100);
    CHECK(bracket.N_prime == 100);
    // ln lower = -ln 100 + 100 ln(1e-4), ln upper = -ln 100 + 100 ln(1/2)
    CHECK(bracket.ln_lower == doctest::Approx(-925.63902).epsilon(1e-6));
    CHECK(bracket.ln_upper == doctest::Approx(-73.91986).epsilon(1e-6));
    CHECK(bracket.consistent);
}

TEST_CASE("default bracket constants derive from the family's local control") {
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
    LocalBounds bounds = local_bounds(model, 0.05);
    BracketConstants constants = default_bracket_constants(model, mu, bounds);
    // A = 2 C1(c1), a = C2(c2)/2 = 1/(2(c2+1)), b from the power-of-two grid
    CHECK(constants.A == doctest::Approx(2.0 * (1.0 / bounds.c1 + 2 + 2.0 / bounds.c1 + 1)).epsilon(1e-12));
    CHECK(constants.a == doctest::Approx(0.5 / (bounds.c2 + 1)).epsilon(1e-12));
    CHECK(constants.b == doctest::Approx(0.5));
    CHECK(constants.C == doctest::Approx(1.0 / 0.15).epsilon(1e-12));
    CHECK(constants.l == 1.0);
    CHECK(constants.p1 == doctest::Approx(0.125).epsilon(1e-6));
    // the derived constants are usable as-is
    RotationBracket bracket = rotation_bracket(1e-3, 1, constants);
    CHECK(bracket.N >= 1);
    CHECK(bracket.N_prime >= 1);
}

TEST_CASE("rotation bracket rejects a degenerate upper block length") {
    BracketConstants constants;
    constants.a = 1e-3; // floor(1e-3 * 100) = 0 at E = 1e-4
    CHECK_THROWS_AS(rotation_bracket(1e-4, 1, constants), ValidationError);
}

TEST_CASE("bracket double-log slopes approach the passage exponent") {
    BracketConstants constants;
    auto slope_at = [&](int k, double e1, double e2, bool lower) {
        RotationBracket b1 = rotation_bracket(e1, k, constants);
        RotationBracket b2 = rotation_bracket(e2, k, constants);
        double z1 = std::log(-(lower ? b1.ln_lower : b1.ln_upper));
        double z2 = std::log(-(lower ? b2.ln_lower : b2.ln_upper));
        return (z1 - z2) / (std::log(e1) - std::log(e2));
    };

    // upper bracket: converged at the bottom of the grid
    CHECK(std::abs(slope_at(1, 1e-8, 1e-7, false) - (-0.5)) < 0.02);

    // lower bracket: the ln E factor in the good-letter probability delays
    // convergence by 1/|ln E|; the slope sequence is monotone toward the limit
    // and its 1/|ln E| extrapolation lands on it
    std::vector<double> slopes, inv_log;
    for (double e : {1e-5, 1e-6, 1e-7, 1e-8}) {
        slopes.push_back(slope_at(1, e, e * 10, true));
        inv_log.push_back(1.0 / std::log(e));
    }
    for (std::size_t i = 1; i < slopes.size(); ++i) CHECK(slopes[i] > slopes[i - 1] - 1e-12);
    CHECK(slopes.back() == doctest::Approx(-0.558).epsilon(0.01)); // still far from -1/2 at 1e-8
    // linear extrapolation of slope against 1/ln E to 0
    double x1 = inv_log.front(), x2 = inv_log.back(), s1 = slopes.front(), s2 = slopes.back();
    double extrapolated = s2 + (0.0 - x2) * (s1 - s2) / (x1 - x2);
    CHECK(std::abs(extrapolated - (-0.5)) < 0.02);

    // k = 2: the same structure targets -3/4
    CHECK(std::abs(slope_at(2, 1e-8, 1e-7, false) - (-0.75)) < 0.02);
}
