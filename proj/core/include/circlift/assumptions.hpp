#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "circlift/lift_family.hpp"

// assumption verification: finite-difference checks of the standing
// hypotheses on a family's certified box

namespace circlift {

struct AssumptionCheckOptions {
    int x_grid = 41;            // samples per period in x
    int param_grid = 9;         // samples per parameter axis
    double fd_step = 1e-6;      // central-difference step
    double sign_tol = 1e-8;     // tolerance separating zero derivatives from rounding
    double delta0 = 0.1;        // outer edge of the tangency-fit window
    double fit_decades = 2.0;   // fit window is [delta0 / 10^fit_decades, delta0]
    int fit_points_per_side = 17;
    double max_fit_residual = 0.05; // per-point residual gate on the log-log fit
    double bracket_margin = 0.01;   // widening of sampled extrema into certified c1, c2
    std::optional<double> m3_y_max; // override for the (M3) y sample range
};

struct AssumptionCheck {
    bool pass = false;
    std::string witness; // empty when passing
};

struct AssumptionReport {
    AssumptionCheck g1, g2, g3, g4, m3;
    // measure-side checks, present only when a measure was audited alongside
    // the family (the Anderson verifier fills these)
    std::optional<AssumptionCheck> m1, m2;
    int k_hat = 0;
    double c1 = 0.0, c2 = 0.0;
    double fit_slope = 0.0;
    double fit_max_residual = 0.0;

    bool pass() const {
        return g1.pass && g2.pass && g3.pass && g4.pass && m3.pass && (!m1 || m1->pass) && (!m2 || m2->pass);
    }
    std::string to_text() const; // key: value lines
    nlohmann::json to_json() const;
};

// Numerical verification of (G1)-(G4) and (M3) on the certified box:
//   G1  finite values and h vs h/2 consistent central differences in x;
//   G2  least-squares slope of ln|G_{0,0}(x) - x| vs ln|x| near 2k, with
//       positive two-sided curvature brackets c1 <= c2;
//   G3  dG/dE >= -tol on the grid and > 0 at the origin;
//   G4  dG/dy_j <= tol on the grid and < 0 at the origin;
//   M3  G_{0,y}(x_*) > x_* over sampled y.
// Throws InconclusiveOrderError when the G2 fit residual exceeds the gate
// while the data is otherwise consistent with an even-order tangency.
AssumptionReport verify_assumptions(const LiftFamily& family, const AssumptionCheckOptions& opts = {});

// Sampled two-sided local control on [-delta, delta] x [0, delta] x [0, delta]^d:
//   x + c1 x^{2k} + gamma_E E - d Gamma_y max|y_j|
//     <= G_{E,y}(x) <= x + c2 x^{2k} + Gamma_E E - gamma_y max|y_j|.
struct LocalBounds {
    double c1 = 0.0, c2 = 0.0;
    double gamma_E = 0.0, Gamma_E = 0.0;
    double gamma_y = 0.0, Gamma_y = 0.0;
    double delta = 0.0;
};

// All six constants must come out strictly positive; a derivative extremum of
// the wrong sign throws HypothesisError naming the witness point.
LocalBounds local_bounds(const LiftFamily& family, double delta, int grid = 9, double fd_step = 1e-6);

} // namespace circlift
