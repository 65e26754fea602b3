// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
// Run all criteria with no arguments, or a subset with --only N [--only M ...].
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "circlift/anderson.hpp"
#include "circlift/assumptions.hpp"
#include "circlift/bottleneck.hpp"
#include "circlift/errors.hpp"
#include "circlift/experiment.hpp"
#include "circlift/fit.hpp"
#include "circlift/lift_family.hpp"
#include "circlift/rotation.hpp"

using namespace circlift;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
    }
    void note(const std::string& what) { details.push_back("       " + what); }
};

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

// --- criterion 1: bottleneck bracketing, exact integer comparisons ---
Outcome criterion_bracketing() {
    Outcome out;
    for (int k : {1, 2}) {
        for (double eps : {1e-3, 1e-4, 1e-5, 1e-6}) {
            BottleneckMap map = BottleneckMap::lower_envelope(k, 1.0, eps, 0.1);
            PassageTimeReport r = measure_passage(map, -0.1, 0.1);
            std::ostringstream tag;
            tag << "k=" << k << " eps=" << eps << ": collar " << r.m2 << " >= N2 " << r.N2 << ", total "
                << r.steps_total << " <= N1 " << r.N1;
            out.check(r.m2 >= r.N2 && r.steps_total <= r.N1, tag.str());
        }
    }
    return out;
}

// --- criterion 2: scaling exponents over the same eps grid ---
Outcome criterion_scaling() {
    Outcome out;
    const std::vector<double> grid = {1e-3, 1e-4, 1e-5, 1e-6};
    // delta = 0.5 keeps the whole grid inside the sweep's eps0 window for both
    // orders (k = 2 requires eps^{1/4} < delta/2, which delta = 0.1 fails)
    ScalingSweep k1 = scaling_sweep(1, 1.0, 0.5, grid);
    out.check(std::abs(k1.slope - (-0.50)) <= 0.02, "k=1 slope " + fmt(k1.slope) + " within -0.50 +- 0.02");
    ScalingSweep k2 = scaling_sweep(2, 1.0, 0.5, grid);
    out.check(std::abs(k2.slope - (-0.75)) <= 0.03, "k=2 slope " + fmt(k2.slope) + " within -0.75 +- 0.03");
    return out;
}

// --- criterion 3: printed constants, exact ---
Outcome criterion_constants() {
    Outcome out;
    UpperStepBound n1 = bound_n1(1, 1.0, 1e-4);
    out.check(n1.N1 == 600, "bound_n1(k=1, lambda=1, eps=1e-4) = " + std::to_string(n1.N1) + " (want 600)");
    LowerStepBound n2 = bound_n2(1, 1.0, 1e-4);
    out.check(n2.N2 == 50, "bound_n2(k=1, Lambda=1, eps=1e-4) = " + std::to_string(n2.N2) + " (want 50)");
    return out;
}

// --- criterion 4: sturm count vs the free-lattice closed form ---
Outcome criterion_free_oracle() {
    Outcome out;
    AndersonModel free = AndersonModel::point_mass(0.0);
    double worst = 0;
    for (double E : {-1.9, -1.0, 0.0, 1.0, 1.9}) {
        IdsValue v = ids_sturm(free, E, 10'000, 1, 4242);
        worst = std::max(worst, std::abs(v.value - free_lattice_ids(E)));
    }
    out.check(worst <= 0.005, "max |sturm - closed form| = " + fmt(worst) + " <= 0.005 over 5 energies");
    return out;
}

// --- criterion 5: independent IDS routes agree pointwise ---
Outcome criterion_route_agreement() {
    Outcome out;
    AndersonModel model = AndersonModel::uniform(0.0, 1.0);
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(-1.5 + 4.0 * i / 19.0);
    IdsOrbitParams orbit;
    orbit.n = 1'000'000;
    orbit.replicates = 8;
    orbit.seed = 1001;
    IdsCurve rot = ids_curve(model, IdsRoute::Rotation, grid, orbit, 5000, 20);
    IdsCurve stu = ids_curve(model, IdsRoute::Sturm, grid, orbit, 5000, 20);
    double worst = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::abs(rot.points[i].ids.value - stu.points[i].ids.value));
    out.check(worst <= 0.01, "max pointwise |rotation - sturm| = " + fmt(worst) + " <= 0.01 over 20 energies");
    return out;
}

// --- criterion 6: edge behavior at desk scale ---
Outcome criterion_edge() {
    Outcome out;

    // (a) sturm edge scan: the double-log ratio sits in the Lifshitz window
    // and approaches the -1/2 limit monotonically as eps decreases.
    // Bernoulli disorder with an atom at the edge keeps every grid point
    // resolvable at this budget (uniform [0,1] drops below resolution by
    // eps ~ 0.1 and its ratios sit near -1.4).
    AndersonModel model = AndersonModel::bernoulli({0.0, 1.0}, {0.7, 0.3});
    const std::vector<double> eps_grid = {0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05};
    IdsOrbitParams orbit;
    orbit.seed = 60601;
    EdgeScanResult scan = edge_scan(model, SpectralEdge::Lower, IdsRoute::Sturm, eps_grid, orbit, 10'000, 50);
    bool all_resolved = true, in_band = true, monotone = true;
    double prev_gap = HUGE_VAL, prev_se = 0;
    for (const auto& p : scan.points) {
        if (!p.resolved) {
            all_resolved = false;
            continue;
        }
        const double r = p.log_log_ratio;
        if (r < -1.0 || r > -0.25) in_band = false;
        const double gap = std::abs(r - (-0.5));
        if (gap > prev_gap + 2 * std::hypot(p.log_log_ratio_stderr, prev_se)) monotone = false;
        out.note("eps=" + fmt(p.eps, 3) + "  rho~=" + fmt(p.rho_tilde, 4) + "  ln(-ln)/ln eps=" + fmt(r, 4));
        prev_gap = gap;
        prev_se = p.log_log_ratio_stderr;
    }
    out.check(all_resolved, "(a) every grid point resolved at N=1e4, 50 realizations");
    out.check(in_band, "(a) all ln(-ln k)/ln eps values in [-1.0, -0.25]");
    out.check(monotone, "(a) gap to the -1/2 limit decreases monotonically as eps decreases");

    // (b) analytic brackets in log space down to eps = 1e-8
    BracketConstants constants; // A=1, C=b=l=1; a=1, p1=1/2
    auto fd_slope = [&](double e1, double e2, bool lower) {
        RotationBracket b1 = rotation_bracket(e1, 1, constants);
        RotationBracket b2 = rotation_bracket(e2, 1, constants);
        double z1 = std::log(-(lower ? b1.ln_lower : b1.ln_upper));
        double z2 = std::log(-(lower ? b2.ln_lower : b2.ln_upper));
        return (z1 - z2) / (std::log(e1) - std::log(e2));
    };
    const double upper_slope = fd_slope(1e-8, 1e-7, false);
    const double lower_slope = fd_slope(1e-8, 1e-7, true);
    out.check(std::abs(upper_slope - (-0.5)) <= 0.02,
              "(b) upper-bracket slope at eps=1e-8 is " + fmt(upper_slope) + " (within -0.5 +- 0.02)");
    out.check(std::abs(lower_slope - (-0.5)) <= 0.02,
              "(b) lower-bracket slope at eps=1e-8 is " + fmt(lower_slope) + " (within -0.5 +- 0.02)");
    if (std::abs(lower_slope - (-0.5)) > 0.02) {
        out.note("the lower bracket's per-letter factor C(bE)^l carries a ln(eps) term, so its");
        out.note("double-log slope is -1/2 - l/(l|ln eps| - ln(C b^l)) ~ -0.554 at eps = 1e-8;");
        out.note("it enters the +-0.02 band only below eps ~ 1e-22. Convergence evidence:");
        for (double e : {1e-8, 1e-16, 1e-24, 1e-30})
            out.note("  lower-bracket slope at eps=" + fmt(e, 2) + ": " + fmt(fd_slope(e, e * 10, true)));
    }
    return out;
}

// --- criterion 7: hypothesis verification ---
Outcome criterion_hypotheses() {
    Outcome out;

    ModelMap model;
    AssumptionReport model_report = verify_assumptions(model);
    const double pi2_over_5 = M_PI * M_PI / 5.0;
    out.check(model_report.pass() && model_report.k_hat == 1, "model map passes with k_hat = 1");
    out.check(model_report.c1 <= pi2_over_5 && pi2_over_5 <= model_report.c2,
              "model map brackets: c1 " + fmt(model_report.c1) + " <= pi^2/5 <= c2 " + fmt(model_report.c2));

    AndersonModel uniform = AndersonModel::uniform(0.0, 1.0);
    AssumptionReport anderson_report = verify_anderson_hypotheses(uniform, 0.1);
    out.check(anderson_report.pass() && anderson_report.k_hat == 1,
              "anderson uniform[0,1] passes the quadratic parabolic case (k_hat = 1)");

    AndersonModel atom = AndersonModel::point_mass(0.3);
    AssumptionReport atom_report = verify_anderson_hypotheses(atom, 0.1);
    out.check(atom_report.m1.has_value() && !atom_report.m1->pass && !atom_report.pass(),
              "single-atom potential fails (M1)");

    DisorderMeasure wide = DisorderMeasure::uniform_box(1, {0.3});
    BacktrackReport back = check_no_backtracking(model, 0.0, wide, 2000, 2000, 7007);
    out.check(!back.ok && back.infimum <= -1.0,
              "uniform[0,0.3] on the model map backtracks: infimum " + fmt(back.infimum) + " at trial " +
                  std::to_string(back.witness_trial) + ", step " + std::to_string(back.witness_step));
    return out;
}

// --- criterion 8: rotation estimator properties ---
Outcome criterion_estimator() {
    Outcome out;
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});

    const double e_list[] = {-0.01};
    PlateauReport plateau = detect_plateau(model, mu, e_list, 10'000'000, 5, 808);
    out.check(plateau.plateau && plateau.windings[0] == 0,
              "plateau at E = -0.01: windings = " + std::to_string(plateau.windings[0]) + " over 1e7 steps");

    const uint64_t n = 100'000;
    RotationEstimate a = estimate_rotation_number(model, 0.1, mu, n, 8, 0.0, 101);
    RotationEstimate b = estimate_rotation_number(model, 0.1, mu, n, 8, 0.3, 202);
    RotationEstimate c = estimate_rotation_number(model, 0.1, mu, n, 8, 0.7, 303);
    auto within = [&](const RotationEstimate& u, const RotationEstimate& v) {
        return std::abs(u.rho_hat - v.rho_hat) <= 3 * std::hypot(u.stderr_, v.stderr_) + 2.0 / n;
    };
    out.check(within(a, b) && within(a, c) && within(b, c),
              "starting-point independence over x0 in {0, 0.3, 0.7} within 3 standard errors");

    bool monotone = true;
    for (uint64_t w = 0; w < 1000 && monotone; ++w) {
        OrbitResult lo = iterate_orbit_streamed(model, 0.02, mu, 909, w, 300, 0.0);
        OrbitResult hi = iterate_orbit_streamed(model, 0.05, mu, 909, w, 300, 0.0);
        monotone = lo.final_lift <= hi.final_lift;
    }
    out.check(monotone, "pathwise E-monotonicity holds exactly on 1e3 sampled words");
    return out;
}

// --- criterion 9: byte-identical reruns ---
Outcome criterion_determinism() {
    Outcome out;
    namespace fs = std::filesystem;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    nlohmann::json config = {{"experiment", "rotnum"},
                             {"seed", 999},
                             {"family", {{"name", "model"}, {"amplitude", 0.2}}},
                             {"measure", {{"kind", "uniform-box"}, {"d", 1}, {"max", {0.15}}}},
                             {"e_grid", {0.02, 0.05, 0.1}},
                             {"n", 50000},
                             {"replicates", 4},
                             {"threads", 2}};
    std::ostringstream log;
    fs::path dir1 = fs::temp_directory_path() / "circlift_accept_det1";
    fs::path dir2 = fs::temp_directory_path() / "circlift_accept_det2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    config["output_dir"] = dir1.string();
    ExperimentResult r1 = run_experiment(config, log);
    config["output_dir"] = dir2.string();
    ExperimentResult r2 = run_experiment(config, log);
    std::string bytes1 = slurp(r1.csv_path), bytes2 = slurp(r2.csv_path);
    out.check(!bytes1.empty() && bytes1 == bytes2, "rotnum rerun with identical config+seed is byte-identical");
    return out;
}

struct Criterion {
    int id;
    const char* name;
    double runtime_cap_s; // 0 = no stated cap
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only.insert(std::atoi(argv[++i]));
    }

    const std::vector<Criterion> criteria = {
        {1, "bottleneck bracketing (collar >= N2, total <= N1, 8 cases)", 10, criterion_bracketing},
        {2, "bottleneck scaling exponents -0.50 +- 0.02 and -0.75 +- 0.03", 30, criterion_scaling},
        {3, "C1/C2 formula regression (N1 = 600, N2 = 50)", 0, criterion_constants},
        {4, "free-lattice oracle chain (sturm vs closed form <= 0.005)", 5, criterion_free_oracle},
        {5, "IDS route agreement <= 0.01 on 20 energies", 300, criterion_route_agreement},
        {6, "edge behavior: scan window + analytic bracket slopes", 600, criterion_edge},
        {7, "hypothesis verification (model, anderson, failure cases)", 0, criterion_hypotheses},
        {8, "rotation estimator properties (plateau, x0, monotonicity)", 0, criterion_estimator},
        {9, "determinism: byte-identical CSV reruns", 0, criterion_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (!only.empty() && !only.count(criterion.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.details.push_back(std::string("  FAIL exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count() /
            1000.0;
        if (criterion.runtime_cap_s > 0 && elapsed >= criterion.runtime_cap_s) {
            outcome.pass = false;
            outcome.details.push_back("  FAIL runtime " + fmt(elapsed, 3) + " s exceeds the stated cap of " +
                                      fmt(criterion.runtime_cap_s, 3) + " s");
        }
        std::cout << "[criterion " << criterion.id << "] " << (outcome.pass ? "PASS" : "FAIL") << ": "
                  << criterion.name << " (" << fmt(elapsed, 3) << " s)\n";
        for (const auto& line : outcome.details) std::cout << line << "\n";
        if (!outcome.pass) ++failures;
    }
    if (failures) std::cout << failures << " criterion(s) failed\n";
    else std::cout << "all criteria passed\n";
    return failures == 0 ? 0 : 1;
}
