#include "circlift/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "circlift/assumptions.hpp"
#include "circlift/bottleneck.hpp"
#include "circlift/errors.hpp"
#include "circlift/parallel.hpp"

namespace circlift {

namespace {

double scaling_exponent(int k) { return (2.0 * k - 1.0) / (2.0 * k); }

// Orbit state on the reduced coordinate; resumable so the adaptive estimator
// can extend orbits chunk by chunk without replaying.
struct OrbitState {
    double chi = 0.0;
    int64_t winding = 0;
    uint64_t next_letter = 0;
    double min_lift = HUGE_VAL;

    explicit OrbitState(double x0 = 0.0) {
        double f = std::floor(x0);
        chi = x0 - f;
        winding = static_cast<int64_t>(f);
        min_lift = x0;
    }

    double lift() const { return static_cast<double>(winding) + chi; }

    // advances `steps` letters; returns false if the orbit dropped to stop_below
    bool advance(const LiftFamily& family, double E, const DisorderMeasure& measure, const CounterRng& rng,
                 uint64_t steps, double stop_below = -HUGE_VAL) {
        const int d = measure.dimension();
        double letter_buf[8];
        std::vector<double> letter_dyn;
        std::span<double> letter;
        if (d <= 8) letter = {letter_buf, static_cast<std::size_t>(d)};
        else {
            letter_dyn.resize(d);
            letter = letter_dyn;
        }
        for (uint64_t s = 0; s < steps; ++s) {
            measure.sample_letter(rng, next_letter++, letter);
            double next = family.eval(E, letter, chi);
            if (!std::isfinite(next))
                throw std::overflow_error(family.name() + ": non-finite lift value during orbit iteration");
            chi = next;
            while (chi >= 1.0) {
                chi -= 1.0;
                ++winding;
            }
            while (chi < 0.0) {
                chi += 1.0;
                --winding;
            }
            double l = lift();
            if (l < min_lift) min_lift = l;
            if (l <= stop_below) return false;
        }
        return true;
    }
};

void check_measure_in_domain(const LiftFamily& family, double E, const DisorderMeasure& measure) {
    if (measure.dimension() != family.disorder_dim())
        throw ValidationError(family.name() + ": measure dimension mismatch");
    const ParamBox box = family.domain_box();
    std::vector<double> corner(measure.dimension());
    for (int j = 0; j < measure.dimension(); ++j) corner[j] = measure.support_max(j);
    if (!box.contains(E, corner)) {
        std::ostringstream os;
        os << family.name() << ": (E=" << E << ", measure " << measure.describe()
           << ") exceeds the family's domain box";
        throw ValidationError(os.str());
    }
}

RotationEstimate aggregate(const LiftFamily& family, const DisorderMeasure& measure, double E, uint64_t n,
                           int replicates, double x0, uint64_t seed, const std::vector<OrbitState>& states) {
    RotationEstimate est;
    est.E = E;
    est.n = n;
    est.replicates = replicates;
    est.seed = seed;
    est.x0 = x0;
    est.family = family.name();
    est.measure = measure.describe();
    est.per_replicate.reserve(replicates);
    for (const auto& state : states) {
        double value = (state.lift() - x0) / static_cast<double>(n);
        est.per_replicate.push_back(value);
        est.windings += static_cast<int64_t>(std::floor(state.lift() - x0));
    }
    est.rho_hat = std::accumulate(est.per_replicate.begin(), est.per_replicate.end(), 0.0) / replicates;
    if (replicates > 1) {
        double ss = 0;
        for (double v : est.per_replicate) ss += (v - est.rho_hat) * (v - est.rho_hat);
        est.stderr_ = std::sqrt(ss / (replicates - 1) / replicates);
    }
    return est;
}

} // namespace

RotationEstimate estimate_rotation_number(const LiftFamily& family, double E, const DisorderMeasure& measure,
                                          uint64_t n, int replicates, double x0, uint64_t seed, int threads) {
    if (n < 1 || replicates < 1)
        throw ValidationError("estimate_rotation_number: n and replicates must be >= 1");
    check_measure_in_domain(family, E, measure);
    std::vector<OrbitState> states(replicates, OrbitState(x0));
    parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
        CounterRng rng(seed, r);
        states[r].advance(family, E, measure, rng, n);
    }, threads);
    return aggregate(family, measure, E, n, replicates, x0, seed, states);
}

AdaptiveRotationEstimate estimate_rotation_adaptive(const LiftFamily& family, double E,
                                                    const DisorderMeasure& measure, int replicates, double x0,
                                                    uint64_t seed, int64_t target_windings, uint64_t total_step_cap,
                                                    int threads) {
    if (replicates < 1) throw ValidationError("estimate_rotation_adaptive: replicates must be >= 1");
    check_measure_in_domain(family, E, measure);
    std::vector<OrbitState> states(replicates, OrbitState(x0));
    const uint64_t chunk = std::max<uint64_t>(100'000, total_step_cap / (64 * replicates));
    uint64_t per_replicate = 0;
    for (;;) {
        parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
            CounterRng rng(seed, r);
            states[r].advance(family, E, measure, rng, chunk);
        }, threads);
        per_replicate += chunk;
        int64_t windings = 0;
        for (const auto& s : states) windings += static_cast<int64_t>(std::floor(s.lift() - x0));
        if (windings >= target_windings || per_replicate * replicates >= total_step_cap) break;
    }
    AdaptiveRotationEstimate out;
    out.estimate = aggregate(family, measure, E, per_replicate, replicates, x0, seed, states);
    out.capped = out.estimate.windings < target_windings;
    out.resolved = out.estimate.windings > 0;
    if (!out.resolved) {
        // zero crossings over the whole budget: one-sided 95%-style bound
        out.rho_upper_bound = 3.0 / static_cast<double>(per_replicate * replicates);
        out.estimate.rho_hat = 0.0;
    }
    return out;
}

BacktrackReport check_no_backtracking(const LiftFamily& family, double E, const DisorderMeasure& measure,
                                      uint64_t trials, std::size_t steps_per_trial, uint64_t seed, int threads) {
    if (E < 0) throw ValidationError("check_no_backtracking: requires E >= 0");
    check_measure_in_domain(family, E, measure);

    struct Trial {
        double min_lift = HUGE_VAL;
        double start = 0.0;
        std::size_t steps = 0;
        bool violated = false;
    };
    std::vector<Trial> results(trials);
    parallel_for(trials, [&](std::size_t t) {
        CounterRng letters(seed, 2 * t);
        CounterRng starts(seed, 2 * t + 1);
        double x0 = starts.uniform01(0); // x >= 0 start
        OrbitState state(x0);
        bool ok = state.advance(family, E, measure, letters, steps_per_trial, -1.0);
        results[t].min_lift = state.min_lift;
        results[t].start = x0;
        results[t].steps = static_cast<std::size_t>(state.next_letter);
        results[t].violated = !ok;
    }, threads);

    BacktrackReport report;
    report.ok = true;
    report.infimum = HUGE_VAL;
    for (uint64_t t = 0; t < trials; ++t) {
        if (results[t].min_lift < report.infimum) report.infimum = results[t].min_lift;
        if (results[t].violated && report.ok) {
            report.ok = false;
            report.witness_trial = t;
            report.witness_step = results[t].steps;
            report.witness_start = results[t].start;
        }
    }
    return report;
}

PlateauReport detect_plateau(const LiftFamily& family, const DisorderMeasure& measure, std::span<const double> e_list,
                             uint64_t budget_steps, int replicates, uint64_t seed, int threads) {
    if (e_list.empty()) throw ValidationError("detect_plateau: empty E list");
    for (double E : e_list)
        if (!(E < 0)) throw ValidationError("detect_plateau: all E must be negative");
    if (replicates < 1) throw ValidationError("detect_plateau: replicates must be >= 1");

    PlateauReport report;
    report.steps_per_e = budget_steps;
    const double x0 = family.x_star();
    const uint64_t n = std::max<uint64_t>(1, budget_steps / replicates);
    for (double E : e_list) {
        check_measure_in_domain(family, E, measure);
        RotationEstimate est = estimate_rotation_number(family, E, measure, n, replicates, x0, seed, threads);
        report.e_values.push_back(E);
        report.windings.push_back(est.windings);
        if (est.windings != 0) report.plateau = false;
    }
    return report;
}

BracketConstants default_bracket_constants(const LiftFamily& family, const DisorderMeasure& measure,
                                           const LocalBounds& bounds) {
    const int k = family.tangency_k();
    BracketConstants constants;
    constants.A = 2.0 * bound_n1(k, bounds.c1, 1.0).C1;
    constants.a = bound_n2(k, bounds.c2, 1.0).C2 / 2.0;
    BlockSpec spec = BlockSpec::for_family(family, measure, bounds, 1);
    constants.b = spec.b;
    constants.p1 = spec.p1;
    constants.C = measure.density().C;
    constants.l = measure.density().l;
    return constants;
}

RotationBracket rotation_bracket(double E, int k, const BracketConstants& constants) {
    if (!(E > 0)) throw ValidationError("rotation_bracket: requires E > 0");
    if (!(constants.A > 0 && constants.a > 0 && constants.b > 0 && constants.C > 0 && constants.l > 0))
        throw ValidationError("rotation_bracket: constants must be positive");
    if (!(constants.p1 > 0 && constants.p1 < 1))
        throw ValidationError("rotation_bracket: p1 must lie in (0,1)");

    RotationBracket out;
    out.E = E;
    out.k = k;
    out.constants = constants;
    const double scale = std::pow(E, -scaling_exponent(k));
    out.N = static_cast<int64_t>(std::ceil(constants.A * scale));
    out.N_prime = static_cast<int64_t>(std::floor(constants.a * scale));
    if (out.N_prime < 1)
        throw ValidationError("rotation_bracket: N' = floor(a E^{-(2k-1)/2k}) must be >= 1; a is too small");
    const double ln_good_letter = std::log(constants.C) + constants.l * std::log(constants.b * E);
    out.ln_lower = -std::log(static_cast<double>(out.N)) + static_cast<double>(out.N) * ln_good_letter;
    out.ln_upper =
        -std::log(static_cast<double>(out.N_prime)) + static_cast<double>(out.N_prime) * std::log1p(-constants.p1);
    out.consistent = out.ln_lower <= out.ln_upper;
    return out;
}

} // namespace circlift
