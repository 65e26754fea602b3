#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "circlift/disorder.hpp"
#include "circlift/lift_family.hpp"

namespace circlift {

struct RotationEstimate {
    double E = 0.0;
    double rho_hat = 0.0;   // mean of per-replicate (final - x0)/n
    double stderr_ = 0.0;   // sample std across replicates / sqrt(R)
    int64_t windings = 0;   // sum over replicates of floor(final - x0)
    uint64_t n = 0;         // orbit length per replicate
    int replicates = 0;
    uint64_t seed = 0;
    double x0 = 0.0;
    std::vector<double> per_replicate;
    std::string family;
    std::string measure;
};

// Finite-n estimator of Birkhoff winding rate. Replicate r draws its letters
// from stream r of `seed`; replicates run in parallel and aggregate in
// replicate order, so results are independent of scheduling.
RotationEstimate estimate_rotation_number(const LiftFamily& family, double E, const DisorderMeasure& measure,
                                          uint64_t n, int replicates, double x0, uint64_t seed, int threads = 0);

// Adaptive variant: keeps extending orbits until the aggregate winding count
// reaches target_windings or total steps hit the cap. A capped zero-winding
// run reports the one-sided bound rho <= 3/steps instead of a point estimate.
struct AdaptiveRotationEstimate {
    RotationEstimate estimate;
    bool capped = false;
    bool resolved = true;
    double rho_upper_bound = 0.0; // meaningful when unresolved
};
AdaptiveRotationEstimate estimate_rotation_adaptive(const LiftFamily& family, double E,
                                                    const DisorderMeasure& measure, int replicates, double x0,
                                                    uint64_t seed, int64_t target_windings = 50,
                                                    uint64_t total_step_cap = 1'000'000'000, int threads = 0);

struct BacktrackReport {
    bool ok = false;
    double infimum = 0.0;  // lowest lift value seen over all trials
    uint64_t witness_trial = 0;
    std::size_t witness_step = 0;
    double witness_start = 0.0;
};

// Samples `trials` random words and starts x0 >= 0 and checks the orbit never
// drops to -1 or below. Returns the observed infimum; ok=false carries the
// witness of the first violation.
BacktrackReport check_no_backtracking(const LiftFamily& family, double E, const DisorderMeasure& measure,
                                      uint64_t trials, std::size_t steps_per_trial, uint64_t seed, int threads = 0);

struct PlateauReport {
    bool plateau = true;
    std::vector<double> e_values;
    std::vector<int64_t> windings;
    uint64_t steps_per_e = 0;
};

// True iff the winding count is exactly zero over the whole budget for every
// listed E < 0. Orbits start at x_*, the base of the trapping interval.
PlateauReport detect_plateau(const LiftFamily& family, const DisorderMeasure& measure, std::span<const double> e_list,
                             uint64_t budget_steps, int replicates, uint64_t seed, int threads = 0);

struct BracketConstants {
    double A = 1.0;  // lower-bound block multiple, N = ceil(A E^-(2k-1)/2k)
    double a = 1.0;  // upper-bound block multiple, N' = floor(a E^-(2k-1)/2k)
    double b = 1.0;  // good-letter threshold scale
    double C = 1.0;  // measure density constant
    double l = 1.0;  // measure density exponent
    double p1 = 0.5; // bad-letter probability
};

struct LocalBounds; // assumptions.hpp

// Default constants for a concrete (family, measure) pair: A and a come from
// the passage-time constants at the sampled curvature brackets
// (A = 2 C1(lambda = c1), a = C2(Lambda = c2) / 2), b is the largest
// power-of-two good threshold, (C, l) are the measure's declared density
// constants, and p1 is the probability of the constructed bad corner.
BracketConstants default_bracket_constants(const LiftFamily& family, const DisorderMeasure& measure,
                                           const LocalBounds& bounds);

struct RotationBracket {
    double E = 0.0;
    int k = 1;
    BracketConstants constants;
    int64_t N = 0;
    int64_t N_prime = 0;
    double ln_lower = 0.0; // ln[(1/N)(C (bE)^l)^N]
    double ln_upper = 0.0; // ln[(1/N')(1-p1)^{N'}]
    bool consistent = true; // ln_lower <= ln_upper; reported, not asserted
};

// Evaluates both closed forms in log space (the raw values underflow long
// before the asymptotic regime). Requires E > 0, positive constants,
// p1 in (0,1), and N' >= 1.
RotationBracket rotation_bracket(double E, int k, const BracketConstants& constants);

} // namespace circlift
