#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "circlift/lift_family.hpp"

namespace circlift {

// C1 = 1/(lambda(2k-1)) + 2 + 2^{2k-1}/(lambda(2^{2k-1}-1)) + 1,
// N1 = ceil(C1 eps^{-(2k-1)/(2k)}): upper bound on the steps a lower-envelope
// orbit needs from -delta to +delta.
struct UpperStepBound {
    double C1 = 0.0;
    int64_t N1 = 0;
};
UpperStepBound bound_n1(int k, double lambda, double eps);

// C2 = 1/(Lambda+1), N2 = floor(C2 eps^{-(2k-1)/(2k)}): lower bound on the
// steps an upper-envelope orbit needs from -eps^{1/2k} to 0.
struct LowerStepBound {
    double C2 = 0.0;
    int64_t N2 = 0;
};
LowerStepBound bound_n2(int k, double Lambda, double eps);

enum class BottleneckMode { LowerEnvelope, UpperEnvelope, FamilyDriven };

// The maps f_j iterated through the parabolic collar. Envelope modes use
// f(x) = x + coeff * x^{2k} + eps; family-driven mode applies G_{E,w_j} with
// the letters of a word, while (coeff, eps) feed the printed N1/N2 bounds.
class BottleneckMap {
public:
    static BottleneckMap lower_envelope(int k, double lambda, double eps, double delta);
    static BottleneckMap upper_envelope(int k, double Lambda, double eps, double delta);
    static BottleneckMap family_driven(std::shared_ptr<const LiftFamily> family, double E, Word word,
                                       double coeff_for_bounds, double eps_for_bounds, double delta);

    double step(double x, std::size_t j) const;

    BottleneckMode mode() const { return mode_; }
    int k() const { return k_; }
    double coeff() const { return coeff_; }
    double eps() const { return eps_; }
    double delta() const { return delta_; }
    double collar_halfwidth() const; // eps^{1/(2k)}
    // eps small enough that eps^{1/(2k)} < delta / 2; outside this the phase
    // decomposition degenerates (collar wider than the window) but passage
    // counts remain well defined.
    bool in_asymptotic_regime() const;

private:
    BottleneckMap() = default;

    BottleneckMode mode_ = BottleneckMode::LowerEnvelope;
    int k_ = 1;
    double coeff_ = 1.0;
    double eps_ = 0.0;
    double delta_ = 0.0;
    std::shared_ptr<const LiftFamily> family_;
    double E_ = 0.0;
    Word word_;
};

struct PassageTimeReport {
    int64_t steps_total = 0;
    // realized phase counts at the (clipped) collar boundaries -eps^{1/2k}, +eps^{1/2k}
    int64_t m1 = 0, m2 = 0, m3 = 0;
    double C1 = 0.0, C2 = 0.0;
    int64_t N1 = 0, N2 = 0;
    double start = 0.0, target = 0.0, final_x = 0.0;
    double min_x = 0.0, max_x = 0.0;
    bool in_regime = true;
    bool capped = false; // budget ran out; counts are partial
};

// Iterates until the orbit reaches `target`, recording the collar phase split
// and the analytic N1/N2 for the declared coefficients. Increments must stay
// strictly positive on [start, target]. A capped run raises BudgetError after
// filling the partial report into `partial_out` when given.
PassageTimeReport measure_passage(const BottleneckMap& map, double start, double target,
                                  int64_t step_cap = 1'000'000'000, PassageTimeReport* partial_out = nullptr);

struct SweepPoint {
    double eps = 0.0;
    PassageTimeReport report;
};

struct ScalingSweep {
    std::vector<SweepPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double max_residual = 0.0;
};

// Runs measure_passage from -delta to +delta for each eps (points run in
// parallel, merged in grid order) and fits ln(steps) against ln(eps).
// Needs at least two grid points.
ScalingSweep scaling_sweep(int k, double lambda, double delta, std::span<const double> eps_grid,
                           int64_t step_cap = 1'000'000'000);

} // namespace circlift
