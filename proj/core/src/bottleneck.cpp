#include "circlift/bottleneck.hpp"

#include <cmath>
#include <sstream>

#include "circlift/errors.hpp"
#include "circlift/fit.hpp"
#include "circlift/parallel.hpp"

namespace circlift {

namespace {

double scaling_exponent(int k) { return (2.0 * k - 1.0) / (2.0 * k); }

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

} // namespace

UpperStepBound bound_n1(int k, double lambda, double eps) {
    require(k >= 1, "bound_n1: k must be >= 1");
    require(lambda > 0 && eps > 0, "bound_n1: lambda and eps must be positive");
    const double pow_term = std::exp2(2.0 * k - 1.0);
    UpperStepBound out;
    out.C1 = 1.0 / (lambda * (2.0 * k - 1.0)) + 2.0 + pow_term / (lambda * (pow_term - 1.0)) + 1.0;
    out.N1 = static_cast<int64_t>(std::ceil(out.C1 * std::pow(eps, -scaling_exponent(k))));
    return out;
}

LowerStepBound bound_n2(int k, double Lambda, double eps) {
    require(k >= 1, "bound_n2: k must be >= 1");
    require(Lambda >= 0 && eps > 0, "bound_n2: Lambda must be >= 0 and eps positive");
    LowerStepBound out;
    out.C2 = 1.0 / (Lambda + 1.0);
    out.N2 = static_cast<int64_t>(std::floor(out.C2 * std::pow(eps, -scaling_exponent(k))));
    return out;
}

BottleneckMap BottleneckMap::lower_envelope(int k, double lambda, double eps, double delta) {
    require(k >= 1 && lambda > 0 && eps > 0 && delta > 0, "bottleneck map: k, lambda, eps, delta must be positive");
    BottleneckMap map;
    map.mode_ = BottleneckMode::LowerEnvelope;
    map.k_ = k;
    map.coeff_ = lambda;
    map.eps_ = eps;
    map.delta_ = delta;
    return map;
}

BottleneckMap BottleneckMap::upper_envelope(int k, double Lambda, double eps, double delta) {
    require(k >= 1 && Lambda >= 0 && eps > 0 && delta > 0, "bottleneck map: k, eps, delta must be positive");
    BottleneckMap map;
    map.mode_ = BottleneckMode::UpperEnvelope;
    map.k_ = k;
    map.coeff_ = Lambda;
    map.eps_ = eps;
    map.delta_ = delta;
    return map;
}

BottleneckMap BottleneckMap::family_driven(std::shared_ptr<const LiftFamily> family, double E, Word word,
                                           double coeff_for_bounds, double eps_for_bounds, double delta) {
    require(family != nullptr, "bottleneck map: family must not be null");
    require(coeff_for_bounds > 0 && eps_for_bounds > 0 && delta > 0,
            "bottleneck map: bound coefficients and delta must be positive");
    BottleneckMap map;
    map.mode_ = BottleneckMode::FamilyDriven;
    map.k_ = family->tangency_k();
    map.coeff_ = coeff_for_bounds;
    map.eps_ = eps_for_bounds;
    map.delta_ = delta;
    map.family_ = std::move(family);
    map.E_ = E;
    map.word_ = std::move(word);
    return map;
}

double BottleneckMap::step(double x, std::size_t j) const {
    if (mode_ == BottleneckMode::FamilyDriven) {
        if (j >= word_.size())
            throw ValidationError("bottleneck map: word exhausted before the passage finished");
        return family_->eval(E_, word_.letter(j), x);
    }
    double p = x;
    for (int i = 1; i < 2 * k_; ++i) p *= x;
    return x + coeff_ * p + eps_;
}

double BottleneckMap::collar_halfwidth() const { return std::pow(eps_, 1.0 / (2.0 * k_)); }

bool BottleneckMap::in_asymptotic_regime() const { return collar_halfwidth() < delta_ / 2.0; }

PassageTimeReport measure_passage(const BottleneckMap& map, double start, double target, int64_t step_cap,
                                  PassageTimeReport* partial_out) {
    require(start < target, "measure_passage: start must be below target");

    PassageTimeReport report;
    report.start = start;
    report.target = target;
    report.in_regime = map.in_asymptotic_regime();
    if (map.coeff() > 0) {
        const UpperStepBound ub = bound_n1(map.k(), map.coeff(), map.eps());
        report.C1 = ub.C1;
        report.N1 = ub.N1;
    } else {
        // the N1 formula needs a positive envelope coefficient
        report.C1 = HUGE_VAL;
        report.N1 = INT64_MAX;
    }
    const LowerStepBound lb = bound_n2(map.k(), map.coeff(), map.eps());
    report.C2 = lb.C2;
    report.N2 = lb.N2;

    const double collar = map.collar_halfwidth();
    const double collar_lo = std::max(start, -collar);
    const double collar_hi = std::min(target, collar);

    double x = start;
    report.min_x = report.max_x = x;
    int64_t steps = 0;
    while (x < target) {
        if (steps >= step_cap) {
            report.capped = true;
            report.final_x = x;
            if (partial_out) *partial_out = report;
            std::ostringstream os;
            os << "measure_passage: step cap " << step_cap << " exhausted at x = " << x;
            throw BudgetError(os.str());
        }
        const bool in_collar = x >= collar_lo && x < collar_hi;
        const bool before_collar = x < collar_lo;
        double next = map.step(x, static_cast<std::size_t>(steps));
        if (!(next > x)) {
            std::ostringstream os;
            os << "measure_passage: non-positive increment at x = " << x << " (step " << steps << ")";
            throw ValidationError(os.str());
        }
        x = next;
        ++steps;
        if (before_collar) ++report.m1;
        else if (in_collar) ++report.m2;
        else ++report.m3;
        report.min_x = std::min(report.min_x, x);
        report.max_x = std::max(report.max_x, x);
    }
    report.steps_total = steps;
    report.final_x = x;
    return report;
}

ScalingSweep scaling_sweep(int k, double lambda, double delta, std::span<const double> eps_grid, int64_t step_cap) {
    require(eps_grid.size() >= 2, "scaling_sweep: need at least two eps grid points");
    for (std::size_t i = 1; i < eps_grid.size(); ++i)
        require(eps_grid[i] < eps_grid[i - 1], "scaling_sweep: eps grid must be strictly decreasing");
    for (double eps : eps_grid) {
        BottleneckMap probe = BottleneckMap::lower_envelope(k, lambda, eps, delta);
        require(probe.in_asymptotic_regime(), "scaling_sweep: eps grid exceeds eps0; require eps^{1/(2k)} < delta/2");
    }

    ScalingSweep sweep;
    sweep.points.resize(eps_grid.size());
    parallel_for(eps_grid.size(), [&](std::size_t i) {
        const double eps = eps_grid[i];
        BottleneckMap map = BottleneckMap::lower_envelope(k, lambda, eps, delta);
        sweep.points[i] = {eps, measure_passage(map, -delta, delta, step_cap)};
    });

    std::vector<double> lx, lz;
    for (const auto& p : sweep.points) {
        lx.push_back(std::log(p.eps));
        lz.push_back(std::log(static_cast<double>(p.report.steps_total)));
    }
    LinearFit fit = linear_fit(lx, lz);
    sweep.slope = fit.slope;
    sweep.intercept = fit.intercept;
    sweep.slope_stderr = fit.slope_stderr;
    sweep.max_residual = fit.max_abs_residual;
    return sweep;
}

} // namespace circlift
