#include "circlift/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "circlift/errors.hpp"
#include "circlift/fit.hpp"

namespace circlift {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n <= 1 || lo == hi) {
        out.push_back(lo);
        return out;
    }
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
}

std::string point_string(double E, std::span<const double> y, double x) {
    std::ostringstream os;
    os << "(E=" << E << ", y=(";
    for (std::size_t j = 0; j < y.size(); ++j) os << (j ? "," : "") << y[j];
    os << "), x=" << x << ")";
    return os.str();
}

struct ParamGrid {
    std::vector<double> e_values;
    std::vector<std::vector<double>> y_values; // per coordinate
    std::vector<double> x_values;

    // walks the full product grid
    template <typename F>
    void for_each(F&& f) const {
        std::vector<double> y(y_values.size());
        std::vector<std::size_t> idx(y_values.size(), 0);
        for (;;) {
            for (std::size_t j = 0; j < y.size(); ++j) y[j] = y_values[j][idx[j]];
            for (double E : e_values)
                for (double x : x_values) f(E, std::span<const double>(y), x);
            std::size_t j = 0;
            for (; j < idx.size(); ++j) {
                if (++idx[j] < y_values[j].size()) break;
                idx[j] = 0;
            }
            if (j == idx.size()) break;
        }
    }
};

ParamGrid make_grid(const LiftFamily& family, const AssumptionCheckOptions& opts) {
    const ParamBox box = family.certified_box();
    ParamGrid grid;
    grid.e_values = linspace(box.e_lo, box.e_hi, opts.param_grid);
    for (std::size_t j = 0; j < box.y_lo.size(); ++j)
        grid.y_values.push_back(linspace(box.y_lo[j], box.y_hi[j], opts.param_grid));
    grid.x_values = linspace(-0.5, 0.5, opts.x_grid);
    return grid;
}

} // namespace

std::string AssumptionReport::to_text() const {
    std::ostringstream os;
    auto line = [&os](const char* name, const AssumptionCheck& c) {
        os << name << ": " << (c.pass ? "pass" : "FAIL");
        if (!c.witness.empty()) os << " (" << c.witness << ")";
        os << "\n";
    };
    line("G1", g1);
    line("G2", g2);
    line("G3", g3);
    line("G4", g4);
    if (m1) line("M1", *m1);
    if (m2) line("M2", *m2);
    line("M3", m3);
    os << "k_hat: " << k_hat << "\n";
    os << "c1: " << c1 << "\n";
    os << "c2: " << c2 << "\n";
    os << "fit_slope: " << fit_slope << "\n";
    os << "fit_max_residual: " << fit_max_residual << "\n";
    os << "overall: " << (pass() ? "pass" : "FAIL") << "\n";
    return os.str();
}

nlohmann::json AssumptionReport::to_json() const {
    auto check = [](const AssumptionCheck& c) {
        nlohmann::json j{{"pass", c.pass}};
        if (!c.witness.empty()) j["witness"] = c.witness;
        return j;
    };
    nlohmann::json j{{"G1", check(g1)},           {"G2", check(g2)},
                     {"G3", check(g3)},           {"G4", check(g4)},
                     {"M3", check(m3)},           {"k_hat", k_hat},
                     {"c1", c1},                  {"c2", c2},
                     {"fit_slope", fit_slope},    {"fit_max_residual", fit_max_residual},
                     {"overall", pass()}};
    if (m1) j["M1"] = check(*m1);
    if (m2) j["M2"] = check(*m2);
    return j;
}

AssumptionReport verify_assumptions(const LiftFamily& family, const AssumptionCheckOptions& opts) {
    AssumptionReport report;
    const double h = opts.fd_step;
    const double tol = opts.sign_tol;
    const int d = family.disorder_dim();
    const ParamGrid grid = make_grid(family, opts);
    const std::vector<double> origin_y(d, 0.0);

    // G1: finite values, and the x-derivative is stable under halving the step
    // and positive (a diffeomorphism lift).
    report.g1.pass = true;
    grid.for_each([&](double E, std::span<const double> y, double x) {
        if (!report.g1.pass) return;
        double g = family.eval(E, y, x);
        double d1 = (family.eval(E, y, x + h) - family.eval(E, y, x - h)) / (2 * h);
        double d2 = (family.eval(E, y, x + h / 2) - family.eval(E, y, x - h / 2)) / h;
        if (!std::isfinite(g) || !std::isfinite(d1)) {
            report.g1 = {false, "non-finite value at " + point_string(E, y, x)};
        } else if (std::abs(d1 - d2) > 1e-3 * (1.0 + std::abs(d1))) {
            report.g1 = {false, "unstable x-derivative at " + point_string(E, y, x)};
        } else if (d1 <= 0) {
            report.g1 = {false, "non-increasing in x at " + point_string(E, y, x)};
        }
    });

    // G2: tangency order and curvature brackets from the unperturbed map.
    {
        const double x_hi = opts.delta0;
        const double x_lo = std::max(1e-4, opts.delta0 * std::pow(10.0, -opts.fit_decades));
        std::vector<double> lx, lz, ratios;
        bool sign_fail = false, degenerate = false;
        double worst_x = 0.0;
        const int m = opts.fit_points_per_side;
        for (int side = 0; side < 2 && !sign_fail && !degenerate; ++side) {
            for (int i = 0; i < m; ++i) {
                double mag = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / (m - 1));
                double x = side == 0 ? mag : -mag;
                double diff = family.eval(0.0, origin_y, x) - x;
                if (std::abs(diff) < 1e-300) {
                    degenerate = true;
                    worst_x = x;
                    break;
                }
                if (diff <= 0) {
                    sign_fail = true;
                    worst_x = x;
                    break;
                }
                lx.push_back(std::log(std::abs(x)));
                lz.push_back(std::log(diff));
                ratios.push_back(diff / std::pow(std::abs(x), 2.0 * family.tangency_k()));
            }
        }
        if (degenerate) {
            std::ostringstream os;
            os << "no even-order separation: |G_{0,0}(x) - x| vanishes at x=" << worst_x;
            report.g2 = {false, os.str()};
        } else if (sign_fail) {
            std::ostringstream os;
            os << "G_{0,0}(x) <= x at x=" << worst_x << "; no positive lower tangency bound exists";
            report.g2 = {false, os.str()};
        } else {
            LinearFit fit = linear_fit(lx, lz);
            report.fit_slope = fit.slope;
            report.fit_max_residual = fit.max_abs_residual;
            if (fit.max_abs_residual > opts.max_fit_residual) {
                std::ostringstream os;
                os << family.name() << ": tangency-order fit residual " << fit.max_abs_residual
                   << " exceeds gate " << opts.max_fit_residual << " (slope " << fit.slope << ")";
                throw InconclusiveOrderError(os.str());
            }
            report.k_hat = static_cast<int>(std::lround(fit.slope / 2.0));
            auto [lo_it, hi_it] = std::minmax_element(ratios.begin(), ratios.end());
            report.c1 = *lo_it * (1.0 - opts.bracket_margin);
            report.c2 = *hi_it * (1.0 + opts.bracket_margin);
            if (report.k_hat != family.tangency_k()) {
                std::ostringstream os;
                os << "fitted order 2k = " << fit.slope << " does not match declared k = " << family.tangency_k();
                report.g2 = {false, os.str()};
            } else if (report.c1 <= 0) {
                report.g2 = {false, "lower curvature bracket not positive"};
            } else {
                report.g2.pass = true;
            }
        }
    }

    // G3: dG/dE >= -tol on the grid, > 0 at the origin.
    report.g3.pass = true;
    grid.for_each([&](double E, std::span<const double> y, double x) {
        if (!report.g3.pass) return;
        double dE = (family.eval(E + h, y, x) - family.eval(E - h, y, x)) / (2 * h);
        if (dE < -tol) report.g3 = {false, "dG/dE = " + std::to_string(dE) + " at " + point_string(E, y, x)};
    });
    if (report.g3.pass) {
        double at_origin = (family.eval(h, origin_y, 0.0) - family.eval(-h, origin_y, 0.0)) / (2 * h);
        if (!(at_origin > tol))
            report.g3 = {false, "dG/dE = " + std::to_string(at_origin) + " not positive at the origin"};
    }

    // G4: dG/dy_j <= tol on the grid, < 0 at the origin.
    report.g4.pass = true;
    for (int j = 0; j < d && report.g4.pass; ++j) {
        grid.for_each([&](double E, std::span<const double> y, double x) {
            if (!report.g4.pass) return;
            std::vector<double> yp(y.begin(), y.end()), ym(y.begin(), y.end());
            yp[j] += h;
            ym[j] = std::max(0.0, ym[j] - h);
            double denom = yp[j] - ym[j];
            double dy = (family.eval(E, yp, x) - family.eval(E, ym, x)) / denom;
            if (dy > tol)
                report.g4 = {false, "dG/dy_" + std::to_string(j + 1) + " = " + std::to_string(dy) + " at " +
                                        point_string(E, y, x)};
        });
        if (report.g4.pass) {
            std::vector<double> yp(origin_y), ym(origin_y);
            yp[j] += h;
            double at_origin = (family.eval(0.0, yp, 0.0) - family.eval(0.0, ym, 0.0)) / h;
            if (!(at_origin < -tol))
                report.g4 = {false,
                             "dG/dy_" + std::to_string(j + 1) + " = " + std::to_string(at_origin) +
                                 " not negative at the origin"};
        }
    }

    // M3: G_{0,y}(x_*) > x_* over sampled y.
    report.m3.pass = true;
    {
        const double xs = family.x_star();
        const ParamBox box = family.certified_box();
        std::vector<std::vector<double>> axes;
        for (std::size_t j = 0; j < box.y_lo.size(); ++j) {
            double hi = opts.m3_y_max.value_or(box.y_hi[j]);
            axes.push_back(linspace(box.y_lo[j], hi, opts.param_grid));
        }
        std::vector<double> y(d);
        std::vector<std::size_t> idx(d, 0);
        for (;;) {
            for (int j = 0; j < d; ++j) y[j] = axes[j][idx[j]];
            if (!(family.eval(0.0, y, xs) > xs)) {
                report.m3 = {false, "G_{0,y}(x_*) <= x_* at " + point_string(0.0, y, xs)};
                break;
            }
            int j = 0;
            for (; j < d; ++j) {
                if (++idx[j] < axes[j].size()) break;
                idx[j] = 0;
            }
            if (j == d) break;
        }
    }

    return report;
}

LocalBounds local_bounds(const LiftFamily& family, double delta, int grid, double fd_step) {
    if (!(delta > 0)) throw ValidationError("local_bounds: delta must be positive");
    const ParamBox box = family.certified_box();
    std::vector<double> y_hi_box(box.y_hi);
    if (delta > box.e_hi || delta > *std::min_element(y_hi_box.begin(), y_hi_box.end()))
        throw ValidationError("local_bounds: [-delta,delta] x [0,delta]^{1+d} exceeds the certified box");

    const int d = family.disorder_dim();
    const double h = fd_step;
    LocalBounds out;
    out.delta = delta;
    double dE_min = HUGE_VAL, dE_max = -HUGE_VAL;
    double dy_min = HUGE_VAL, dy_max = -HUGE_VAL; // extrema of -dG/dy_j
    double ratio_min = HUGE_VAL, ratio_max = -HUGE_VAL;
    const int two_k = 2 * family.tangency_k();

    auto xs = [&](int n) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(-delta + 2 * delta * i / (n - 1));
        return v;
    };
    auto ps = [&](int n) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(delta * i / (n - 1));
        return v;
    };

    const std::vector<double> x_grid = xs(grid), p_grid = ps(grid);
    std::vector<double> y(d);
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
        for (int j = 0; j < d; ++j) y[j] = p_grid[idx[j]];
        for (double E : p_grid) {
            for (double x : x_grid) {
                double dE = (family.eval(E + h, y, x) - family.eval(E - h, y, x)) / (2 * h);
                if (dE < 0)
                    throw HypothesisError("local_bounds: dG/dE < 0 at " + point_string(E, y, x));
                dE_min = std::min(dE_min, dE);
                dE_max = std::max(dE_max, dE);
                for (int j = 0; j < d; ++j) {
                    std::vector<double> yp(y), ym(y);
                    yp[j] += h;
                    ym[j] = std::max(0.0, ym[j] - h);
                    double dy = (family.eval(E, yp, x) - family.eval(E, ym, x)) / (yp[j] - ym[j]);
                    if (dy > 0)
                        throw HypothesisError("local_bounds: dG/dy > 0 at " + point_string(E, y, x));
                    dy_min = std::min(dy_min, -dy);
                    dy_max = std::max(dy_max, -dy);
                }
            }
        }
        int j = 0;
        for (; j < d; ++j) {
            if (++idx[j] < p_grid.size()) break;
            idx[j] = 0;
        }
        if (j == d) break;
    }

    const std::vector<double> y0(d, 0.0);
    for (double x : x_grid) {
        if (std::abs(x) < delta / (4.0 * grid)) continue;
        double diff = family.eval(0.0, y0, x) - x;
        double ratio = diff / std::pow(std::abs(x), two_k);
        if (ratio <= 0)
            throw HypothesisError("local_bounds: G_{0,0}(x) - x has the wrong sign at " + point_string(0.0, y0, x));
        ratio_min = std::min(ratio_min, ratio);
        ratio_max = std::max(ratio_max, ratio);
    }

    // widen sampled extrema so the certified brackets cover the limit at x -> 0
    out.c1 = ratio_min * 0.99;
    out.c2 = ratio_max * 1.01;
    out.gamma_E = dE_min;
    out.Gamma_E = dE_max;
    out.gamma_y = dy_min;
    out.Gamma_y = dy_max;
    if (!(out.gamma_E > 0 && out.gamma_y > 0))
        throw HypothesisError("local_bounds: a derivative bound is not strictly positive");
    return out;
}

} // namespace circlift
