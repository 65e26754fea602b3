#include "circlift/fit.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "circlift/errors.hpp"

namespace circlift {

LinearFit linear_fit(std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size() || x.size() < 2)
        throw ValidationError("linear_fit: need at least two (x, z) points");
    const int n = static_cast<int>(x.size());
    double mx = 0, mz = 0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        mz += z[i];
    }
    mx /= n;
    mz /= n;
    double sxx = 0, sxz = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxz += (x[i] - mx) * (z[i] - mz);
    }
    if (sxx == 0) throw ValidationError("linear_fit: x values are degenerate");
    LinearFit fit;
    fit.n = n;
    fit.slope = sxz / sxx;
    fit.intercept = mz - fit.slope * mx;
    double ss_res = 0;
    for (int i = 0; i < n; ++i) {
        double r = z[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
    }
    fit.slope_stderr = n > 2 ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    return fit;
}

nlohmann::json ExponentFit::to_json() const {
    nlohmann::json exc = nlohmann::json::array();
    for (std::size_t i = 0; i < excluded.size(); ++i)
        exc.push_back({{"index", excluded[i]}, {"reason", exclusion_reason[i]}});
    return nlohmann::json{{"slope", fit.slope},
                          {"intercept", fit.intercept},
                          {"slope_stderr", fit.slope_stderr},
                          {"max_abs_residual", fit.max_abs_residual},
                          {"points_used", used},
                          {"points_excluded", exc}};
}

ExponentFit fit_lifshitz_exponent(std::span<const std::pair<double, double>> e_drho_pairs) {
    ExponentFit out;
    std::vector<double> x, z;
    for (std::size_t i = 0; i < e_drho_pairs.size(); ++i) {
        auto [E, drho] = e_drho_pairs[i];
        if (!(E > 0 && E < 1)) {
            out.excluded.push_back(i);
            out.exclusion_reason.push_back("E outside (0,1)");
            continue;
        }
        if (drho <= 0) {
            out.excluded.push_back(i);
            out.exclusion_reason.push_back("unresolved: drho <= 0");
            continue;
        }
        if (drho >= 1) {
            out.excluded.push_back(i);
            out.exclusion_reason.push_back("outside domain: drho >= 1");
            continue;
        }
        out.used.push_back(i);
        x.push_back(std::log(E));
        z.push_back(std::log(-std::log(drho)));
    }
    if (x.size() < 2) throw ValidationError("fit_lifshitz_exponent: fewer than two valid (E, drho) pairs");
    out.fit = linear_fit(x, z);
    return out;
}

} // namespace circlift
