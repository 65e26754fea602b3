#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace circlift {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;    // 0 when n == 2
    double max_abs_residual = 0.0;
    int n = 0;
};

// Ordinary least squares of z against x. Needs n >= 2 and non-degenerate x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> z);

// Least-squares slope of ln(-ln drho) against ln E over the valid pairs.
// Pairs with drho <= 0 are excluded as unresolved, drho >= 1 as outside the
// functional's domain; exclusions are recorded, never imputed.
struct ExponentFit {
    LinearFit fit;
    std::vector<std::size_t> used;
    std::vector<std::size_t> excluded;
    std::vector<std::string> exclusion_reason;

    nlohmann::json to_json() const;
};

ExponentFit fit_lifshitz_exponent(std::span<const std::pair<double, double>> e_drho_pairs);

} // namespace circlift
