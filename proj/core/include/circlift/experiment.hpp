#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

namespace circlift {

// Formats a double so the CSV bytes are reproducible and round-trip exactly.
std::string csv_double(double v);

// FNV-1a over the canonical (sorted-key, minified) dump of the config.
std::string config_hash(const nlohmann::json& config);

// Validates an experiment config against its schema. Unknown keys anywhere in
// the document are errors. Returns the config with defaults filled in.
nlohmann::json validate_experiment_config(const nlohmann::json& config);

struct ExperimentResult {
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
    std::filesystem::path plot_path; // empty unless plot emission was requested
    nlohmann::json summary;
    bool all_checks_passed = true;
    bool budget_exhausted = false;
};

// Dispatches a validated config to the matching pipeline and writes the
// report bundle (CSV rows in deterministic grid order, a JSON summary with
// config hash / seed / wall time / per-check flags, and optionally a
// gnuplot-ready script). CSV bytes are reproducible given (config, seed).
ExperimentResult run_experiment(const nlohmann::json& config, std::ostream& log);

} // namespace circlift
