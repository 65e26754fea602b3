#include "circlift/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "circlift/anderson.hpp"
#include "circlift/assumptions.hpp"
#include "circlift/bottleneck.hpp"
#include "circlift/errors.hpp"
#include "circlift/fit.hpp"
#include "circlift/parallel.hpp"
#include "circlift/rotation.hpp"

namespace circlift {

std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string config_hash(const nlohmann::json& config) {
    const std::string dump = config.dump();
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        require(allowed.count(it.key()) > 0, where + ": unknown key \"" + it.key() + "\"");
}

std::vector<double> sorted_grid(const nlohmann::json& config, const char* key, bool descending) {
    require(config.contains(key), std::string("config: missing \"") + key + "\"");
    auto grid = config.at(key).get<std::vector<double>>();
    require(!grid.empty(), std::string("config: \"") + key + "\" must not be empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        require(descending ? grid[i] < grid[i - 1] : grid[i] > grid[i - 1],
                std::string("config: \"") + key + "\" must be sorted " + (descending ? "descending" : "ascending"));
    return grid;
}

int effective_threads(const nlohmann::json& config) {
    if (std::getenv("CIRCLIFT_THREADS")) return worker_count(); // env override wins
    if (config.contains("threads")) return config.at("threads").get<int>();
    return worker_count();
}

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const std::filesystem::path& path) : out(path, std::ios::binary) {
        if (!out) throw ValidationError("cannot open output file " + path.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    }
};

const std::set<std::string> kCommonKeys = {"experiment", "seed", "output_dir", "threads", "emit_plot"};

std::set<std::string> with_common(std::initializer_list<std::string> extra) {
    std::set<std::string> keys = kCommonKeys;
    keys.insert(extra);
    return keys;
}

} // namespace

nlohmann::json validate_experiment_config(const nlohmann::json& config) {
    require(config.is_object(), "config: expected a JSON object");
    require(config.contains("experiment"), "config: missing \"experiment\"");
    require(config.contains("seed"), "config: missing \"seed\"");
    require(config.contains("output_dir"), "config: missing \"output_dir\"");
    const std::string kind = config.at("experiment").get<std::string>();

    auto check_budget = [&](const char* key, double lo = 1) {
        if (config.contains(key))
            require(config.at(key).get<double>() >= lo, std::string("config: \"") + key + "\" must be >= " +
                                                            std::to_string(static_cast<long long>(lo)));
    };

    if (kind == "verify-assumptions") {
        check_keys(config, with_common({"family", "measure", "delta0", "backtrack_trials", "backtrack_steps",
                                        "backtrack_E"}),
                   "config");
        require(config.contains("family"), "config: missing \"family\"");
    } else if (kind == "rotnum") {
        check_keys(config,
                   with_common({"family", "measure", "e_grid", "n", "replicates", "x0", "adaptive",
                                "target_windings", "step_cap", "constants"}),
                   "config");
        require(config.contains("family") && config.contains("measure"), "config: rotnum needs family and measure");
        sorted_grid(config, "e_grid", false);
        check_budget("n");
        check_budget("replicates");
        if (config.contains("constants"))
            check_keys(config.at("constants"), {"A", "a", "b", "C", "l", "p1", "k"}, "config.constants");
    } else if (kind == "plateau") {
        check_keys(config, with_common({"family", "measure", "e_grid", "budget_steps", "replicates"}), "config");
        require(config.contains("family") && config.contains("measure"), "config: plateau needs family and measure");
        sorted_grid(config, "e_grid", false);
        check_budget("budget_steps");
        check_budget("replicates");
    } else if (kind == "bottleneck-sweep") {
        check_keys(config, with_common({"k", "lambda", "delta", "eps_grid", "step_cap"}), "config");
        sorted_grid(config, "eps_grid", true);
        check_budget("k");
    } else if (kind == "anderson-ids") {
        check_keys(config, with_common({"mu", "route", "e_grid", "n", "replicates", "volume", "realizations"}),
                   "config");
        require(config.contains("mu"), "config: anderson-ids needs \"mu\"");
        sorted_grid(config, "e_grid", false);
        check_budget("n");
        check_budget("volume", 2);
        check_budget("replicates");
        check_budget("realizations");
    } else if (kind == "anderson-edge") {
        check_keys(config,
                   with_common({"mu", "side", "route", "eps_grid", "n", "replicates", "volume", "realizations"}),
                   "config");
        require(config.contains("mu"), "config: anderson-edge needs \"mu\"");
        sorted_grid(config, "eps_grid", true);
        check_budget("volume", 2);
    } else if (kind == "fit") {
        check_keys(config, with_common({"pairs"}), "config");
        require(config.contains("pairs") && config.at("pairs").is_array(), "config: fit needs a \"pairs\" array");
    } else {
        throw ValidationError("config: unknown experiment \"" + kind + "\"");
    }
    return config;
}

namespace {

IdsRoute parse_route(const std::string& s) {
    if (s == "rotation") return IdsRoute::Rotation;
    if (s == "sturm") return IdsRoute::Sturm;
    throw ValidationError("config: route must be \"rotation\", \"sturm\" or \"both\"");
}

void emit_gnuplot(const std::filesystem::path& path, const std::string& csv_name, const std::string& title,
                  int x_col, int y_col, bool loglog) {
    std::ofstream out(path, std::ios::binary);
    out << "set datafile separator ','\n";
    out << "set key autotitle columnhead\n";
    if (loglog) out << "set logscale xy\n";
    out << "set title '" << title << "'\n";
    out << "plot '" << csv_name << "' using " << x_col << ":" << y_col << " with linespoints\n";
}

} // namespace

ExperimentResult run_experiment(const nlohmann::json& raw_config, std::ostream& log) {
    const nlohmann::json config = validate_experiment_config(raw_config);
    const std::string kind = config.at("experiment").get<std::string>();
    const uint64_t seed = config.at("seed").get<uint64_t>();
    const int threads = effective_threads(config);
    const std::filesystem::path out_dir = config.at("output_dir").get<std::string>();
    std::filesystem::create_directories(out_dir);

    ExperimentResult result;
    result.csv_path = out_dir / (kind + ".csv");
    result.summary_path = out_dir / "summary.json";
    nlohmann::json checks = nlohmann::json::object();
    nlohmann::json extra = nlohmann::json::object();

    const auto t0 = std::chrono::steady_clock::now();

    if (kind == "verify-assumptions") {
        auto family = FamilyCatalog::instance().make(config.at("family"));
        AssumptionReport report;
        if (auto* anderson = dynamic_cast<const AndersonLift*>(family.get())) {
            // the induced edge family needs the narrow quadratic fit window and
            // the measure-side (M1)/(M2) audits
            report = verify_anderson_hypotheses(anderson->model(), anderson->certified_box().e_hi);
        } else {
            AssumptionCheckOptions opts;
            if (config.contains("delta0")) opts.delta0 = config.at("delta0").get<double>();
            report = verify_assumptions(*family, opts);
        }
        CsvWriter csv(result.csv_path);
        csv.row({"check", "pass", "witness"});
        auto emit = [&](const char* name, const AssumptionCheck& c) {
            csv.row({name, c.pass ? "1" : "0", "\"" + c.witness + "\""});
        };
        emit("G1", report.g1);
        emit("G2", report.g2);
        emit("G3", report.g3);
        emit("G4", report.g4);
        emit("M3", report.m3);
        extra["report"] = report.to_json();
        checks["assumptions_pass"] = report.pass();
        log << report.to_text();
        if (config.contains("measure")) {
            auto measure = DisorderMeasure::from_json(config.at("measure"));
            uint64_t trials = config.value("backtrack_trials", 2000);
            std::size_t steps = config.value("backtrack_steps", 2000);
            double E = config.value("backtrack_E", 0.0);
            BacktrackReport back = check_no_backtracking(*family, E, measure, trials, steps, seed, threads);
            checks["no_backtracking"] = back.ok;
            extra["backtracking"] = {{"ok", back.ok},
                                     {"infimum", back.infimum},
                                     {"witness_trial", back.witness_trial},
                                     {"witness_step", back.witness_step},
                                     {"witness_start", back.witness_start}};
            log << "no-backtracking: " << (back.ok ? "pass" : "FAIL") << " (infimum " << back.infimum << ")\n";
            result.all_checks_passed = result.all_checks_passed && back.ok;
        }
        result.all_checks_passed = result.all_checks_passed && report.pass();
    } else if (kind == "rotnum") {
        auto family = FamilyCatalog::instance().make(config.at("family"));
        auto measure = DisorderMeasure::from_json(config.at("measure"));
        auto e_grid = config.at("e_grid").get<std::vector<double>>();
        const uint64_t n = config.value("n", static_cast<uint64_t>(1'000'000));
        const int replicates = config.value("replicates", 8);
        const double x0 = config.value("x0", 0.0);
        const bool adaptive = config.value("adaptive", false);
        // optional analytic bracket evaluation alongside the estimates
        const bool with_brackets = config.contains("constants");
        BracketConstants bracket_constants;
        int bracket_k = 1;
        if (with_brackets) {
            const auto& c = config.at("constants");
            bracket_constants.A = c.value("A", 1.0);
            bracket_constants.a = c.value("a", 1.0);
            bracket_constants.b = c.value("b", 1.0);
            bracket_constants.C = c.value("C", 1.0);
            bracket_constants.l = c.value("l", 1.0);
            bracket_constants.p1 = c.value("p1", 0.5);
            bracket_k = c.value("k", 1);
        }
        CsvWriter csv(result.csv_path);
        std::vector<std::string> header;
        if (adaptive)
            header = {"E", "rho_hat", "stderr", "windings", "n", "replicates", "seed", "family", "measure",
                      "resolved", "rho_upper_bound"};
        else
            header = {"E", "rho_hat", "stderr", "windings", "n", "replicates", "seed", "family", "measure"};
        if (with_brackets) {
            header.insert(header.end(), {"N", "ln_lower", "N_prime", "ln_upper"});
        }
        csv.row(header);
        auto bracket_cells = [&](double E, std::vector<std::string>& cells) {
            if (!with_brackets) return;
            if (E > 0) {
                RotationBracket bracket = rotation_bracket(E, bracket_k, bracket_constants);
                cells.push_back(std::to_string(bracket.N));
                cells.push_back(csv_double(bracket.ln_lower));
                cells.push_back(std::to_string(bracket.N_prime));
                cells.push_back(csv_double(bracket.ln_upper));
            } else {
                cells.insert(cells.end(), {"", "", "", ""});
            }
        };
        for (double E : e_grid) {
            if (adaptive) {
                auto est = estimate_rotation_adaptive(*family, E, measure, replicates, x0, seed,
                                                      config.value("target_windings", static_cast<int64_t>(50)),
                                                      config.value("step_cap", static_cast<uint64_t>(1'000'000'000)),
                                                      threads);
                std::vector<std::string> cells = {csv_double(E), csv_double(est.estimate.rho_hat),
                                                  csv_double(est.estimate.stderr_),
                                                  std::to_string(est.estimate.windings),
                                                  std::to_string(est.estimate.n), std::to_string(replicates),
                                                  std::to_string(seed), family->name(), measure.describe(),
                                                  est.resolved ? "1" : "0", csv_double(est.rho_upper_bound)};
                bracket_cells(E, cells);
                csv.row(cells);
                if (est.capped) result.budget_exhausted = true;
            } else {
                RotationEstimate est = estimate_rotation_number(*family, E, measure, n, replicates, x0, seed, threads);
                std::vector<std::string> cells = {csv_double(E), csv_double(est.rho_hat), csv_double(est.stderr_),
                                                  std::to_string(est.windings), std::to_string(est.n),
                                                  std::to_string(replicates), std::to_string(seed), family->name(),
                                                  measure.describe()};
                bracket_cells(E, cells);
                csv.row(cells);
            }
        }
    } else if (kind == "plateau") {
        auto family = FamilyCatalog::instance().make(config.at("family"));
        auto measure = DisorderMeasure::from_json(config.at("measure"));
        auto e_grid = config.at("e_grid").get<std::vector<double>>();
        PlateauReport report = detect_plateau(*family, measure, e_grid, config.value("budget_steps", 10'000'000.0),
                                              config.value("replicates", 5), seed, threads);
        CsvWriter csv(result.csv_path);
        csv.row({"E", "windings", "steps", "plateau"});
        for (std::size_t i = 0; i < report.e_values.size(); ++i)
            csv.row({csv_double(report.e_values[i]), std::to_string(report.windings[i]),
                     std::to_string(report.steps_per_e), report.plateau ? "1" : "0"});
        checks["plateau"] = report.plateau;
        extra["plateau"] = report.plateau;
        log << "plateau: " << (report.plateau ? "yes" : "no") << "\n";
    } else if (kind == "bottleneck-sweep") {
        const int k = config.value("k", 1);
        const double lambda = config.value("lambda", 1.0);
        const double delta = config.value("delta", 0.5);
        auto eps_grid = config.at("eps_grid").get<std::vector<double>>();
        const auto cap = static_cast<int64_t>(config.value("step_cap", 1e9));
        ScalingSweep sweep = scaling_sweep(k, lambda, delta, eps_grid, cap);
        CsvWriter csv(result.csv_path);
        csv.row({"epsilon", "k", "lambda", "steps", "M1", "M2", "M3", "N1", "N2"});
        bool bracketed = true;
        for (const auto& p : sweep.points) {
            const auto& r = p.report;
            csv.row({csv_double(p.eps), std::to_string(k), csv_double(lambda), std::to_string(r.steps_total),
                     std::to_string(r.m1), std::to_string(r.m2), std::to_string(r.m3), std::to_string(r.N1),
                     std::to_string(r.N2)});
            bracketed = bracketed && r.steps_total <= r.N1 && r.m2 >= r.N2;
        }
        const double target = -(2.0 * k - 1.0) / (2.0 * k);
        checks["bracketing"] = bracketed;
        extra["slope"] = sweep.slope;
        extra["slope_stderr"] = sweep.slope_stderr;
        extra["target_slope"] = target;
        log << "sweep slope " << sweep.slope << " (target " << target << ")\n";
        result.all_checks_passed = result.all_checks_passed && bracketed;
        if (config.value("emit_plot", false)) {
            result.plot_path = out_dir / "plot.gp";
            emit_gnuplot(result.plot_path, result.csv_path.filename().string(), "passage steps vs epsilon", 1, 4, true);
        }
    } else if (kind == "anderson-ids") {
        AndersonModel model = AndersonModel::from_json(config.at("mu"));
        const std::string route_str = config.value("route", std::string("both"));
        auto e_grid = config.at("e_grid").get<std::vector<double>>();
        IdsOrbitParams orbit;
        orbit.n = config.value("n", static_cast<uint64_t>(1'000'000));
        orbit.replicates = config.value("replicates", 8);
        orbit.seed = seed;
        const int volume = config.value("volume", 5000);
        const int realizations = config.value("realizations", 20);
        std::vector<IdsCurve> curves;
        if (route_str == "both" || route_str == "rotation")
            curves.push_back(ids_curve(model, IdsRoute::Rotation, e_grid, orbit, volume, realizations, threads));
        if (route_str == "both" || route_str == "sturm")
            curves.push_back(ids_curve(model, IdsRoute::Sturm, e_grid, orbit, volume, realizations, threads));
        if (route_str != "both" && route_str != "rotation" && route_str != "sturm")
            throw ValidationError("config: route must be \"rotation\", \"sturm\" or \"both\"");
        CsvWriter csv(result.csv_path);
        csv.row({"E", "route", "value", "stderr", "n_or_N", "realizations", "seed"});
        for (const auto& curve : curves)
            for (const auto& p : curve.points)
                csv.row({csv_double(p.E), to_string(curve.route), csv_double(p.ids.value), csv_double(p.ids.stderr_),
                         std::to_string(curve.n_or_volume), std::to_string(curve.replicates_or_realizations),
                         std::to_string(seed)});
        if (curves.size() == 2) {
            double max_gap = 0;
            for (std::size_t i = 0; i < e_grid.size(); ++i)
                max_gap = std::max(max_gap, std::abs(curves[0].points[i].ids.value - curves[1].points[i].ids.value));
            extra["max_route_gap"] = max_gap;
            checks["route_agreement_0.01"] = max_gap <= 0.01;
            log << "max route gap " << max_gap << "\n";
            result.all_checks_passed = result.all_checks_passed && max_gap <= 0.01;
        }
        if (config.value("emit_plot", false)) {
            result.plot_path = out_dir / "plot.gp";
            emit_gnuplot(result.plot_path, result.csv_path.filename().string(), "integrated density of states", 1, 3,
                         false);
        }
    } else if (kind == "anderson-edge") {
        AndersonModel model = AndersonModel::from_json(config.at("mu"));
        const SpectralEdge side = config.value("side", std::string("lower")) == "upper" ? SpectralEdge::Upper
                                                                                        : SpectralEdge::Lower;
        IdsRoute route = parse_route(config.value("route", std::string("sturm")));
        auto eps_grid = config.at("eps_grid").get<std::vector<double>>();
        IdsOrbitParams orbit;
        orbit.n = config.value("n", static_cast<uint64_t>(1'000'000));
        orbit.replicates = config.value("replicates", 8);
        orbit.seed = seed;
        EdgeScanResult scan = edge_scan(model, side, route, eps_grid, orbit, config.value("volume", 10000),
                                        config.value("realizations", 50), threads);
        CsvWriter csv(result.csv_path);
        csv.row({"eps", "route", "value", "stderr", "n_or_N", "realizations", "seed", "resolved", "log_log_ratio"});
        for (const auto& p : scan.points)
            csv.row({csv_double(p.eps), to_string(route), csv_double(p.rho_tilde), csv_double(p.stderr_),
                     std::to_string(route == IdsRoute::Rotation ? orbit.n
                                                                : static_cast<uint64_t>(config.value("volume", 10000))),
                     std::to_string(route == IdsRoute::Rotation ? orbit.replicates : config.value("realizations", 50)),
                     std::to_string(seed), p.resolved ? "1" : "0", csv_double(p.log_log_ratio)});
        if (scan.fit.fit.n >= 2) {
            extra["fit"] = scan.fit.to_json();
            log << "edge fit slope " << scan.fit.fit.slope << "\n";
        }
        if (config.value("emit_plot", false)) {
            result.plot_path = out_dir / "plot.gp";
            emit_gnuplot(result.plot_path, result.csv_path.filename().string(), "edge-normalized rotation number", 1, 3,
                         true);
        }
    } else if (kind == "fit") {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& item : config.at("pairs")) {
            require(item.is_array() && item.size() == 2, "config: each fit pair must be [E, drho]");
            pairs.emplace_back(item[0].get<double>(), item[1].get<double>());
        }
        ExponentFit fit = fit_lifshitz_exponent(pairs);
        CsvWriter csv(result.csv_path);
        csv.row({"index", "E", "drho", "used"});
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            bool used = std::find(fit.used.begin(), fit.used.end(), i) != fit.used.end();
            csv.row({std::to_string(i), csv_double(pairs[i].first), csv_double(pairs[i].second), used ? "1" : "0"});
        }
        extra["fit"] = fit.to_json();
        log << "lifshitz fit slope " << fit.fit.slope << " +- " << fit.fit.slope_stderr << "\n";
    }

    const auto t1 = std::chrono::steady_clock::now();
    result.summary = nlohmann::json{
        {"experiment", kind},
        {"config_hash", config_hash(config)},
        {"config", config}, // full provenance, including the measure/family spec
        {"seed", seed},
        {"wall_time_ms", std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()},
        {"checks", checks},
        {"csv", result.csv_path.string()},
    };
    for (auto it = extra.begin(); it != extra.end(); ++it) result.summary[it.key()] = *it;
    std::ofstream summary_out(result.summary_path, std::ios::binary);
    summary_out << result.summary.dump(2) << "\n";
    return result;
}

} // namespace circlift
