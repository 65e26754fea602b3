#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "circlift/errors.hpp"
#include "circlift/experiment.hpp"

using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitHypothesis = 4;

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

// "uniform:0,1" | "bernoulli:0@0.7,1@0.3" | "point:0"
json parse_mu(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw circlift::ValidationError("--mu: expected kind:params, e.g. uniform:0,1");
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (kind == "uniform") {
        auto vals = parse_grid(rest);
        if (vals.size() != 2) throw circlift::ValidationError("--mu uniform: expected uniform:a,b");
        return json{{"kind", "uniform"}, {"a", vals[0]}, {"b", vals[1]}};
    }
    if (kind == "bernoulli") {
        std::vector<double> atoms, weights;
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto at = item.find('@');
            if (at == std::string::npos)
                throw circlift::ValidationError("--mu bernoulli: expected bernoulli:v1@w1,v2@w2,...");
            atoms.push_back(std::stod(item.substr(0, at)));
            weights.push_back(std::stod(item.substr(at + 1)));
        }
        return json{{"kind", "bernoulli"}, {"atoms", atoms}, {"weights", weights}};
    }
    if (kind == "point") return json{{"kind", "point"}, {"v", std::stod(rest)}};
    throw circlift::ValidationError("--mu: unknown kind \"" + kind + "\"");
}

// "uniform-box:0.15" | "power-law-box:1:2" | "bernoulli:0@0.5,1@0.5"
json parse_measure(const std::string& spec) {
    auto colon = spec.find(':');
    const std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "uniform-box") {
        auto vals = parse_grid(rest);
        if (vals.empty()) throw circlift::ValidationError("--measure uniform-box: expected uniform-box:M1[,M2,...]");
        return json{{"kind", "uniform-box"}, {"d", vals.size()}, {"max", vals}};
    }
    if (kind == "power-law-box") {
        auto second = rest.find(':');
        if (second == std::string::npos)
            throw circlift::ValidationError("--measure power-law-box: expected power-law-box:M1,..:l1,..");
        auto max = parse_grid(rest.substr(0, second));
        auto exps = parse_grid(rest.substr(second + 1));
        return json{{"kind", "power-law-box"}, {"d", max.size()}, {"max", max}, {"exponent", exps}};
    }
    if (kind == "bernoulli") {
        std::vector<double> atoms, weights;
        std::stringstream ss(rest);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto at = item.find('@');
            if (at == std::string::npos)
                throw circlift::ValidationError("--measure bernoulli: expected bernoulli:v1@w1,...");
            atoms.push_back(std::stod(item.substr(0, at)));
            weights.push_back(std::stod(item.substr(at + 1)));
        }
        return json{{"kind", "bernoulli-product"}, {"d", 1}, {"atoms", atoms}, {"weights", weights}};
    }
    throw circlift::ValidationError("--measure: unknown kind \"" + kind + "\"");
}

json parse_family(const std::string& name, double amplitude, double alpha, const std::string& mu) {
    if (name == "model") return json{{"name", "model"}, {"amplitude", amplitude}};
    if (name == "rigid") return json{{"name", "rigid"}, {"alpha", alpha}};
    if (name == "anderson") return json{{"name", "anderson"}, {"mu", parse_mu(mu)}};
    throw circlift::ValidationError("--family: unknown family \"" + name + "\"");
}

int run_and_report(const json& config) {
    circlift::ExperimentResult result = circlift::run_experiment(config, std::cout);
    std::cout << "csv: " << result.csv_path.string() << "\n";
    std::cout << "summary: " << result.summary_path.string() << "\n";
    if (result.budget_exhausted) return kExitBudget;
    const std::string kind = config.at("experiment").get<std::string>();
    if (kind == "verify-assumptions" && !result.all_checks_passed) return kExitHypothesis;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification toolkit for random circle diffeomorphisms with a parabolic bottleneck"};
    app.require_subcommand(1);

    // shared options, bound per subcommand
    std::string family = "model", measure = "uniform-box:0.15", mu = "uniform:0,1";
    double amplitude = 0.2, alpha = 0.0;
    std::string out_dir = "out";
    uint64_t seed = 1;
    std::string grid;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "master seed");
    };

    // verify-assumptions
    auto* verify = app.add_subcommand("verify-assumptions", "run the assumption checks on a family");
    double delta0 = 0.1;
    std::string verify_measure;
    uint64_t bt_trials = 2000;
    uint64_t bt_steps = 2000;
    verify->add_option("--family", family, "family name (model|rigid|anderson)");
    verify->add_option("--amplitude", amplitude, "model-map amplitude");
    verify->add_option("--alpha", alpha, "rigid-rotation step");
    verify->add_option("--mu", mu, "anderson potential, e.g. uniform:0,1");
    verify->add_option("--delta0", delta0, "tangency fit window edge");
    verify->add_option("--measure", verify_measure, "also run the no-backtracking check with this measure");
    verify->add_option("--backtrack-trials", bt_trials, "no-backtracking trials");
    verify->add_option("--backtrack-steps", bt_steps, "steps per trial");
    add_common(verify);

    // rotnum
    auto* rotnum = app.add_subcommand("rotnum", "estimate rotation numbers over an E grid");
    uint64_t n = 1'000'000;
    int replicates = 8;
    double x0 = 0.0;
    bool adaptive = false;
    int64_t target_windings = 50;
    uint64_t step_cap = 1'000'000'000;
    rotnum->add_option("--family", family);
    rotnum->add_option("--amplitude", amplitude);
    rotnum->add_option("--alpha", alpha);
    rotnum->add_option("--mu", mu);
    rotnum->add_option("--measure", measure, "disorder measure, e.g. uniform-box:0.15");
    rotnum->add_option("--e-grid", grid, "comma-separated E values (ascending)")->required();
    rotnum->add_option("--n", n, "orbit length per replicate");
    rotnum->add_option("--replicates", replicates);
    rotnum->add_option("--x0", x0, "starting point");
    rotnum->add_flag("--adaptive", adaptive, "run until the winding target or the step cap");
    rotnum->add_option("--target-windings", target_windings, "adaptive stopping target");
    rotnum->add_option("--step-cap", step_cap, "adaptive total step budget");
    add_common(rotnum);

    // plateau
    auto* plateau = app.add_subcommand("plateau", "winding-count plateau check at negative E");
    double budget = 1e7;
    plateau->add_option("--family", family);
    plateau->add_option("--amplitude", amplitude);
    plateau->add_option("--alpha", alpha);
    plateau->add_option("--measure", measure);
    plateau->add_option("--e-grid", grid, "comma-separated negative E values (ascending)")->required();
    plateau->add_option("--budget", budget, "total steps per E");
    plateau->add_option("--replicates", replicates);
    add_common(plateau);

    // bottleneck sweep
    auto* bottleneck = app.add_subcommand("bottleneck", "parabolic bottleneck passage measurements");
    bottleneck->require_subcommand(1);
    auto* sweep = bottleneck->add_subcommand("sweep", "passage-time scaling sweep over an eps grid");
    int k = 1;
    double lambda = 1.0, delta = 0.5;
    sweep->add_option("--k", k, "tangency order parameter");
    sweep->add_option("--lambda", lambda, "envelope coefficient");
    sweep->add_option("--delta", delta, "window half-width");
    sweep->add_option("--eps-grid", grid, "comma-separated eps values (descending)")->required();
    add_common(sweep);

    // anderson ids / edge
    auto* anderson = app.add_subcommand("anderson", "1D Anderson model IDS and edge scans");
    anderson->require_subcommand(1);
    auto* ids = anderson->add_subcommand("ids", "integrated density of states over an energy grid");
    std::string route = "both";
    int volume = 5000, realizations = 20;
    ids->add_option("--mu", mu, "potential distribution, e.g. uniform:0,1")->required();
    ids->add_option("--route", route, "rotation|sturm|both");
    ids->add_option("--grid", grid, "comma-separated energies (ascending)")->required();
    ids->add_option("--n", n, "rotation-route orbit length");
    ids->add_option("--replicates", replicates);
    ids->add_option("--volume", volume, "sturm-route box size N");
    ids->add_option("--realizations", realizations);
    add_common(ids);

    auto* edge = anderson->add_subcommand("edge", "edge-normalized rotation number scan");
    std::string side = "lower";
    std::string edge_route = "sturm";
    int edge_volume = 10000, edge_realizations = 50;
    edge->add_option("--mu", mu)->required();
    edge->add_option("--side", side, "lower|upper");
    edge->add_option("--route", edge_route, "rotation|sturm");
    edge->add_option("--eps-grid", grid, "comma-separated eps values (descending)")->required();
    edge->add_option("--volume", edge_volume);
    edge->add_option("--realizations", edge_realizations);
    edge->add_option("--n", n);
    edge->add_option("--replicates", replicates);
    add_common(edge);

    // fit
    auto* fit = app.add_subcommand("fit", "fit the double-log exponent to (E, drho) pairs");
    std::string input_csv;
    int col_e = 0, col_drho = 1;
    bool has_header = true;
    fit->add_option("--input", input_csv, "CSV file with (E, drho) columns")->required();
    fit->add_option("--col-e", col_e, "zero-based E column");
    fit->add_option("--col-drho", col_drho, "zero-based drho column");
    fit->add_flag("!--no-header", has_header, "input has no header row");
    add_common(fit);

    // run
    auto* run = app.add_subcommand("run", "run an experiment config");
    std::string config_path;
    run->add_option("config", config_path, "experiment config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        json config;
        if (*run) {
            std::ifstream in(config_path);
            if (!in) throw circlift::ValidationError("cannot open config " + config_path);
            in >> config;
            return run_and_report(config);
        }
        config["seed"] = seed;
        config["output_dir"] = out_dir;
        if (*verify) {
            config["experiment"] = "verify-assumptions";
            config["family"] = parse_family(family, amplitude, alpha, mu);
            config["delta0"] = delta0;
            if (!verify_measure.empty()) {
                config["measure"] = parse_measure(verify_measure);
                config["backtrack_trials"] = bt_trials;
                config["backtrack_steps"] = bt_steps;
            }
        } else if (*rotnum) {
            config["experiment"] = "rotnum";
            config["family"] = parse_family(family, amplitude, alpha, mu);
            config["measure"] = parse_measure(measure);
            config["e_grid"] = parse_grid(grid);
            config["n"] = n;
            config["replicates"] = replicates;
            config["x0"] = x0;
            config["adaptive"] = adaptive;
            if (adaptive) {
                config["target_windings"] = target_windings;
                config["step_cap"] = step_cap;
            }
        } else if (*plateau) {
            config["experiment"] = "plateau";
            config["family"] = parse_family(family, amplitude, alpha, mu);
            config["measure"] = parse_measure(measure);
            config["e_grid"] = parse_grid(grid);
            config["budget_steps"] = static_cast<uint64_t>(budget);
            config["replicates"] = replicates;
        } else if (*sweep) {
            config["experiment"] = "bottleneck-sweep";
            config["k"] = k;
            config["lambda"] = lambda;
            config["delta"] = delta;
            config["eps_grid"] = parse_grid(grid);
        } else if (*ids) {
            config["experiment"] = "anderson-ids";
            config["mu"] = parse_mu(mu);
            config["route"] = route;
            config["e_grid"] = parse_grid(grid);
            config["n"] = n;
            config["replicates"] = replicates;
            config["volume"] = volume;
            config["realizations"] = realizations;
        } else if (*edge) {
            config["experiment"] = "anderson-edge";
            config["mu"] = parse_mu(mu);
            config["side"] = side;
            config["route"] = edge_route;
            config["eps_grid"] = parse_grid(grid);
            config["volume"] = edge_volume;
            config["realizations"] = edge_realizations;
            config["n"] = n;
            config["replicates"] = replicates;
        } else if (*fit) {
            std::ifstream in(input_csv);
            if (!in) throw circlift::ValidationError("cannot open input " + input_csv);
            json pairs = json::array();
            std::string line;
            bool first = true;
            while (std::getline(in, line)) {
                if (first && has_header) {
                    first = false;
                    continue;
                }
                first = false;
                if (line.empty()) continue;
                std::vector<std::string> cells;
                std::stringstream ss(line);
                std::string cell;
                while (std::getline(ss, cell, ',')) cells.push_back(cell);
                if (static_cast<int>(cells.size()) <= std::max(col_e, col_drho))
                    throw circlift::ValidationError("fit: row has too few columns: " + line);
                pairs.push_back({std::stod(cells[col_e]), std::stod(cells[col_drho])});
            }
            config["experiment"] = "fit";
            config["pairs"] = pairs;
        }
        return run_and_report(config);
    } catch (const circlift::BudgetError& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return kExitBudget;
    } catch (const circlift::HypothesisError& e) {
        std::cerr << "hypothesis check failed: " << e.what() << "\n";
        return kExitHypothesis;
    } catch (const circlift::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const circlift::InconclusiveOrderError& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
