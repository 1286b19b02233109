#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "biflow/config.hpp"
#include "biflow/errors.hpp"

namespace {

void emit_error(const std::string& type, const std::string& message) {
    nlohmann::json j;
    j["error"]["type"] = type;
    j["error"]["message"] = message;
    std::cerr << j.dump(2) << std::endl;
}

biflow::RunConfig load(const std::string& path, const std::string& out_dir,
                       long long seed_override, double tol_scale) {
    biflow::RunConfig cfg = biflow::RunConfig::from_file(path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (tol_scale > 0.0) cfg.tolerance_scale *= tol_scale;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biflow: numerical laboratory for the fourth-order flow "
                 "du/dt + (-Lap)^2 u = div F(grad u)"};
    app.require_subcommand(1);

    int threads = 1;
    std::string out_dir;
    long long seed_override = -1;
    double tolerance_scale = 0.0;
    app.add_option("--threads", threads, "internal parallelism bound (currently single-threaded)");
    app.add_option("--out-dir", out_dir, "override the artifact directory");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--tolerance-scale", tolerance_scale,
                   "multiply all experiment tolerances (exploratory runs)");

    std::string run_config, solve_config, snapshot;
    double norms_R = 0.0;

    CLI::App* run = app.add_subcommand("run", "run the experiment named in the config");
    run->add_option("config", run_config, "TOML run configuration")->required();

    CLI::App* solve = app.add_subcommand("solve", "bare solve, snapshots + diagnostics");
    solve->add_option("config", solve_config, "TOML run configuration")->required();

    CLI::App* norms = app.add_subcommand("norms", "norm report for a stored field snapshot");
    norms->add_option("snapshot", snapshot, "field snapshot (.bifl)")->required();
    norms->add_option("--R", norms_R, "ball-radius cap (default box_length/4)");

    CLI::App* experiments = app.add_subcommand("experiments", "experiment registry");
    experiments->add_subcommand("list", "list runnable experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return biflow::run_experiment_config(
            load(run_config, out_dir, seed_override, tolerance_scale), std::cout);
        if (*solve) return biflow::run_solve_config(
            load(solve_config, out_dir, seed_override, tolerance_scale), std::cout);
        if (*norms) return biflow::norms_report(snapshot, norms_R, std::cout);
        if (*experiments) {
            for (const auto& name : biflow::runnable_experiments()) std::cout << name << '\n';
            return 0;
        }
    } catch (const biflow::ConfigError& e) {
        emit_error("config", e.what());
        return 3;
    } catch (const biflow::DomainError& e) {
        emit_error("domain", e.what());
        return 3;
    } catch (const biflow::ResolutionError& e) {
        emit_error("resolution", e.what());
        return 4;
    } catch (const biflow::SmallnessViolation& e) {
        emit_error("smallness", e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 1;
    }
    return 0;
}
