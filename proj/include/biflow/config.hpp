#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "biflow/experiments.hpp"
#include "biflow/grid.hpp"
#include "biflow/solver.hpp"

namespace biflow {

/// Value tree for the declarative run configuration (TOML-compatible
/// subset: [section] headers with dotted paths, key = value lines, strings,
/// numbers, booleans, and flat arrays).
struct TomlValue {
    enum class Type { String, Number, Bool, Array, Table };
    Type type = Type::Table;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<TomlValue> array;
    std::map<std::string, TomlValue> table;

    bool has(const std::string& key) const { return table.count(key) > 0; }
    const TomlValue& at(const std::string& key) const;
};

TomlValue parse_toml(const std::string& text);

/// Named initial-data generator with normalization controls.
struct InitialDataSpec {
    std::string kind = "band_noise";  // gaussian|band_noise|single_mode|bump_sum|snapshot|zero
    double amplitude = 0.01;
    double width = 0.5;
    std::vector<double> center;
    int m_min = 1;
    int m_max = 8;
    double spectral_exponent = 0.0;
    std::vector<int> mode{1};
    double phase = 0.0;
    std::string path;           // snapshot kind
    std::uint64_t seed = 0;     // 0: fall back to the run seed
    std::string normalize = "none";  // none|sup|carleson|extension
    double target = 0.05;

    Field build(const GridSpec& grid, std::uint64_t run_seed, double T) const;
};

/// Full run description; validates against module preconditions before any
/// computation and rejects unknown keys.
struct RunConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    std::string out_dir = "runs";
    double tolerance_scale = 1.0;
    double horizon = 1.0;
    double t_max = 1000.0;
    double lambda = 2.0;
    std::string solve_method = "picard";  // picard|etd

    int grid_dim = 1;
    int grid_n = 256;
    double grid_length = 2.0 * 3.14159265358979323846;

    Nonlinearity nonlinearity = Nonlinearity::cubic_coercive();
    SolverConfig solver;
    InitialDataSpec initial_data;
    InitialDataSpec initial_data_v0;
    bool has_v0 = false;

    int ensemble_draws = 24;  // smoothing-exponents ensemble size

    // static-residual profile parameters
    std::string profile_kind = "2lnr";  // 2lnr|-2lnr|r2
    int profile_points = 1000;
    double profile_r0 = 0.5;
    double profile_r1 = 50.0;

    std::string raw_text;

    GridSpec make_grid_spec() const;
    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
};

/// Experiments runnable through the CLI (the experiments module registry
/// plus the blow-up probe).
std::vector<std::string> runnable_experiments();

/// Executes the configured experiment, writes artifacts under
/// out_dir/<timestamp>_<config-hash>/, prints the verdict JSON to `out`.
/// Returns the process exit code (0 pass, 2 fail/inconclusive).
int run_experiment_config(const RunConfig& cfg, std::ostream& out);

/// Bare solve: snapshots per node plus a diagnostics sidecar.
/// Returns 0 (converged), 4 (non-convergence), or 5 (blow-up).
int run_solve_config(const RunConfig& cfg, std::ostream& out);

/// Norm report for a stored snapshot at ball-radius cap R (JSON to `out`).
int norms_report(const std::string& snapshot_path, double R, std::ostream& out);

}  // namespace biflow
