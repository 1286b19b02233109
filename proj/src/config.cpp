#include "biflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "biflow/errors.hpp"
#include "biflow/initial_data.hpp"
#include "biflow/kernel.hpp"
#include "biflow/norms.hpp"
#include "biflow/snapshot.hpp"

namespace biflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

TomlValue parse_scalar(const std::string& tok, int line_no) {
    TomlValue v;
    if (tok.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty value");
    if (tok.front() == '"') {
        if (tok.size() < 2 || tok.back() != '"')
            throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
        v.type = TomlValue::Type::String;
        v.str = tok.substr(1, tok.size() - 2);
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.type = TomlValue::Type::Bool;
        v.boolean = tok == "true";
        return v;
    }
    try {
        std::size_t pos = 0;
        v.num = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing");
        v.type = TomlValue::Type::Number;
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line_no) + ": cannot parse value '" +
                          tok + "'");
    }
}

std::vector<std::string> split_array_items(const std::string& body, int line_no) {
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char c : body) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    for (const auto& it : items)
        if (it.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty array item");
    return items;
}

}  // namespace

const TomlValue& TomlValue::at(const std::string& key) const {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("config: missing key '" + key + "'");
    return it->second;
}

TomlValue parse_toml(const std::string& text) {
    TomlValue root;
    TomlValue* section = &root;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
            const std::string path = trim(line.substr(1, line.size() - 2));
            if (path.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            section = &root;
            std::size_t start = 0;
            while (true) {
                const std::size_t dot = path.find('.', start);
                const std::string part = trim(path.substr(start, dot - start));
                if (part.empty())
                    throw ConfigError("config line " + std::to_string(line_no) + ": bad section name");
                section = &section->table[part];
                section->type = TomlValue::Type::Table;
                if (dot == std::string::npos) break;
                start = dot + 1;
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (section->table.count(key))
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": unterminated array");
            TomlValue arr;
            arr.type = TomlValue::Type::Array;
            for (const auto& item : split_array_items(val.substr(1, val.size() - 2), line_no))
                arr.array.push_back(parse_scalar(item, line_no));
            section->table[key] = std::move(arr);
        } else {
            section->table[key] = parse_scalar(val, line_no);
        }
    }
    return root;
}

namespace {

double get_num(const TomlValue& t, const std::string& key, double fallback) {
    if (!t.has(key)) return fallback;
    const TomlValue& v = t.at(key);
    if (v.type != TomlValue::Type::Number) throw ConfigError("config: '" + key + "' must be a number");
    return v.num;
}

int get_int(const TomlValue& t, const std::string& key, int fallback) {
    const double d = get_num(t, key, fallback);
    if (d != std::floor(d)) throw ConfigError("config: '" + key + "' must be an integer");
    return static_cast<int>(d);
}

bool get_bool(const TomlValue& t, const std::string& key, bool fallback) {
    if (!t.has(key)) return fallback;
    const TomlValue& v = t.at(key);
    if (v.type != TomlValue::Type::Bool) throw ConfigError("config: '" + key + "' must be a bool");
    return v.boolean;
}

std::string get_str(const TomlValue& t, const std::string& key, const std::string& fallback) {
    if (!t.has(key)) return fallback;
    const TomlValue& v = t.at(key);
    if (v.type != TomlValue::Type::String) throw ConfigError("config: '" + key + "' must be a string");
    return v.str;
}

void reject_unknown(const TomlValue& t, const std::string& section,
                    const std::set<std::string>& known) {
    for (const auto& [key, v] : t.table) {
        (void)v;
        if (!known.count(key))
            throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    }
}

InitialDataSpec parse_initial(const TomlValue& t, const std::string& section) {
    reject_unknown(t, section,
                   {"kind", "amplitude", "width", "center", "m_min", "m_max",
                    "spectral_exponent", "mode", "phase", "path", "seed", "normalize",
                    "target"});
    InitialDataSpec s;
    s.kind = get_str(t, "kind", s.kind);
    s.amplitude = get_num(t, "amplitude", s.amplitude);
    s.width = get_num(t, "width", s.width);
    if (t.has("center"))
        for (const auto& v : t.at("center").array) s.center.push_back(v.num);
    s.m_min = get_int(t, "m_min", s.m_min);
    s.m_max = get_int(t, "m_max", s.m_max);
    s.spectral_exponent = get_num(t, "spectral_exponent", s.spectral_exponent);
    if (t.has("mode")) {
        s.mode.clear();
        for (const auto& v : t.at("mode").array) s.mode.push_back(static_cast<int>(v.num));
    }
    s.phase = get_num(t, "phase", s.phase);
    s.path = get_str(t, "path", s.path);
    s.seed = static_cast<std::uint64_t>(get_num(t, "seed", 0.0));
    s.normalize = get_str(t, "normalize", s.normalize);
    s.target = get_num(t, "target", s.target);
    const std::set<std::string> kinds{"gaussian", "band_noise", "single_mode",
                                      "bump_sum", "snapshot", "zero"};
    if (!kinds.count(s.kind)) throw ConfigError("config: unknown initial data kind '" + s.kind + "'");
    const std::set<std::string> norms{"none", "sup", "carleson", "extension"};
    if (!norms.count(s.normalize))
        throw ConfigError("config: unknown normalize mode '" + s.normalize + "'");
    return s;
}

}  // namespace

Field InitialDataSpec::build(const GridSpec& grid, std::uint64_t run_seed, double T) const {
    const std::uint64_t s = seed ? seed : run_seed;
    Field f = Field::zero(grid);
    if (kind == "gaussian") {
        f = gaussian_bump(grid, amplitude, width, center);
    } else if (kind == "band_noise") {
        f = band_noise(grid, m_min, m_max, amplitude, s, spectral_exponent);
    } else if (kind == "single_mode") {
        f = single_mode(grid, mode, amplitude, phase);
    } else if (kind == "bump_sum") {
        std::vector<Bump> bumps;
        const double L = grid.box_length;
        bumps.push_back({amplitude, width, std::vector<double>(grid.dim, L * 0.35)});
        bumps.push_back({-0.7 * amplitude, 1.4 * width, std::vector<double>(grid.dim, L * 0.65)});
        f = bump_sum(grid, bumps);
    } else if (kind == "snapshot") {
        f = read_snapshot(path);
        if (!(f.grid() == grid))
            throw ConfigError("initial data snapshot grid does not match [grid]");
    } else if (kind == "zero") {
        return f;
    }

    if (normalize == "none") return f;
    double current = 0.0;
    if (normalize == "sup") {
        current = f.sup_norm();
    } else if (normalize == "carleson") {
        const double R = std::min(std::pow(T, 0.25), grid.box_length / 4.0);
        current = carleson_bmo(f, R);
    } else {  // extension
        Trajectory st = semigroup_trajectory(f, graded_times(T, 32));
        current = xt_norm(st, T).total;
    }
    if (!(current > 0.0))
        throw ConfigError("initial data normalization: degenerate field (norm 0)");
    return (target / current) * f;
}

GridSpec RunConfig::make_grid_spec() const { return make_grid(grid_dim, grid_n, grid_length); }

RunConfig RunConfig::from_text(const std::string& text) {
    const TomlValue root = parse_toml(text);
    reject_unknown(root, "<root>",
                   {"run", "grid", "nonlinearity", "solver", "initial_data",
                    "initial_data_v0", "experiment"});
    RunConfig cfg;
    cfg.raw_text = text;

    if (root.has("run")) {
        const TomlValue& t = root.at("run");
        reject_unknown(t, "run",
                       {"experiment", "seed", "out_dir", "tolerance_scale", "horizon",
                        "t_max", "method"});
        cfg.experiment = get_str(t, "experiment", "");
        cfg.seed = static_cast<std::uint64_t>(get_num(t, "seed", 1.0));
        cfg.out_dir = get_str(t, "out_dir", cfg.out_dir);
        cfg.tolerance_scale = get_num(t, "tolerance_scale", 1.0);
        cfg.horizon = get_num(t, "horizon", cfg.horizon);
        cfg.t_max = get_num(t, "t_max", cfg.t_max);
        cfg.solve_method = get_str(t, "method", cfg.solve_method);
        if (cfg.solve_method != "picard" && cfg.solve_method != "etd")
            throw ConfigError("config: method must be 'picard' or 'etd'");
        if (!(cfg.tolerance_scale > 0.0))
            throw ConfigError("config: tolerance_scale must be > 0");
    }
    if (root.has("grid")) {
        const TomlValue& t = root.at("grid");
        reject_unknown(t, "grid", {"dim", "n", "length"});
        cfg.grid_dim = get_int(t, "dim", cfg.grid_dim);
        cfg.grid_n = get_int(t, "n", cfg.grid_n);
        cfg.grid_length = get_num(t, "length", cfg.grid_length);
    }
    if (root.has("nonlinearity")) {
        const TomlValue& t = root.at("nonlinearity");
        reject_unknown(t, "nonlinearity", {"kind", "p", "sigma"});
        const std::string kind = get_str(t, "kind", "cubic_coercive");
        if (kind == "cubic_coercive") {
            cfg.nonlinearity = Nonlinearity::cubic_coercive();
        } else if (kind == "cubic_noncoercive") {
            cfg.nonlinearity = Nonlinearity::cubic_noncoercive();
        } else if (kind == "power") {
            cfg.nonlinearity =
                Nonlinearity::power(get_num(t, "p", 3.0), get_int(t, "sigma", 1));
        } else {
            throw ConfigError("config: unknown nonlinearity kind '" + kind + "'");
        }
    }
    if (root.has("solver")) {
        const TomlValue& t = root.at("solver");
        reject_unknown(t, "solver",
                       {"time_nodes", "max_picard_iters", "picard_tol", "dealias",
                        "blowup_threshold", "smallness_budget", "diag_stride", "etd_steps",
                        "etd_richardson_tol", "etd_max_halvings"});
        cfg.solver.time_nodes = get_int(t, "time_nodes", cfg.solver.time_nodes);
        cfg.solver.max_picard_iters = get_int(t, "max_picard_iters", cfg.solver.max_picard_iters);
        cfg.solver.picard_tol = get_num(t, "picard_tol", cfg.solver.picard_tol);
        cfg.solver.dealias = get_bool(t, "dealias", cfg.solver.dealias);
        cfg.solver.blowup_threshold = get_num(t, "blowup_threshold", cfg.solver.blowup_threshold);
        cfg.solver.smallness_budget = get_num(t, "smallness_budget", cfg.solver.smallness_budget);
        cfg.solver.diag_stride = get_int(t, "diag_stride", cfg.solver.diag_stride);
        cfg.solver.etd_steps = get_int(t, "etd_steps", cfg.solver.etd_steps);
        cfg.solver.etd_richardson_tol =
            get_num(t, "etd_richardson_tol", cfg.solver.etd_richardson_tol);
        cfg.solver.etd_max_halvings = get_int(t, "etd_max_halvings", cfg.solver.etd_max_halvings);
    }
    if (root.has("initial_data")) cfg.initial_data = parse_initial(root.at("initial_data"), "initial_data");
    if (root.has("initial_data_v0")) {
        cfg.initial_data_v0 = parse_initial(root.at("initial_data_v0"), "initial_data_v0");
        cfg.has_v0 = true;
    }
    if (root.has("experiment")) {
        const TomlValue& t = root.at("experiment");
        reject_unknown(t, "experiment",
                       {"lambda", "profile", "profile_points", "profile_r0", "profile_r1",
                        "draws"});
        cfg.lambda = get_num(t, "lambda", cfg.lambda);
        cfg.ensemble_draws = get_int(t, "draws", cfg.ensemble_draws);
        cfg.profile_kind = get_str(t, "profile", cfg.profile_kind);
        cfg.profile_points = get_int(t, "profile_points", cfg.profile_points);
        cfg.profile_r0 = get_num(t, "profile_r0", cfg.profile_r0);
        cfg.profile_r1 = get_num(t, "profile_r1", cfg.profile_r1);
    }

    // Validate against module preconditions before any computation.
    cfg.make_grid_spec();
    cfg.solver.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

std::vector<std::string> runnable_experiments() {
    std::vector<std::string> names = experiment_names();
    names.push_back("blowup-probe");
    return names;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string make_run_dir(const RunConfig& cfg) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::gmtime(&tt));
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%08llx",
                  static_cast<unsigned long long>(fnv1a(cfg.raw_text) & 0xffffffffull));
    const std::string dir = cfg.out_dir + "/" + stamp + "_" + hash;
    std::filesystem::create_directories(dir);
    return dir;
}

RadialProfile build_profile(const RunConfig& cfg) {
    RadialProfile prof;
    prof.dim = 4;
    prof.radii = log_radii(cfg.profile_r0, cfg.profile_r1, cfg.profile_points);
    prof.values.reserve(prof.radii.size());
    for (double r : prof.radii) {
        if (cfg.profile_kind == "2lnr")
            prof.values.push_back(2.0 * std::log(r));
        else if (cfg.profile_kind == "-2lnr")
            prof.values.push_back(-2.0 * std::log(r));
        else if (cfg.profile_kind == "r2")
            prof.values.push_back(r * r);
        else
            throw ConfigError("config: unknown profile kind '" + cfg.profile_kind + "'");
    }
    return prof;
}

}  // namespace

int run_experiment_config(const RunConfig& cfg, std::ostream& out) {
    if (cfg.experiment.empty()) throw ConfigError("config: [run].experiment is required");
    const auto names = runnable_experiments();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
        throw ConfigError("config: unknown experiment '" + cfg.experiment + "'");

    const GridSpec grid = cfg.make_grid_spec();
    ExperimentResult result;

    if (cfg.experiment == "verify-kernel") {
        result = verify_kernel(cfg.grid_dim, cfg.tolerance_scale);
    } else if (cfg.experiment == "smoothing-exponents") {
        result = smoothing_exponents_ensemble(
            grid, cfg.initial_data.m_min, cfg.initial_data.m_max,
            cfg.initial_data.spectral_exponent, cfg.ensemble_draws, cfg.seed,
            cfg.tolerance_scale);
    } else if (cfg.experiment == "scaling-check") {
        result = scaling_check(cfg.initial_data.build(grid, cfg.seed, cfg.horizon), cfg.lambda,
                               cfg.solver, cfg.tolerance_scale);
    } else if (cfg.experiment == "dissipation") {
        result = dissipation_run(cfg.initial_data.build(grid, cfg.seed, cfg.horizon),
                                 cfg.nonlinearity, cfg.solver, cfg.horizon, cfg.tolerance_scale);
    } else if (cfg.experiment == "decay") {
        result = decay_run(cfg.initial_data.build(grid, cfg.seed, cfg.horizon), cfg.nonlinearity,
                           cfg.solver, cfg.t_max, cfg.tolerance_scale);
    } else if (cfg.experiment == "static-residual") {
        result = static_residual(build_profile(cfg), 1e-6 * cfg.tolerance_scale);
    } else if (cfg.experiment == "stability") {
        if (!cfg.has_v0)
            throw ConfigError("config: stability requires an [initial_data_v0] section");
        const Field u0 = cfg.initial_data.build(grid, cfg.seed, cfg.horizon);
        const Field v0 = cfg.initial_data_v0.build(grid, cfg.seed + 1, cfg.horizon);
        result = stability_run(u0, v0, cfg.nonlinearity, cfg.solver, cfg.horizon,
                               cfg.tolerance_scale);
    } else {  // blowup-probe
        const Field u0 = cfg.initial_data.build(grid, cfg.seed, cfg.horizon);
        if (cfg.nonlinearity.sign() >= 0)
            throw ConfigError("blowup-probe: nonlinearity must have negative sign");
        BlowupReport rep = blowup_probe(u0, cfg.nonlinearity, cfg.solver, cfg.t_max);
        result.name = "blowup-probe";
        result.inputs_json = "{}";
        result.series["t"] = rep.times;
        result.series["metric"] = rep.metric;
        result.scalars["detected"] = rep.detected ? 1.0 : 0.0;
        if (rep.detected) result.scalars["t_star"] = rep.t_star;
        result.notes.push_back(rep.detected ? "blow-up detected"
                                            : "no blow-up detected up to t_max");
    }

    const std::string dir = make_run_dir(cfg);
    {
        std::ofstream jf(dir + "/result.json");
        jf << result.to_json() << '\n';
        std::ofstream cf(dir + "/series.csv");
        result.write_csv(cf);
        std::ofstream ef(dir + "/config.toml");
        ef << cfg.raw_text;
    }
    nlohmann::json summary;
    summary["experiment"] = result.name;
    summary["verdict"] = result.verdict_string();
    summary["artifacts"] = dir;
    out << summary.dump(2) << std::endl;
    return result.passed() ? 0 : 2;
}

int run_solve_config(const RunConfig& cfg, std::ostream& out) {
    const GridSpec grid = cfg.make_grid_spec();
    const Field u0 = cfg.initial_data.build(grid, cfg.seed, cfg.horizon);
    const std::string dir = make_run_dir(cfg);

    Trajectory traj;
    std::string termination = "converged";
    int code = 0;
    if (cfg.solve_method == "picard") {
        auto [t, diag] = picard_solve(u0, cfg.horizon, cfg.nonlinearity, cfg.solver);
        traj = std::move(t);
        termination = to_string(diag.termination);
        std::ofstream df(dir + "/diagnostics.json");
        df << diag.to_json() << '\n';
        if (diag.termination == Termination::MaxIters) code = 4;
        if (diag.termination == Termination::Blowup) code = 5;
    } else {
        EtdResult res = etd_solve(u0, cfg.horizon, cfg.nonlinearity, cfg.solver);
        traj = std::move(res.trajectory);
        termination = to_string(res.termination);
        nlohmann::json j;
        j["termination"] = termination;
        j["steps_used"] = res.steps_used;
        if (res.termination == Termination::Blowup) {
            j["blowup_time"] = res.blowup_time;
            code = 5;
        }
        std::ofstream df(dir + "/diagnostics.json");
        df << j.dump(2) << '\n';
    }

    for (std::size_t j = 0; j < traj.fields.size(); ++j) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s/node_%04zu.bifl", dir.c_str(), j);
        write_snapshot(name, traj.fields[j]);
    }
    nlohmann::json summary;
    summary["termination"] = termination;
    summary["nodes"] = traj.fields.size();
    summary["artifacts"] = dir;
    out << summary.dump(2) << std::endl;
    return code;
}

int norms_report(const std::string& snapshot_path, double R, std::ostream& out) {
    const Field f = read_snapshot(snapshot_path);
    if (!(R > 0.0)) R = f.grid().box_length / 4.0;
    OscillationInfo info;
    const double osc = oscillation_bmo(f, R, {}, &info);
    NormReport carleson;
    const double car = carleson_bmo(f, R, {}, &carleson);
    nlohmann::json j;
    j["snapshot"] = snapshot_path;
    j["R"] = R;
    j["oscillation_bmo"] = osc;
    j["carleson_bmo"] = car;
    j["carleson_components"] = {{"k1", carleson.n_carleson[1]}, {"k2", carleson.n_carleson[2]}};
    j["skipped_balls"] = info.skipped_balls;
    j["sup_norm"] = f.sup_norm();
    j["energy_coercive"] = energy(f, +1);
    out << j.dump(2) << std::endl;
    return 0;
}

}  // namespace biflow
