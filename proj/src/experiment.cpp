#include "nlcl/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "nlcl/errors.hpp"
#include "nlcl/oracle.hpp"

namespace nlcl {

namespace {

using nlohmann::json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const json& require_field(const json& j, const std::string& name) {
    if (!j.contains(name)) throw ConfigError("missing required field \"" + name + "\"");
    return j.at(name);
}

double require_number(const json& j, const std::string& name) {
    const json& f = require_field(j, name);
    if (!f.is_number()) throw ConfigError("field \"" + name + "\" must be a number");
    return f.get<double>();
}

double number_or_inf(const json& f, const std::string& name) {
    if (f.is_number()) return f.get<double>();
    if (f.is_string() && (f.get<std::string>() == "inf" || f.get<std::string>() == "infinity"))
        return std::numeric_limits<double>::infinity();
    throw ConfigError("field \"" + name + "\" must be a number or \"inf\"");
}

Measure1D parse_measure(const json& j, const std::string& field) {
    if (!j.is_object()) throw ConfigError("field \"" + field + "\" must be an object");
    std::vector<Atom> atoms;
    std::vector<Piece> pieces;
    if (j.contains("atoms")) {
        for (const auto& a : j.at("atoms"))
            atoms.push_back({require_number(a, "x"), require_number(a, "mass")});
    }
    if (j.contains("pieces")) {
        for (const auto& p : j.at("pieces"))
            pieces.push_back({require_number(p, "left"), require_number(p, "right"),
                              require_number(p, "density")});
    }
    try {
        return Measure1D(std::move(atoms), std::move(pieces));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("field \"" + field + "\": " + e.what());
    }
}

ModelSpec parse_model(const json& j) {
    if (j.is_string()) return builtin_model(j.get<std::string>());
    if (!j.is_object()) throw ConfigError("field \"model\" must be a name or an object");
    const std::string name = require_field(j, "name").get<std::string>();
    if (name == "table") {
        const json& t = require_field(j, "kernel_table");
        KernelTable table;
        table.x = require_field(t, "breakpoints").get<std::vector<double>>();
        table.y = require_field(t, "values").get<std::vector<double>>();
        std::optional<double> lambda, lip_V;
        if (j.contains("lambda")) lambda = require_number(j, "lambda");
        if (j.contains("lip_V")) lip_V = require_number(j, "lip_V");
        try {
            return table_model(table, lambda, lip_V);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("field \"model\": ") + e.what());
        }
    }
    if (j.contains("lambda") || j.contains("lip_V"))
        throw ConfigError("kernel overrides only apply to table kernels");
    try {
        return builtin_model(name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field \"model\": ") + e.what());
    }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string csv = "t,i,x\n";
    for (const auto& snap : traj.snapshots)
        for (std::size_t i = 0; i < snap.values.size(); ++i)
            csv += fmt17(snap.time) + "," + std::to_string(i) + "," + fmt17(snap.values[i]) + "\n";
    return csv;
}

std::string density_csv(const Trajectory& traj) {
    std::string csv = "t,left,right,density\n";
    for (const auto& snap : traj.snapshots) {
        if (!snap.strictly_increasing()) {
            std::cerr << "note: density skipped at t=" << snap.time
                      << " (coincident particles)\n";
            continue;
        }
        const Measure1D rho = reconstruct_density(snap);
        for (const auto& p : rho.pieces())
            csv += fmt17(snap.time) + "," + fmt17(p.left) + "," + fmt17(p.right) + "," +
                   fmt17(p.density) + "\n";
    }
    return csv;
}

std::string velocity_csv(const Trajectory& traj, const std::vector<double>& queries) {
    std::string csv = "t,x,G\n";
    for (const auto& snap : traj.snapshots) {
        if (!snap.strictly_increasing()) {
            std::cerr << "note: velocity field skipped at t=" << snap.time
                      << " (coincident particles)\n";
            continue;
        }
        const VelocityFieldSample sample = velocity_field(snap, traj.model, queries);
        for (std::size_t q = 0; q < sample.positions.size(); ++q)
            csv += fmt17(snap.time) + "," + fmt17(sample.positions[q]) + "," +
                   fmt17(sample.velocities[q]) + "\n";
    }
    return csv;
}

std::string meta_json(const ExperimentConfig& config, const Trajectory& traj) {
    nlohmann::ordered_json j;
    j["model"] = {{"name", config.model.name},
                  {"lambda", config.model.kernel.lambda},
                  {"lip_V", config.model.kernel.lip_V},
                  {"lip_v", config.model.velocity.lip_v},
                  {"b", config.model.velocity.b},
                  {"monotone_positive", config.model.kernel.monotone_positive}};
    j["N"] = config.N;
    j["mode"] = to_string(config.mode);
    j["T"] = config.horizon;
    j["dt"] = traj.dt;
    j["snapshot_times"] = config.snapshot_times;
    j["version"] = "0.1.0";
    return j.dump(2) + "\n";
}

std::string format_order(double p) {
    if (std::isinf(p)) return "inf";
    std::ostringstream os;
    os << p;
    return os.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }

    ExperimentConfig config;
    config.model = parse_model(require_field(j, "model"));
    config.initial = parse_measure(require_field(j, "initial"), "initial");
    if (j.contains("initial_b"))
        config.initial_b = parse_measure(j.at("initial_b"), "initial_b");

    const double n = require_number(j, "N");
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("field \"N\" must be an integer >= 1");
    config.N = static_cast<std::size_t>(n);

    config.horizon = require_number(j, "T");
    if (!(config.horizon > 0.0)) throw ConfigError("field \"T\" must be > 0");

    if (j.contains("mode")) {
        try {
            config.mode = rhs_mode_from_string(j.at("mode").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("field \"mode\": ") + e.what());
        }
    }

    if (j.contains("dt")) {
        const json& f = j.at("dt");
        if (f.is_string()) {
            if (f.get<std::string>() != "auto")
                throw ConfigError("field \"dt\" must be a positive number or \"auto\"");
        } else if (f.is_number() && f.get<double>() > 0.0) {
            config.dt = f.get<double>();
        } else {
            throw ConfigError("field \"dt\" must be a positive number or \"auto\"");
        }
    }

    if (j.contains("snapshot_times")) {
        config.snapshot_times = j.at("snapshot_times").get<std::vector<double>>();
        if (!std::is_sorted(config.snapshot_times.begin(), config.snapshot_times.end()))
            throw ConfigError("field \"snapshot_times\" must be sorted");
        if (std::adjacent_find(config.snapshot_times.begin(), config.snapshot_times.end()) !=
            config.snapshot_times.end())
            throw ConfigError("field \"snapshot_times\" must be distinct");
        if (!config.snapshot_times.empty() &&
            (config.snapshot_times.front() < 0.0 || config.snapshot_times.back() > config.horizon))
            throw ConfigError("field \"snapshot_times\" must lie in [0, T]");
    }
    if (config.snapshot_times.empty()) config.snapshot_times = {config.horizon};

    if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("velocity_queries"))
        config.velocity_queries = j.at("velocity_queries").get<std::vector<double>>();

    if (j.contains("bumps")) {
        for (const auto& b : j.at("bumps")) {
            TestBump bump;
            bump.x0 = require_number(b, "x0");
            bump.t0 = require_number(b, "t0");
            bump.a = require_number(b, "a");
            bump.s = require_number(b, "s");
            if (!(bump.a > 0.0) || !(bump.s > 0.0))
                throw ConfigError("bump radii \"a\" and \"s\" must be > 0");
            config.bumps.push_back(bump);
        }
    }
    if (j.contains("weak_residual_tol"))
        config.weak_residual_tol = require_number(j, "weak_residual_tol");

    if (j.contains("stability_p")) {
        for (const auto& f : j.at("stability_p"))
            config.stability_orders.push_back(number_or_inf(f, "stability_p"));
    }
    if (config.stability_orders.empty()) config.stability_orders = {2.0};

    if (j.contains("corrupt")) {
        const json& c = j.at("corrupt");
        ExperimentConfig::Corrupt hook;
        hook.snapshot = static_cast<std::size_t>(require_number(c, "snapshot"));
        hook.index = static_cast<std::size_t>(require_number(c, "index"));
        config.corrupt = hook;
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

Trajectory run_trajectory(const ExperimentConfig& config) {
    if (!config.initial) throw ConfigError("missing required field \"initial\"");
    const QuantileGrid grid = quantile_of(*config.initial, config.N);
    IntegrateOptions opts;
    opts.horizon = config.horizon;
    opts.dt = config.dt;
    opts.snapshot_times = config.snapshot_times;
    Trajectory traj = integrate(grid, config.model, config.mode, opts);
    if (config.corrupt) {
        const auto [k, i] = *config.corrupt;
        if (k >= traj.snapshots.size() || i < 1 || i >= traj.snapshots[k].values.size())
            throw ConfigError("corrupt hook indices out of range");
        auto& values = traj.snapshots[k].values;
        values[i] -= 2.0 * (values[i] - values[i - 1]);
    }
    return traj;
}

int run_simulate(const ExperimentConfig& config) {
    const Trajectory traj = run_trajectory(config);
    std::filesystem::create_directories(config.output_dir);
    const std::filesystem::path dir(config.output_dir);
    write_file(dir / "trajectory.csv", trajectory_csv(traj));
    write_file(dir / "density.csv", density_csv(traj));
    write_file(dir / "meta.json", meta_json(config, traj));
    if (!config.velocity_queries.empty())
        write_file(dir / "velocity.csv", velocity_csv(traj, config.velocity_queries));
    return 0;
}

int run_verify(const ExperimentConfig& config, const std::vector<std::string>& bounds) {
    const Trajectory traj = run_trajectory(config);
    std::vector<BoundReport> reports;
    for (const std::string& bound : bounds) {
        if (bound == "gap") {
            reports.push_back(check_gap(traj));
        } else if (bound == "smoothing") {
            reports.push_back(check_smoothing(traj));
        } else if (bound == "max_principle") {
            const double R = config.initial->absolutely_continuous()
                                 ? config.initial->sup_density()
                                 : std::numeric_limits<double>::infinity();
            reports.push_back(check_max_principle(traj, R));
        } else if (bound == "support") {
            reports.push_back(check_support(traj));
        } else if (bound == "stability") {
            if (!config.initial_b)
                throw ConfigError("bound \"stability\" requires field \"initial_b\"");
            ExperimentConfig paired = config;
            paired.initial = config.initial_b;
            paired.corrupt.reset();
            const Trajectory traj_b = run_trajectory(paired);
            for (const double p : config.stability_orders) {
                BoundReport r = check_stability(traj, traj_b, p);
                r.bound_name = "stability_p=" + format_order(p);
                reports.push_back(r);
            }
        } else if (bound == "weak_residual") {
            if (config.bumps.empty())
                throw ConfigError("bound \"weak_residual\" requires field \"bumps\"");
            BoundReport r;
            r.bound_name = "weak_residual";
            const double tol = config.weak_residual_tol.value_or(
                std::numeric_limits<double>::quiet_NaN());
            double worst = 0.0;
            for (const auto& bump : config.bumps) {
                const double res = weak_residual(traj, {bump}, VelocitySource::Particle);
                r.times.push_back(bump.t0);
                r.bound_values.push_back(tol);
                r.observed_values.push_back(res);
                worst = std::max(worst, res);
            }
            if (config.weak_residual_tol) {
                r.margin = *config.weak_residual_tol - worst;
                r.pass = r.margin >= 0.0;
            } else {
                r.margin = -worst;
                r.note = "informational: no weak_residual_tol configured";
            }
            reports.push_back(r);
        } else {
            throw ConfigError("unknown bound \"" + bound + "\"");
        }
    }

    std::filesystem::create_directories(config.output_dir);
    std::string out = "[";
    for (std::size_t k = 0; k < reports.size(); ++k)
        out += (k ? "," : "") + to_json_string(reports[k]);
    out += "]\n";
    write_file(std::filesystem::path(config.output_dir) / "bound_reports.json", out);

    bool failed = false;
    for (const auto& r : reports) {
        const char* status = !r.pass ? "n/a " : (*r.pass ? "pass" : "FAIL");
        std::cout << status << "  " << r.bound_name << "  margin=" << r.margin << "\n";
        if (r.pass && !*r.pass) failed = true;
    }
    return failed ? 1 : 0;
}

int run_oracle_compare(const ExperimentConfig& config) {
    if (config.model.name != "burgers_indicator")
        throw ConfigError("oracle-compare supports only the burgers_indicator model");
    const Measure1D& mu = *config.initial;
    const bool is_delta0 = mu.pieces().empty() && mu.atoms().size() == 1 &&
                           mu.atoms().front().x == 0.0;
    if (!is_delta0)
        throw ConfigError("oracle-compare covers only the unit point mass at 0");
    if (!config.snapshot_times.empty() && config.snapshot_times.front() <= 0.0)
        throw ConfigError("oracle-compare needs snapshot times > 0");

    const Trajectory traj = run_trajectory(config);
    std::string csv = "t,W1,Winf\n";
    for (const auto& snap : traj.snapshots) {
        const Measure1D rho = reconstruct_density(snap);
        const Measure1D ref = Measure1D::uniform(0.0, snap.time);
        const double w1 = wasserstein(1.0, rho, ref);
        const double winf = wasserstein(std::numeric_limits<double>::infinity(), rho, ref);
        csv += fmt17(snap.time) + "," + fmt17(w1) + "," + fmt17(winf) + "\n";
    }
    std::filesystem::create_directories(config.output_dir);
    write_file(std::filesystem::path(config.output_dir) / "oracle_gap.csv", csv);
    return 0;
}

std::size_t thread_cap() {
    if (const char* env = std::getenv("NLCL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

int run_converge(const ExperimentConfig& config, const std::vector<std::size_t>& Ns, double p) {
    if (Ns.empty()) throw ConfigError("converge needs at least one N");
    if (!std::is_sorted(Ns.begin(), Ns.end())) throw ConfigError("Ns must be ascending");
    if (std::isnan(p) || p < 1.0) throw ConfigError("order p must be >= 1");

    // run all members (including the reference at 2·max) in parallel waves
    std::vector<std::size_t> sizes = Ns;
    sizes.push_back(2 * Ns.back());
    std::vector<QuantileGrid> finals(sizes.size());
    IntegrateOptions opts;
    opts.horizon = config.horizon;
    opts.dt = config.dt;
    opts.snapshot_times = {config.horizon};

    const std::size_t cap = thread_cap();
    std::vector<std::exception_ptr> errors(sizes.size());
    for (std::size_t begin = 0; begin < sizes.size(); begin += cap) {
        const std::size_t end = std::min(sizes.size(), begin + cap);
        std::vector<std::thread> workers;
        for (std::size_t k = begin; k < end; ++k) {
            workers.emplace_back([&, k] {
                try {
                    const QuantileGrid grid = quantile_of(*config.initial, sizes[k]);
                    finals[k] = integrate(grid, config.model, config.mode, opts).snapshots.back();
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
    }
    for (const auto& error : errors)
        if (error) std::rethrow_exception(error);

    std::string csv = "N,distance\n";
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        const double d = wasserstein_grids(p, finals[k], finals.back());
        csv += std::to_string(sizes[k]) + "," + fmt17(d) + "\n";
        std::cout << "N=" << sizes[k] << "  W_" << format_order(p) << "=" << fmt17(d) << "\n";
    }
    std::filesystem::create_directories(config.output_dir);
    write_file(std::filesystem::path(config.output_dir) / "convergence.csv", csv);
    return 0;
}

}  // namespace nlcl
