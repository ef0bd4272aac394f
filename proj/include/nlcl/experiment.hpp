#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nlcl/dynamics.hpp"
#include "nlcl/measure.hpp"
#include "nlcl/model.hpp"
#include "nlcl/verify.hpp"

namespace nlcl {

/// A fully resolved experiment description. Experiments are seed-free and
/// deterministic: the same config produces byte-identical outputs.
struct ExperimentConfig {
    ModelSpec model;
    std::optional<Measure1D> initial;    // required; optional only for storage
    std::optional<Measure1D> initial_b;  // paired datum for stability checks
    std::size_t N = 0;
    RhsMode mode = RhsMode::ParticleV;
    double horizon = 0.0;  // T
    std::optional<double> dt;
    std::vector<double> snapshot_times;
    std::string output_dir = "out";
    std::vector<double> velocity_queries;
    std::vector<TestBump> bumps;
    std::optional<double> weak_residual_tol;
    std::vector<double> stability_orders;  // default {2}

    struct Corrupt {
        std::size_t snapshot = 0;
        std::size_t index = 0;
    };
    std::optional<Corrupt> corrupt;  // test hook: displace one particle
};

/// Parse a config file / JSON text. Throws ConfigError naming the offending
/// field.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

/// Run the configured integration (applying the corruption hook if set).
Trajectory run_trajectory(const ExperimentConfig& config);

/// Subcommand drivers. Each writes its files under config.output_dir and
/// returns a process exit code (0 success / all bounds pass, 1 failure).
/// Configuration misuse throws ConfigError (exit code 2 in the CLI).
int run_simulate(const ExperimentConfig& config);
int run_verify(const ExperimentConfig& config, const std::vector<std::string>& bounds);
int run_oracle_compare(const ExperimentConfig& config);
int run_converge(const ExperimentConfig& config, const std::vector<std::size_t>& Ns, double p);

/// Parallelism cap for the converge sweep: NLCL_THREADS env var, default the
/// available hardware concurrency.
std::size_t thread_cap();

}  // namespace nlcl
