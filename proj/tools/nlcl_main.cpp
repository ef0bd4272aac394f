#include <cstddef>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlcl/errors.hpp"
#include "nlcl/experiment.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic particle simulator for one-dimensional nonlocal conservation laws"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir_override;
    std::string bounds_arg = "gap,smoothing,support";
    std::string ns_arg = "32,64,128";
    double order = 1.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--output-dir", output_dir_override, "override the config's output_dir");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "integrate and write trajectory files");
    add_common(simulate);

    CLI::App* verify = app.add_subcommand("verify", "check closed-form bounds along the run");
    add_common(verify);
    verify->add_option("--bounds", bounds_arg,
                       "comma list of gap,smoothing,max_principle,support,stability,weak_residual");

    CLI::App* oracle = app.add_subcommand("oracle-compare",
                                          "Wasserstein gap against the exact rarefaction");
    add_common(oracle);

    CLI::App* converge = app.add_subcommand("converge", "grid-refinement distance sweep");
    add_common(converge);
    converge->add_option("--Ns", ns_arg, "ascending comma list of particle counts");
    converge->add_option("--p", order, "Wasserstein order");

    CLI11_PARSE(app, argc, argv);

    try {
        nlcl::ExperimentConfig config = nlcl::load_config(config_path);
        if (!output_dir_override.empty()) config.output_dir = output_dir_override;

        if (simulate->parsed()) return nlcl::run_simulate(config);
        if (verify->parsed()) return nlcl::run_verify(config, split_csv(bounds_arg));
        if (oracle->parsed()) return nlcl::run_oracle_compare(config);
        if (converge->parsed()) {
            std::vector<std::size_t> Ns;
            for (const auto& item : split_csv(ns_arg)) Ns.push_back(std::stoul(item));
            return nlcl::run_converge(config, Ns, order);
        }
    } catch (const nlcl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlcl::StepRejected& e) {
        std::cerr << "step rejected: " << e.what() << " (try dt=" << e.dt_suggested << ")\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
