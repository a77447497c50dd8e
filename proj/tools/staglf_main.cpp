#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "staglf/cli.hpp"

using staglf::RunConfig;

int main(int argc, char** argv) {
    CLI::App app{"staggered Lax-Friedrichs schemes for periodic conservation laws:\n"
                 "solvers, periodic states, effective Hamiltonians, random-walk\n"
                 "representations and convergence diagnostics"};
    app.require_subcommand(1);

    std::string config_path, out;
    long long threads = -1;
    long long seed = -1;
    bool verbose = false;

    const std::pair<const char*, const char*> commands[] = {
        {"solve", "run an initial-value problem and dump the trajectory"},
        {"periodic", "find the time-periodic state and the effective Hamiltonian"},
        {"sweep", "effective Hamiltonian over a c-range with convexity checks"},
        {"converge", "mesh-refinement study with fitted order"},
        {"walk", "random-walk value representation and deviation report"},
        {"stability", "long-run stability with barrier and decay envelopes"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "configuration file (sectioned key = value)");
        sub->add_option("--out", out, "output directory (overrides [run] out)");
        sub->add_option("--threads", threads, "worker count (overrides [run] threads)");
        sub->add_option("--seed", seed, "RNG seed (overrides [run] seed)");
        sub->add_flag("--verbose", verbose, "chatty progress output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : staglf::cli::kExitConfig;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::string text;
            try {
                text = staglf::read_text_file(config_path);
            } catch (const std::exception& e) {
                throw staglf::ConfigError(e.what());
            }
            cfg = RunConfig::parse(text);
        }
        if (!out.empty()) cfg.set("run", "out", out);
        if (threads >= 0) cfg.set("run", "threads", std::to_string(threads));
        if (seed >= 0) cfg.set("run", "seed", std::to_string(seed));
        if (verbose) cfg.set("run", "verbose", "true");

        std::ostream& log = std::cout;
        const std::string name = app.get_subcommands().front()->get_name();
        return staglf::cli::run_command(name, cfg, log);
    } catch (const staglf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return staglf::cli::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return staglf::cli::kExitNumeric;
    }
}
