// slugsim command-line front end.
//
//   slugsim run <config> [--workers N] [--output DIR] [--seed S]
//   slugsim validate <config>
//
// Exit codes: 0 ok, 2 config/parameter error, 3 I/O error, 4 simulation
// failure outside per-point masking, 64 usage error.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "slugsim/config.hpp"
#include "slugsim/errors.hpp"
#include "slugsim/runner.hpp"

namespace {

enum Exit { ok = 0, config_failure = 2, io_failure = 3, sim_failure = 4, usage = 64 };

int exit_code(slugsim::ErrorKind kind) {
    switch (kind) {
        case slugsim::ErrorKind::config:
        case slugsim::ErrorKind::parameter_domain:
        case slugsim::ErrorKind::sequence: return config_failure;
        case slugsim::ErrorKind::io: return io_failure;
        default: return sim_failure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SLUG amplifier simulator"};
    app.require_subcommand(1);

    std::string config_path;
    unsigned workers = 0;
    std::string output;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "execute the experiment described by a config file");
    run->add_option("config", config_path, "path to the JSON run configuration")->required();
    auto* workers_opt = run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    auto* output_opt = run->add_option("--output", output, "output directory (overrides SLUGSIM_OUTPUT_DIR)");
    auto* seed_opt = run->add_option("--seed", seed, "master random seed");

    auto* validate = app.add_subcommand("validate", "parse and validate a config file, then print it canonically");
    validate->add_option("config", config_path, "path to the JSON run configuration")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        slugsim::RunConfig config = slugsim::load_config(config_path);
        if (*validate) {
            std::cout << slugsim::serialize_config(config);
            return ok;
        }
        if (*workers_opt) config.workers = workers;
        if (*seed_opt) config.sim.seed = seed;
        if (*output_opt) config.output_dir = output;
        else if (const char* env = std::getenv("SLUGSIM_OUTPUT_DIR"); env && *env) config.output_dir = env;
        config.validate();

        const auto manifest = slugsim::run(config);
        std::printf("%s: %zu ok, %zu masked, %.1f s -> %s\n", manifest.experiment.c_str(), manifest.points_ok,
                    manifest.points_masked, manifest.wall_time, config.output_dir.c_str());
        return ok;
    } catch (const slugsim::Error& e) {
        std::fprintf(stderr, "slugsim: %s error: %s\n", slugsim::to_string(e.kind()), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "slugsim: %s\n", e.what());
        return sim_failure;
    }
}
