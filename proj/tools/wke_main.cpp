#include <cstdlib>
#include <iostream>
#include <omp.h>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

const char* env(const char* name) {
    const char* v = std::getenv(name);
    return v && *v ? v : nullptr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for the cut-off homogeneous four-wave kinetic equation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "wke 1.0.0");

    std::string config_path;
    std::vector<std::string> overrides;
    int threads = 0;
    std::string output;
    long long seed = -1;
    std::string T, dt, scheme, g0;

    for (const std::string& name : wke::cli::subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("-c,--config", config_path, "run config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--set", overrides, "override section.key=value (repeatable)");
        sub->add_option("--threads", threads, "worker threads (default: WKE_THREADS or all cores)")
            ->check(CLI::PositiveNumber);
        sub->add_option("-o,--output", output, "output directory (default: WKE_OUTPUT_DIR or output.directory)");
        sub->add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
        if (name == "evolve" || name == "iso-evolve" || name == "picard") {
            sub->add_option("--T", T, "final time");
            sub->add_option("--dt", dt, "time step");
            sub->add_option("--scheme", scheme, "rk4 or euler");
            if (name != "iso-evolve") sub->add_option("--g0", g0, "field file or preset:{null-free-random,null-only,mixed}");
        }
    }
    CLI11_PARSE(app, argc, argv);

    wke::cli::Context ctx;
    ctx.subcommand = app.get_subcommands().front()->get_name();
    try {
        ctx.cfg = wke::load_config(config_path);
        for (const std::string& o : overrides) wke::apply_override(ctx.cfg, o);
        if (!T.empty()) wke::apply_override(ctx.cfg, "experiment.T=" + T);
        if (!dt.empty()) wke::apply_override(ctx.cfg, "experiment.dt=" + dt);
        if (!scheme.empty()) wke::apply_override(ctx.cfg, "experiment.scheme=" + scheme);
        if (!g0.empty()) wke::apply_override(ctx.cfg, "experiment.g0=" + g0);
        if (seed >= 0) wke::apply_override(ctx.cfg, "seed=" + std::to_string(seed));
        wke::validate(ctx.cfg);
        if (threads <= 0 && env("WKE_THREADS")) {
            threads = std::atoi(env("WKE_THREADS"));
            if (threads <= 0) throw wke::ConfigError("WKE_THREADS", 0, "must be a positive integer");
        }
    } catch (const wke::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    ctx.threads = threads > 0 ? threads : omp_get_num_procs();
    if (!output.empty()) ctx.out_dir = output;
    else if (env("WKE_OUTPUT_DIR")) ctx.out_dir = env("WKE_OUTPUT_DIR");
    else ctx.out_dir = ctx.cfg.output.directory;

    try {
        return wke::cli::run(ctx);
    } catch (const wke::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const wke::cli::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << "\ndiagnostics: " << e.diagnostics.string() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
