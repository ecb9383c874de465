#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "wke/config.hpp"

namespace wke::cli {

/// Numerical failure after the run started; the diagnostics file is written before it propagates.
struct NumericalAbort : std::runtime_error {
    NumericalAbort(const std::string& message, std::filesystem::path diagnostics)
        : std::runtime_error(message), diagnostics(std::move(diagnostics)) {}
    std::filesystem::path diagnostics;
};

struct Context {
    std::string subcommand;
    RunConfig cfg;
    int threads = 1;
    std::filesystem::path out_dir;
    std::vector<std::filesystem::path> artifacts;  ///< relative to out_dir, in write order

    /// Opens out_dir / name for writing and records it as an artifact.
    std::filesystem::path artifact(const std::string& name);
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand and writes manifest.json. Returns the process exit status
/// (0 success, 2 config errors, 3 numerical aborts).
int run(Context& ctx);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace wke::cli
