#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wke/collision.hpp"

namespace wke {

/// Config error with the source position; what() reads "<source>:<line>: <message>" (line 0 omits the line).
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& source, int line, const std::string& message);
    std::string source;
    int line = 0;
};

struct ExperimentConfig {
    // evolve / picard
    double T = 1.0;
    double dt = 0.1;
    std::string scheme = "rk4";
    std::string g0 = "preset:null-free-random";  ///< preset:{null-free-random, null-only, mixed} or a field file
    double g0_norm = 0.05;           ///< discrete L2 norm of g0 (evolve)
    double g0_ball_fraction = 0.25;  ///< ||g0|| as a fraction of the ball radius (picard)
    bool strict = false;
    bool linear_only = false;
    int c_samples = 10;
    int picard_max_iter = 50;
    double picard_tol = 1e-12;
    // chart-resonance
    Vec3 chart_k{0.3, 0.4, 0.5};
    Vec3 chart_k3{0.6, 0.2, 0.7};
    // iso-evolve
    int iso_order = 8;
    double iso_amplitude = 0.05;
    // validate-oracle
    double oracle_amplitude = 0.1;
    int oracle_n_k3 = 4;
    int oracle_z_panels = 6;
    int oracle_z_order = 6;
    int oracle_band_order = 16;
    double oracle_budget = 4e9;
    double oracle_tolerance = 0.05;
    // sweep
    std::string sweep_parameter = "k_cut";  ///< k_cut, eps or n_per_axis
    std::vector<double> sweep_values{1.0};
    // check-dispersion
    int assumption_samples = 10000;
};

struct OutputConfig {
    std::string directory = "wke_out";
    std::string field_format = "csv";  ///< csv, binary or both
    bool matrix_csv = false;
};

struct RunConfig {
    std::string source = "<defaults>";
    DispersionSpec dispersion;
    EquilibriumCoeffs equilibrium;
    int n_per_axis = 6;
    int radial_points = 16;
    QuadratureConfig quadrature;
    ExperimentConfig experiment;
    OutputConfig output;
    std::uint64_t seed = 0;
    std::map<std::string, int> lines;  ///< "section.key" -> source line of the last assignment
};

/// Parses the INI-style text: optional top-level `seed = N`, sections [dispersion] [equilibrium] [grid]
/// [quadrature] [experiment] [output] with `key = value` lines; `#` or `;` start comments.
/// Unknown sections or keys, duplicates and malformed values raise ConfigError with the line number.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

/// Applies `section.key=value` (the top-level seed is `seed=value`).
void apply_override(RunConfig& cfg, const std::string& assignment);
void set_value(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value,
               int line = 0);

/// Cross-field checks; errors name the line of the offending key when known.
void validate(const RunConfig& cfg);

/// Normalized text of every key, in schema order (round-trips through parse_config).
std::string to_ini(const RunConfig& cfg);

/// All "section.key" names of the schema.
std::vector<std::string> schema_keys();

}  // namespace wke
