#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "wke/collision.hpp"

namespace wke {

enum class FieldRole { Density, Perturbation };

/// CSV layout: header "index,kx,ky,kz,value", one row per grid node.
void write_field_csv(const std::string& path, const Grid& grid, const Field& values);
Field read_field_csv(const std::string& path, const Grid& grid);

/// Binary layout: 8-byte magic "WKEFLD01", int32 n_per_axis, f64 k_cut, N f64 values (little endian).
void write_field_binary(const std::string& path, const Grid& grid, const Field& values);
Field read_field_binary(const std::string& path, const Grid& grid);

/// Smooth random field: sum of `modes` cosines cos(pi m.k / k_c) with |m_d| <= max_wavenumber,
/// coefficients uniform in [-1, 1]. Deterministic for a given engine state.
Field smooth_random_field(const Grid& grid, std::mt19937_64& rng, int modes = 8, int max_wavenumber = 2);

/// Nodal values uniform in [-1, 1].
Field rough_random_field(const Grid& grid, std::mt19937_64& rng);

/// Uniform double in [lo, hi) from the raw 53 high bits of the engine (portable across standard libraries).
double uniform(std::mt19937_64& rng, double lo, double hi);

/// Positive density f_inf (1 + amplitude * h) with h a smooth random field scaled to sup |h| = 1.
Field random_density(const CollisionEngine& engine, std::mt19937_64& rng, double amplitude);

/// Scales a field to unit discrete L2 norm (throws on the zero field).
Field normalized(const Grid& grid, Field g);

}  // namespace wke
