#pragma once

// Hand-rolled generators shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "wke/collision.hpp"
#include "wke/fields.hpp"

namespace wke::testing {

inline Vec3 random_point(std::mt19937_64& rng, double kc) {
    return {uniform(rng, 0.0, kc), uniform(rng, 0.0, kc), uniform(rng, 0.0, kc)};
}

/// Random admissible Rayleigh-Jeans coefficients (a + b.k + c |k|^2 >= a - |b|_1 k_c > 0).
inline EquilibriumCoeffs random_coeffs(std::mt19937_64& rng, double kc) {
    EquilibriumCoeffs c;
    c.b = {uniform(rng, -0.3, 0.6), uniform(rng, -0.3, 0.6), uniform(rng, -0.3, 0.6)};
    c.a = 1.0 + 3.0 * 0.3 * kc + uniform(rng, 0.0, 1.0);
    c.c = uniform(rng, 0.5, 1.5);
    return c;
}

/// Positive density n = f_inf (1 + amplitude * u) with u uniform in [-1, 1] node by node.
inline Field rough_density(const CollisionEngine& e, std::mt19937_64& rng, double amplitude) {
    Field n(e.grid().size());
    for (int i = 0; i < e.grid().size(); ++i) n[i] = e.equilibrium()[i] * (1.0 + amplitude * uniform(rng, -1.0, 1.0));
    return n;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double rel_l2(const Grid& g, const Field& a, const Field& ref) {
    Field d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - ref[i];
    return g.norm(d) / g.norm(ref);
}

/// Small engine for fast tests.
inline QuadratureConfig small_quadrature(int n_k3 = 3) {
    QuadratureConfig qc;
    qc.n_k3 = n_k3;
    qc.n_alpha = 8;
    qc.n_theta = 8;
    return qc;
}

}  // namespace wke::testing
