#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wke/collision.hpp"

namespace wke {

/// delta^eps(x) = exp(-1 / (1 - (x/eps)^2)) / (Z eps) on (-eps, eps), zero outside; Z normalizes the bump to unit mass.
class Mollifier {
public:
    explicit Mollifier(double eps);
    double eps() const { return eps_; }
    double operator()(double x) const;
    /// Mass of the scaled bump by composite Gauss quadrature (1 up to roundoff).
    double mass() const;
    /// int_{-1}^{1} exp(-1 / (1 - x^2)) dx.
    static double normalization();

private:
    double eps_;
    double scale_;
};

/// Refused before any work when the estimated integrand count exceeds the budget.
struct OracleBudgetError : std::length_error {
    using std::length_error::length_error;
};

struct OracleOptions {
    int n_k3 = 4;           ///< k3 Gauss nodes per axis (the partner grid of the manifold quadrature)
    int z_panels = 6;       ///< composite panels per transverse axis of z
    int z_order = 6;        ///< Gauss points per panel
    int band_order = 16;    ///< Gauss points per band interval along the last axis of z
    double beta = 0.0;
    double node_budget = 4e9;
};

/// Brute-force collision operator with the energy delta replaced by delta^eps:
///   C_eps(n)(k) = sum_{k3 nodes} w3 int_{box} dz delta^eps(defect(k, k3, z)) n n1 n2 n3 (1/n + 1/n3 - 1/n1 - 1/n2),
/// with k1 = k + k3 - z and both z and k1 in the box. Off-node densities use n = 1 / I[1/n] (same
/// reconstruction as DensityGauge::Reciprocal). For s = 0 the z-integral resolves the band |defect| < eps
/// exactly along the last axis; otherwise composite Gauss is used on the whole range.
/// Returns one field per eps, all from a single pass.
std::vector<Field> mollified_collision(const DispersionSpec& spec, const Grid& grid, const std::vector<double>& eps,
                                       const Field& n, const OracleOptions& opt = {}, Exec exec = Exec::Parallel);
Field mollified_collision(const DispersionSpec& spec, const Grid& grid, double eps, const Field& n,
                          const OracleOptions& opt = {}, Exec exec = Exec::Parallel);

/// Estimated number of integrand evaluations.
double oracle_cost(const Grid& grid, std::size_t eps_count, const OracleOptions& opt);

/// Default schedule {4h^2, 2h^2, h^2} with h = k_c / n_per_axis.
std::vector<double> eps_schedule(const Grid& grid);

/// Extrapolation to eps -> 0 for values at eps, eps/2, eps/4 assuming an even expansion a0 + a2 eps^2 + a4 eps^4.
Field richardson(const Field& at_eps, const Field& at_half, const Field& at_quarter);

struct OracleComparison {
    std::vector<double> eps;
    std::vector<double> errors;      ///< relative L2 error of each eps level against the reference
    double extrapolated_error = 0.0;
    double observed_order = 0.0;     ///< log2 of successive differences ratio
    Field extrapolated;
};

/// Relative L2 (grid weights) comparison of the eps sequence and its extrapolation against a reference field.
OracleComparison compare_with_reference(const Grid& grid, const std::vector<double>& eps,
                                        const std::vector<Field>& values, const Field& reference);

double relative_l2(const Grid& grid, const Field& a, const Field& reference);

}  // namespace wke
