#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wke/dispersion.hpp"
#include "wke/parallel.hpp"
#include "wke/quadrature.hpp"
#include "wke/resonance.hpp"

namespace wke {

using Field = std::vector<double>;

struct QuadratureConfig {
    int n_k3 = 6;      ///< k3 Gauss nodes per axis
    int n_alpha = 24;
    int n_theta = 16;
    double beta = 0.0;
    AlphaRule alpha_rule = AlphaRule::Admissible;
    ThetaRule theta_rule = ThetaRule::ClippedArcs;
    double tol = 1e-12;

    void validate() const;
    ChartOptions chart_options() const;
};

/// Discretization of the collision integral.
///  Pointwise:    out(k_i) = sum over k3 nodes and chart points of the integrand at (k_i, u, z, k3).
///  Conservative: weak form; the test function is shared among the four partners through the
///                symmetries (k,k1,k2,k3) -> (k3,k2,k1,k), (k1,k,k3,k2), (k2,k3,k,k1) of the resonant
///                measure, so collision invariants are conserved exactly and L is W-self-adjoint.
enum class Form { Conservative, Pointwise };

/// Off-node density reconstruction for collision_operator.
///  Reciprocal:  n(x) = 1 / I[1/n](x); every Rayleigh-Jeans state is reproduced exactly (s = 0).
///  Equilibrium: n(x) = f(x) + f(x)^2 I[(n - f)/f^2](x); matches the perturbation expansion n = f(1+g).
enum class DensityGauge { Reciprocal, Equilibrium };

struct QPieces {
    Field q1_plus;
    Field q2_plus;
    Field q1_minus;
    Field q2_minus;
    Field total() const;  ///< Q1+ + Q2+ - Q1- - Q2-
};

/// Thrown when a reconstructed density is not positive at a quadrature point.
struct DensityError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Resonant-manifold quadrature over the grid. Charts for every (k, k3) pair are built once
/// at construction; all operators below reuse them. Perturbation fields g are interpolated
/// through phi = g / f_inf, so g = f_inf * {1, k, omega} is reproduced exactly.
class CollisionEngine {
public:
    CollisionEngine(const DispersionSpec& spec, const Grid& grid, const QuadratureConfig& qc,
                    const EquilibriumCoeffs& coeffs = {});

    const DispersionSpec& spec() const { return spec_; }
    const Grid& grid() const { return grid_; }
    const QuadratureConfig& quadrature() const { return qc_; }
    const EquilibriumCoeffs& coeffs() const { return coeffs_; }
    /// f_inf at the grid nodes.
    const Field& equilibrium() const { return f_; }
    double equilibrium_at(const Vec3& x) const;

    std::size_t pair_count() const { return pairs_.size(); }
    std::size_t point_count() const { return points_.size(); }
    int bracket_failures() const { return bracket_failures_; }
    bool k3_on_grid() const { return same_grid_; }

    /// Right-hand side of the kinetic equation: -int n n1 n2 n3 (1/n1 + 1/n2 - 1/n3 - 1/n).
    Field collision(const Field& n, Form form = Form::Conservative, DensityGauge gauge = DensityGauge::Reciprocal,
                    Exec exec = Exec::Parallel) const;
    /// L g = int f1 f2 f3 [g1/f1 + g2/f2 - g3/f3 - g/f].
    Field linear(const Field& g, Form form = Form::Conservative, Exec exec = Exec::Parallel) const;
    /// Symmetric bilinear Gamma(g, h); Gamma(g, g) is the quadratic part of the expansion.
    Field gamma(const Field& g, const Field& h, Form form = Form::Conservative, Exec exec = Exec::Parallel) const;
    /// Symmetric trilinear pieces of Q.
    QPieces q_pieces(const Field& a, const Field& b, const Field& c, Form form = Form::Conservative,
                     Exec exec = Exec::Parallel) const;
    /// dg/dt for n = f_inf (1 + g): L g - Gamma(g, g) - Q(g, g, g), fused in one pass.
    Field rhs(const Field& g, Form form = Form::Conservative, Exec exec = Exec::Parallel) const;
    /// -Gamma(g, g) - Q(g, g, g), fused in one pass.
    Field nonlinear(const Field& g, Form form = Form::Conservative, Exec exec = Exec::Parallel) const;

    /// a(k_i) = f^-1 int f1 f2 f3 [cross-section]; beta taken from the quadrature config.
    Field multiplication_coefficient(Exec exec = Exec::Parallel) const;
    /// K1 g = int f1 f2 f3 (g1/f1 + g2/f2), K2 g = int f1 f2 f3 g3/f3 (pointwise chart quadrature).
    Field apply_K1(const Field& g, Exec exec = Exec::Parallel) const;
    Field apply_K2(const Field& g, Exec exec = Exec::Parallel) const;

    // Access for the Dirichlet-form assembly.
    struct Pair {
        int i = 0;  ///< output node
        int j = 0;  ///< k3 node
        double w_out = 0.0;  ///< w_i
        double w_k3 = 0.0;   ///< w3_j
        double mult = 1.0;   ///< 2 for i < j on a shared grid (the pair (j, i) is folded in)
        std::size_t begin = 0;
        std::size_t end = 0;
    };
    const std::vector<Pair>& pairs() const { return pairs_; }
    const std::vector<ManifoldPoint>& points() const { return points_; }
    const Vec3& k3_node(int j) const { return k3_nodes_[j]; }
    /// Chunk boundaries over pairs (fixed count, cost balanced).
    const std::vector<std::size_t>& chunk_bounds() const { return chunk_bounds_; }

    /// Internal evaluation driver shared by the operators (defined in the implementation).
    template <int NF, int NO, class Integrand>
    std::array<Field, NO> evaluate(const std::array<const Field*, NF>& fields, int transform, bool perturbation_gauge,
                                   Form form, Exec exec, Integrand&& integrand) const;

private:
    void require_beta_zero(const char* op) const;

    DispersionSpec spec_;
    Grid grid_;
    QuadratureConfig qc_;
    EquilibriumCoeffs coeffs_;
    Field f_;
    bool same_grid_ = true;
    std::vector<Vec3> k3_nodes_;
    std::vector<double> k3_weights_;
    Field f3_;
    std::vector<Pair> pairs_;
    std::vector<ManifoldPoint> points_;
    std::vector<std::size_t> chunk_bounds_;
    int bracket_failures_ = 0;
};

// Free-function forms of the operators.
Field collision_operator(const CollisionEngine& engine, const Field& n, Form form = Form::Conservative,
                         DensityGauge gauge = DensityGauge::Reciprocal);
Field gamma(const CollisionEngine& engine, const Field& g, const Field& h, Form form = Form::Conservative);
QPieces q_cubic(const CollisionEngine& engine, const Field& a, const Field& b, const Field& c,
                Form form = Form::Conservative);
Field rhs_perturbation(const CollisionEngine& engine, const Field& g, Form form = Form::Conservative);

struct Moments {
    double mass = 0.0;
    Vec3 momentum;
    double energy = 0.0;
};

/// Quadratures of n, k n, omega n over the box.
Moments conserved_quantities(const DispersionSpec& spec, const Grid& grid, const Field& n);

/// int log n dk; throws std::domain_error for non-positive n.
double entropy(const Grid& grid, const Field& n);

/// int C(n) / n dk (non-negative for an entropy-increasing discretization).
double entropy_production(const Grid& grid, const Field& n, const Field& collision);

/// Samples a function of k at the grid nodes.
template <class Fn>
Field sample(const Grid& grid, Fn&& fn) {
    Field out(grid.size());
    for (int i = 0; i < grid.size(); ++i) out[i] = fn(grid.node(i));
    return out;
}

}  // namespace wke
