#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wke/collision.hpp"
#include "wke/quadrature.hpp"

namespace wke {

/// Gauss-Legendre nodes on (0, k_c) in the radial variable x = |k|; the origin is never a node.
class RadialGrid {
public:
    RadialGrid(int n_points, double k_cut);
    int size() const { return static_cast<int>(rule_.nodes.size()); }
    double k_cut() const { return k_cut_; }
    double node(int i) const { return rule_.nodes[i]; }
    double weight(int i) const { return rule_.weights[i]; }
    const std::vector<double>& nodes() const { return rule_.nodes; }
    const Lagrange1D& lagrange() const { return lagrange_; }

private:
    double k_cut_;
    Rule1D rule_;
    Lagrange1D lagrange_;
};

using RadialField = std::vector<double>;

struct IsoOptions {
    double beta = 0.0;
    int order = 8;                 ///< Gauss points per smooth segment in x3 and in the angle psi
    bool exploit_symmetry = true;  ///< integrate psi in [psi_lo, pi/4] and double (x1 <-> x2 symmetry)
};

/// Reduced collision operator for radial data and Omega = |k|^2:
///   Q(x) = int_{[0,k_c]^2} x1 x2 min(x, x1, x2, x3) / (x (x x1 x2 x3)^(beta/2))
///          [f1 f2 (f + f3) - f f3 (f1 + f2)] dx1 dx2,   x3^2 = x1^2 + x2^2 - x^2 in [0, k_c^2].
/// (x1, x2) are written in polar form (rho, psi) with rho^2 = x^2 + x3^2, so dx1 dx2 = x3 dx3 dpsi.
/// Off-node values use f = 1 / I[1/f], which reproduces 1/(a + c x^2) exactly.
///  Pointwise:    the display evaluated at every node.
///  Conservative: weak form symmetrized over (x <-> x3, x1 <-> x2, (x, x3) <-> (x1, x2)); the radial moments
///                sum w x^2 f and sum w x^4 f are conserved exactly and sum w x^2 log f never decreases.
/// Radial moments relate to the 3D ones by mass_3d = 4 pi sum w x^2 f, and the 3D operator of a radial
/// density in the ball |k_i| <= k_c equals 4 pi^2 Q.
RadialField iso_collision(const RadialGrid& grid, const RadialField& f, Form form = Form::Pointwise,
                          const IsoOptions& opt = {});

/// Symmetry check: max difference between the integrand at (x1, x2) and at (x2, x1) over the full-range
/// points of node i, relative to the gross gain plus loss terms.
double iso_kernel_asymmetry(const RadialGrid& grid, const RadialField& f, int i, const IsoOptions& opt = {});

struct RadialMoments {
    double mass = 0.0;     ///< sum w x^2 f
    double energy = 0.0;   ///< sum w x^4 f
    double entropy = 0.0;  ///< sum w x^2 log f
};
RadialMoments radial_moments(const RadialGrid& grid, const RadialField& f);

/// Rayleigh-Jeans 1 / (a + c x^2) with the same radial mass and energy as f (Newton on the discrete moments).
struct RadialEquilibrium {
    double a = 1.0;
    double c = 1.0;
    RadialField values;
};
RadialEquilibrium matched_equilibrium(const RadialGrid& grid, const RadialField& f);

struct IsoDiagnostics {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double entropy = 0.0;
    double distance = 0.0;  ///< discrete L2 (measure x^2 dx) distance to the matched equilibrium of f0
};

struct IsoTrajectory {
    std::vector<IsoDiagnostics> diagnostics;
    RadialField final_state;
    RadialEquilibrium target;
    bool aborted = false;
    std::string abort_reason;
};

/// RK4 in the conservative form; aborts when f loses positivity.
IsoTrajectory iso_integrate(const RadialGrid& grid, const RadialField& f0, double T, double dt,
                            const IsoOptions& opt = {});

/// 3D collision operator at k = x * direction for the radial density n(k) = f(|k|), on the ball |k_i| <= k_c:
/// spherical product rule for k3 and resonance charts restricted to the ball, with exact off-grid values.
struct Ball3DOptions {
    int n_radial = 12;
    int n_polar = 12;
    int n_azimuth = 24;
    ChartOptions chart;
};
double ball_collision_3d(const DispersionSpec& spec, const std::function<double(double)>& f, double x,
                         const Vec3& direction, const Ball3DOptions& opt);

}  // namespace wke
