#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wke/collision.hpp"
#include "wke/spectral.hpp"

namespace wke {

/// Discrete L2-orthogonal projection onto span(basis) (basis W-orthonormal) and its complement.
std::pair<Field, Field> project(const Grid& grid, const std::vector<Field>& basis, const Field& g);

enum class Scheme { RK4, Euler };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct Diagnostics {
    double t = 0.0;
    double mass = 0.0;
    Vec3 momentum;
    double energy = 0.0;
    double entropy = 0.0;
    double norm = 0.0;
    double norm_pi = 0.0;
    double norm_piperp = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> fields;  ///< empty unless requested
    std::vector<Diagnostics> diagnostics;
    bool aborted = false;
    std::string abort_reason;
    double abort_time = 0.0;
};

struct IntegrateOptions {
    double T = 1.0;
    double dt = 0.1;
    Scheme scheme = Scheme::RK4;
    bool strict = false;        ///< restore the initial null component after every step
    bool linear_only = false;   ///< dg/dt = L g (Gamma and Q switched off)
    double ball_radius = 0.0;   ///< > 0 enables the blow-up abort at 10 * ball_radius
    bool store_fields = false;
};

/// Diagnostics of n = f_inf (1 + g).
Diagnostics diagnose(const CollisionEngine& engine, const std::vector<Field>& null_basis, double t, const Field& g);

/// dg/dt = L g - Gamma(g, g) - Q(g, g, g) in the conservative discretization. The step is T / ceil(T / dt).
/// Non-positive density or blow-up stops the run with `aborted` set.
Trajectory integrate(const CollisionEngine& engine, const std::vector<Field>& null_basis, const Field& g0,
                     const IntegrateOptions& opt);

struct FixedPointConfig {
    double lambda = 0.0;
    double C = 0.0;
    double ball_radius = 0.0;  ///< sqrt(lambda) / (2 sqrt(2 C))
    int max_iter = 50;
    double contraction_tol = 1e-12;
};

double ball_radius(double lambda, double C);
FixedPointConfig make_fixed_point_config(double lambda, double C, int max_iter = 50, double contraction_tol = 1e-12);

struct PicardReport {
    int iterations = 0;
    std::vector<double> differences;  ///< sup_t ||g^(m+1) - g^(m)|| per iteration
    double contraction_factor = 0.0;  ///< max ratio of consecutive differences
    bool converged = false;
};

struct PicardResult {
    Trajectory trajectory;
    PicardReport report;
};

/// Picard iteration of g = S^t g0 + int_0^t S^(t-s) N(g(s)) ds with N = -Gamma - Q, S^t = V exp(-Lambda t) V^T W
/// from `es`, and the Duhamel integral by the exponential trapezoid rule on the time grid.
/// Throws std::invalid_argument when ||g0|| > ball_radius / 2, std::runtime_error when an iterate leaves the
/// ball or the iteration does not converge.
PicardResult picard(const CollisionEngine& engine, const Eigensystem& es, const std::vector<Field>& null_basis,
                    const Field& g0, const FixedPointConfig& fp, double T, double dt);

struct DecayReport {
    std::vector<char> pass;   ///< per time
    double worst_ratio = 0.0; ///< max ||Pi_perp g_t|| / envelope
    bool all_pass = true;
    double fitted_rate = 0.0; ///< -slope of log ||Pi_perp g_t|| on [0.2 T, T]
};

/// ||Pi_perp g_t|| <= slack * (exp(-lambda t / 2) ||Pi_perp g_0|| + (1 - exp(-lambda t / 2)) ||Pi g_0||).
DecayReport decay_check(const Trajectory& traj, double lambda, double slack = 1.1);

/// max over random unit g of max(||Gamma(g, g)||, ||Q(g, g, g)||).
double estimate_C(const CollisionEngine& engine, int n_samples, unsigned long long seed);

}  // namespace wke
