#pragma once

#include <string>
#include <vector>

#include "wke/vec3.hpp"

namespace wke {

/// Closed-form radial perturbations s(x) of the quadratic dispersion law.
enum class PerturbationKind {
    Zero,        ///< s(x) = 0
    SinSquared,  ///< s(x) = eps * sin^2(a x)
    Rational,    ///< s(x) = eps * x^2 / (1 + x^2)
};

std::string to_string(PerturbationKind kind);
PerturbationKind perturbation_from_string(const std::string& name);

struct Perturbation {
    PerturbationKind kind = PerturbationKind::Zero;
    double eps = 0.0;
    double a = 1.0;

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    /// s'(x)/x, continuous at x = 0 where it equals s''(0).
    double d1_over_x(double x) const;
    /// Analytic bound on sup |s| over the half line.
    double sup_abs() const;
};

/// Omega(x) = x^2 + s(x) on the cut-off box [0, k_cut]^3 in d = 3.
struct DispersionSpec {
    Perturbation perturbation;
    double k_cut = 1.0;

    // Declared constants; verify_assumptions checks them against samples.
    double C1 = 0.0;
    double C2 = 2.0;
    double C3 = 2.0;
    double Lambda1 = 0.0;
    double Lambda2 = 0.0;

    static constexpr int dimension = 3;

    double Omega(double x) const { return x * x + perturbation.value(x); }
    double Omega_prime(double x) const { return 2.0 * x + perturbation.d1(x); }
    double Omega_second(double x) const { return 2.0 + perturbation.d2(x); }

    /// g(x) = Omega'(x)/x with the analytic limit Omega''(0) at the origin.
    double g_ratio(double x) const { return 2.0 + perturbation.d1_over_x(x); }
};

double omega(const DispersionSpec& spec, const Vec3& k);
double omega_prime(const DispersionSpec& spec, double x);

/// Rayleigh-Jeans coefficients: f(k) = 1 / (a + b.k + c omega(k)).
struct EquilibriumCoeffs {
    double a = 1.0;
    Vec3 b{1.0, 1.0, 1.0};
    double c = 1.0;

    /// 1/f at k. Throws std::domain_error when non-positive.
    double inverse(const DispersionSpec& spec, const Vec3& k) const;
    double operator()(const DispersionSpec& spec, const Vec3& k) const { return 1.0 / inverse(spec, k); }
};

/// Checks a + b.k + c omega > 0 on the box (corners and a sampled lattice).
bool equilibrium_is_admissible(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, int n_per_axis = 9);

double equilibrium(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Vec3& k);

/// M = max over the box of 1/f.
double inv_equilibrium_bound(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs);

struct AssumptionClause {
    std::string name;
    bool checked = true;  ///< false when the clause is vacuous (zero perturbation, Hessian clause)
    bool pass = true;
    double worst_margin = 0.0;  ///< min over samples of (bound - value); negative means violated
    double observed_min = 0.0;
    double observed_max = 0.0;
};

struct AssumptionReport {
    std::vector<AssumptionClause> clauses;
    int n_samples = 0;
    bool all_pass() const;
};

/// Samples x uniformly in (0, sqrt(3) k_cut] and checks
///   sup|s| <= C1,  C2 <= Omega'(x)/x <= C3,  Lambda1 <= eig Hess S <= Lambda2.
AssumptionReport verify_assumptions(const DispersionSpec& spec, int n_samples = 10000);

}  // namespace wke
