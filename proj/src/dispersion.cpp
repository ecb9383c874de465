#include "wke/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wke {

std::string to_string(PerturbationKind kind) {
    switch (kind) {
        case PerturbationKind::Zero: return "zero";
        case PerturbationKind::SinSquared: return "sin2";
        case PerturbationKind::Rational: return "rational";
    }
    return "zero";
}

PerturbationKind perturbation_from_string(const std::string& name) {
    if (name == "zero") return PerturbationKind::Zero;
    if (name == "sin2" || name == "sin_squared") return PerturbationKind::SinSquared;
    if (name == "rational") return PerturbationKind::Rational;
    throw std::invalid_argument("unknown perturbation '" + name + "' (expected zero, sin2, rational)");
}

double Perturbation::value(double x) const {
    switch (kind) {
        case PerturbationKind::Zero: return 0.0;
        case PerturbationKind::SinSquared: {
            const double s = std::sin(a * x);
            return eps * s * s;
        }
        case PerturbationKind::Rational: return eps * x * x / (1.0 + x * x);
    }
    return 0.0;
}

double Perturbation::d1(double x) const {
    switch (kind) {
        case PerturbationKind::Zero: return 0.0;
        case PerturbationKind::SinSquared: return eps * a * std::sin(2.0 * a * x);
        case PerturbationKind::Rational: {
            const double q = 1.0 + x * x;
            return 2.0 * eps * x / (q * q);
        }
    }
    return 0.0;
}

double Perturbation::d2(double x) const {
    switch (kind) {
        case PerturbationKind::Zero: return 0.0;
        case PerturbationKind::SinSquared: return 2.0 * eps * a * a * std::cos(2.0 * a * x);
        case PerturbationKind::Rational: {
            const double q = 1.0 + x * x;
            return 2.0 * eps * (1.0 - 3.0 * x * x) / (q * q * q);
        }
    }
    return 0.0;
}

double Perturbation::d1_over_x(double x) const {
    switch (kind) {
        case PerturbationKind::Zero: return 0.0;
        case PerturbationKind::SinSquared: {
            const double t = 2.0 * a * x;
            // eps a sin(2ax)/x = 2 eps a^2 sinc(2ax)
            const double sinc = std::abs(t) < 1e-6 ? 1.0 - t * t / 6.0 : std::sin(t) / t;
            return 2.0 * eps * a * a * sinc;
        }
        case PerturbationKind::Rational: {
            const double q = 1.0 + x * x;
            return 2.0 * eps / (q * q);
        }
    }
    return 0.0;
}

double Perturbation::sup_abs() const {
    switch (kind) {
        case PerturbationKind::Zero: return 0.0;
        case PerturbationKind::SinSquared:
        case PerturbationKind::Rational: return std::abs(eps);
    }
    return 0.0;
}

double omega(const DispersionSpec& spec, const Vec3& k) { return spec.Omega(norm(k)); }

double omega_prime(const DispersionSpec& spec, double x) {
    if (x < 0.0) throw std::domain_error("omega_prime: x must be nonnegative");
    return spec.Omega_prime(x);
}

double EquilibriumCoeffs::inverse(const DispersionSpec& spec, const Vec3& k) const {
    const double d = a + dot(b, k) + c * omega(spec, k);
    if (!(d > 0.0)) throw std::domain_error("equilibrium: non-positive denominator a + b.k + c omega");
    return d;
}

double equilibrium(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Vec3& k) {
    return coeffs(spec, k);
}

bool equilibrium_is_admissible(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, int n_per_axis) {
    if (!(coeffs.c > 0.0)) return false;
    const double h = spec.k_cut / std::max(1, n_per_axis - 1);
    for (int i = 0; i < n_per_axis; ++i)
        for (int j = 0; j < n_per_axis; ++j)
            for (int l = 0; l < n_per_axis; ++l) {
                const Vec3 k{i * h, j * h, l * h};
                if (!(coeffs.a + dot(coeffs.b, k) + coeffs.c * omega(spec, k) > 0.0)) return false;
            }
    return true;
}

double inv_equilibrium_bound(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs) {
    const double kc = spec.k_cut;
    auto denom = [&](const Vec3& k) { return coeffs.a + dot(coeffs.b, k) + coeffs.c * omega(spec, k); };
    double m = -std::numeric_limits<double>::infinity();
    for (int corner = 0; corner < 8; ++corner) {
        const Vec3 k{(corner & 1) ? kc : 0.0, (corner & 2) ? kc : 0.0, (corner & 4) ? kc : 0.0};
        m = std::max(m, denom(k));
    }
    // The corner is the maximum when b >= 0 and Omega is increasing; otherwise sample.
    const bool monotone = coeffs.b.x >= 0.0 && coeffs.b.y >= 0.0 && coeffs.b.z >= 0.0 &&
                          spec.perturbation.kind == PerturbationKind::Zero && coeffs.c >= 0.0;
    if (!monotone) {
        const int n = 33;
        const double h = kc / (n - 1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) m = std::max(m, denom(Vec3{i * h, j * h, l * h}));
    }
    return m;
}

bool AssumptionReport::all_pass() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const AssumptionClause& c) { return c.pass; });
}

AssumptionReport verify_assumptions(const DispersionSpec& spec, int n_samples) {
    if (n_samples < 2) throw std::invalid_argument("verify_assumptions: n_samples must be >= 2");
    const double x_max = std::sqrt(3.0) * spec.k_cut;
    const auto& s = spec.perturbation;

    AssumptionClause sup{"sup|s| <= C1"};
    AssumptionClause ratio{"C2 <= Omega'(x)/x <= C3"};
    AssumptionClause hess{"Lambda1 <= Hess S <= Lambda2"};
    double s_max = 0.0;
    double r_min = std::numeric_limits<double>::infinity();
    double r_max = -r_min;
    double h_min = r_min;
    double h_max = -r_min;
    for (int i = 1; i <= n_samples; ++i) {
        const double x = x_max * static_cast<double>(i) / n_samples;
        s_max = std::max(s_max, std::abs(s.value(x)));
        const double g = spec.g_ratio(x);
        r_min = std::min(r_min, g);
        r_max = std::max(r_max, g);
        // Eigenvalues of Hess S(x) for radial S: s''(r) radially, s'(r)/r tangentially.
        const double e_rad = s.d2(x);
        const double e_tan = s.d1_over_x(x);
        h_min = std::min({h_min, e_rad, e_tan});
        h_max = std::max({h_max, e_rad, e_tan});
    }

    sup.observed_min = 0.0;
    sup.observed_max = s_max;
    sup.worst_margin = spec.C1 - s_max;
    sup.pass = sup.worst_margin >= 0.0;

    ratio.observed_min = r_min;
    ratio.observed_max = r_max;
    ratio.worst_margin = std::min(r_min - spec.C2, spec.C3 - r_max);
    ratio.pass = ratio.worst_margin >= 0.0 && spec.C2 > 0.0;

    hess.observed_min = h_min;
    hess.observed_max = h_max;
    if (s.kind == PerturbationKind::Zero) {
        // Hess S = 0 for the quadratic base case: exempt.
        hess.checked = false;
        hess.pass = true;
        hess.worst_margin = 0.0;
    } else {
        hess.worst_margin = std::min(h_min - spec.Lambda1, spec.Lambda2 - h_max);
        hess.pass = hess.worst_margin >= 0.0 && spec.Lambda1 > 0.0;
    }

    AssumptionReport report;
    report.n_samples = n_samples;
    report.clauses = {sup, ratio, hess};
    return report;
}

}  // namespace wke
