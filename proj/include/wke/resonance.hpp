#pragma once

#include <cstdint>
#include <vector>

#include "wke/dispersion.hpp"
#include "wke/vec3.hpp"

namespace wke {

/// C(z) = Omega(|k+k3-z|) + Omega(|z|) - Omega(|k|) - Omega(|k3|).
double defect(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, const Vec3& z);

/// Orthonormal frame (ehat, e1, e2) around the axis k+k3. e1 comes from the
/// coordinate axis least aligned with ehat, e2 = ehat x e1.
struct Frame {
    double P = 0.0;
    Vec3 ehat;
    Vec3 e1;
    Vec3 e2;
};
Frame make_frame(const Vec3& k, const Vec3& k3);

struct RadiusResult {
    bool empty = true;
    bool bracket_failed = false;
    double r_sq = 0.0;
    int iterations = 0;
};

/// Radius of the circle {z : C(z) = 0} in the plane z.ehat = alpha P.
/// Root-finding runs in t = r^2 where C is strictly increasing.
RadiusResult solve_radius(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double alpha,
                          double tol = 1e-12);

/// d/dalpha of r_alpha^2.
double d_alpha_r_squared(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double alpha, double r_sq);

/// |grad_z C|^2 at z(alpha, theta); theta-independent.
double grad_defect_norm_sq(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double alpha, double theta);

/// Weight P / (g(|u|) + g(|z|)) replacing delta_Omega dz by dalpha dtheta; 0 when no circle exists.
double surface_jacobian(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double alpha);

/// Point on the chart: z(alpha, theta) = alpha P ehat + r (cos theta e1 + sin theta e2).
Vec3 chart_point(const Frame& frame, double alpha, double r, double theta);

enum class AlphaRule {
    Admissible,     ///< Gauss nodes on the exact alpha-interval where the circle exists inside the domain
    PaperInterval,  ///< Gauss nodes on [-k_c/P, k_c/P], exclusion by r_sq = 0 and masks
};

enum class ThetaRule {
    ClippedArcs,    ///< Gauss nodes on the arcs of the circle that lie inside the domain
    UniformMasked,  ///< uniform nodes on [0, 2pi), points outside the domain masked
};

enum class Domain {
    Box,   ///< z and k+k3-z in [0, k_c]^3
    Ball,  ///< |z| <= k_c and |k+k3-z| <= k_c
};

struct ChartOptions {
    int n_alpha = 24;
    int n_theta = 16;
    AlphaRule alpha_rule = AlphaRule::Admissible;
    ThetaRule theta_rule = ThetaRule::ClippedArcs;
    Domain domain = Domain::Box;
    double tol = 1e-12;
};

/// Chart in the fixed (alpha node) x (uniform theta node) layout, used for export and inspection.
struct ResonanceChart {
    Vec3 k;
    Vec3 k3;
    double P = 0.0;
    bool empty = true;
    std::vector<double> alpha_nodes;
    std::vector<double> alpha_weights;
    std::vector<double> r_sq;
    std::vector<double> jac;
    std::vector<double> theta_nodes;
    std::vector<std::uint8_t> mask;  ///< row-major [alpha][theta], 1 = inside the domain
    int bracket_failures = 0;

    double masked_fraction(std::size_t alpha_index) const;
};

/// Uniform theta nodes; alpha nodes per `alpha_rule`.
ResonanceChart chart(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, int n_alpha, int n_theta,
                     AlphaRule alpha_rule = AlphaRule::PaperInterval, Domain domain = Domain::Box,
                     double tol = 1e-12);

struct ManifoldPoint {
    Vec3 z;
    double weight = 0.0;  ///< jac * w_alpha * w_theta
};

struct ManifoldStats {
    int points = 0;
    int bracket_failures = 0;
};

/// Appends the quadrature points of the resonant manifold S_{k,k3} restricted to the domain.
/// sum weight * h(z) approximates int h delta_Omega dz for fixed (k, k3).
ManifoldStats manifold_points(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, const ChartOptions& options,
                              std::vector<ManifoldPoint>& out);

/// True when z and k+k3-z both lie in the domain.
bool in_domain(const DispersionSpec& spec, Domain domain, const Vec3& z, const Vec3& u);

}  // namespace wke
