#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wke/collision.hpp"

namespace wke {

/// Which weight the integral kernels carry.
///  AsPrinted: k2 with |k+k3-z| / (g(u) + g(z)); k1 = int f(z) f(u) (|z| + |u|) / |k+k3| delta_Omega dk3.
///  Derived:   k2 with the surface weight |k+k3| / (g(u) + g(z)) (the K2 chart quadrature);
///             k1 = 2 int f(u) f(k3) delta_Omega dk3, obtained from K1 by z <-> u at fixed k3.
enum class KernelForm { AsPrinted, Derived };

struct KernelOptions {
    ChartOptions chart;        ///< resonance chart used by k2 and a(k)
    int k3_nodes = 6;          ///< Gauss nodes per axis for k3 in k2 norms and a(k)
    int k1_panels = 2;         ///< composite Gauss panels per k3-plane coordinate in k1
    int k1_order = 4;          ///< Gauss points per panel in k1
    int k1_samples = 9;        ///< feasibility samples per row before boundary bisection
    double tangential = 1e-8;  ///< |dC/dk3_e| below tangential * k_c is skipped
    int sph_r = 8;             ///< radial Gauss nodes of the spherical rule
    int sph_cos = 12;          ///< polar Gauss nodes
    int sph_phi = 24;          ///< azimuthal nodes
    double beta = 0.0;
};

/// a(k) = f(k)^-1 int f1 f2 f3 [cross-section] at an arbitrary point, with exact f_inf off the grid.
double multiplication_at(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Vec3& k,
                         const KernelOptions& opt);

double kernel_k2(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Vec3& k, const Vec3& k3,
                 const KernelOptions& opt, KernelForm form = KernelForm::AsPrinted);

struct K1Value {
    double value = 0.0;
    int nodes = 0;    ///< k3-plane nodes with a crossing
    int skipped = 0;  ///< tangential crossings left out
};

/// k1(k, z) by co-area in k3: the plane coordinates orthogonal to the steepest axis e of C are integrated
/// by Gauss rules clipped to the feasible set, and C = 0 is solved for k3_e along each node line
/// (weight 1 / |dC/dk3_e|).
K1Value kernel_k1(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Vec3& k, const Vec3& z,
                  const KernelOptions& opt, KernelForm form = KernelForm::Derived);

/// Quadrature over the box in spherical coordinates centred at `center`: z = center + r w,
/// dz = r^2 dr dw, so the 1/|k - z| singularity of k1 at z = k is integrable node by node.
struct CenteredRule {
    std::vector<Vec3> points;
    std::vector<double> weights;
};
CenteredRule spherical_rule(const Vec3& center, double k_cut, int n_r, int n_cos, int n_phi);

/// K1 g(k_i) = int k1(k_i, z) g(z) dz on the spherical rule around k_i, g interpolated as f_inf I[g / f_inf].
struct K1Application {
    Field values;
    int skipped = 0;
};
K1Application apply_K1_kernel(const CollisionEngine& engine, const Field& g, const KernelOptions& opt,
                              KernelForm form = KernelForm::Derived, Exec exec = Exec::Parallel);

/// sum_i w_i int k1(k_i, z)^2 dz (squared Hilbert-Schmidt norm estimate, spherical rule in z).
double hilbert_schmidt_k1_sq(const CollisionEngine& engine, const KernelOptions& opt,
                             KernelForm form = KernelForm::Derived, Exec exec = Exec::Parallel);

/// sum_ij w_i w_j k(x_i, y_j)^2.
double hilbert_schmidt_sq(const Grid& rows, const Grid& cols, const Eigen::MatrixXd& kernel);

/// k2(k_i, k3_j) on grid x grid.
Eigen::MatrixXd kernel_k2_matrix(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Grid& grid,
                                 const KernelOptions& opt, KernelForm form = KernelForm::AsPrinted,
                                 Exec exec = Exec::Parallel);

}  // namespace wke
