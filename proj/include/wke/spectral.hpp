#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wke/linear_op.hpp"

namespace wke {

/// Generalized symmetric eigenproblem B v = lambda W v with W-orthonormal eigenvectors
/// (V^T W V = I). The semigroup of L = -W^-1 B is S^t = V exp(-Lambda t) V^T W.
struct Eigensystem {
    Eigen::VectorXd values;   ///< ascending
    Eigen::MatrixXd vectors;  ///< columns
};

Eigensystem decompose(const Eigen::MatrixXd& B, const Field& weights);

struct SpectrumReport {
    std::vector<double> eigenvalues;  ///< full spectrum, ascending
    std::vector<double> deflated;     ///< spectrum on the W-orthogonal complement of the null basis
    int null_count = 0;               ///< eigenvalues with |lambda| <= null_ratio * gap
    double gap = 0.0;                 ///< smallest eigenvalue after deflation
    double largest = 0.0;
    double null_tolerance = 0.0;
    double coercivity_scale = 0.0;    ///< filled by callers that know the dispersion (see coercivity_scale)
};

/// Eigenvalues of (B, diag(weights)); the span of `null_basis` (W-orthonormal) is deflated before the gap
/// is extracted. Throws std::invalid_argument for non-symmetric B or non-positive weights.
SpectrumReport eigen(const Eigen::MatrixXd& B, const Field& weights, const std::vector<Field>& null_basis = {},
                     double null_ratio = 1e-4);

inline SpectrumReport eigen(const OperatorMatrix& m, const std::vector<Field>& null_basis = {},
                            double null_ratio = 1e-4) {
    return eigen(m.B, m.weights, null_basis, null_ratio);
}

/// pi k_c^(1 - 2 beta) / M^3 with M the bound on 1/f_inf over the box.
double coercivity_scale(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, double beta);

struct WeylReport {
    double a_floor = 0.0;  ///< min over nodes of the multiplication coefficient
    double a_max = 0.0;
    double gap = 0.0;
    int below_floor = 0;   ///< deflated eigenvalues strictly below a_floor
    int total = 0;         ///< number of deflated eigenvalues
};

WeylReport weyl_report(const CollisionEngine& engine, const SpectrumReport& spectrum);

}  // namespace wke
