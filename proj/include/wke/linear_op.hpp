#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wke/collision.hpp"

namespace wke {

/// Candidate null spaces of L, each orthonormalized in the discrete L2 product.
///  paper:    {1, k_x, k_y, k_z, omega}
///  weighted: f_inf * {1, k_x, k_y, k_z, omega}
struct NullBasis {
    std::vector<Field> paper;
    std::vector<Field> weighted;
};

/// Raw (not orthonormalized) candidate vectors, in the order 1, k_x, k_y, k_z, omega.
std::vector<Field> paper_null_vectors(const DispersionSpec& spec, const Grid& grid);
std::vector<Field> weighted_null_vectors(const CollisionEngine& engine);

/// Modified Gram-Schmidt (two passes) in the weighted inner product.
std::vector<Field> orthonormalize(const Grid& grid, std::vector<Field> vectors);

NullBasis null_bases(const CollisionEngine& engine);

/// Dense matrix of the Dirichlet form -<L g, h> in the nodal basis:
/// B(g, h) = g^T B h, and L g = -W^-1 B g with W = diag(weights).
struct OperatorMatrix {
    Eigen::MatrixXd B;
    Field weights;
    int dim() const { return static_cast<int>(B.rows()); }
};

/// Assembles B from the symmetrized collision bracket,
///   B[a][b] = 1/4 sum_points W f f1 f2 f3 br(e_a / f) br(e_b / f),  br(phi) = phi1 + phi2 - phi3 - phi,
/// over the conservative quadrature of the engine. Requires beta = 0.
/// Parallel: fixed groups of pair chunks accumulate private matrices merged in group order.
OperatorMatrix assemble_dirichlet(const CollisionEngine& engine, Exec exec = Exec::Parallel);

/// L g evaluated by chart quadrature.
Field apply_L(const CollisionEngine& engine, const Field& g, Form form = Form::Conservative);

/// -W^-1 B g.
Field apply_matrix_L(const OperatorMatrix& m, const Field& g);

/// x^T B x / (x^T W x). Throws std::invalid_argument for the zero vector.
double rayleigh_quotient(const OperatorMatrix& m, const Field& x);

struct NullReport {
    std::array<double, 5> paper_quotients{};
    std::array<double, 5> weighted_quotients{};
    double tolerance = 0.0;
    int paper_below = 0;
    int weighted_below = 0;
    std::string null_basis;  ///< "weighted", "paper", "both" or "none"
};

/// Rayleigh quotients of both orthonormalized candidate bases against `tolerance`.
NullReport null_residuals(const OperatorMatrix& m, const NullBasis& basis, double tolerance);

void write_matrix_binary(const std::string& path, const OperatorMatrix& m);
OperatorMatrix read_matrix_binary(const std::string& path);
void write_matrix_csv(const std::string& path, const OperatorMatrix& m);

}  // namespace wke
