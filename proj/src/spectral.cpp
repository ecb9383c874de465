#include "wke/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wke {

namespace {

Eigen::VectorXd inv_sqrt_weights(const Field& weights, Eigen::Index n) {
    if (static_cast<Eigen::Index>(weights.size()) != n) throw std::invalid_argument("eigen: weight size mismatch");
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(weights[i] > 0.0)) throw std::invalid_argument("eigen: weights must be positive");
        d[i] = 1.0 / std::sqrt(weights[i]);
    }
    return d;
}

Eigen::MatrixXd scaled(const Eigen::MatrixXd& B, const Eigen::VectorXd& d) {
    if (B.rows() != B.cols()) throw std::invalid_argument("eigen: matrix not square");
    if (B != B.transpose()) throw std::invalid_argument("eigen: matrix not symmetric");
    Eigen::MatrixXd C = d.asDiagonal() * B * d.asDiagonal();
    // Exact symmetry after scaling (products commute but rounding order differs).
    C = 0.5 * (C + C.transpose()).eval();
    return C;
}

}  // namespace

Eigensystem decompose(const Eigen::MatrixXd& B, const Field& weights) {
    const Eigen::VectorXd d = inv_sqrt_weights(weights, B.rows());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled(B, d));
    if (es.info() != Eigen::Success) throw std::runtime_error("eigen: solver failed");
    return Eigensystem{es.eigenvalues(), d.asDiagonal() * es.eigenvectors()};
}

SpectrumReport eigen(const Eigen::MatrixXd& B, const Field& weights, const std::vector<Field>& null_basis,
                     double null_ratio) {
    const Eigen::Index n = B.rows();
    const Eigen::VectorXd d = inv_sqrt_weights(weights, n);
    const Eigen::MatrixXd C = scaled(B, d);
    SpectrumReport r;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(C, Eigen::EigenvaluesOnly);
    if (full.info() != Eigen::Success) throw std::runtime_error("eigen: solver failed");
    r.eigenvalues.assign(full.eigenvalues().data(), full.eigenvalues().data() + n);
    r.largest = r.eigenvalues.back();

    const Eigen::Index k = static_cast<Eigen::Index>(null_basis.size());
    if (k >= n) throw std::invalid_argument("eigen: null basis spans the whole space");
    if (k == 0) {
        r.deflated = r.eigenvalues;
    } else {
        // Null vectors in the scaled coordinates y = W^1/2 x, then an orthonormal complement.
        Eigen::MatrixXd Y(n, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            if (static_cast<Eigen::Index>(null_basis[a].size()) != n)
                throw std::invalid_argument("eigen: null vector size mismatch");
            for (Eigen::Index i = 0; i < n; ++i) Y(i, a) = null_basis[a][i] / d[i];
        }
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        const Eigen::MatrixXd Q = qr.householderQ();
        const Eigen::MatrixXd Qc = Q.rightCols(n - k);
        Eigen::MatrixXd Cc = Qc.transpose() * C * Qc;
        Cc = 0.5 * (Cc + Cc.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> defl(Cc, Eigen::EigenvaluesOnly);
        if (defl.info() != Eigen::Success) throw std::runtime_error("eigen: solver failed");
        r.deflated.assign(defl.eigenvalues().data(), defl.eigenvalues().data() + (n - k));
    }
    r.gap = r.deflated.front();
    r.null_tolerance = null_ratio * std::abs(r.gap);
    r.null_count = static_cast<int>(
        std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(), [&](double v) { return std::abs(v) <= r.null_tolerance; }));
    return r;
}

double coercivity_scale(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, double beta) {
    const double M = inv_equilibrium_bound(spec, coeffs);
    return std::numbers::pi * std::pow(spec.k_cut, 1.0 - 2.0 * beta) / (M * M * M);
}

WeylReport weyl_report(const CollisionEngine& engine, const SpectrumReport& spectrum) {
    const Field a = engine.multiplication_coefficient();
    WeylReport w;
    w.a_floor = *std::min_element(a.begin(), a.end());
    w.a_max = *std::max_element(a.begin(), a.end());
    w.gap = spectrum.gap;
    w.total = static_cast<int>(spectrum.deflated.size());
    w.below_floor = static_cast<int>(
        std::count_if(spectrum.deflated.begin(), spectrum.deflated.end(), [&](double v) { return v < w.a_floor; }));
    return w;
}

}  // namespace wke
