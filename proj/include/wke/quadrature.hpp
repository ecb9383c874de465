#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "wke/vec3.hpp"

namespace wke {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Newton on P_n, nodes ascending).
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite rule: `panels` equal panels on [a, b], each with `per_panel` Gauss points.
Rule1D composite_gauss(int panels, int per_panel, double a, double b);

/// Barycentric Lagrange interpolation on fixed 1D nodes.
class Lagrange1D {
public:
    Lagrange1D() = default;
    explicit Lagrange1D(std::vector<double> nodes);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Cardinal functions l_a(x), a = 0..n-1, written to `out`.
    void basis(double x, double* out) const;

private:
    std::vector<double> nodes_;
    std::vector<double> bary_;
};

/// Tensor-product Gauss-Legendre collocation grid on [0, k_c]^3.
/// Flat index: idx = (i * n + j) * n + l for node (x_i, x_j, x_l).
class Grid {
public:
    Grid() = default;
    Grid(int n_per_axis, double k_cut);

    int n_per_axis() const { return n_; }
    int size() const { return n_ * n_ * n_; }
    double k_cut() const { return k_cut_; }

    const Vec3& node(int idx) const { return nodes_[idx]; }
    double weight(int idx) const { return weights_[idx]; }
    const std::vector<Vec3>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    const Rule1D& axis() const { return axis_; }
    const Lagrange1D& lagrange() const { return lagrange_; }

    int index(int i, int j, int l) const { return (i * n_ + j) * n_ + l; }

    /// Tensor Lagrange interpolant of nodal values at x.
    double interpolate(const double* values, const Vec3& x) const;

    /// Discrete L2 inner product sum_i w_i a_i b_i.
    double inner(const std::vector<double>& a, const std::vector<double>& b) const;
    double norm(const std::vector<double>& a) const;

private:
    int n_ = 0;
    double k_cut_ = 0.0;
    Rule1D axis_;
    Lagrange1D lagrange_;
    std::vector<Vec3> nodes_;
    std::vector<double> weights_;
};

/// Per-axis cardinal values at one point, for repeated tensor contractions.
struct TensorBasis {
    static constexpr int max_n = 16;
    int n = 0;
    std::array<std::array<double, max_n>, 3> l{};

    void set(const Lagrange1D& lag, const Vec3& x);
    /// sum_abc l0[a] l1[b] l2[c] v[(a n + b) n + c]
    double contract(const double* v) const;
    /// out[(a n + b) n + c] += coef * l0[a] l1[b] l2[c]
    void spread(double coef, double* out) const;
};

}  // namespace wke
