#include "wke/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wke {

Rule1D gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    Rule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node for the weight
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = mid;
    return rule;
}

Rule1D composite_gauss(int panels, int per_panel, double a, double b) {
    if (panels < 1) throw std::invalid_argument("composite_gauss: panels must be >= 1");
    Rule1D rule;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const Rule1D g = gauss_legendre(per_panel, a + p * h, a + (p + 1) * h);
        rule.nodes.insert(rule.nodes.end(), g.nodes.begin(), g.nodes.end());
        rule.weights.insert(rule.weights.end(), g.weights.begin(), g.weights.end());
    }
    return rule;
}

Lagrange1D::Lagrange1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    bary_.assign(n, 1.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b) bary_[a] /= (nodes_[a] - nodes_[b]);
}

void Lagrange1D::basis(double x, double* out) const {
    // l_a(x) = bary_a * prod_{b != a} (x - x_b), via prefix and suffix products.
    const int n = static_cast<int>(nodes_.size());
    double prefix = 1.0;
    for (int a = 0; a < n; ++a) {
        out[a] = prefix;
        prefix *= x - nodes_[a];
    }
    double suffix = 1.0;
    for (int a = n - 1; a >= 0; --a) {
        out[a] *= suffix * bary_[a];
        suffix *= x - nodes_[a];
    }
}

Grid::Grid(int n_per_axis, double k_cut) : n_(n_per_axis), k_cut_(k_cut) {
    if (n_per_axis < 1 || n_per_axis > TensorBasis::max_n)
        throw std::invalid_argument("Grid: n_per_axis must be in [1, 16]");
    if (!(k_cut > 0.0)) throw std::invalid_argument("Grid: k_cut must be positive");
    axis_ = gauss_legendre(n_per_axis, 0.0, k_cut);
    lagrange_ = Lagrange1D(axis_.nodes);
    nodes_.reserve(size());
    weights_.reserve(size());
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int l = 0; l < n_; ++l) {
                nodes_.push_back(Vec3{axis_.nodes[i], axis_.nodes[j], axis_.nodes[l]});
                weights_.push_back(axis_.weights[i] * axis_.weights[j] * axis_.weights[l]);
            }
}

double Grid::interpolate(const double* values, const Vec3& x) const {
    TensorBasis tb;
    tb.set(lagrange_, x);
    return tb.contract(values);
}

double Grid::inner(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += weights_[i] * a[i] * b[i];
    return s;
}

double Grid::norm(const std::vector<double>& a) const { return std::sqrt(inner(a, a)); }

void TensorBasis::set(const Lagrange1D& lag, const Vec3& x) {
    n = static_cast<int>(lag.size());
    lag.basis(x.x, l[0].data());
    lag.basis(x.y, l[1].data());
    lag.basis(x.z, l[2].data());
}

double TensorBasis::contract(const double* v) const {
    const int n2 = n * n;
    double t[max_n * max_n];
    for (int bc = 0; bc < n2; ++bc) t[bc] = l[0][0] * v[bc];
    for (int a = 1; a < n; ++a) {
        const double la = l[0][a];
        const double* va = v + a * n2;
        for (int bc = 0; bc < n2; ++bc) t[bc] += la * va[bc];
    }
    double total = 0.0;
    for (int c = 0; c < n; ++c) {
        double tc = 0.0;
        for (int b = 0; b < n; ++b) tc += l[1][b] * t[b * n + c];
        total += l[2][c] * tc;
    }
    return total;
}

void TensorBasis::spread(double coef, double* out) const {
    const int n2 = n * n;
    double t[max_n * max_n];
    for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) t[b * n + c] = l[1][b] * l[2][c];
    for (int a = 0; a < n; ++a) {
        const double ca = coef * l[0][a];
        double* oa = out + a * n2;
        for (int bc = 0; bc < n2; ++bc) oa[bc] += ca * t[bc];
    }
}

}  // namespace wke
