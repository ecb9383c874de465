#include "wke/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wke {

namespace {

double cross_section(double beta, double a, double b, double c, double d) {
    if (beta == 0.0) return 1.0;
    return std::pow(a * b * c * d, -0.5 * beta);
}

Grid k3_grid(const DispersionSpec& spec, const KernelOptions& opt) { return Grid(opt.k3_nodes, spec.k_cut); }

bool in_box(const Vec3& x, double kc) {
    for (int d = 0; d < 3; ++d)
        if (x[d] < 0.0 || x[d] > kc) return false;
    return true;
}

// C(k3) = Omega(|k + k3 - z|) - Omega(|k3|) + Omega(|z|) - Omega(|k|) along the line k3_e = t.
struct K1Line {
    const DispersionSpec& spec;
    Vec3 k;
    Vec3 z;
    double offset;  // Omega(|z|) - Omega(|k|)
    int e;

    Vec3 point(const Vec3& base, double t) const {
        Vec3 k3 = base;
        k3[e] = t;
        return k3;
    }
    double value(const Vec3& k3) const {
        return spec.Omega(norm(k + k3 - z)) - spec.Omega(norm(k3)) + offset;
    }
    double slope(const Vec3& k3) const {
        const Vec3 u = k + k3 - z;
        return spec.g_ratio(norm(u)) * u[e] - spec.g_ratio(norm(k3)) * k3[e];
    }
    // Root of C along the line inside [0, k_c]; false when C does not change sign.
    bool root(const Vec3& base, double& t) const {
        const double kc = spec.k_cut;
        double lo = 0.0;
        double hi = kc;
        double c_lo = value(point(base, lo));
        const double c_hi = value(point(base, hi));
        if (c_lo == 0.0) {
            t = lo;
            return true;
        }
        if ((c_lo > 0.0) == (c_hi > 0.0)) return false;
        t = lo - c_lo * (hi - lo) / (c_hi - c_lo);
        for (int it = 0; it < 100; ++it) {
            const Vec3 p = point(base, t);
            const double c = value(p);
            if ((c > 0.0) == (c_lo > 0.0)) {
                lo = t;
                c_lo = c;
            } else {
                hi = t;
            }
            const double s = slope(p);
            double next = s != 0.0 ? t - c / s : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - t) <= 1e-15 * kc || hi - lo <= 1e-15 * kc) {
                t = next;
                return true;
            }
            t = next;
        }
        return true;
    }
};

}  // namespace

double multiplication_at(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Vec3& k,
                         const KernelOptions& opt) {
    const Grid g3 = k3_grid(spec, opt);
    std::vector<ManifoldPoint> pts;
    double sum = 0.0;
    for (int j = 0; j < g3.size(); ++j) {
        const Vec3& k3 = g3.node(j);
        pts.clear();
        manifold_points(spec, k, k3, opt.chart, pts);
        const double f3 = coeffs(spec, k3);
        double s = 0.0;
        for (const auto& p : pts) {
            const Vec3 u = k + k3 - p.z;
            s += p.weight * coeffs(spec, u) * coeffs(spec, p.z) *
                 cross_section(opt.beta, norm(k), norm(u), norm(p.z), norm(k3));
        }
        sum += g3.weight(j) * f3 * s;
    }
    return sum / coeffs(spec, k);
}

double kernel_k2(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Vec3& k, const Vec3& k3,
                 const KernelOptions& opt, KernelForm form) {
    std::vector<ManifoldPoint> pts;
    manifold_points(spec, k, k3, opt.chart, pts);
    const double P = norm(k + k3);
    double s = 0.0;
    for (const auto& p : pts) {
        const Vec3 u = k + k3 - p.z;
        const double nu = norm(u);
        const double w = form == KernelForm::AsPrinted ? p.weight * nu / P : p.weight;
        s += w * coeffs(spec, u) * coeffs(spec, p.z) * cross_section(opt.beta, norm(k), nu, norm(p.z), norm(k3));
    }
    return s;
}

K1Value kernel_k1(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Vec3& k, const Vec3& z,
                  const KernelOptions& opt, KernelForm form) {
    K1Value out;
    const double kc = spec.k_cut;
    const Vec3 d = k - z;
    int e = 0;
    for (int a = 1; a < 3; ++a)
        if (std::abs(d[a]) > std::abs(d[e])) e = a;
    if (d[e] == 0.0) {
        out.skipped = 1;  // k = z: the resonant set in k3 degenerates
        return out;
    }
    const int pa = (e + 1) % 3;
    const int qa = (e + 2) % 3;
    const K1Line line{spec, k, z, omega(spec, z) - omega(spec, k), e};
    const double fz = coeffs(spec, z);
    const double nk = norm(k);
    const double nz = norm(z);

    // Crossing on the line through (p, q); feasible when k3 and u = k + k3 - z lie in the box.
    auto crossing = [&](double p, double q, Vec3& k3) {
        Vec3 base;
        base[pa] = p;
        base[qa] = q;
        double t = 0.0;
        if (!line.root(base, t)) return false;
        k3 = line.point(base, t);
        return in_box(k + k3 - z, kc);
    };

    const Rule1D outer = composite_gauss(opt.k1_panels, opt.k1_order, 0.0, kc);
    std::vector<double> samples(opt.k1_samples);
    std::vector<char> feasible(opt.k1_samples);
    for (std::size_t io = 0; io < outer.nodes.size(); ++io) {
        const double p = outer.nodes[io];
        Vec3 k3;
        for (int s = 0; s < opt.k1_samples; ++s) {
            samples[s] = kc * s / (opt.k1_samples - 1);
            feasible[s] = crossing(p, samples[s], k3);
        }
        auto boundary = [&](double a, double b, bool fa) {
            for (int it = 0; it < 36; ++it) {
                const double m = 0.5 * (a + b);
                if (crossing(p, m, k3) == fa)
                    a = m;
                else
                    b = m;
            }
            return 0.5 * (a + b);
        };
        // Feasible intervals of q from sign changes of the sampled indicator.
        std::vector<std::pair<double, double>> intervals;
        double start = feasible[0] ? 0.0 : -1.0;
        for (int s = 1; s < opt.k1_samples; ++s) {
            if (feasible[s] == feasible[s - 1]) continue;
            const double x = boundary(samples[s - 1], samples[s], feasible[s - 1]);
            if (feasible[s])
                start = x;
            else
                intervals.emplace_back(start, x);
        }
        if (feasible[opt.k1_samples - 1]) intervals.emplace_back(start, kc);

        double row = 0.0;
        for (const auto& [a, b] : intervals) {
            if (!(b > a)) continue;
            const int panels = std::max(1, static_cast<int>(std::ceil(opt.k1_panels * (b - a) / kc)));
            const Rule1D inner = composite_gauss(panels, opt.k1_order, a, b);
            for (std::size_t iq = 0; iq < inner.nodes.size(); ++iq) {
                if (!crossing(p, inner.nodes[iq], k3)) continue;
                const double slope = std::abs(line.slope(k3));
                if (slope < opt.tangential * kc) {
                    ++out.skipped;
                    continue;
                }
                ++out.nodes;
                const Vec3 u = k + k3 - z;
                const double nu = norm(u);
                const double n3 = norm(k3);
                const double cs = cross_section(opt.beta, nk, nu, nz, n3);
                double h = 0.0;
                if (form == KernelForm::Derived)
                    h = 2.0 * coeffs(spec, u) * coeffs(spec, k3) * cs;
                else
                    h = fz * coeffs(spec, u) * cs * (nz + nu) / norm(k + k3);
                row += inner.weights[iq] * h / slope;
            }
        }
        out.value += outer.weights[io] * row;
    }
    return out;
}

CenteredRule spherical_rule(const Vec3& center, double k_cut, int n_r, int n_cos, int n_phi) {
    CenteredRule rule;
    const Rule1D rc = gauss_legendre(n_cos, -1.0, 1.0);
    const Rule1D rr = gauss_legendre(n_r, 0.0, 1.0);
    for (int a = 0; a < n_cos; ++a) {
        const double ct = rc.nodes[a];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int b = 0; b < n_phi; ++b) {
            const double ph = 2.0 * std::numbers::pi * (b + 0.5) / n_phi;
            const Vec3 w{st * std::cos(ph), st * std::sin(ph), ct};
            double rmax = std::numeric_limits<double>::infinity();
            for (int d = 0; d < 3; ++d) {
                if (w[d] > 0.0) rmax = std::min(rmax, (k_cut - center[d]) / w[d]);
                if (w[d] < 0.0) rmax = std::min(rmax, -center[d] / w[d]);
            }
            if (!(rmax > 0.0)) continue;
            const double wa = rc.weights[a] * 2.0 * std::numbers::pi / n_phi;
            for (int c = 0; c < n_r; ++c) {
                const double r = rmax * rr.nodes[c];
                rule.points.push_back(center + r * w);
                rule.weights.push_back(wa * rmax * rr.weights[c] * r * r);
            }
        }
    }
    return rule;
}

namespace {

template <class Fn>
void for_rows(int N, Exec exec, Fn&& fn) {
    if (exec == Exec::Serial) {
        for (int i = 0; i < N; ++i) fn(i);
    } else {
        for_each_chunk(N, fn);
    }
}

}  // namespace

K1Application apply_K1_kernel(const CollisionEngine& engine, const Field& g, const KernelOptions& opt,
                              KernelForm form, Exec exec) {
    const Grid& grid = engine.grid();
    const int N = grid.size();
    Field phi(N);
    for (int i = 0; i < N; ++i) phi[i] = g[i] / engine.equilibrium()[i];
    K1Application out;
    out.values.assign(N, 0.0);
    std::vector<int> skipped(N, 0);
    for_rows(N, exec, [&](int i) {
        const CenteredRule rule = spherical_rule(grid.node(i), grid.k_cut(), opt.sph_r, opt.sph_cos, opt.sph_phi);
        double s = 0.0;
        for (std::size_t p = 0; p < rule.points.size(); ++p) {
            const Vec3& z = rule.points[p];
            const K1Value v = kernel_k1(engine.spec(), engine.coeffs(), grid.node(i), z, opt, form);
            skipped[i] += v.skipped;
            s += rule.weights[p] * v.value * engine.equilibrium_at(z) * grid.interpolate(phi.data(), z);
        }
        out.values[i] = s;
    });
    for (int s : skipped) out.skipped += s;
    return out;
}

double hilbert_schmidt_k1_sq(const CollisionEngine& engine, const KernelOptions& opt, KernelForm form, Exec exec) {
    const Grid& grid = engine.grid();
    const int N = grid.size();
    Field row(N, 0.0);
    for_rows(N, exec, [&](int i) {
        const CenteredRule rule = spherical_rule(grid.node(i), grid.k_cut(), opt.sph_r, opt.sph_cos, opt.sph_phi);
        double s = 0.0;
        for (std::size_t p = 0; p < rule.points.size(); ++p) {
            const double v = kernel_k1(engine.spec(), engine.coeffs(), grid.node(i), rule.points[p], opt, form).value;
            s += rule.weights[p] * v * v;
        }
        row[i] = grid.weight(i) * s;
    });
    double total = 0.0;
    for (double v : row) total += v;
    return total;
}

double hilbert_schmidt_sq(const Grid& rows, const Grid& cols, const Eigen::MatrixXd& kernel) {
    double s = 0.0;
    for (int i = 0; i < rows.size(); ++i)
        for (int j = 0; j < cols.size(); ++j) s += rows.weight(i) * cols.weight(j) * kernel(i, j) * kernel(i, j);
    return s;
}

Eigen::MatrixXd kernel_k2_matrix(const DispersionSpec& spec, const EquilibriumCoeffs& coeffs, const Grid& grid,
                                 const KernelOptions& opt, KernelForm form, Exec exec) {
    const int N = grid.size();
    Eigen::MatrixXd K(N, N);
    auto row = [&](int i) {
        for (int j = 0; j < N; ++j) K(i, j) = kernel_k2(spec, coeffs, grid.node(i), grid.node(j), opt, form);
    };
    for_rows(N, exec, row);
    return K;
}

}  // namespace wke
