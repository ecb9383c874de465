#include "wke/isotropic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace wke {

namespace {

constexpr double kPi = std::numbers::pi;

struct IsoPoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
    double weight = 0.0;  // includes x3 x1 x2 min(.) cs / x and the quadrature weights
};

// Breakpoints strictly inside (lo, hi), sorted, with the ends.
std::vector<double> segments(double lo, double hi, std::vector<double> cuts) {
    std::vector<double> out{lo};
    std::sort(cuts.begin(), cuts.end());
    const double tiny = 1e-14 * std::max(1.0, std::abs(hi));
    for (double c : cuts)
        if (c > out.back() + tiny && c < hi - tiny) out.push_back(c);
    out.push_back(hi);
    return out;
}

double clamp_unit(double v) { return std::min(1.0, std::max(-1.0, v)); }

// Quadrature points of the reduced integral at output radius x; half range psi <= pi/4 when `half`.
std::vector<IsoPoint> iso_points(double x, double kc, int order, double beta, bool half) {
    std::vector<IsoPoint> pts;
    std::vector<double> x3_cuts{x};
    if (x < kc) x3_cuts.push_back(std::sqrt(kc * kc - x * x));
    const std::vector<double> xs = segments(0.0, kc, x3_cuts);
    for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
        const Rule1D r3 = gauss_legendre(order, xs[s], xs[s + 1]);
        for (std::size_t a = 0; a < r3.nodes.size(); ++a) {
            const double x3 = r3.nodes[a];
            const double rho = std::hypot(x, x3);
            const double m = std::min(1.0, kc / rho);
            const double lo = std::acos(m);
            const double hi = half ? 0.25 * kPi : std::asin(m);
            if (!(hi > lo)) continue;
            const double cx = clamp_unit(x / rho);
            const double c3 = clamp_unit(x3 / rho);
            const std::vector<double> ps =
                segments(lo, hi, {0.25 * kPi, std::acos(cx), std::asin(cx), std::acos(c3), std::asin(c3)});
            for (std::size_t t = 0; t + 1 < ps.size(); ++t) {
                const Rule1D rp = gauss_legendre(order, ps[t], ps[t + 1]);
                for (std::size_t b = 0; b < rp.nodes.size(); ++b) {
                    IsoPoint p;
                    p.x1 = rho * std::cos(rp.nodes[b]);
                    p.x2 = rho * std::sin(rp.nodes[b]);
                    p.x3 = x3;
                    const double mn = std::min(std::min(x, x3), std::min(p.x1, p.x2));
                    double w = r3.weights[a] * rp.weights[b] * x3 * p.x1 * p.x2 * mn / x;
                    if (beta != 0.0) w *= std::pow(x * p.x1 * p.x2 * x3, -0.5 * beta);
                    p.weight = half ? 2.0 * w : w;
                    pts.push_back(p);
                }
            }
        }
    }
    return pts;
}

struct Reciprocal {
    const RadialGrid& grid;
    std::vector<double> inv;

    Reciprocal(const RadialGrid& g, const RadialField& f) : grid(g), inv(f.size()) {
        if (static_cast<int>(f.size()) != g.size()) throw std::invalid_argument("radial field size does not match the grid");
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!(f[i] > 0.0)) {
                std::ostringstream msg;
                msg << "iso_collision: non-positive density " << f[i] << " at node " << i;
                throw DensityError(msg.str());
            }
            inv[i] = 1.0 / f[i];
        }
    }
    // Fills the cardinal values and returns the reconstructed density.
    double at(double x, double* ell) const {
        grid.lagrange().basis(x, ell);
        double s = 0.0;
        for (std::size_t m = 0; m < inv.size(); ++m) s += ell[m] * inv[m];
        if (!(s > 0.0)) {
            std::ostringstream msg;
            msg << "iso_collision: interpolated density not positive at x = " << x;
            throw DensityError(msg.str());
        }
        return 1.0 / s;
    }
};

}  // namespace

RadialGrid::RadialGrid(int n_points, double k_cut)
    : k_cut_(k_cut), rule_(gauss_legendre(n_points, 0.0, k_cut)), lagrange_(rule_.nodes) {
    if (n_points < 2) throw std::invalid_argument("RadialGrid: n_points must be >= 2");
    if (!(k_cut > 0.0)) throw std::invalid_argument("RadialGrid: k_cut must be positive");
}

RadialField iso_collision(const RadialGrid& grid, const RadialField& f, Form form, const IsoOptions& opt) {
    if (opt.order < 1) throw std::invalid_argument("iso_collision: order must be >= 1");
    const Reciprocal rec(grid, f);
    const int N = grid.size();
    const bool weak = form == Form::Conservative;
    std::vector<RadialField> partial(N, RadialField(N, 0.0));
    std::vector<std::exception_ptr> errors(N);
    for_each_chunk(N, [&](int i) {
        try {
            const double x = grid.node(i);
            std::vector<double> l1(N), l2(N), l3(N);
            RadialField& acc = partial[i];
            const double scale = weak ? grid.weight(i) * x * x : 1.0;
            for (const IsoPoint& p : iso_points(x, grid.k_cut(), opt.order, opt.beta, opt.exploit_symmetry)) {
                const double f0 = f[i];
                const double f1 = rec.at(p.x1, l1.data());
                const double f2 = rec.at(p.x2, l2.data());
                const double f3 = rec.at(p.x3, l3.data());
                const double bracket = f1 * f2 * (f0 + f3) - f0 * f3 * (f1 + f2);
                const double wb = scale * p.weight * bracket;
                acc[i] += wb;
                if (!weak) continue;
                for (int m = 0; m < N; ++m) acc[m] += wb * (l3[m] - l1[m] - l2[m]);
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    RadialField out(N, 0.0);
    for (int i = 0; i < N; ++i)
        for (int m = 0; m < N; ++m) out[m] += partial[i][m];
    if (weak)
        for (int m = 0; m < N; ++m) out[m] /= 4.0 * grid.weight(m) * grid.node(m) * grid.node(m);
    return out;
}

double iso_kernel_asymmetry(const RadialGrid& grid, const RadialField& f, int i, const IsoOptions& opt) {
    const Reciprocal rec(grid, f);
    const int N = grid.size();
    std::vector<double> scratch(N);
    const double x = grid.node(i);
    // returns the integrand and the size of its two gross terms (the bracket cancels near equilibrium)
    auto integrand = [&](double x1, double x2, double x3) {
        const double f0 = f[i];
        const double f1 = rec.at(x1, scratch.data());
        const double f2 = rec.at(x2, scratch.data());
        const double f3 = rec.at(x3, scratch.data());
        double k = x1 * x2 * std::min(std::min(x, x3), std::min(x1, x2)) / x;
        if (opt.beta != 0.0) k *= std::pow(x * x1 * x2 * x3, -0.5 * opt.beta);
        const double gain = f1 * f2 * (f0 + f3), loss = f0 * f3 * (f1 + f2);
        return std::pair{k * (gain - loss), k * (gain + loss)};
    };
    double worst = 0.0;
    for (const IsoPoint& p : iso_points(x, grid.k_cut(), opt.order, opt.beta, false)) {
        const auto [a, sa] = integrand(p.x1, p.x2, p.x3);
        const auto [b, sb] = integrand(p.x2, p.x1, p.x3);
        const double den = std::max(sa, sb);
        if (den > 0.0) worst = std::max(worst, std::abs(a - b) / den);
    }
    return worst;
}

RadialMoments radial_moments(const RadialGrid& grid, const RadialField& f) {
    RadialMoments m;
    for (int i = 0; i < grid.size(); ++i) {
        const double x2 = grid.node(i) * grid.node(i);
        const double w = grid.weight(i);
        m.mass += w * x2 * f[i];
        m.energy += w * x2 * x2 * f[i];
        if (!(f[i] > 0.0)) throw std::domain_error("radial_moments: non-positive density");
        m.entropy += w * x2 * std::log(f[i]);
    }
    return m;
}

RadialEquilibrium matched_equilibrium(const RadialGrid& grid, const RadialField& f) {
    const int N = grid.size();
    const RadialMoments target = radial_moments(grid, f);
    const double kc2 = grid.k_cut() * grid.k_cut();
    // Initial guess: weighted least-squares fit of 1/f by a + c x^2.
    double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
    for (int i = 0; i < N; ++i) {
        const double x2 = grid.node(i) * grid.node(i);
        const double w = grid.weight(i) * x2;
        s00 += w;
        s01 += w * x2;
        s11 += w * x2 * x2;
        r0 += w / f[i];
        r1 += w * x2 / f[i];
    }
    const double det0 = s00 * s11 - s01 * s01;
    double a = (r0 * s11 - r1 * s01) / det0;
    double c = (s00 * r1 - s01 * r0) / det0;
    auto admissible = [&](double aa, double cc) { return aa > 0.0 && aa + cc * kc2 > 0.0; };
    if (!admissible(a, c)) {
        a = s00 / target.mass;
        c = 0.0;
    }
    auto residual = [&](double aa, double cc, double J[2][2]) {
        std::array<double, 2> F{-target.mass, -target.energy};
        J[0][0] = J[0][1] = J[1][0] = J[1][1] = 0.0;
        for (int i = 0; i < N; ++i) {
            const double x2 = grid.node(i) * grid.node(i);
            const double w = grid.weight(i) * x2;
            const double d = 1.0 / (aa + cc * x2);
            F[0] += w * d;
            F[1] += w * x2 * d;
            J[0][0] -= w * d * d;
            J[0][1] -= w * x2 * d * d;
            J[1][1] -= w * x2 * x2 * d * d;
        }
        J[1][0] = J[0][1];
        return F;
    };
    for (int it = 0; it < 100; ++it) {
        double J[2][2];
        const auto F = residual(a, c, J);
        if (std::abs(F[0]) <= 1e-15 * target.mass && std::abs(F[1]) <= 1e-15 * target.energy) break;
        const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        const double da = -(F[0] * J[1][1] - F[1] * J[0][1]) / det;
        const double dc = -(J[0][0] * F[1] - J[1][0] * F[0]) / det;
        double step = 1.0;
        while (!admissible(a + step * da, c + step * dc) && step > 1e-12) step *= 0.5;
        a += step * da;
        c += step * dc;
        if (std::abs(step * da) <= 1e-16 * std::abs(a) && std::abs(step * dc) <= 1e-16 * (std::abs(c) + std::abs(a)))
            break;
    }
    RadialEquilibrium eq{a, c, RadialField(N)};
    for (int i = 0; i < N; ++i) eq.values[i] = 1.0 / (a + c * grid.node(i) * grid.node(i));
    return eq;
}

IsoTrajectory iso_integrate(const RadialGrid& grid, const RadialField& f0, double T, double dt, const IsoOptions& opt) {
    if (!(T >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("iso_integrate: need T >= 0 and dt > 0");
    const int N = grid.size();
    IsoTrajectory out;
    out.target = matched_equilibrium(grid, f0);
    const int steps = static_cast<int>(std::ceil(T / dt - 1e-12));
    const double h = steps > 0 ? T / steps : 0.0;
    auto diag = [&](double t, const RadialField& f) {
        const RadialMoments m = radial_moments(grid, f);
        double d2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double e = f[i] - out.target.values[i];
            d2 += grid.weight(i) * grid.node(i) * grid.node(i) * e * e;
        }
        out.diagnostics.push_back({t, m.mass, m.energy, m.entropy, std::sqrt(d2)});
    };
    RadialField f = f0;
    diag(0.0, f);
    auto axpy = [&](const RadialField& base, double s, const RadialField& d) {
        RadialField r(N);
        for (int i = 0; i < N; ++i) r[i] = base[i] + s * d[i];
        return r;
    };
    for (int n = 0; n < steps; ++n) {
        try {
            const RadialField k1 = iso_collision(grid, f, Form::Conservative, opt);
            const RadialField k2 = iso_collision(grid, axpy(f, 0.5 * h, k1), Form::Conservative, opt);
            const RadialField k3 = iso_collision(grid, axpy(f, 0.5 * h, k2), Form::Conservative, opt);
            const RadialField k4 = iso_collision(grid, axpy(f, h, k3), Form::Conservative, opt);
            for (int i = 0; i < N; ++i) f[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            for (int i = 0; i < N; ++i)
                if (!(f[i] > 0.0)) throw DensityError("iso_integrate: density lost positivity");
        } catch (const DensityError& e) {
            out.aborted = true;
            out.abort_reason = e.what();
            break;
        }
        diag((n + 1) * h, f);
    }
    out.final_state = f;
    return out;
}

double ball_collision_3d(const DispersionSpec& spec, const std::function<double(double)>& f, double x,
                         const Vec3& direction, const Ball3DOptions& opt) {
    const double kc = spec.k_cut;
    const Vec3 k = x * normalized(direction);
    ChartOptions chart = opt.chart;
    chart.domain = Domain::Ball;
    // |k3| = x is a kink of the integrand (the min of the four radii); split the radial rule there.
    std::vector<double> rn, rw;
    for (const auto& [lo, hi] : {std::pair{0.0, x}, std::pair{x, kc}}) {
        if (!(hi > lo)) continue;
        const Rule1D r = gauss_legendre(opt.n_radial, lo, hi);
        rn.insert(rn.end(), r.nodes.begin(), r.nodes.end());
        rw.insert(rw.end(), r.weights.begin(), r.weights.end());
    }
    const Rule1D cosr = gauss_legendre(opt.n_polar, -1.0, 1.0);
    const double f0 = f(x);
    double total = 0.0;
    std::vector<ManifoldPoint> pts;
    for (std::size_t a = 0; a < rn.size(); ++a) {
        const double r = rn[a];
        const double f3 = f(r);
        for (std::size_t b = 0; b < cosr.nodes.size(); ++b) {
            const double ct = cosr.nodes[b];
            const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (int c = 0; c < opt.n_azimuth; ++c) {
                const double ph = 2.0 * kPi * (c + 0.5) / opt.n_azimuth;
                const Vec3 k3{r * st * std::cos(ph), r * st * std::sin(ph), r * ct};
                const double w3 = rw[a] * r * r * cosr.weights[b] * 2.0 * kPi / opt.n_azimuth;
                pts.clear();
                manifold_points(spec, k, k3, chart, pts);
                double inner = 0.0;
                for (const ManifoldPoint& p : pts) {
                    const double f1 = f(norm(k + k3 - p.z));
                    const double f2 = f(norm(p.z));
                    inner += p.weight * (f1 * f2 * (f0 + f3) - f0 * f3 * (f1 + f2));
                }
                total += w3 * inner;
            }
        }
    }
    return total;
}

}  // namespace wke
