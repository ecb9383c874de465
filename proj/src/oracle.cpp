#include "wke/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace wke {

namespace {

double bump(double x) {
    const double d = 1.0 - x * x;
    return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
}

struct Interval {
    double lo;
    double hi;
};

// Sub-intervals of [lo, hi] where |2 (t - c)^2 + m| < eps.
int band_intervals(double c, double m, double eps, double lo, double hi, Interval out[2]) {
    if (!(eps - m > 0.0)) return 0;
    const double R = std::sqrt(0.5 * (eps - m));
    const double r0 = std::sqrt(std::max(0.0, 0.5 * (-eps - m)));
    Interval cand[2];
    int nc = 0;
    if (r0 == 0.0) {
        cand[nc++] = {c - R, c + R};
    } else {
        cand[nc++] = {c - R, c - r0};
        cand[nc++] = {c + r0, c + R};
    }
    int k = 0;
    for (int q = 0; q < nc; ++q) {
        const double a = std::max(lo, cand[q].lo);
        const double b = std::min(hi, cand[q].hi);
        if (b > a) out[k++] = {a, b};
    }
    return k;
}

}  // namespace

Mollifier::Mollifier(double eps) : eps_(eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("Mollifier: eps must be positive");
    scale_ = 1.0 / (normalization() * eps);
}

double Mollifier::normalization() {
    static const double z = [] {
        const Rule1D r = composite_gauss(64, 10, -1.0, 1.0);
        double s = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * bump(r.nodes[i]);
        return s;
    }();
    return z;
}

double Mollifier::operator()(double x) const { return scale_ * bump(x / eps_); }

double Mollifier::mass() const {
    const Rule1D r = composite_gauss(128, 10, -eps_, eps_);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * (*this)(r.nodes[i]);
    return s;
}

double oracle_cost(const Grid& grid, std::size_t eps_count, const OracleOptions& opt) {
    const double lines = std::pow(static_cast<double>(opt.z_panels) * opt.z_order, 2.0);
    const double along = 2.0 * opt.band_order * static_cast<double>(eps_count);
    return static_cast<double>(grid.size()) * std::pow(opt.n_k3, 3.0) * lines * along;
}

std::vector<double> eps_schedule(const Grid& grid) {
    const double h = grid.k_cut() / grid.n_per_axis();
    return {4.0 * h * h, 2.0 * h * h, h * h};
}

std::vector<Field> mollified_collision(const DispersionSpec& spec, const Grid& grid, const std::vector<double>& eps,
                                       const Field& n, const OracleOptions& opt, Exec exec) {
    if (eps.empty()) throw std::invalid_argument("mollified_collision: empty eps list");
    if (opt.n_k3 < 1 || opt.z_panels < 1 || opt.z_order < 1 || opt.band_order < 1)
        throw std::invalid_argument("mollified_collision: quadrature sizes must be positive");
    const int N = grid.size();
    if (static_cast<int>(n.size()) != N) throw std::invalid_argument("mollified_collision: field size does not match");
    const double cost = oracle_cost(grid, eps.size(), opt);
    if (cost > opt.node_budget) {
        std::ostringstream msg;
        msg << "mollified_collision: estimated " << cost << " integrand evaluations exceed the node budget "
            << opt.node_budget;
        throw OracleBudgetError(msg.str());
    }
    std::vector<Mollifier> moll;
    for (double e : eps) moll.emplace_back(e);

    const int na = grid.n_per_axis();
    const double kc = grid.k_cut();
    const Lagrange1D& lag = grid.lagrange();
    std::vector<double> inv(N);
    for (int i = 0; i < N; ++i) {
        if (!(n[i] > 0.0)) throw DensityError("mollified_collision: non-positive density");
        inv[i] = 1.0 / n[i];
    }
    auto positive = [](double r) {
        if (!(r > 0.0)) throw DensityError("mollified_collision: interpolated density not positive");
        return r;
    };
    const Grid g3(opt.n_k3, kc);
    std::vector<double> inv3(g3.size());
    for (int j = 0; j < g3.size(); ++j) inv3[j] = positive(grid.interpolate(inv.data(), g3.node(j)));
    const bool quadratic = spec.perturbation.kind == PerturbationKind::Zero || spec.perturbation.eps == 0.0;

    auto cross = [&](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
        if (opt.beta == 0.0) return 1.0;
        return std::pow(norm(a) * norm(b) * norm(c) * norm(d), -0.5 * opt.beta);
    };

    const Rule1D ref = gauss_legendre(opt.band_order);
    std::vector<Field> out(eps.size(), Field(N, 0.0));
    std::vector<std::exception_ptr> errors(N);
    auto node = [&](int i) {
        const Vec3& k = grid.node(i);
        const double r0 = inv[i];
        std::vector<double> lx(na), ly(na), ux(na), uy(na), lz(na), lu(na);
        std::vector<double> Mz(na), Mu(na);
        std::vector<double> acc(eps.size(), 0.0);
        for (int j = 0; j < g3.size(); ++j) {
            const Vec3& k3 = g3.node(j);
            const double r3 = inv3[j];
            const Vec3 a = k + k3;
            double lo[3], hi[3];
            bool empty = false;
            for (int d = 0; d < 3; ++d) {
                lo[d] = std::max(0.0, a[d] - kc);
                hi[d] = std::min(kc, a[d]);
                empty = empty || !(hi[d] > lo[d]);
            }
            if (empty) continue;
            const Rule1D rx = composite_gauss(opt.z_panels, opt.z_order, lo[0], hi[0]);
            const Rule1D ry = composite_gauss(opt.z_panels, opt.z_order, lo[1], hi[1]);
            const double base = g3.weight(j);
            const double omega_out = omega(spec, k) + omega(spec, k3);
            for (std::size_t p = 0; p < rx.nodes.size(); ++p) {
                const double zx = rx.nodes[p];
                lag.basis(zx, lx.data());
                lag.basis(a.x - zx, ux.data());
                for (std::size_t q = 0; q < ry.nodes.size(); ++q) {
                    const double zy = ry.nodes[q];
                    lag.basis(zy, ly.data());
                    lag.basis(a.y - zy, uy.data());
                    for (int c = 0; c < na; ++c) {
                        double sz = 0.0, su = 0.0;
                        for (int aa = 0; aa < na; ++aa)
                            for (int bb = 0; bb < na; ++bb) {
                                const double v = inv[(aa * na + bb) * na + c];
                                sz += lx[aa] * ly[bb] * v;
                                su += ux[aa] * uy[bb] * v;
                            }
                        Mz[c] = sz;
                        Mu[c] = su;
                    }
                    const double wline = base * rx.weights[p] * ry.weights[q];
                    auto integrand = [&](double zz) {
                        lag.basis(zz, lz.data());
                        lag.basis(a.z - zz, lu.data());
                        double r2 = 0.0, r1 = 0.0;
                        for (int c = 0; c < na; ++c) {
                            r2 += lz[c] * Mz[c];
                            r1 += lu[c] * Mu[c];
                        }
                        positive(r1);
                        positive(r2);
                        const Vec3 z{zx, zy, zz};
                        const double cs = cross(k, a - z, z, k3);
                        return cs * (r0 + r3 - r1 - r2) / (r0 * r1 * r2 * r3);
                    };
                    if (quadratic) {
                        // defect = 2 (zz - a_z/2)^2 + m along the line
                        const double dx = a.x - zx, dy = a.y - zy;
                        const double c0 = dx * dx + zx * zx + dy * dy + zy * zy + a.z * a.z - omega_out;
                        const double m = c0 - 0.5 * a.z * a.z;
                        for (std::size_t e = 0; e < eps.size(); ++e) {
                            Interval iv[2];
                            const int cnt = band_intervals(0.5 * a.z, m, eps[e], lo[2], hi[2], iv);
                            for (int s = 0; s < cnt; ++s) {
                                const double mid = 0.5 * (iv[s].lo + iv[s].hi), half = 0.5 * (iv[s].hi - iv[s].lo);
                                for (std::size_t t = 0; t < ref.nodes.size(); ++t) {
                                    const double zz = mid + half * ref.nodes[t];
                                    const double C = 2.0 * (zz - 0.5 * a.z) * (zz - 0.5 * a.z) + m;
                                    acc[e] += wline * half * ref.weights[t] * moll[e](C) * integrand(zz);
                                }
                            }
                        }
                    } else {
                        const Rule1D rz =
                            composite_gauss(std::max(1, 2 * opt.band_order / opt.z_order), opt.z_order, lo[2], hi[2]);
                        for (std::size_t t = 0; t < rz.nodes.size(); ++t) {
                            const double zz = rz.nodes[t];
                            const double C = defect(spec, k, k3, Vec3{zx, zy, zz});
                            bool any = false;
                            for (std::size_t e = 0; e < eps.size(); ++e) any = any || std::abs(C) < eps[e];
                            if (!any) continue;
                            const double h = integrand(zz);
                            for (std::size_t e = 0; e < eps.size(); ++e)
                                acc[e] += wline * rz.weights[t] * moll[e](C) * h;
                        }
                    }
                }
            }
        }
        for (std::size_t e = 0; e < eps.size(); ++e) out[e][i] = acc[e];
    };
    if (exec == Exec::Serial) {
        for (int i = 0; i < N; ++i) node(i);
    } else {
        for_each_chunk(N, [&](int i) {
            try {
                node(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return out;
}

Field mollified_collision(const DispersionSpec& spec, const Grid& grid, double eps, const Field& n,
                          const OracleOptions& opt, Exec exec) {
    return mollified_collision(spec, grid, std::vector<double>{eps}, n, opt, exec)[0];
}

Field richardson(const Field& q1, const Field& q2, const Field& q4) {
    if (q1.size() != q2.size() || q1.size() != q4.size()) throw std::invalid_argument("richardson: size mismatch");
    Field out(q1.size());
    for (std::size_t i = 0; i < q1.size(); ++i) {
        const double a = (4.0 * q2[i] - q1[i]) / 3.0;
        const double b = (4.0 * q4[i] - q2[i]) / 3.0;
        out[i] = (16.0 * b - a) / 15.0;
    }
    return out;
}

double relative_l2(const Grid& grid, const Field& a, const Field& reference) {
    Field d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - reference[i];
    const double den = grid.norm(reference);
    return den > 0.0 ? grid.norm(d) / den : grid.norm(d);
}

OracleComparison compare_with_reference(const Grid& grid, const std::vector<double>& eps,
                                        const std::vector<Field>& values, const Field& reference) {
    if (eps.size() != values.size()) throw std::invalid_argument("compare_with_reference: size mismatch");
    OracleComparison c;
    c.eps = eps;
    for (const Field& v : values) c.errors.push_back(relative_l2(grid, v, reference));
    if (values.size() >= 3) {
        c.extrapolated = richardson(values[0], values[1], values[2]);
        c.extrapolated_error = relative_l2(grid, c.extrapolated, reference);
        Field d1(reference.size()), d2(reference.size());
        for (std::size_t i = 0; i < reference.size(); ++i) {
            d1[i] = values[0][i] - values[1][i];
            d2[i] = values[1][i] - values[2][i];
        }
        const double n2 = grid.norm(d2);
        c.observed_order = n2 > 0.0 ? std::log2(grid.norm(d1) / n2) : 0.0;
    } else {
        c.extrapolated = values.back();
        c.extrapolated_error = c.errors.back();
    }
    return c;
}

}  // namespace wke
