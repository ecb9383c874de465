// Acceptance run: one PASS/FAIL line per criterion, followed by the measured numbers.
// Usage: acceptance [--wke PATH --config SMOKE.ini --work DIR] [--only N[,N...]]

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "wke/evolution.hpp"
#include "wke/isotropic.hpp"
#include "wke/kernels.hpp"
#include "wke/linear_op.hpp"
#include "wke/oracle.hpp"
#include "wke/parallel.hpp"
#include "wke/resonance.hpp"
#include "wke/spectral.hpp"

namespace fs = std::filesystem;
using namespace wke;
using namespace wke::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string summary;
    std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Reference configuration: s = 0, k_c = 1, 6 nodes per axis, n_k3 = 6, 24 x 16 chart, beta = 0.
QuadratureConfig reference_quadrature(int n_k3 = 6) {
    QuadratureConfig qc;
    qc.n_k3 = n_k3;
    qc.n_alpha = 24;
    qc.n_theta = 16;
    return qc;
}

Field scaled(const Field& g, double t) {
    Field out = g;
    for (double& v : out) v *= t;
    return out;
}

Field diff(const Field& a, const Field& b) {
    Field d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

double max_norm(const Field& v) { return max_abs(v); }

// ---------------------------------------------------------------------------------------------------------------
// 1. closed-form circle radius and surface Jacobian for s = 0

Outcome criterion1() {
    DispersionSpec spec;
    std::mt19937_64 rng(101);
    double worst_r = 0.0, worst_j = 0.0;
    int circles = 0;
    for (int t = 0; t < 100; ++t) {
        const Vec3 k = random_point(rng, 1.0), k3 = random_point(rng, 1.0);
        const double P = norm(k + k3);
        for (double alpha : {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95}) {
            const double closed = 0.5 * (dot(k, k) + dot(k3, k3) - (alpha * alpha + (1 - alpha) * (1 - alpha)) * P * P);
            const RadiusResult r = solve_radius(spec, k, k3, alpha);
            if (closed <= 0.0) {
                if (!r.empty) worst_r = std::max(worst_r, std::abs(r.r_sq - closed));
                continue;
            }
            ++circles;
            worst_r = std::max(worst_r, std::abs(r.r_sq - closed));
            worst_j = std::max(worst_j, std::abs(surface_jacobian(spec, k, k3, alpha) - P / 4.0));
        }
    }
    Outcome o;
    o.pass = worst_r <= 1e-10 && worst_j <= 1e-10 && circles > 0;
    o.summary = fmt("max |r^2 - closed form| = %.2e, max |jacobian - P/4| = %.2e over %d circles (tol 1e-10)", worst_r,
                    worst_j, circles);
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 2. derivative consistency of the parametrization

struct OrderStat {
    double e_h = 0.0;
    double e_h2 = 0.0;
    double scale = 0.0;
    bool exact() const { return e_h <= 1e-9 * scale && e_h2 <= 1e-9 * scale; }
    double order() const { return std::log2(e_h / e_h2); }
    bool ok() const { return exact() || order() >= 1.9; }
};

OrderStat alpha_derivative_order(const DispersionSpec& spec, std::mt19937_64& rng) {
    OrderStat s;
    const double h = 0.02;
    int used = 0;
    while (used < 40) {
        const Vec3 k = random_point(rng, 1.0), k3 = random_point(rng, 1.0);
        const double alpha = uniform(rng, 0.3, 0.7);
        auto r2 = [&](double a) { return solve_radius(spec, k, k3, a, 1e-15); };
        const RadiusResult c = r2(alpha);
        if (c.empty || c.r_sq < 0.05) continue;
        const RadiusResult lo = r2(alpha - h), hi = r2(alpha + h), lo2 = r2(alpha - h / 2), hi2 = r2(alpha + h / 2);
        if (lo.empty || hi.empty) continue;
        const double exact = d_alpha_r_squared(spec, k, k3, alpha, c.r_sq);
        s.e_h += std::abs((hi.r_sq - lo.r_sq) / (2 * h) - exact);
        s.e_h2 += std::abs((hi2.r_sq - lo2.r_sq) / h - exact);
        s.scale += std::abs(exact);
        ++used;
    }
    return s;
}

OrderStat gradient_order(const DispersionSpec& spec, std::mt19937_64& rng) {
    OrderStat s;
    const double h = 0.01;
    int used = 0;
    while (used < 40) {
        const Vec3 k = random_point(rng, 1.0), k3 = random_point(rng, 1.0);
        const double alpha = uniform(rng, 0.3, 0.7), theta = uniform(rng, 0.0, 2 * std::numbers::pi);
        const RadiusResult c = solve_radius(spec, k, k3, alpha, 1e-15);
        if (c.empty || c.r_sq < 0.05) continue;
        const Vec3 z = chart_point(make_frame(k, k3), alpha, std::sqrt(c.r_sq), theta);
        auto fd_sq = [&](double step) {
            double g2 = 0.0;
            for (int d = 0; d < 3; ++d) {
                Vec3 e{0, 0, 0};
                (d == 0 ? e.x : d == 1 ? e.y : e.z) = step;
                const double g = (defect(spec, k, k3, z + e) - defect(spec, k, k3, z - e)) / (2 * step);
                g2 += g * g;
            }
            return g2;
        };
        const double exact = grad_defect_norm_sq(spec, k, k3, alpha, theta);
        s.e_h += std::abs(fd_sq(h) - exact);
        s.e_h2 += std::abs(fd_sq(h / 2) - exact);
        s.scale += exact;
        ++used;
    }
    return s;
}

Outcome criterion2() {
    Outcome o;
    o.pass = true;
    std::vector<std::string> parts;
    for (int variant = 0; variant < 2; ++variant) {
        DispersionSpec spec;
        if (variant == 1) {
            spec.perturbation.kind = PerturbationKind::SinSquared;
            spec.perturbation.eps = 0.05;
            spec.perturbation.a = 3.0;
        }
        std::mt19937_64 rng(200 + variant);
        const OrderStat a = alpha_derivative_order(spec, rng);
        const OrderStat g = gradient_order(spec, rng);
        o.pass = o.pass && a.ok() && g.ok();
        auto describe = [](const OrderStat& s) {
            return s.exact() ? fmt("exact (err %.1e)", s.e_h / s.scale) : fmt("order %.3f", s.order());
        };
        parts.push_back(fmt("%s: d_alpha r^2 %s, |grad C|^2 %s", variant ? "sin^2 eps=0.05" : "s=0",
                            describe(a).c_str(), describe(g).c_str()));
    }
    o.summary = parts[0] + "; " + parts[1] + " (need order >= 1.9; centered differences are exact for quadratics)";
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 3. Rayleigh-Jeans annihilation under refinement

Outcome criterion3() {
    DispersionSpec spec;
    const std::vector<EquilibriumCoeffs> sets = {EquilibriumCoeffs{}, EquilibriumCoeffs{2.0, {-0.3, 0.5, 0.2}, 0.7}};
    const double floor = 1e-13;  // roundoff floor of the relative defect
    Outcome o;
    o.pass = true;
    for (std::size_t s = 0; s < sets.size(); ++s) {
        for (Form form : {Form::Conservative, Form::Pointwise}) {
            double err[2];
            for (int r = 0; r < 2; ++r) {
                const int n = 6 + r;
                const Grid grid(n, 1.0);
                const CollisionEngine engine(spec, grid, reference_quadrature(n), sets[s]);
                const Field& f = engine.equilibrium();
                err[r] = max_norm(engine.collision(f, form)) / max_norm(f);
            }
            const bool ok = err[0] <= 1e-4 && err[1] <= 1e-4 && (err[1] < err[0] || err[1] <= floor);
            o.pass = o.pass && ok;
            o.details.push_back(fmt("set %zu %s: n=6 %.2e, n=7 %.2e %s", s + 1,
                                    form == Form::Conservative ? "conservative" : "pointwise", err[0], err[1],
                                    ok ? "ok" : "FAIL"));
        }
    }
    o.summary = "||C(f_inf)||_inf / ||f_inf||_inf <= 1e-4 and non-increasing (or at the 1e-13 roundoff floor), "
                "2 coefficient sets, n = 6 -> 7";
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 4. conservation and entropy production

Outcome criterion4() {
    DispersionSpec spec;
    const Grid grid(6, 1.0);
    const CollisionEngine engine(spec, grid, reference_quadrature());
    std::mt19937_64 rng(400);
    double worst = 0.0, worst_pointwise = 0.0, min_prod = 1e300;
    for (int t = 0; t < 10; ++t) {
        const Field n = random_density(engine, rng, 0.5);
        for (Form form : {Form::Conservative, Form::Pointwise}) {
            const Field c = engine.collision(n, form);
            double scale = 0.0;
            for (int i = 0; i < grid.size(); ++i) scale += grid.weight(i) * std::abs(c[i]);
            const Moments m = conserved_quantities(spec, grid, c);
            const double defect = std::max({std::abs(m.mass), std::abs(m.momentum.x), std::abs(m.momentum.y),
                                            std::abs(m.momentum.z), std::abs(m.energy)}) /
                                  scale;
            const double prod = entropy_production(grid, n, c);
            if (form == Form::Conservative) {
                worst = std::max(worst, defect);
                min_prod = std::min(min_prod, prod);
            } else {
                worst_pointwise = std::max(worst_pointwise, defect);
            }
        }
    }
    Outcome o;
    o.pass = worst <= 1e-4 && min_prod >= -1e-8;
    o.summary = fmt("max |int phi C(n)| / int |C(n)| = %.2e (tol 1e-4), min entropy production %.3e (>= -1e-8), "
                    "10 random densities",
                    worst, min_prod);
    o.details.push_back(fmt("pointwise (non-weak) discretization for comparison: conservation defect %.2e",
                            worst_pointwise));
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 5. mollified brute-force oracle

Outcome criterion5() {
    DispersionSpec spec;
    const Grid grid(4, 1.0);
    const CollisionEngine engine(spec, grid, reference_quadrature(4));
    std::mt19937_64 rng(500);
    const Field n = random_density(engine, rng, 0.1);
    OracleOptions opt;
    opt.n_k3 = 4;
    const std::vector<double> eps = eps_schedule(grid);
    const std::vector<Field> values = mollified_collision(spec, grid, eps, n, opt);
    const Field reference = engine.collision(n, Form::Pointwise, DensityGauge::Reciprocal);
    const OracleComparison c = compare_with_reference(grid, eps, values, reference);
    Outcome o;
    o.pass = c.extrapolated_error <= 0.05;
    o.summary = fmt("relative L2 error after eps-extrapolation %.2f%% (tol 5%%), n = 4", 100 * c.extrapolated_error);
    for (std::size_t i = 0; i < eps.size(); ++i)
        o.details.push_back(fmt("eps %.4f: error %.2f%%", eps[i], 100 * c.errors[i]));
    o.details.push_back(fmt("observed order in eps %.2f", c.observed_order));
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 6. linear operator structure and gap stability

struct GapRun {
    double gap = 0.0;
    double min_eig = 0.0;
    double norm = 0.0;
    bool symmetric = false;
    int null_below = 0;
    double worst_null = 0.0;
    double tolerance = 0.0;
    double a_floor = 0.0;
};

GapRun gap_run(int n) {
    DispersionSpec spec;
    const Grid grid(n, 1.0);
    const CollisionEngine engine(spec, grid, reference_quadrature(n));
    const OperatorMatrix m = assemble_dirichlet(engine);
    const NullBasis basis = null_bases(engine);
    const SpectrumReport rep = eigen(m, basis.weighted);
    const NullReport nr = null_residuals(m, basis, rep.null_tolerance);
    GapRun r;
    r.gap = rep.gap;
    r.min_eig = rep.eigenvalues.front();
    r.norm = m.B.norm();
    r.symmetric = m.B == m.B.transpose();
    r.null_below = nr.weighted_below;
    for (double q : nr.weighted_quotients) r.worst_null = std::max(r.worst_null, std::abs(q));
    r.tolerance = rep.null_tolerance;
    r.a_floor = weyl_report(engine, rep).a_floor;
    return r;
}

Outcome criterion6() {
    const GapRun a = gap_run(6), b = gap_run(7);
    const double change = std::abs(b.gap - a.gap) / a.gap;
    const bool structure = a.symmetric && b.symmetric && a.min_eig >= -1e-10 * a.norm && a.null_below == 5 &&
                           b.null_below == 5 && a.gap > 0.0;
    Outcome o;
    o.pass = structure && change <= 0.10;
    o.summary = fmt("B symmetric %s, min eig / ||B|| = %.1e, null quotients below tolerance %d, gap %.4e (n=6) -> "
                    "%.4e (n=7), change %.1f%% (tol 10%%)",
                    a.symmetric && b.symmetric ? "bitwise" : "NO", a.min_eig / a.norm, a.null_below, a.gap, b.gap,
                    100 * change);
    o.details.push_back(fmt("worst weighted null quotient %.2e vs tolerance %.2e", a.worst_null, a.tolerance));
    o.details.push_back(fmt("structure checks %s; smallest multiplication coefficient a_min %.4e (n=6), %.4e (n=7)",
                            structure ? "pass" : "FAIL", a.a_floor, b.a_floor));
    // The gap follows the essential-spectrum edge min a(k), which sits at the far corner of the box.
    DispersionSpec spec;
    KernelOptions ko;
    for (double delta : {0.2, 0.1, 0.05, 0.02, 0.01}) {
        const double x = 1.0 - delta;
        o.details.push_back(fmt("a(k) at k = %.2f (1,1,1): %.4e", x, multiplication_at(spec, {}, Vec3{x, x, x}, ko)));
    }
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 7. splitting L = K1 - K2 - a and Hilbert-Schmidt estimates

Outcome criterion7() {
    DispersionSpec spec;
    Outcome o;
    // apply_L against the kernel representation. The chart side uses 8 k3 nodes per axis (converged to 0.1%);
    // K2 uses the same k3 rule and K1 a refined spherical rule around each node.
    double split_err;
    {
        const Grid grid(4, 1.0);
        const CollisionEngine engine(spec, grid, reference_quadrature(8));
        std::mt19937_64 rng(700);
        Field g = smooth_random_field(grid, rng);
        for (int i = 0; i < grid.size(); ++i) g[i] *= engine.equilibrium()[i];
        const Field L = engine.linear(g, Form::Pointwise);
        KernelOptions ko;
        ko.k3_nodes = 8;
        ko.sph_r = 16;
        ko.sph_cos = 24;
        ko.sph_phi = 48;
        const K1Application k1 = apply_K1_kernel(engine, g, ko, KernelForm::Derived);
        const Grid k3grid(8, 1.0);
        Field phi(grid.size());
        for (int i = 0; i < grid.size(); ++i) phi[i] = g[i] / engine.equilibrium()[i];
        Field g3(k3grid.size());
        for (int j = 0; j < k3grid.size(); ++j)
            g3[j] = engine.equilibrium_at(k3grid.node(j)) * grid.interpolate(phi.data(), k3grid.node(j));
        const Field a = engine.multiplication_coefficient();
        Field split(grid.size());
        for (int i = 0; i < grid.size(); ++i) {
            double k2g = 0.0;
            for (int j = 0; j < k3grid.size(); ++j)
                k2g += k3grid.weight(j) *
                       kernel_k2(spec, engine.coeffs(), grid.node(i), k3grid.node(j), ko, KernelForm::Derived) * g3[j];
            split[i] = k1.values[i] - k2g - a[i] * g[i];
        }
        split_err = rel_l2(grid, split, L);
        o.details.push_back(fmt("apply_L vs K1 g - K2 g - a g (kernels k1, k2 evaluated directly, n=4): %.2f%%, "
                                "%d tangential crossings skipped",
                                100 * split_err, k1.skipped));
    }
    auto hs_k2 = [&](int n, double beta) {
        const Grid grid(n, 1.0);
        KernelOptions ko;
        ko.beta = beta;
        return hilbert_schmidt_sq(grid, grid, kernel_k2_matrix(spec, {}, grid, ko));
    };
    auto hs_k1 = [&](int n, double beta) {
        const Grid grid(n, 1.0);
        QuadratureConfig qc = reference_quadrature(n);
        qc.beta = beta;
        const CollisionEngine engine(spec, grid, qc);
        KernelOptions ko;
        ko.beta = beta;
        return hilbert_schmidt_k1_sq(engine, ko);
    };
    const double k2a = std::sqrt(hs_k2(6, 0.0)), k2b = std::sqrt(hs_k2(7, 0.0));
    const double k1a = std::sqrt(hs_k1(4, 0.0)), k1b = std::sqrt(hs_k1(5, 0.0));
    const double c2 = std::abs(k2b - k2a) / k2a, c1 = std::abs(k1b - k1a) / k1a;
    o.details.push_back(fmt("beta=0: ||k2||_HS %.5e (n=6) -> %.5e (n=7), change %.2f%%", k2a, k2b, 100 * c2));
    o.details.push_back(fmt("beta=0: ||k1||_HS %.5e (n=4) -> %.5e (n=5), change %.2f%%", k1a, k1b, 100 * c1));
    // beta = 0.3 lies outside the range where the kernels are known to be Hilbert-Schmidt; look for growth.
    std::vector<double> t2, t1;
    for (int n : {4, 5, 6, 7}) t2.push_back(std::sqrt(hs_k2(n, 0.3)));
    for (int n : {3, 4, 5}) t1.push_back(std::sqrt(hs_k1(n, 0.3)));
    auto increasing = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) return false;
        return true;
    };
    const bool trend = increasing(t2) || increasing(t1);
    o.details.push_back(fmt("beta=0.3: ||k2||_HS n=4..7: %.5e %.5e %.5e %.5e", t2[0], t2[1], t2[2], t2[3]));
    o.details.push_back(fmt("beta=0.3: ||k1||_HS n=3..5: %.5e %.5e %.5e", t1[0], t1[1], t1[2]));
    o.details.push_back(fmt("divergence trend at beta=0.3: %s", trend ? "visible" : "not visible (norms converge)"));
    o.pass = split_err <= 0.02 && c2 < 0.02 && c1 < 0.02 && std::isfinite(k1a) && std::isfinite(k2a) && trend;
    o.summary = fmt("splitting error %.2f%% (tol 2%%), HS refinement change k2 %.2f%% k1 %.2f%% (tol 2%%), beta=0.3 "
                    "growth %s",
                    100 * split_err, 100 * c2, 100 * c1, trend ? "yes" : "no");
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 8. coercive multiplication part

Outcome criterion8() {
    DispersionSpec spec;
    const Grid grid(6, 1.0);
    const CollisionEngine engine(spec, grid, reference_quadrature());
    const Field a = engine.multiplication_coefficient();
    std::mt19937_64 rng(800);
    double qmin = 1e300;
    for (int t = 0; t < 200; ++t) {
        const Field g = t % 2 ? smooth_random_field(grid, rng) : rough_random_field(grid, rng);
        double num = 0.0;
        for (int i = 0; i < grid.size(); ++i) num += grid.weight(i) * a[i] * g[i] * g[i];
        qmin = std::min(qmin, num / grid.inner(g, g));
    }
    const double scale = coercivity_scale(spec, engine.coeffs(), 0.0);
    const double amin = *std::min_element(a.begin(), a.end());
    Outcome o;
    o.pass = qmin >= 0.0 && amin >= 0.0;
    o.summary = fmt("min <A g, g> / ||g||^2 = %.4e over 200 random g (>= 0); reported scale pi k_c / M^3 = %.4e", qmin,
                    scale);
    o.details.push_back(fmt("min_k a(k) on the grid %.4e = %.2f x the scale (order-of-magnitude check only)", amin,
                            amin / scale));
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 9. multilinearity of the nonlinear terms

Outcome criterion9() {
    DispersionSpec spec;
    const Grid grid(6, 1.0);
    const CollisionEngine engine(spec, grid, reference_quadrature());
    std::mt19937_64 rng(900);
    Field g = smooth_random_field(grid, rng);
    for (int i = 0; i < grid.size(); ++i) g[i] *= 0.1 * engine.equilibrium()[i];
    const Field G = engine.gamma(g, g);
    const Field Q = engine.q_pieces(g, g, g).total();
    double worst = 0.0;
    for (double t : {2.0, 1.0 / 3.0, -1.0}) {
        const Field gt = scaled(g, t);
        worst = std::max(worst, max_abs_diff(engine.gamma(gt, gt), scaled(G, t * t)) / (t * t * max_abs(G)));
        worst = std::max(worst, max_abs_diff(engine.q_pieces(gt, gt, gt).total(), scaled(Q, t * t * t)) /
                                    (std::abs(t * t * t) * max_abs(Q)));
    }
    Outcome o;
    o.pass = worst <= 1e-12;
    o.summary = fmt("max relative deviation from t^2 Gamma and t^3 Q = %.2e for t in {2, 1/3, -1} (tol 1e-12)", worst);
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 10, 11. nonlinear stability (evolution at n = 4)

struct EvolutionSetup {
    DispersionSpec spec;
    Grid grid{4, 1.0};
    CollisionEngine engine{spec, grid, reference_quadrature(4)};
    OperatorMatrix m = assemble_dirichlet(engine);
    NullBasis basis = null_bases(engine);
    SpectrumReport spectrum = eigen(m, basis.weighted);
    double C = estimate_C(engine, 10, 1000);
    double lambda = spectrum.gap;
    double c = ball_radius(spectrum.gap, C);
};

const EvolutionSetup& evolution_setup() {
    static const EvolutionSetup s;
    return s;
}

Outcome criterion10() {
    const EvolutionSetup& s = evolution_setup();
    std::mt19937_64 rng(1000);
    const auto [pi, perp] = project(s.grid, s.basis.weighted, smooth_random_field(s.grid, rng));
    IntegrateOptions opt;
    opt.T = 5.0 / s.lambda;
    opt.dt = opt.T / 100.0;
    opt.ball_radius = s.c;
    Outcome o;
    o.pass = true;
    // null-free start
    const Field g0 = scaled(normalized(s.grid, perp), 0.5 * s.c);
    const Trajectory tr = integrate(s.engine, s.basis.weighted, g0, opt);
    const DecayReport d = decay_check(tr, s.lambda, 1.1);
    const bool ok1 = !tr.aborted && d.all_pass && d.fitted_rate >= 0.9 * s.lambda / 2;
    // start with a null component: half of the norm in span{f, f k, f omega}
    Field mixed(s.grid.size());
    const Field npi = normalized(s.grid, pi), nperp = normalized(s.grid, perp);
    for (int i = 0; i < s.grid.size(); ++i) mixed[i] = 0.5 * s.c * (std::sqrt(0.5) * npi[i] + std::sqrt(0.5) * nperp[i]);
    const Trajectory tm = integrate(s.engine, s.basis.weighted, mixed, opt);
    const DecayReport dm = decay_check(tm, s.lambda, 1.1);
    const bool ok2 = !tm.aborted && dm.all_pass;
    o.pass = ok1 && ok2;
    o.summary = fmt("Pi g0 = 0: worst ||Pi_perp g|| / envelope %.3f (<= 1.1), fitted rate %.4e vs 0.9 lambda/2 = %.4e; "
                    "Pi g0 != 0: worst ratio %.3f",
                    d.worst_ratio, d.fitted_rate, 0.45 * s.lambda, dm.worst_ratio);
    o.details.push_back(fmt("n=4, lambda %.4e, C %.4e, c(lambda) %.4e, T = 5/lambda = %.1f, %zu steps", s.lambda, s.C,
                            s.c, opt.T, tr.times.size() - 1));
    o.details.push_back(fmt("mixed start: ||Pi g|| %.3e -> %.3e (conserved), ||Pi_perp g|| %.3e -> %.3e",
                            tm.diagnostics.front().norm_pi, tm.diagnostics.back().norm_pi,
                            tm.diagnostics.front().norm_piperp, tm.diagnostics.back().norm_piperp));
    return o;
}

Outcome criterion11() {
    const EvolutionSetup& s = evolution_setup();
    std::mt19937_64 rng(1100);
    const Field perp = project(s.grid, s.basis.weighted, smooth_random_field(s.grid, rng)).second;
    const Field g0 = scaled(normalized(s.grid, perp), 0.5 * s.c * (1.0 - 1e-9));
    const Eigensystem es = decompose(s.m.B, s.m.weights);
    const FixedPointConfig fp = make_fixed_point_config(s.lambda, s.C);
    const double T = 5.0 / s.lambda;
    auto run_picard = [&](int steps) { return picard(s.engine, es, s.basis.weighted, g0, fp, T, T / steps); };
    auto run_integrate = [&](int steps) {
        IntegrateOptions opt;
        opt.T = T;
        opt.dt = T / steps;
        opt.store_fields = true;
        return integrate(s.engine, s.basis.weighted, g0, opt);
    };
    const PicardResult p1 = run_picard(100), p2 = run_picard(200);
    const Trajectory i1 = run_integrate(100), i2 = run_integrate(200);
    // sup over the common time grid
    auto sup_diff = [&](const std::vector<Field>& a, const std::vector<Field>& b, int stride_b) {
        double m = 0.0;
        for (std::size_t t = 0; t < a.size(); ++t) m = std::max(m, s.grid.norm(diff(a[t], b[t * stride_b])));
        return m;
    };
    const double agreement = sup_diff(p1.trajectory.fields, i1.fields, 1);
    const double picard_step = sup_diff(p1.trajectory.fields, p2.trajectory.fields, 2);
    const double rk_step = sup_diff(i1.fields, i2.fields, 2);
    const double tol = 2.0 * std::max(picard_step, rk_step);
    Outcome o;
    o.pass = p1.report.converged && p1.report.contraction_factor < 1.0 && agreement <= tol;
    o.summary = fmt("contraction factor %.3e (< 1) in %d iterations, sup_t ||picard - integrate|| = %.3e vs combined "
                    "tolerance %.3e",
                    p1.report.contraction_factor, p1.report.iterations, agreement, tol);
    o.details.push_back(fmt("step-halving differences: picard %.3e, rk4 %.3e; ||g0|| = c(lambda)/2 = %.4e", picard_step,
                            rk_step, s.grid.norm(g0)));
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 12. isotropic reduction

Outcome criterion12() {
    DispersionSpec spec;
    const RadialGrid g(12, 1.0);
    auto fr = [](double x) { return (1.0 + 0.3 * std::exp(-std::pow((x - 0.5) / 0.2, 2))) / (1.0 + x * x); };
    RadialField f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = fr(g.node(i));
    const RadialField iso = iso_collision(g, f);
    // angular average of the 3D operator over a few directions
    const std::vector<Vec3> dirs = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, -1, 0.5}, {-0.3, 0.8, -0.5}};
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    double num = 0.0, den = 0.0;
    Ball3DOptions opt;
    for (int i = 0; i < g.size(); ++i) {
        double avg = 0.0;
        for (const Vec3& d : dirs) avg += ball_collision_3d(spec, fr, g.node(i), d, opt);
        avg /= static_cast<double>(dirs.size()) * four_pi2;
        const double w = g.weight(i) * g.node(i) * g.node(i);
        num += w * (avg - iso[i]) * (avg - iso[i]);
        den += w * iso[i] * iso[i];
    }
    const double err = std::sqrt(num / den);
    RadialField rj(g.size());
    for (int i = 0; i < g.size(); ++i) rj[i] = 1.0 / (g.node(i) * g.node(i) + 1.0);
    const double stat = std::max(max_abs(iso_collision(g, rj)), max_abs(iso_collision(g, rj, Form::Conservative))) /
                        max_abs(rj);
    const IsoTrajectory tr = iso_integrate(g, rj, 20.0, 1.0);
    const double drift = max_abs_diff(tr.final_state, rj) / max_abs(rj);
    Outcome o;
    o.pass = err <= 0.05 && stat <= 1e-6 && drift <= 1e-6;
    o.summary = fmt("3D ball run vs iso_collision: %.2f%% relative L2 (tol 5%%); 1/(x^2+1): |Q| / |f| = %.1e, drift "
                    "after t=20 %.1e (tol 1e-6)",
                    100 * err, stat, drift);
    return o;
}

// ---------------------------------------------------------------------------------------------------------------
// 13. determinism

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Lists differing files between two output directories, manifest.json excluded (it records wall time).
std::vector<std::string> compare_dirs(const fs::path& a, const fs::path& b) {
    std::vector<std::string> bad;
    std::set<std::string> names;
    for (const fs::path& d : {a, b})
        if (fs::exists(d))
            for (const auto& e : fs::directory_iterator(d)) names.insert(e.path().filename().string());
    if (names.empty()) bad.push_back("(no output)");
    for (const std::string& n : names) {
        if (n == "manifest.json") continue;
        if (!fs::exists(a / n) || !fs::exists(b / n) || slurp(a / n) != slurp(b / n)) bad.push_back(n);
    }
    return bad;
}

Outcome criterion13(const std::string& wke, const std::string& config, const fs::path& work) {
    Outcome o;
    o.pass = true;
    // in-process: parallel kernels at different thread counts
    {
        DispersionSpec spec;
        const Grid grid(4, 1.0);
        const CollisionEngine engine(spec, grid, reference_quadrature(4));
        std::mt19937_64 rng(1300);
        const Field n = random_density(engine, rng, 0.3);
        const int saved = thread_count();
        set_thread_count(1);
        const Field a = engine.collision(n);
        const Eigen::MatrixXd Ba = assemble_dirichlet(engine).B;
        set_thread_count(4);
        const Field b = engine.collision(n);
        const Eigen::MatrixXd Bb = assemble_dirichlet(engine).B;
        set_thread_count(saved);
        const bool same = a == b && Ba == Bb;
        o.pass = o.pass && same;
        o.details.push_back(fmt("in-process collision and assembly, 1 vs 4 threads: %s", same ? "identical" : "DIFFER"));
    }
    if (wke.empty()) {
        o.details.push_back("CLI check skipped (no --wke given)");
        o.summary = "in-process thread-count check only";
        return o;
    }
    fs::remove_all(work);
    fs::create_directories(work);
    const std::vector<std::string> subs = {"check-dispersion", "chart-resonance", "assemble", "spectrum", "evolve",
                                           "iso-evolve",       "picard",          "validate-oracle", "sweep"};
    int checked = 0;
    for (const std::string& sub : subs) {
        auto run = [&](const std::string& tag, int threads) {
            const fs::path out = work / (sub + "_" + tag);
            const std::string cmd = "\"" + wke + "\" " + sub + " -c \"" + config + "\" --threads " +
                                    std::to_string(threads) + " -o \"" + out.string() + "\" > \"" +
                                    (work / (sub + "_" + tag + ".log")).string() + "\" 2>&1";
            const int rc = std::system(cmd.c_str());
            return std::pair{out, rc};
        };
        const auto [a, ra] = run("a", 1);
        const auto [b, rb] = run("b", 1);
        const auto [c, rc] = run("c", 3);
        std::vector<std::string> bad = compare_dirs(a, b);
        for (const std::string& x : compare_dirs(a, c)) bad.push_back("threads:" + x);
        const bool ok = ra == 0 && rb == 0 && rc == 0 && bad.empty();
        o.pass = o.pass && ok;
        std::string what;
        for (const std::string& x : bad) what += " " + x;
        o.details.push_back(fmt("%-16s %s%s", sub.c_str(), ok ? "identical" : "DIFFER", what.c_str()));
        ++checked;
    }
    o.summary = fmt("%d subcommands run twice at 1 thread and once at 3 threads: all artifacts byte-identical: %s",
                    checked, o.pass ? "yes" : "no");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::string wke, config;
    fs::path work = fs::temp_directory_path() / "wke_acceptance";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        auto next = [&]() -> std::string { return i + 1 < argc ? argv[++i] : ""; };
        if (a == "--wke") wke = next();
        else if (a == "--config") config = next();
        else if (a == "--work") work = next();
        else if (a == "--only") {
            std::stringstream ss(next());
            for (std::string t; std::getline(ss, t, ',');) only.insert(std::stoi(t));
        } else {
            std::fprintf(stderr, "unknown argument %s\n", a.c_str());
            return 2;
        }
    }
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, criterion1},   {2, criterion2},   {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6},   {7, criterion7},   {8, criterion8}, {9, criterion9}, {10, criterion10},
        {11, criterion11}, {12, criterion12}, {13, [&] { return criterion13(wke, config, work); }},
    };
    int failed = 0, run = 0;
    for (const auto& [id, fn] : criteria) {
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.summary = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.summary.c_str(), secs);
        for (const std::string& d : o.details) std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        ++run;
        if (!o.pass) ++failed;
    }
    std::printf("%d of %d criteria passed\n", run - failed, run);
    return failed == 0 ? 0 : 1;
}
