#include "wke/resonance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wke/quadrature.hpp"

namespace wke {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Gauss-Legendre rules on [-1, 1] for m = 1..max_m, built once.
constexpr int max_cached_rule = 96;
const Rule1D& reference_rule(int m) {
    static const std::vector<Rule1D> cache = [] {
        std::vector<Rule1D> rules(max_cached_rule + 1);
        for (int i = 1; i <= max_cached_rule; ++i) rules[i] = gauss_legendre(i);
        return rules;
    }();
    if (m < 1 || m > max_cached_rule) throw std::invalid_argument("Gauss rule order out of range");
    return cache[m];
}

struct Slice {
    double a_z = 0.0;  // axial coordinate of z: alpha P
    double a_u = 0.0;  // axial coordinate of u: (1 - alpha) P
    double energy = 0.0;  // Omega(|k|) + Omega(|k3|)
};

double slice_defect(const DispersionSpec& spec, const Slice& s, double t) {
    return spec.Omega(std::sqrt(s.a_u * s.a_u + t)) + spec.Omega(std::sqrt(s.a_z * s.a_z + t)) - s.energy;
}

double slice_slope(const DispersionSpec& spec, const Slice& s, double t) {
    return 0.5 * (spec.g_ratio(std::sqrt(s.a_u * s.a_u + t)) + spec.g_ratio(std::sqrt(s.a_z * s.a_z + t)));
}

Slice make_slice(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double P, double alpha) {
    return Slice{alpha * P, (1.0 - alpha) * P, omega(spec, k) + omega(spec, k3)};
}

RadiusResult solve_slice(const DispersionSpec& spec, const Slice& s, double tol) {
    RadiusResult res;
    if (!(tol > 0.0)) throw std::invalid_argument("solve_radius: tol must be positive");
    const double c0 = slice_defect(spec, s, 0.0);
    if (c0 > tol) return res;  // C increases in t: no root with t >= 0
    if (c0 >= -tol) {
        res.empty = false;
        res.r_sq = 0.0;
        return res;
    }
    // C(t) = 2 (t - t0) + s(|u|) + s(|z|): the root lies within sup|s| of t0.
    const double t0 = 0.5 * (s.energy - s.a_z * s.a_z - s.a_u * s.a_u);
    const double widen = 2.0 * spec.perturbation.sup_abs() + 1e-12 * (1.0 + std::abs(t0));
    double lo = std::max(0.0, t0 - widen);
    double hi = std::max(lo, t0 + widen);
    double f_lo = slice_defect(spec, s, lo);
    double f_hi = slice_defect(spec, s, hi);
    int expand = 0;
    while (f_hi < 0.0 && expand < 60) {
        hi = 2.0 * hi + 1e-12;
        f_hi = slice_defect(spec, s, hi);
        ++expand;
    }
    if (f_lo > 0.0) {
        lo = 0.0;
        f_lo = c0;
    }
    if (f_lo > 0.0 || f_hi < 0.0) {
        res.bracket_failed = true;
        return res;
    }
    // Safeguarded Newton on the monotone defect.
    double t = (hi - lo) > 0.0 ? std::clamp(t0, lo, hi) : lo;
    for (int it = 0; it < 200; ++it) {
        res.iterations = it + 1;
        const double f = slice_defect(spec, s, t);
        if (std::abs(f) <= tol) break;
        if (f < 0.0) lo = t; else hi = t;
        const double slope = slice_slope(spec, s, t);
        double next = t - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) {
            t = next;
            break;
        }
        t = next;
    }
    res.empty = false;
    res.r_sq = std::max(0.0, t);
    return res;
}

// Whether alpha carries a circle inside the domain (theta-independent part of the constraint).
bool slice_ok(const DispersionSpec& spec, const Slice& s, Domain domain, double tol, double* t_out) {
    const RadiusResult r = solve_slice(spec, s, tol);
    if (r.empty) return false;
    if (t_out) *t_out = r.r_sq;
    const double kc2 = spec.k_cut * spec.k_cut;
    if (domain == Domain::Ball) {
        if (s.a_z * s.a_z + r.r_sq > kc2 || s.a_u * s.a_u + r.r_sq > kc2) return false;
    } else {
        if (s.a_z < 0.0 || s.a_u < 0.0) return false;
    }
    return true;
}

// Exact alpha-interval [1 - a*, a*] around alpha = 1/2 (the admissible set is symmetric under alpha -> 1 - alpha).
bool admissible_interval(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double P, Domain domain,
                         double tol, double& lo, double& hi) {
    auto ok = [&](double alpha) { return slice_ok(spec, make_slice(spec, k, k3, P, alpha), domain, tol, nullptr); };
    if (!ok(0.5)) return false;
    const double a_max = domain == Domain::Box ? 1.0 : std::max(0.5, spec.k_cut / P);
    double good = 0.5;
    double bad = a_max;
    if (ok(a_max)) {
        good = a_max;
    } else {
        const int scan = 32;
        for (int i = 1; i <= scan; ++i) {
            const double a = 0.5 + (a_max - 0.5) * i / scan;
            if (!ok(a)) {
                bad = a;
                break;
            }
            good = a;
        }
        for (int it = 0; it < 80 && bad - good > 1e-15; ++it) {
            const double mid = 0.5 * (good + bad);
            if (ok(mid)) good = mid; else bad = mid;
        }
    }
    lo = 1.0 - good;
    hi = good;
    return hi - lo > 1e-14;
}

struct Arc {
    double begin = 0.0;
    double end = 0.0;
};

// Arcs of theta in [0, 2pi) for which z(theta) stays in the domain. Returns {} for none;
// a single arc of length 2pi means the full circle.
std::vector<Arc> domain_arcs(const DispersionSpec& spec, const Frame& fr, double alpha, double r, Domain domain) {
    const Vec3 centre = (alpha * fr.P) * fr.ehat;
    const Vec3 axis = fr.P * fr.ehat;
    const double kc = spec.k_cut;
    auto inside = [&](double theta) {
        const Vec3 z = chart_point(fr, alpha, r, theta);
        return in_domain(spec, domain, z, axis - z);
    };
    if (domain == Domain::Ball || r == 0.0) {
        if (inside(0.0)) return {Arc{0.0, two_pi}};
        return {};
    }
    std::vector<double> cuts;
    for (int d = 0; d < 3; ++d) {
        const double rho = std::hypot(fr.e1[d], fr.e2[d]);
        if (rho * r < 1e-300) continue;
        const double phi = std::atan2(fr.e2[d], fr.e1[d]);
        const double lo = std::max(0.0, axis[d] - kc);
        const double hi = std::min(kc, axis[d]);
        for (double b : {lo, hi}) {
            const double x = (b - centre[d]) / (r * rho);
            if (std::abs(x) < 1.0) {
                const double a = std::acos(x);
                for (double c : {phi + a, phi - a}) {
                    double th = std::fmod(c, two_pi);
                    if (th < 0.0) th += two_pi;
                    cuts.push_back(th);
                }
            }
        }
    }
    if (cuts.empty()) {
        if (inside(0.0)) return {Arc{0.0, two_pi}};
        return {};
    }
    std::sort(cuts.begin(), cuts.end());
    const std::size_t m = cuts.size();
    std::vector<Arc> arcs;
    for (std::size_t i = 0; i < m; ++i) {
        const double b = cuts[i];
        const double e = (i + 1 < m) ? cuts[i + 1] : cuts[0] + two_pi;
        if (e - b <= 0.0) continue;
        if (!inside(0.5 * (b + e))) continue;
        if (!arcs.empty() && arcs.back().end == b) {
            arcs.back().end = e;
        } else {
            arcs.push_back(Arc{b, e});
        }
    }
    // merge the wrap-around arc with the first one
    if (arcs.size() > 1 && std::abs(arcs.back().end - (arcs.front().begin + two_pi)) == 0.0) {
        arcs.front().begin = arcs.back().begin - two_pi;
        arcs.pop_back();
    }
    if (arcs.size() == 1 && arcs.front().end - arcs.front().begin >= two_pi) return {Arc{0.0, two_pi}};
    return arcs;
}

double jac_from(const DispersionSpec& spec, const Slice& s, double t, double P) {
    const double gz = spec.g_ratio(std::sqrt(s.a_z * s.a_z + t));
    const double gu = spec.g_ratio(std::sqrt(s.a_u * s.a_u + t));
    return P / (gu + gz);
}

}  // namespace

double defect(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, const Vec3& z) {
    return omega(spec, k + k3 - z) + omega(spec, z) - omega(spec, k) - omega(spec, k3);
}

Frame make_frame(const Vec3& k, const Vec3& k3) {
    Frame fr;
    const Vec3 s = k + k3;
    fr.P = norm(s);
    if (fr.P == 0.0) return fr;
    fr.ehat = (1.0 / fr.P) * s;
    int axis = 0;
    for (int d = 1; d < 3; ++d)
        if (std::abs(fr.ehat[d]) < std::abs(fr.ehat[axis])) axis = d;
    Vec3 a;
    a[axis] = 1.0;
    fr.e1 = normalized(a - dot(a, fr.ehat) * fr.ehat);
    fr.e2 = cross(fr.ehat, fr.e1);
    return fr;
}

Vec3 chart_point(const Frame& frame, double alpha, double r, double theta) {
    return (alpha * frame.P) * frame.ehat + (r * std::cos(theta)) * frame.e1 + (r * std::sin(theta)) * frame.e2;
}

bool in_domain(const DispersionSpec& spec, Domain domain, const Vec3& z, const Vec3& u) {
    const double kc = spec.k_cut;
    if (domain == Domain::Ball) return norm_sq(z) <= kc * kc && norm_sq(u) <= kc * kc;
    for (int d = 0; d < 3; ++d) {
        if (z[d] < 0.0 || z[d] > kc || u[d] < 0.0 || u[d] > kc) return false;
    }
    return true;
}

RadiusResult solve_radius(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double alpha, double tol) {
    const double P = norm(k + k3);
    if (P == 0.0) return RadiusResult{};
    return solve_slice(spec, make_slice(spec, k, k3, P, alpha), tol);
}

double d_alpha_r_squared(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double alpha, double r_sq) {
    const double P = norm(k + k3);
    const double a_z = alpha * P;
    const double a_u = (1.0 - alpha) * P;
    const double gz = spec.g_ratio(std::sqrt(a_z * a_z + r_sq));
    const double gu = spec.g_ratio(std::sqrt(a_u * a_u + r_sq));
    return 2.0 * P * P * ((1.0 - alpha) * gu - alpha * gz) / (gu + gz);
}

double grad_defect_norm_sq(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double alpha, double /*theta*/) {
    const double P = norm(k + k3);
    const RadiusResult r = solve_radius(spec, k, k3, alpha);
    const double t = r.empty ? 0.0 : r.r_sq;
    const double a_z = alpha * P;
    const double a_u = (1.0 - alpha) * P;
    const double gz = spec.g_ratio(std::sqrt(a_z * a_z + t));
    const double gu = spec.g_ratio(std::sqrt(a_u * a_u + t));
    const double axial = (alpha - 1.0) * gu + alpha * gz;
    return P * P * axial * axial + t * (gu + gz) * (gu + gz);
}

double surface_jacobian(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, double alpha) {
    const double P = norm(k + k3);
    if (P == 0.0) return 0.0;
    const Slice s = make_slice(spec, k, k3, P, alpha);
    const RadiusResult r = solve_slice(spec, s, 1e-12);
    if (r.empty) return 0.0;
    return jac_from(spec, s, r.r_sq, P);
}

double ResonanceChart::masked_fraction(std::size_t alpha_index) const {
    const std::size_t nt = theta_nodes.size();
    if (nt == 0) return 1.0;
    std::size_t out = 0;
    for (std::size_t t = 0; t < nt; ++t) out += mask[alpha_index * nt + t] ? 0 : 1;
    return static_cast<double>(out) / static_cast<double>(nt);
}

ResonanceChart chart(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, int n_alpha, int n_theta,
                     AlphaRule alpha_rule, Domain domain, double tol) {
    if (n_alpha < 2) throw std::invalid_argument("chart: n_alpha must be >= 2");
    if (n_theta < 4) throw std::invalid_argument("chart: n_theta must be >= 4");
    ResonanceChart ch;
    ch.k = k;
    ch.k3 = k3;
    const Frame fr = make_frame(k, k3);
    ch.P = fr.P;
    if (fr.P == 0.0) return ch;

    double lo = -spec.k_cut / fr.P;
    double hi = spec.k_cut / fr.P;
    if (alpha_rule == AlphaRule::Admissible && !admissible_interval(spec, k, k3, fr.P, domain, tol, lo, hi)) return ch;
    ch.empty = false;
    const Rule1D ar = gauss_legendre(n_alpha, lo, hi);
    ch.alpha_nodes = ar.nodes;
    ch.alpha_weights = ar.weights;
    ch.theta_nodes.resize(n_theta);
    for (int t = 0; t < n_theta; ++t) ch.theta_nodes[t] = two_pi * t / n_theta;
    ch.r_sq.assign(n_alpha, 0.0);
    ch.jac.assign(n_alpha, 0.0);
    ch.mask.assign(static_cast<std::size_t>(n_alpha) * n_theta, 0);
    const Vec3 axis = k + k3;
    for (int a = 0; a < n_alpha; ++a) {
        const Slice s = make_slice(spec, k, k3, fr.P, ar.nodes[a]);
        const RadiusResult r = solve_slice(spec, s, tol);
        if (r.bracket_failed) ++ch.bracket_failures;
        if (r.empty) continue;
        ch.r_sq[a] = r.r_sq;
        ch.jac[a] = jac_from(spec, s, r.r_sq, fr.P);
        const double rad = std::sqrt(r.r_sq);
        for (int t = 0; t < n_theta; ++t) {
            const Vec3 z = chart_point(fr, ar.nodes[a], rad, ch.theta_nodes[t]);
            ch.mask[static_cast<std::size_t>(a) * n_theta + t] = in_domain(spec, domain, z, axis - z) ? 1 : 0;
        }
    }
    return ch;
}

ManifoldStats manifold_points(const DispersionSpec& spec, const Vec3& k, const Vec3& k3, const ChartOptions& opt,
                              std::vector<ManifoldPoint>& out) {
    ManifoldStats stats;
    const Frame fr = make_frame(k, k3);
    if (fr.P == 0.0) return stats;
    double lo = -spec.k_cut / fr.P;
    double hi = spec.k_cut / fr.P;
    if (opt.alpha_rule == AlphaRule::Admissible &&
        !admissible_interval(spec, k, k3, fr.P, opt.domain, opt.tol, lo, hi))
        return stats;
    const Rule1D& ref_a = reference_rule(opt.n_alpha);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const Vec3 axis = k + k3;
    for (int a = 0; a < opt.n_alpha; ++a) {
        const double alpha = mid + half * ref_a.nodes[a];
        const double wa = half * ref_a.weights[a];
        const Slice s = make_slice(spec, k, k3, fr.P, alpha);
        const RadiusResult r = solve_slice(spec, s, opt.tol);
        if (r.bracket_failed) ++stats.bracket_failures;
        if (r.empty) continue;
        const double jac = jac_from(spec, s, r.r_sq, fr.P);
        const double rad = std::sqrt(r.r_sq);
        if (opt.theta_rule == ThetaRule::UniformMasked) {
            const double wt = two_pi / opt.n_theta;
            for (int t = 0; t < opt.n_theta; ++t) {
                const Vec3 z = chart_point(fr, alpha, rad, two_pi * t / opt.n_theta);
                if (!in_domain(spec, opt.domain, z, axis - z)) continue;
                out.push_back(ManifoldPoint{z, jac * wa * wt});
                ++stats.points;
            }
            continue;
        }
        const std::vector<Arc> arcs = domain_arcs(spec, fr, alpha, rad, opt.domain);
        for (const Arc& arc : arcs) {
            const double len = arc.end - arc.begin;
            if (len >= two_pi) {
                const double wt = two_pi / opt.n_theta;
                for (int t = 0; t < opt.n_theta; ++t) {
                    out.push_back(ManifoldPoint{chart_point(fr, alpha, rad, two_pi * t / opt.n_theta), jac * wa * wt});
                    ++stats.points;
                }
                continue;
            }
            const int m = std::clamp(static_cast<int>(std::ceil(opt.n_theta * len / two_pi)), 2, max_cached_rule);
            const Rule1D& ref_t = reference_rule(m);
            const double tm = 0.5 * (arc.begin + arc.end);
            const double th = 0.5 * len;
            for (int t = 0; t < m; ++t) {
                const Vec3 z = chart_point(fr, alpha, rad, tm + th * ref_t.nodes[t]);
                out.push_back(ManifoldPoint{z, jac * wa * th * ref_t.weights[t]});
                ++stats.points;
            }
        }
    }
    return stats;
}

}  // namespace wke
