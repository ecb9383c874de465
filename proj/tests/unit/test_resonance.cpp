#include "doctest.h"
#include "support.hpp"
#include "wke/resonance.hpp"

#include <numbers>

using namespace wke;

namespace {

DispersionSpec perturbed() {
    DispersionSpec s;
    s.perturbation = {PerturbationKind::SinSquared, 0.05, 1.3};
    return s;
}

}  // namespace

TEST_CASE("closed-form radius and Jacobian for quadratic dispersion") {
    DispersionSpec spec;
    std::mt19937_64 rng(10);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        const Vec3 k = testing::random_point(rng, 1.0), k3 = testing::random_point(rng, 1.0);
        const double P = norm(k + k3);
        const double alpha = uniform(rng, 0.0, 1.0);
        const double exact = 0.5 * (norm_sq(k) + norm_sq(k3) - (alpha * alpha + (1 - alpha) * (1 - alpha)) * P * P);
        const RadiusResult r = solve_radius(spec, k, k3, alpha);
        if (exact <= 0.0) {
            CHECK(r.empty);
            continue;
        }
        REQUIRE_FALSE(r.empty);
        CHECK(std::abs(r.r_sq - exact) <= 1e-10);
        CHECK(std::abs(surface_jacobian(spec, k, k3, alpha) - P / 4.0) <= 1e-10);
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("chart points lie on the resonant manifold") {
    std::mt19937_64 rng(11);
    for (const DispersionSpec& spec : {DispersionSpec{}, perturbed()}) {
        for (int t = 0; t < 20; ++t) {
            const Vec3 k = testing::random_point(rng, 1.0), k3 = testing::random_point(rng, 1.0);
            const Frame fr = make_frame(k, k3);
            CHECK(std::abs(dot(fr.ehat, fr.e1)) < 1e-14);
            CHECK(std::abs(dot(fr.ehat, fr.e2)) < 1e-14);
            CHECK(std::abs(norm(fr.e2) - 1.0) < 1e-14);
            const double alpha = uniform(rng, 0.2, 0.8);
            const RadiusResult r = solve_radius(spec, k, k3, alpha);
            if (r.empty) continue;
            for (double th : {0.0, 1.0, 2.5, 4.0}) {
                const Vec3 z = chart_point(fr, alpha, std::sqrt(r.r_sq), th);
                CHECK(std::abs(defect(spec, k, k3, z)) < 1e-10);
            }
        }
    }
}

TEST_CASE("d_alpha_r_squared matches centered differences") {
    std::mt19937_64 rng(12);
    for (const DispersionSpec& spec : {DispersionSpec{}, perturbed()}) {
        for (int t = 0; t < 30; ++t) {
            const Vec3 k = testing::random_point(rng, 1.0), k3 = testing::random_point(rng, 1.0);
            const double alpha = uniform(rng, 0.35, 0.65);
            const RadiusResult r = solve_radius(spec, k, k3, alpha);
            const double h = 1e-4;
            const RadiusResult rp = solve_radius(spec, k, k3, alpha + h), rm = solve_radius(spec, k, k3, alpha - h);
            if (r.empty || rp.empty || rm.empty || r.r_sq < 1e-3) continue;
            const double fd = (rp.r_sq - rm.r_sq) / (2 * h);
            CHECK(d_alpha_r_squared(spec, k, k3, alpha, r.r_sq) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("grad_defect_norm_sq matches finite-difference gradients") {
    std::mt19937_64 rng(13);
    for (const DispersionSpec& spec : {DispersionSpec{}, perturbed()}) {
        for (int t = 0; t < 30; ++t) {
            const Vec3 k = testing::random_point(rng, 1.0), k3 = testing::random_point(rng, 1.0);
            const double alpha = uniform(rng, 0.3, 0.7);
            const RadiusResult r = solve_radius(spec, k, k3, alpha);
            if (r.empty) continue;
            const Vec3 z = chart_point(make_frame(k, k3), alpha, std::sqrt(r.r_sq), 0.7);
            const double h = 1e-5;
            double g2 = 0.0;
            for (int d = 0; d < 3; ++d) {
                Vec3 zp = z, zm = z;
                zp[d] += h;
                zm[d] -= h;
                const double gd = (defect(spec, k, k3, zp) - defect(spec, k, k3, zm)) / (2 * h);
                g2 += gd * gd;
            }
            CHECK(grad_defect_norm_sq(spec, k, k3, alpha, 0.7) == doctest::Approx(g2).epsilon(1e-7));
        }
    }
}

TEST_CASE("manifold measure of an unclipped sphere") {
    // For Omega = |k|^2 the resonant set is the sphere of radius R = |k - k3| / 2 around (k + k3) / 2 and
    // int delta(C) dz = 4 pi R^2 / |grad C| = pi R.
    DispersionSpec spec;
    spec.k_cut = 100.0;
    ChartOptions opt;
    opt.domain = Domain::Ball;
    std::mt19937_64 rng(14);
    for (int t = 0; t < 20; ++t) {
        const Vec3 k = testing::random_point(rng, 1.0), k3 = testing::random_point(rng, 1.0);
        std::vector<ManifoldPoint> pts;
        manifold_points(spec, k, k3, opt, pts);
        double total = 0.0;
        for (const ManifoldPoint& p : pts) total += p.weight;
        CHECK(total == doctest::Approx(std::numbers::pi * norm(k - k3) / 2.0).epsilon(1e-9));
    }
}

TEST_CASE("box quadrature points are admissible and resonant") {
    std::mt19937_64 rng(15);
    for (const DispersionSpec& spec : {DispersionSpec{}, perturbed()}) {
        const ChartOptions opt;
        for (int t = 0; t < 20; ++t) {
            const Vec3 k = testing::random_point(rng, 1.0), k3 = testing::random_point(rng, 1.0);
            std::vector<ManifoldPoint> pts;
            manifold_points(spec, k, k3, opt, pts);
            for (const ManifoldPoint& p : pts) {
                CHECK(in_domain(spec, Domain::Box, p.z, k + k3 - p.z));
                CHECK(std::abs(defect(spec, k, k3, p.z)) < 1e-9);
                CHECK(p.weight > 0.0);
            }
        }
    }
}

TEST_CASE("uniform chart masks agree with the clipped arcs") {
    DispersionSpec spec;
    std::mt19937_64 rng(16);
    for (int t = 0; t < 10; ++t) {
        const Vec3 k = testing::random_point(rng, 1.0), k3 = testing::random_point(rng, 1.0);
        const ResonanceChart ch = chart(spec, k, k3, 12, 400, AlphaRule::Admissible);
        for (std::size_t a = 0; a < ch.alpha_nodes.size(); ++a) {
            const double frac = ch.masked_fraction(a);
            CHECK(frac >= 0.0);
            CHECK(frac <= 1.0);
            const int nt = static_cast<int>(ch.theta_nodes.size());
            for (int th = 0; th < nt; ++th) {
                if (ch.r_sq[a] <= 0.0) continue;
                const Vec3 z = chart_point(make_frame(k, k3), ch.alpha_nodes[a], std::sqrt(ch.r_sq[a]), ch.theta_nodes[th]);
                CHECK(static_cast<bool>(ch.mask[a * nt + th]) == in_domain(spec, Domain::Box, z, k + k3 - z));
            }
        }
    }
}
