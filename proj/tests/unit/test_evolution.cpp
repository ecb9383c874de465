#include "doctest.h"
#include "support.hpp"
#include "wke/evolution.hpp"
#include "wke/linear_op.hpp"
#include "wke/spectral.hpp"

using namespace wke;
using namespace wke::testing;

namespace {

struct Fixture {
    DispersionSpec spec;
    Grid grid{3, 1.0};
    CollisionEngine engine{spec, grid, small_quadrature(3)};
    NullBasis basis = null_bases(engine);
    OperatorMatrix m = assemble_dirichlet(engine);
    SpectrumReport spectrum = eigen(m, basis.weighted);
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

Field scaled(Field g, double t) {
    for (double& v : g) v *= t;
    return g;
}

}  // namespace

TEST_CASE("projection splits a field orthogonally") {
    const Fixture& fx = fixture();
    std::mt19937_64 rng(60);
    for (int t = 0; t < 10; ++t) {
        const Field g = rough_random_field(fx.grid, rng);
        const auto [pi, perp] = project(fx.grid, fx.basis.weighted, g);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(pi[i] + perp[i] == doctest::Approx(g[i]));
        for (const Field& b : fx.basis.weighted) CHECK(std::abs(fx.grid.inner(b, perp)) < 1e-13);
        CHECK(std::abs(fx.grid.inner(pi, perp)) < 1e-13);
    }
}

TEST_CASE("scheme names") {
    CHECK(scheme_from_string(to_string(Scheme::RK4)) == Scheme::RK4);
    CHECK(scheme_from_string(to_string(Scheme::Euler)) == Scheme::Euler);
    CHECK_THROWS_AS(scheme_from_string("leapfrog"), std::invalid_argument);
}

TEST_CASE("ball radius") {
    CHECK(ball_radius(0.02, 0.5) == doctest::Approx(std::sqrt(0.02) / (2.0 * std::sqrt(1.0))));
    const FixedPointConfig fp = make_fixed_point_config(0.01, 0.04);
    CHECK(fp.ball_radius == doctest::Approx(ball_radius(0.01, 0.04)));
}

TEST_CASE("integrate conserves invariants and increases entropy") {
    const Fixture& fx = fixture();
    std::mt19937_64 rng(61);
    const Field g0 = scaled(normalized(fx.grid, smooth_random_field(fx.grid, rng)), 0.05);
    IntegrateOptions opt;
    opt.T = 20.0;
    opt.dt = 2.0;
    const Trajectory tr = integrate(fx.engine, fx.basis.weighted, g0, opt);
    REQUIRE_FALSE(tr.aborted);
    REQUIRE(tr.diagnostics.size() == 11);
    const Diagnostics& d0 = tr.diagnostics.front();
    for (std::size_t s = 1; s < tr.diagnostics.size(); ++s) {
        const Diagnostics& d = tr.diagnostics[s];
        CHECK(std::abs(d.mass - d0.mass) <= 1e-13 * std::abs(d0.mass));
        CHECK(std::abs(d.energy - d0.energy) <= 1e-13 * std::abs(d0.energy));
        CHECK(std::abs(d.momentum.x - d0.momentum.x) <= 1e-13 * std::abs(d0.momentum.x));
        CHECK(d.entropy >= tr.diagnostics[s - 1].entropy - 1e-14);
        CHECK(d.norm_piperp <= tr.diagnostics[s - 1].norm_piperp * (1.0 + 1e-12));
    }
}

TEST_CASE("linear dynamics decays at least at the gap rate") {
    const Fixture& fx = fixture();
    std::mt19937_64 rng(62);
    const Field g0 = project(fx.grid, fx.basis.weighted, scaled(rough_random_field(fx.grid, rng), 0.1)).second;
    IntegrateOptions opt;
    opt.T = 5.0 / fx.spectrum.gap;
    opt.dt = opt.T / 50.0;
    opt.linear_only = true;
    const Trajectory tr = integrate(fx.engine, fx.basis.weighted, g0, opt);
    const DecayReport r = decay_check(tr, fx.spectrum.gap);
    CHECK(r.all_pass);
    CHECK(r.fitted_rate >= fx.spectrum.gap * 0.99);
    const Diagnostics& last = tr.diagnostics.back();
    CHECK(last.norm_piperp <= std::exp(-fx.spectrum.gap * opt.T) * tr.diagnostics.front().norm_piperp * 1.01);
}

TEST_CASE("strict mode pins the null component") {
    const Fixture& fx = fixture();
    std::mt19937_64 rng(63);
    const Field g0 = scaled(normalized(fx.grid, smooth_random_field(fx.grid, rng)), 0.05);
    IntegrateOptions opt;
    opt.T = 10.0;
    opt.dt = 2.0;
    opt.strict = true;
    const Trajectory tr = integrate(fx.engine, fx.basis.weighted, g0, opt);
    for (const Diagnostics& d : tr.diagnostics) CHECK(d.norm_pi == doctest::Approx(tr.diagnostics[0].norm_pi).epsilon(1e-12));
}

TEST_CASE("decay check on synthetic trajectories") {
    Trajectory tr;
    for (int s = 0; s <= 20; ++s) {
        Diagnostics d;
        d.t = s * 0.5;
        d.norm_piperp = 0.3 * std::exp(-0.4 * d.t);
        d.norm_pi = 0.0;
        tr.diagnostics.push_back(d);
    }
    DecayReport r = decay_check(tr, 0.8);
    CHECK(r.all_pass);
    CHECK(r.fitted_rate == doctest::Approx(0.4));
    r = decay_check(tr, 2.0);
    CHECK_FALSE(r.all_pass);
}

TEST_CASE("picard converges inside the ball and matches integrate") {
    const Fixture& fx = fixture();
    const double C = estimate_C(fx.engine, 10, 5);
    CHECK(C > 0.0);
    CHECK_THROWS_AS(estimate_C(fx.engine, 9, 5), std::invalid_argument);
    const FixedPointConfig fp = make_fixed_point_config(fx.spectrum.gap, C);
    std::mt19937_64 rng(64);
    const Field dir = normalized(fx.grid, project(fx.grid, fx.basis.weighted, smooth_random_field(fx.grid, rng)).second);
    const Field g0 = scaled(dir, 0.25 * fp.ball_radius);
    const Eigensystem es = decompose(fx.m.B, fx.m.weights);
    const double T = 2.0 / fx.spectrum.gap;
    const PicardResult res = picard(fx.engine, es, fx.basis.weighted, g0, fp, T, T / 40.0);
    CHECK(res.report.converged);
    CHECK(res.report.contraction_factor < 1.0);
    IntegrateOptions opt;
    opt.T = T;
    opt.dt = T / 40.0;
    opt.store_fields = true;
    const Trajectory tr = integrate(fx.engine, fx.basis.weighted, g0, opt);
    const Field& a = res.trajectory.fields.back();
    const Field& b = tr.fields.back();
    Field d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    CHECK(fx.grid.norm(d) <= 1e-3 * fx.grid.norm(g0));
    CHECK_THROWS_AS(picard(fx.engine, es, fx.basis.weighted, scaled(dir, 0.6 * fp.ball_radius), fp, T, T / 40.0),
                    std::invalid_argument);
}
