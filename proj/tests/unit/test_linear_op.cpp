#include "doctest.h"
#include "support.hpp"
#include "wke/linear_op.hpp"

#include <filesystem>

using namespace wke;
using namespace wke::testing;

namespace {

struct Fixture {
    DispersionSpec spec;
    Grid grid{3, 1.0};
    CollisionEngine engine{spec, grid, small_quadrature(3)};
    OperatorMatrix m = assemble_dirichlet(engine, Exec::Serial);
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST_CASE("Dirichlet matrix is exactly symmetric and equals -W L") {
    const Fixture& fx = fixture();
    CHECK(fx.m.B == fx.m.B.transpose());
    std::mt19937_64 rng(30);
    for (int t = 0; t < 5; ++t) {
        const Field g = rough_random_field(fx.grid, rng);
        const Field a = apply_matrix_L(fx.m, g);
        const Field b = apply_L(fx.engine, g);
        CHECK(max_abs_diff(a, b) <= 1e-12 * max_abs(b));
    }
}

TEST_CASE("Dirichlet form is non-negative") {
    const Fixture& fx = fixture();
    std::mt19937_64 rng(31);
    for (int t = 0; t < 50; ++t) CHECK(rayleigh_quotient(fx.m, rough_random_field(fx.grid, rng)) >= -1e-15);
    CHECK_THROWS_AS(rayleigh_quotient(fx.m, Field(fx.grid.size(), 0.0)), std::invalid_argument);
}

TEST_CASE("null bases: weighted basis is null, orthonormal") {
    const Fixture& fx = fixture();
    const NullBasis nb = null_bases(fx.engine);
    REQUIRE(nb.weighted.size() == 5);
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b)
            CHECK(fx.grid.inner(nb.weighted[a], nb.weighted[b]) == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
    const NullReport r = null_residuals(fx.m, nb, 1e-8);
    CHECK(r.weighted_below == 5);
    for (double q : r.weighted_quotients) CHECK(std::abs(q) <= 1e-14);
}

TEST_CASE("matrix binary round trip") {
    const Fixture& fx = fixture();
    const auto path = std::filesystem::temp_directory_path() / "wke_test_matrix.bin";
    write_matrix_binary(path.string(), fx.m);
    const OperatorMatrix back = read_matrix_binary(path.string());
    CHECK(back.B == fx.m.B);
    CHECK(back.weights == fx.m.weights);
    std::filesystem::remove(path);
}

TEST_CASE("serial and parallel assembly agree to roundoff") {
    const Fixture& fx = fixture();
    const OperatorMatrix p = assemble_dirichlet(fx.engine, Exec::Parallel);
    CHECK((p.B - fx.m.B).cwiseAbs().maxCoeff() <= 1e-13 * fx.m.B.cwiseAbs().maxCoeff());
}
