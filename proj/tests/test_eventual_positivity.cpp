#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "semilab/discretization.hpp"
#include "semilab/errors.hpp"
#include "semilab/eventual_positivity.hpp"
#include "test_support.hpp"

using namespace semilab;
using testing_support::max_abs;

namespace {

Generator pair_generator() {
    Matrix a(2, 2);
    a << -1, 1, 1, -1;
    return Generator::from_matrix(a);
}

// Symmetric 3x3 with one negative coupling and a strictly positive Perron vector.
Generator small_eventually_positive() {
    Matrix a(3, 3);
    a << -2.0, 1.0, -0.2,
          1.0, -2.0, 1.0,
         -0.2, 1.0, -2.0;
    return Generator::from_matrix(a);
}

}  // namespace

TEST_CASE("hypotheses on the 2x2 Markov pair") {
    const Theorem81Report r = check_theorem_8_1_hypotheses(pair_generator(), Vector::Ones(2));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(r.dominant_eigenvector(0) == doctest::Approx(s));
    CHECK(r.dominant_eigenvector(1) == doctest::Approx(s));
    CHECK(r.eigenvector_bound_c == doctest::Approx(s));
    CHECK(r.hypotheses_hold());
}

TEST_CASE("hypotheses on the scenario operators") {
    const Generator g91 = nonlocal_laplace_interval(100);
    CHECK(check_theorem_8_1_hypotheses(g91, Vector::Ones(g91.size())).hypotheses_hold());

    const Generator g92 = schrodinger_system(GridDescriptor{0.0, 1.0, 60}, example_9_2_potential());
    const Theorem81Report r = check_theorem_8_1_hypotheses(g92, Vector::Ones(g92.size()));
    CHECK(r.hypotheses_hold());
    // w is proportional to c (x) 1, so c = min(w) = 1 / sqrt(3 * 60)
    CHECK(r.eigenvector_bound_c == doctest::Approx(1.0 / std::sqrt(180.0)).epsilon(1e-8));

    Matrix ns(2, 2);
    ns << -1, 1, 2, -2;
    CHECK_THROWS_AS(check_theorem_8_1_hypotheses(Generator::from_matrix(ns), Vector::Ones(2)), InvalidInput);
    CHECK_THROWS_AS(check_theorem_8_1_hypotheses(pair_generator(), Vector{{1.0, 0.0}}), InvalidInput);
}

TEST_CASE("Metzler generators are positive from the first grid time") {
    const Generator g = pair_generator();
    const auto grid = default_positivity_grid(g);
    const PositivityCertificate c = minimal_positivity_time(g, grid);
    CHECK(c.verdict == PositivityVerdict::positive);
    REQUIRE(c.t1);
    CHECK(*c.t1 == grid.front());
}

TEST_CASE("a small eventually positive generator agrees with a brute-force sign scan") {
    const Generator g = small_eventually_positive();
    REQUIRE_FALSE(is_metzler(g).metzler);
    const EquilibriumProjection p = equilibrium_projection(g);
    REQUIRE(p.u.minCoeff() > 0.0);

    const auto grid = default_positivity_grid(g);
    const PositivityCertificate c = minimal_positivity_time(g, grid);
    CHECK(c.verdict == PositivityVerdict::eventually_positive);
    REQUIRE(c.t1);

    // brute force: e^{tA} through the Pade route, rescaled
    std::size_t first_ok = grid.size();
    for (std::size_t k = grid.size(); k-- > 0;) {
        const Matrix r = std::exp(-p.lambda0 * grid[k]) * expm_pade(g.matrix(), grid[k]);
        if (r.minCoeff() < -1e-10 * r.cwiseAbs().rowwise().sum().maxCoeff()) break;
        first_ok = k;
    }
    REQUIRE(first_ok < grid.size());
    CHECK(*c.t1 == grid[first_ok]);
    CHECK(grid[first_ok] > grid.front());
}

TEST_CASE("eventual positivity of the nonlocal Laplacian") {
    const Generator g = nonlocal_laplace_interval(100);
    const PositivityCertificate c = minimal_positivity_time(g, default_positivity_grid(g));
    CHECK(c.verdict == PositivityVerdict::eventually_positive);
    REQUIRE(c.t1);
    CHECK(c.min_entry_series.front().min_entry < 0.0);
    for (const auto& s : c.min_entry_series) {
        if (s.t >= *c.t1) CHECK(s.min_entry >= -c.eps * s.sup_norm);
    }
    const EquilibriumProjection p = equilibrium_projection(g);
    CHECK(strong_positivity_certificate(g, p.u, Vector::Unit(g.size(), 0), 2.0 * *c.t1) > 0.0);
}

TEST_CASE("a sign-changing dominant eigenvector rules out eventual positivity") {
    Matrix a(2, 2);
    a << -1, -1, -1, -1;
    const Generator g = Generator::from_matrix(a);
    const PositivityCertificate c = minimal_positivity_time(g, geometric_grid(1e-3, 1e2, 30));
    CHECK(c.verdict == PositivityVerdict::not_eventually_positive);
    CHECK_FALSE(c.t1);

    const Generator degenerate = Generator::from_matrix(Matrix::Identity(2, 2) * -1.0);
    CHECK(minimal_positivity_time(degenerate, geometric_grid(1e-3, 1.0, 12)).verdict ==
          PositivityVerdict::inconclusive);
}

TEST_CASE("grid validation") {
    const Generator g = pair_generator();
    CHECK_THROWS_AS(minimal_positivity_time(g, geometric_grid(1e-3, 1.0, 5)), InvalidInput);
    CHECK_THROWS_AS(minimal_positivity_time(g, geometric_grid(1e-1, 1.0, 20)), InvalidInput);
    std::vector<double> cubic;
    for (int k = 1; k <= 20; ++k) cubic.push_back(k * 1e-3 * k * k);
    CHECK_THROWS_AS(minimal_positivity_time(g, cubic), InvalidInput);
    CHECK_THROWS_AS(geometric_grid(0.0, 1.0, 10), InvalidInput);
}

TEST_CASE("strong positivity certificate") {
    std::mt19937_64 rng(51);
    const Generator g = Generator::from_matrix(testing_support::random_irreducible_metzler(rng, 8, 0.4));
    const EquilibriumProjection p = equilibrium_projection(g);
    const Vector f = Vector::Constant(8, 0.5);
    CHECK(strong_positivity_certificate(g, p.u, f, 1.0) > 0.0);
    CHECK_THROWS_AS(strong_positivity_certificate(g, p.u, Vector::Zero(8), 1.0), InvalidInput);
    CHECK_THROWS_AS(strong_positivity_certificate(g, p.u, f, 0.0), InvalidInput);
}
