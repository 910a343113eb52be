#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "semilab/discretization.hpp"
#include "semilab/errors.hpp"
#include "semilab/semigroup_engine.hpp"
#include "test_support.hpp"

using namespace semilab;
using testing_support::max_abs;

namespace {

Generator mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return Generator::from_matrix(m);
}

}  // namespace

TEST_CASE("generator invariants") {
    CHECK_THROWS_AS(Generator(Matrix::Zero(2, 3), Vector::Ones(2), false, "bad"), InvalidInput);
    CHECK_THROWS_AS(Generator(Matrix::Zero(2, 2), Vector::Ones(3), false, "bad"), InvalidInput);
    CHECK_THROWS_AS(Generator(Matrix::Zero(2, 2), Vector{{1.0, 0.0}}, false, "bad"), InvalidInput);
    Matrix a(2, 2);
    a << -1, 2, 0, -1;
    CHECK_THROWS_AS(Generator(a, Vector::Ones(2), true, "bad"), InvalidInput);
    // diag(w) A symmetric with w = (1, 2)
    a << -2, 2, 1, -1;
    CHECK_NOTHROW(Generator(a, Vector{{1.0, 2.0}}, true, "weighted"));
    CHECK(Generator::from_matrix(Matrix::Identity(2, 2)).symmetric());
    CHECK_FALSE(Generator::from_matrix(a).symmetric());
}

TEST_CASE("spectral bound") {
    CHECK(spectral_bound(mat2(-1, 0, 0, -3)) == doctest::Approx(-1.0));
    CHECK(std::abs(spectral_bound(mat2(-1, 1, 1, -1))) < 1e-15);
    const SpectralSummary s = spectral_summary(mat2(-1, 1, 1, -1));
    CHECK(s.simple);
    CHECK(s.gap == doctest::Approx(2.0));
    CHECK_FALSE(spectral_summary(mat2(-1, 0, 0, -1)).simple);
    // complex pair of the rotation generator: real parts tie
    CHECK_FALSE(spectral_summary(mat2(0, -1, 1, 0)).simple);
}

TEST_CASE("is_metzler") {
    CHECK(is_metzler(mat2(-2, 1, 3, -5)).metzler);
    const MetzlerReport r = is_metzler(mat2(0, -1, 0, 0));
    CHECK_FALSE(r.metzler);
    CHECK(r.worst_off_diagonal == -1.0);
    const MetzlerReport ex91 = is_metzler(nonlocal_laplace_interval(100));
    CHECK_FALSE(ex91.metzler);
    CHECK(ex91.worst_off_diagonal < 0.0);
}

TEST_CASE("is_metzler agrees with the sign of e^{tA}") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int disagreements = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 8;
        Matrix a = testing_support::random_metzler(rng, n, 0.6);
        if (trial % 2 == 1) {
            // one clearly negative off-diagonal entry
            const int i = trial % n, j = (i + 1) % n;
            a(i, j) = -0.5 - u(rng);
        }
        const bool metzler = is_metzler(Generator::from_matrix(a)).metzler;
        bool nonneg = true;
        for (double t : {0.01, 0.1, 1.0, 10.0}) {
            if (expm(a, t).minCoeff() < -1e-12) nonneg = false;
        }
        if (metzler != nonneg) ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("is_irreducible") {
    CHECK_FALSE(is_irreducible(mat2(-1, 0, 0, -1)));
    CHECK(is_irreducible(mat2(-1, 1, 1, -1)));
    // one-directional coupling is reducible
    CHECK_FALSE(is_irreducible(mat2(-1, 1, 0, -1)));
    CHECK(is_irreducible(dirichlet_heat(51)));
    CHECK_THROWS_AS(is_irreducible(mat2(-1, -1, 1, -1)), InvalidInput);
}

TEST_CASE("equilibrium projection closed forms") {
    const EquilibriumProjection p = equilibrium_projection(mat2(-1, 1, 1, -1));
    CHECK(std::abs(p.lambda0) < 1e-14);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(p.u(0) == doctest::Approx(r));
    CHECK(p.u(1) == doctest::Approx(r));
    CHECK(max_abs(p.rank1 - Matrix::Constant(2, 2, 0.5)) < 1e-14);
    CHECK(p.pair(p.u) == doctest::Approx(1.0));

    // Markov generator: stationary distribution (2/3, 1/3)
    const EquilibriumProjection m = equilibrium_projection(mat2(-1, 1, 2, -2));
    CHECK(std::abs(m.lambda0) < 1e-14);
    CHECK(m.u(0) == doctest::Approx(1.0));
    CHECK(m.u(1) == doctest::Approx(1.0));
    const Vector nu = m.weights.cwiseProduct(m.phi);
    CHECK(nu(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(nu(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(max_abs(m.rank1 * m.rank1 - m.rank1) < 1e-14);

    CHECK_THROWS_AS(equilibrium_projection(mat2(-1, 0, 0, -1)), NumericalError);
}

TEST_CASE("Perron-Frobenius structure of random irreducible Metzler generators") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 20;
        const Generator g = Generator::from_matrix(testing_support::random_irreducible_metzler(rng, n));
        REQUIRE(is_irreducible(g));
        const EquilibriumProjection p = equilibrium_projection(g);
        CHECK(p.u.minCoeff() > 0.0);
        CHECK(p.phi.minCoeff() > 0.0);
        CHECK(max_abs(p.rank1 * p.rank1 - p.rank1) <= 1e-10 * std::max(1.0, max_abs(p.rank1)));
        CHECK(max_abs(g.matrix() * p.u - p.lambda0 * p.u) <= 1e-10 * std::max(1.0, max_abs(g.matrix())));
        // the limit of the rescaled semigroup
        const Propagator prop(g);
        const double t = 60.0 / std::max(spectral_summary(g).gap, 0.5);
        CHECK(max_abs(prop.rescaled(t) - p.rank1) <= 1e-8 * std::max(1.0, max_abs(p.rank1)));
    }
}

TEST_CASE("propagator") {
    const Generator g = mat2(-1, 1, 1, -1);
    const Propagator prop(g);
    CHECK(max_abs(prop.evolve(0.3) - expm(g.matrix(), 0.3)) < 1e-15);
    CHECK_THROWS_AS(prop.evolve(-1.0), InvalidInput);

    // weighted symmetric generator: evolve matches expm of the raw matrix
    Matrix a(3, 3);
    a << -2, 2, 0, 1, -2, 1, 0, 2, -2;
    const Generator w(a, Vector{{1.0, 2.0, 1.0}}, true, "weighted");
    const Propagator pw(w);
    CHECK(max_abs(pw.evolve(0.7) - expm_pade(a, 0.7)) < 1e-13);
    CHECK(max_abs(pw.rescaled(0.7) - std::exp(-0.7 * spectral_bound(w)) * expm_pade(a, 0.7)) < 1e-13);
}

TEST_CASE("convergence profile closed forms") {
    const Generator g = mat2(-1, 1, 1, -1);
    const EquilibriumProjection p = equilibrium_projection(g);
    const auto prof = convergence_profile(g, p, {1.0, 2.0});
    REQUIRE(prof.size() == 2);
    CHECK(prof[0].distance == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(prof[1].distance == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));

    const Generator zero = Generator::from_matrix(Matrix::Zero(1, 1));
    const auto z = convergence_profile(zero, equilibrium_projection(zero), {0.5, 3.0});
    CHECK(z[0].distance == 0.0);
    CHECK(z[1].distance == 0.0);

    CHECK_THROWS_AS(convergence_profile(g, p, {}), InvalidInput);
    CHECK_THROWS_AS(convergence_profile(g, p, {0.0}), InvalidInput);
}

TEST_CASE("Neumann heat profile decays at rate pi^2") {
    const Generator g = neumann_heat(200);
    const EquilibriumProjection p = equilibrium_projection(g);
    const auto prof = convergence_profile(g, p, {0.2});
    const double exact = std::exp(-std::numbers::pi * std::numbers::pi * 0.2);
    CHECK(std::abs(prof[0].distance - exact) <= 0.02 * exact);
}

TEST_CASE("spectral and explicit profile methods agree") {
    for (const Generator& g : {neumann_heat(60), dirichlet_heat(60, 2.0),
                               schrodinger_1d(confined_potential, 5.0, 120), nonlocal_laplace_interval(40)}) {
        const EquilibriumProjection p = equilibrium_projection(g);
        const std::vector<double> times{0.01, 0.1, 0.5, 2.0};
        const auto a = convergence_profile(g, p, times, ProfileMethod::spectral);
        const auto b = convergence_profile(g, p, times, ProfileMethod::explicit_norm);
        for (std::size_t k = 0; k < times.size(); ++k) {
            CHECK(a[k].distance == doctest::Approx(b[k].distance).epsilon(1e-8));
        }
    }
    Matrix m(2, 2);
    m << -1, 1, 2, -2;
    const Generator ns = Generator::from_matrix(m);
    CHECK_THROWS_AS(convergence_profile(ns, equilibrium_projection(ns), {1.0}, ProfileMethod::spectral),
                    InvalidInput);
}

TEST_CASE("fit_exponential_rate") {
    std::vector<ProfilePoint> prof;
    for (int k = 1; k <= 4; ++k) prof.push_back({double(k), std::exp(-2.0 * k)});
    const RateFit f = fit_exponential_rate(prof);
    CHECK(f.M == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.delta == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.points_used == 4);

    const Generator g = mat2(-1, 1, 1, -1);
    const auto p2 = convergence_profile(g, equilibrium_projection(g), {0.5, 1.0, 1.5, 2.0});
    CHECK(std::abs(fit_exponential_rate(p2).delta - 2.0) <= 1e-6);

    prof.pop_back();
    CHECK_THROWS_AS(fit_exponential_rate(prof), InvalidInput);
}

TEST_CASE("ex9_1 profile rate matches the spectral gap") {
    const Generator g = nonlocal_laplace_interval(100);
    const SpectralSummary s = spectral_summary(g);
    std::vector<double> times;
    for (int k = 1; k <= 10; ++k) times.push_back(k / s.gap);
    const RateFit f = fit_exponential_rate(convergence_profile(g, equilibrium_projection(g), times));
    CHECK(std::abs(f.delta - s.gap) <= 0.1 * s.gap);
}

TEST_CASE("classify_asymptotics") {
    const Generator d = mat2(-1, 0, 0, -2);
    CHECK(classify_asymptotics(d).kind == AsymptoticClass::decay_to_zero);
    ClassifyOptions rescale;
    rescale.rescale_to_spectral_bound = true;
    const AsymptoticClassification c = classify_asymptotics(d, rescale);
    CHECK(c.kind == AsymptoticClass::converges_rank1);
    CHECK(c.lambda == doctest::Approx(-1.0));
    CHECK(c.rescaled);

    CHECK(classify_asymptotics(mat2(-1, 1, 1, -1)).kind == AsymptoticClass::converges_rank1);
    CHECK_THROWS_AS(classify_asymptotics(mat2(0, -1, 1, 0)), InvalidInput);

    // two closed classes {0,1} and {2}
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = -1;
    m(0, 1) = 1;
    m(1, 0) = 1;
    m(1, 1) = -1;
    const AsymptoticClassification multi = classify_asymptotics(Generator::from_matrix(m));
    CHECK(multi.kind == AsymptoticClass::not_convergent_multi);
    CHECK(multi.kernel_dim == 2);
    CHECK(multi.dual_kernel_dim == 2);

    // positive cyclic generator: peripheral spectrum at spb with nonzero imaginary parts
    Matrix cyc = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
        cyc(i, i) = -1.0;
        cyc((i + 1) % 3, i) = 1.0;
    }
    const AsymptoticClassification cc = classify_asymptotics(Generator::from_matrix(cyc));
    CHECK(cc.kind == AsymptoticClass::converges_rank1);
    CHECK(cc.peripheral_spectrum.empty());
}
