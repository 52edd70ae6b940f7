#include <doctest.h>

#include <cmath>

#include "spheroidal/continuation.hpp"
#include "spheroidal/oracle.hpp"

using namespace spheroidal;

TEST_CASE("strip membership") {
    const StripSpec s{1.0};
    CHECK(s.contains(cplx(10.0, 0.05)));
    CHECK_FALSE(s.contains(cplx(10.0, 0.5)));  // 0.5 >= 1/11
    CHECK_FALSE(s.contains(cplx(10.0, 2.0)));
    CHECK(s.contains(cplx(0.0, 0.99)));
    CHECK_FALSE(s.contains(cplx(0.0, 1.0)));   // open set
    CHECK(s.load(cplx(10.0, 0.5)) == doctest::Approx(5.5));
    CHECK(StripSpec{2.0}.contains(cplx(3.0, 0.3)));
}

TEST_CASE("perturbation split constants") {
    const PerturbationSplit p = PerturbationSplit::make(0.5, 0);
    CHECK(p.rho == doctest::Approx(2.0 * (2.0 * 0.5 + 0.25)));
    CHECK(p.gamma == doctest::Approx(8.0 * p.rho));
    const PerturbationSplit q = PerturbationSplit::make(1.0, -2);
    CHECK(q.rho == doctest::Approx(2.0 * (6.0 + 1.0)));
    CHECK_THROWS_AS(PerturbationSplit::make(0.0, 0), SolverError);
}

TEST_CASE("branch index") {
    CHECK(Branch{3, Parity::Even, 0}.n() == 6);
    CHECK(Branch{3, Parity::Odd, 0}.n() == 7);
}

TEST_CASE("shooting function vanishes at real eigenvalues") {
    for (Parity par : {Parity::Even, Parity::Odd}) {
        const EigenvalueRecord r = find_eigenvalue(2, par, 1, 6.0);
        const cplx f = shooting_function(r.lambda, 6.0, 1, par);
        const cplx g = shooting_function(r.lambda + 1.0, 6.0, 1, par);
        CHECK(std::abs(f) <= 1e-8 * std::abs(g));
    }
}

TEST_CASE("shooting function conjugation symmetry") {
    const cplx lam(14.0, 0.8), om(3.0, 0.2);
    const cplx a = shooting_function(lam, om, 0, Parity::Even);
    const cplx b = shooting_function(std::conj(lam), std::conj(om), 0, Parity::Even);
    CHECK(std::abs(a - std::conj(b)) <= 1e-12 * std::abs(a));
}

TEST_CASE("shooting function away from the spectrum") {
    // Even k = 0 eigenvalues at Omega = 2 sit near 3.3, 11.9, ...; probe between them.
    const double e0 = oracle_eigenvalue(0, 2.0, Parity::Even, 0);
    const double e1 = oracle_eigenvalue(0, 2.0, Parity::Even, 1);
    const double f0 = std::abs(shooting_function(e0, 2.0, 0, Parity::Even));
    for (double t : {0.25, 0.5, 0.75}) {
        const double lam = e0 + t * (e1 - e0);
        CHECK(std::abs(shooting_function(lam, 2.0, 0, Parity::Even)) > 1e3 * f0);
    }
}

TEST_CASE("Newton on the shooting function converges to the oracle value") {
    const double ref = oracle_eigenvalue(0, 4.0, Parity::Odd, 1);
    const NewtonResult r = newton_complex(ref + 0.3, 4.0, 0, Parity::Odd, 5.0);
    CHECK(r.converged);
    CHECK(std::abs(r.lambda - ref) <= 1e-9 * ref);
    CHECK(std::abs(r.lambda.imag()) <= 1e-12);
}

TEST_CASE("continuation along the real axis reproduces the eigensolver") {
    const Branch b{1, Parity::Even, 1};
    const auto path = linear_path(0.0, 6.0, 6);
    const ComplexEigenPath p = continue_eigenvalue(b, path, StripSpec{1.0});
    REQUIRE(p.samples.size() == path.size());
    CHECK(p.maxImOnAxis <= 1e-9);
    for (const PathSample& s : p.samples) {
        const EigenvalueRecord r = find_eigenvalue(b.m, b.parity, b.k, s.omega.real());
        CHECK(std::abs(s.lambda - r.lambda) <= 1e-8 * std::abs(r.lambda));
        CHECK(s.newtonResidual <= 1e-9 * (1.0 + std::abs(s.lambda)));
    }
}

TEST_CASE("conjugate paths give conjugate eigenvalues") {
    const Branch b{0, Parity::Even, 0};
    const ComplexEigenPath up = continue_eigenvalue(b, linear_path(2.0, cplx(2.0, 0.2), 4), StripSpec{1.0});
    const ComplexEigenPath down = continue_eigenvalue(b, linear_path(2.0, cplx(2.0, -0.2), 4), StripSpec{1.0});
    REQUIRE(up.samples.size() == down.samples.size());
    for (std::size_t i = 0; i < up.samples.size(); ++i)
        CHECK(std::abs(up.samples[i].lambda - std::conj(down.samples[i].lambda)) <=
              1e-10 * std::abs(up.samples[i].lambda));
    CHECK(std::abs(up.samples.back().lambda.imag()) > 1e-3);
}

TEST_CASE("continuation agrees with the complex truncated block") {
    const Branch b{1, Parity::Odd, 0};
    const ComplexEigenPath p = continue_eigenvalue(b, linear_path(1.0, cplx(1.0, 0.3), 3), StripSpec{1.0});
    for (const PathSample& s : p.samples) CHECK(s.oracleDistance <= 1e-8 * std::abs(s.lambda));
}

TEST_CASE("path leaving the strip is rejected when required") {
    ContinuationOptions o;
    o.requireStrip = true;
    CHECK_THROWS_AS(continue_eigenvalue({0, Parity::Even, 0}, linear_path(10.0, cplx(10.0, 2.0), 4), StripSpec{1.0}, o),
                    SolverError);
}

TEST_CASE("d lambda / d Omega at Omega = 0 equals 2k") {
    for (int k : {1, -2, 3}) {
        const double d = dlambda_domega({0, Parity::Even, k}, 0.0);
        CHECK(d == doctest::Approx(2.0 * k).epsilon(1e-7));
    }
    // Feynman-Hellmann on the oracle block away from zero.
    const double h = 1e-4;
    const double fd = (oracle_eigenvalue(1, 3.0 + h, Parity::Odd, 1) - oracle_eigenvalue(1, 3.0 - h, Parity::Odd, 1)) / (2 * h);
    CHECK(dlambda_domega({1, Parity::Odd, 1}, 3.0) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("holomorphy harness") {
    const HolomorphyReport c = verify_holomorphy([](cplx) { return cplx(3.0, -1.0); }, cplx(1.0, 0.5), 0.1);
    CHECK(c.dbarResidual <= 1e-15);
    CHECK(c.cauchyIntegral <= 1e-15);
    const HolomorphyReport sq = verify_holomorphy([](cplx w) { return w * w; }, cplx(3.0, 0.1), 0.1, 16, cplx(3.0, 0.1) * cplx(3.0, 0.1));
    CHECK(sq.dbarResidual <= 1e-12);
    CHECK(sq.cauchyIntegral <= 1e-12);
    REQUIRE(sq.meanValueResidual.has_value());
    CHECK(*sq.meanValueResidual <= 1e-12);
    const HolomorphyReport bar = verify_holomorphy([](cplx w) { return std::conj(w); }, cplx(0.0), 1.0);
    CHECK(bar.dbarResidual > 0.1);
}

TEST_CASE("continued branch is holomorphic on a small circle") {
    const HolomorphyReport r = branch_holomorphy({0, Parity::Even, 0}, cplx(3.0, 0.1), 0.1, 16, StripSpec{2.0});
    CHECK(r.dbarResidual <= 1e-6);
    CHECK(r.cauchyIntegral <= 1e-6);
}

TEST_CASE("projectors for real Omega are orthogonal spectral projectors") {
    const ProjectorReport r = projector_diagnostics(0, cplx(2.0, 0.0), Parity::Even, 30, 0.5);
    CHECK(r.maxIdempotency <= 1e-8);
    CHECK(r.maxOrthogonality <= 1e-8);
    CHECK(r.maxQNorm == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.normW == doctest::Approx(0.0));
    CHECK(r.ranksOk);
}

TEST_CASE("projectors off the axis") {
    const ProjectorReport r = projector_diagnostics(0, cplx(2.0, 0.2), Parity::Even, 30, 0.5);
    CHECK(r.maxIdempotency <= 1e-8);
    CHECK(r.ranksOk);
    CHECK(r.normW <= r.split.rho / 2.0);
    if (r.gapConditionHolds) CHECK(r.maxProjectorDistance <= 0.5);
    CHECK(r.tailsDecrease);
    CHECK(r.pass);
}
