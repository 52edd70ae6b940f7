#include <doctest.h>

#include <cmath>

#include "spheroidal/potential.hpp"

using namespace spheroidal;

TEST_CASE("potential values at fixed points") {
    CHECK(eval_potential(kHalfPi, real_params(0, 2.0, 5.0)).V == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(eval_potential(kHalfPi, real_params(1, 0.0, 2.0)).V == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(eval_potential(kPi / 6.0, real_params(0, 0.0, 0.0)).V == doctest::Approx(-1.25).epsilon(1e-14));
}

TEST_CASE("potential domain is (0, pi/2]") {
    CHECK_THROWS_AS(eval_potential(0.0, real_params(0, 1.0, 1.0)), SolverError);
    CHECK_THROWS_AS(eval_potential(kHalfPi + 1e-3, real_params(0, 1.0, 1.0)), SolverError);
    CHECK_NOTHROW(eval_potential(1e-8, real_params(0, 1.0, 1.0)));
}

TEST_CASE("potential derivatives match finite differences") {
    for (int k : {0, 1, 3}) {
        const SpheroidalPotential V(real_params(k, 7.5, 40.0));
        for (double u : {0.05, 0.3, 0.9, 1.4}) {
            const double h = 1e-5;
            const PotentialEval e = V.eval(u);
            const double d1 = (V.value(u + h) - V.value(u - h)) / (2 * h);
            const double d2 = (V.eval(u + h).Vp - V.eval(u - h).Vp) / (2 * h);
            const double d3 = (V.eval(u + h).Vpp - V.eval(u - h).Vpp) / (2 * h);
            CHECK(e.Vp == doctest::Approx(d1).epsilon(1e-7));
            CHECK(e.Vpp == doctest::Approx(d2).epsilon(1e-6));
            CHECK(V.third(u) == doctest::Approx(d3).epsilon(1e-6));
        }
    }
}

TEST_CASE("mirror symmetry (Omega, k) -> (-Omega, -k)") {
    const ProblemParams p = real_params(2, 3.25, 11.0);
    for (double u : {0.1, 0.7, 1.5}) {
        CHECK(eval_potential(u, p).V == doctest::Approx(eval_potential(u, p.mirrored()).V).epsilon(1e-15));
    }
}

TEST_CASE("complex potential agrees on the real axis") {
    const ProblemParams p = real_params(1, 4.0, 9.0);
    for (double u : {0.2, 1.0}) {
        const cplx v = potential_complex(u, p);
        CHECK(v.real() == doctest::Approx(eval_potential(u, p).V).epsilon(1e-14));
        CHECK(v.imag() == 0.0);
    }
    // Conjugate parameters give the conjugate potential.
    const ProblemParams q{1, cplx(4.0, 0.3), cplx(9.0, -0.7)};
    const ProblemParams qc{1, std::conj(q.omega), std::conj(q.lambda)};
    const cplx a = potential_complex(0.8, q), b = potential_complex(0.8, qc);
    CHECK(std::abs(a - std::conj(b)) < 1e-14);
}

TEST_CASE("pole remainder is V + 1/(4u^2)") {
    const SpheroidalPotential V(real_params(0, 3.0, 5.0));
    for (double u : {1e-3, 0.1, 0.5}) {
        auto br = V.pole_remainder(u);
        REQUIRE(br.has_value());
        CHECK(br->first == doctest::Approx(V.value(u) + 0.25 / (u * u)).epsilon(1e-9));
    }
}

TEST_CASE("partition breakpoints for k = 1, Omega = 100") {
    const ProblemParams p = real_params(1, 100.0, 100.0);
    const RegionPartition part = partition_regions(p);
    const double s2 = std::sqrt(0.75) / 100.0;
    CHECK(s2 == doctest::Approx(0.0086603).epsilon(1e-4));
    REQUIRE(part.u0.has_value());
    CHECK(*part.u0 == doctest::Approx(std::asin(std::sqrt(s2))).epsilon(1e-10));
    // Closed form of V at the interior minimum.
    const double vMin = 100.0 * (2.0 * std::sqrt(0.75) + 2.0) - 100.0 - 0.25;
    CHECK(eval_potential(*part.u0, p).V == doctest::Approx(vMin).epsilon(1e-12));
    CHECK(vMin == doctest::Approx(272.955).epsilon(1e-5));
}

TEST_CASE("partition: V < 0 up to the equator puts u+ at pi/2") {
    // lambda > Omega^2 makes V(pi/2) negative.
    const ProblemParams p = real_params(0, 100.0, 13000.0);
    const RegionPartition part = partition_regions(p);
    REQUIRE(part.uPlus.has_value());
    CHECK(*part.uPlus == doctest::Approx(kHalfPi));
}

TEST_CASE("partition breakpoints are ordered") {
    const ProblemParams p = real_params(0, 400.0, 1000.0);
    const RegionPartition part = partition_regions(p);
    if (!part.degenerate) {
        const auto regions = region_list(part, 1e-6);
        REQUIRE(!regions.empty());
        CHECK(regions.front().a == doctest::Approx(1e-6));
        CHECK(regions.back().b == doctest::Approx(kHalfPi));
        for (std::size_t i = 1; i < regions.size(); ++i) CHECK(regions[i].a == doctest::Approx(regions[i - 1].b));
    }
}

TEST_CASE("no interior minimum when k^2 - 1/4 exceeds Omega^2") {
    const RegionPartition part = partition_regions(real_params(1, 0.1, 3.0));
    CHECK(part.degenerate);
    CHECK(part.reason.find("region S") != std::string::npos);
}

TEST_CASE("K and L for constant potentials") {
    CHECK(compute_K(0.1, 1.0, ConstantPotential(-3.0)) == doctest::Approx(0.0));
    CHECK(compute_L(0.1, 1.0, ConstantPotential(4.0)) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK_THROWS_AS(compute_K(0.1, 1.0, ConstantPotential(2.0)), SolverError);
}

namespace {

// Dense-grid evaluation of K, independent of the piecewise monotone analysis.
double dense_K(double a, double b, const Potential& V, int n = 200000) {
    double supV2 = 0.0, tv = 0.0, supQ = 0.0, prev = V.eval(a).Vpp;
    for (int i = 0; i <= n; ++i) {
        const double u = a + (b - a) * i / n;
        const PotentialEval e = V.eval(u);
        supV2 = std::max(supV2, std::abs(e.Vpp));
        tv += std::abs(e.Vpp - prev);
        prev = e.Vpp;
        supQ = std::max(supQ, e.Vp * e.Vp / std::pow(std::abs(e.V), 3));
    }
    const double vmax = std::max(V.value(a), V.value(b));
    return (supV2 + tv) / (vmax * vmax) + supQ;
}

double dense_L(double a, double b, const Potential& V, int n = 200000) {
    double sup = -1e300, tv = 0.0;
    double prev = V.eval(a).Vp / (V.value(a) * V.value(a));
    for (int i = 0; i <= n; ++i) {
        const double u = a + (b - a) * i / n;
        const PotentialEval e = V.eval(u);
        const double r = e.Vp / (e.V * e.V);
        sup = std::max(sup, 3.0 / std::sqrt(e.V) + r);
        tv += std::abs(r - prev);
        prev = r;
    }
    return sup + tv;
}

}  // namespace

TEST_CASE("K agrees with a dense-grid evaluation") {
    const SpheroidalPotential V(real_params(0, 50.0, 3000.0));
    const double a = 0.2, b = 1.2;
    REQUIRE(V.value(b) < 0.0);
    const double K = compute_K(a, b, V);
    CHECK(K == doctest::Approx(dense_K(a, b, V)).epsilon(1e-2));
}

TEST_CASE("L agrees with a dense-grid evaluation") {
    const SpheroidalPotential V(real_params(0, 50.0, 100.0));
    // V > 0 and increasing on [a, b].
    const double a = 0.6, b = 1.5;
    REQUIRE(V.value(a) > 0.0);
    const double L = compute_L(a, b, V);
    CHECK(L == doctest::Approx(dense_L(a, b, V)).epsilon(1e-2));
}
