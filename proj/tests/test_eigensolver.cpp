#include <doctest.h>

#include <cmath>

#include "spheroidal/eigensolver.hpp"
#include "spheroidal/oracle.hpp"

using namespace spheroidal;

namespace {

int legendre_degree(int k, Parity par, int m) { return std::abs(k) + 2 * m + (par == Parity::Odd ? 1 : 0); }

}  // namespace

TEST_CASE("Legendre limit") {
    for (int k : {0, 1, 2}) {
        for (Parity par : {Parity::Even, Parity::Odd}) {
            for (int m = 0; m <= 3; ++m) {
                const int l = legendre_degree(k, par, m);
                const double exact = l * (l + 1.0);
                const EigenvalueRecord r = find_eigenvalue(m, par, k, 0.0);
                CAPTURE(k);
                CAPTURE(m);
                CHECK(r.converged);
                CHECK(std::abs(r.lambda - exact) <= 1e-8 * std::max(1.0, exact));
                CHECK(r.nodeCountVerified);
                CHECK(r.nodes == m);
            }
        }
    }
}

TEST_CASE("record invariants") {
    const EigenvalueRecord r = find_eigenvalue(2, Parity::Odd, 1, 7.0);
    CHECK(r.converged);
    CHECK(r.residual <= 1e-8 * (1.0 + std::abs(r.lambda)));
    CHECK(r.bracketLo <= r.lambda);
    CHECK(r.lambda <= r.bracketHi);
    CHECK(r.dAngle > 0.0);
    CHECK(r.phaseResidual <= 1e-7);
}

TEST_CASE("shooting agrees with the oracle") {
    for (int k : {0, 2}) {
        for (double om : {5.0, 30.0}) {
            for (Parity par : {Parity::Even, Parity::Odd}) {
                for (int m : {0, 4}) {
                    const double ref = oracle_eigenvalue(k, om, par, m);
                    const EigenvalueRecord r = find_eigenvalue(m, par, k, om);
                    CHECK(r.lambda == doctest::Approx(ref).epsilon(1e-8));
                }
            }
        }
    }
}

TEST_CASE("shooting is independent of the initial guess source") {
    EigenOptions noOracle;
    noOracle.useOracle = false;
    const EigenvalueRecord a = find_eigenvalue(3, Parity::Even, 0, 12.0, noOracle);
    const EigenvalueRecord b = find_eigenvalue(3, Parity::Even, 0, 12.0);
    CHECK(a.lambda == doctest::Approx(b.lambda).epsilon(1e-10));
}

TEST_CASE("mirror symmetry lambda(Omega, k) = lambda(-Omega, -k)") {
    const EigenvalueRecord a = find_eigenvalue(1, Parity::Even, 2, 6.0);
    const EigenvalueRecord b = find_eigenvalue(1, Parity::Even, -2, -6.0);
    CHECK(a.lambda == doctest::Approx(b.lambda).epsilon(1e-9));
}

TEST_CASE("phase targets") {
    const ProblemParams p = real_params(0, 0.0, 2.0);
    const ShotResult s = shoot(p);
    CHECK(phase_target(s, Parity::Odd, 0) == doctest::Approx(kPi));
    CHECK(phase_target(s, Parity::Odd, 3) == doctest::Approx(4.0 * kPi));
    // At an even eigenvalue with Re y(pi/2) = 0 the even target is pi/2 + m pi.
    const ShotResult e = shoot(real_params(0, 0.0, 6.0));
    CHECK(std::abs(e.yEnd.real()) < 1e-6 * std::abs(e.yEnd));
    CHECK(phase_target(e, Parity::Even, 1) == doctest::Approx(1.5 * kPi).epsilon(1e-6));
}

TEST_CASE("node counts") {
    CHECK(count_nodes(find_eigenvalue(1, Parity::Even, 0, 0.0)) == 1);
    CHECK(count_nodes(find_eigenvalue(0, Parity::Even, 0, 0.0)) == 0);
    for (double om : {0.0, 10.0, 40.0}) CHECK(count_nodes(find_eigenvalue(5, Parity::Odd, 1, om)) == 5);
}

TEST_CASE("eigenfunction reconstruction in the Legendre limit") {
    SUBCASE("k = 0, lambda = 2: Theta = cos theta") {
        const EigenvalueRecord r = find_eigenvalue(0, Parity::Odd, 0, 0.0);
        const EigenfunctionSamples f = reconstruct_eigenfunction(r, 401);
        double worst = 0.0, mx = 0.0;
        // unit norm on (0, pi): int cos^2 sin = 2/3
        const double scale = std::sqrt(1.5);
        for (std::size_t i = 0; i < f.u.size(); ++i) {
            worst = std::max(worst, std::abs(f.Theta[i] - scale * std::cos(f.u[i])));
            mx = std::max(mx, std::abs(f.Theta[i]));
        }
        CHECK(worst <= 1e-6 * mx);
    }
    SUBCASE("k = 1, lambda = 2: Theta = sin theta") {
        const EigenvalueRecord r = find_eigenvalue(0, Parity::Even, 1, 0.0);
        CHECK(r.lambda == doctest::Approx(2.0).epsilon(1e-9));
        const EigenfunctionSamples f = reconstruct_eigenfunction(r, 401);
        const double scale = std::sqrt(0.75);  // int sin^2 sin = 4/3
        double worst = 0.0;
        for (std::size_t i = 0; i < f.u.size(); ++i)
            worst = std::max(worst, std::abs(f.Theta[i] - scale * std::sin(f.u[i])));
        CHECK(worst <= 1e-6);
    }
    SUBCASE("normalization int Y^2 = 1/2") {
        const EigenvalueRecord r = find_eigenvalue(3, Parity::Even, 0, 9.0);
        const EigenfunctionSamples f = reconstruct_eigenfunction(r, 2001);
        double s = 0.0;
        for (std::size_t i = 1; i < f.u.size(); ++i)
            s += 0.5 * (f.Y[i] * f.Y[i] + f.Y[i - 1] * f.Y[i - 1]) * (f.u[i] - f.u[i - 1]);
        CHECK(s == doctest::Approx(0.5).epsilon(1e-4));
        int changes = 0;
        for (std::size_t i = 1; i + 1 < f.Y.size(); ++i)
            if ((f.Y[i] > 0) != (f.Y[i - 1] > 0)) ++changes;
        CHECK(changes == 3);
    }
}

TEST_CASE("predicted slopes") {
    CHECK(predicted_slope(0, 0) == 2.0);
    CHECK(predicted_slope(2, 0) == 10.0);
    CHECK(predicted_slope(1, 1) == 10.0);
    CHECK(predicted_slope(1, -1) == 6.0);
}

TEST_CASE("gap scan at Omega = 0") {
    GapScanConfig cfg;
    cfg.k = 0;
    cfg.omegas = {0.0};
    cfg.mMin = 0;
    cfg.mMax = 2;
    cfg.parities = {Parity::Even};
    const GapScanResult r = gap_scan(cfg);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].minGap == doctest::Approx(6.0).epsilon(1e-8));
    CHECK(r.rows[1].minGap == doctest::Approx(14.0).epsilon(1e-8));
    CHECK(r.rows[2].minGap == doctest::Approx(22.0).epsilon(1e-8));
}

TEST_CASE("gap scan Lipschitz consistency on a coarse grid") {
    GapScanConfig cfg;
    cfg.k = 1;
    for (double om = 0.0; om <= 20.0; om += 2.0) cfg.omegas.push_back(om);
    cfg.mMax = 2;
    cfg.jobs = 2;
    const GapScanResult r = gap_scan(cfg);
    for (const GapRow& row : r.rows) {
        CHECK(row.lipschitzViolations == 0);
        CHECK(row.maxLipschitzRatio <= 1.0);
        CHECK(row.minGap > 0.0);
        CHECK(row.nodesVerified);
    }
}
