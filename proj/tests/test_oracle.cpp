#include <doctest.h>

#include <cmath>

#include "spheroidal/oracle.hpp"

using namespace spheroidal;

namespace {

struct Fixture {
    int k;
    double omega;
    Parity par;
    int m;
    double lambda;
};

// Computed with scipy.special.obl_cv through lambda = cv + Omega^2 + 2 Omega k.
const Fixture kFixtures[] = {
    {0, 1.0, Parity::Even, 0, 0.6513976005297302},
    {0, 5.0, Parity::Even, 0, 8.920957254650226},
    {0, 10.0, Parity::Even, 0, 18.972056055042287},
    {1, 5.0, Parity::Even, 0, 27.506611715889356},
    {2, 25.0, Parity::Even, 1, 338.36551405508396},
    {0, 50.0, Parity::Even, 10, 1845.9727647770742},
};

}  // namespace

TEST_CASE("Omega = 0 matrix is diagonal l(l+1)") {
    for (int k : {0, -2, 3}) {
        const OracleMatrix a = assemble(k, 0.0, 20);
        for (int i = 0; i < 20; ++i) {
            const int l = std::abs(k) + i;
            for (int j = 0; j < 20; ++j) CHECK(a.entry(i, j) == (i == j ? l * (l + 1.0) : 0.0));
        }
    }
}

TEST_CASE("matrix is symmetric with couplings at |dl| = 0, 2 only") {
    const OracleMatrix a = assemble(1, 3.7, 30);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 30; ++j) {
            CHECK(a.entry(i, j) == a.entry(j, i));
            if (std::abs(i - j) != 0 && std::abs(i - j) != 2) CHECK(a.entry(i, j) == 0.0);
        }
}

TEST_CASE("cos recurrence coefficient reproduces x P_l") {
    const int k = 2, lMax = 12;
    for (double x : {-0.7, 0.1, 0.55}) {
        const auto P = normalized_legendre(k, lMax + 1, x);
        for (int l = k + 1; l < lMax; ++l) {
            const int i = l - k;
            const double rhs = legendre_coupling(l + 1, k) * P[i + 1] + legendre_coupling(l, k) * P[i - 1];
            CHECK(x * P[i] == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("normalized Legendre functions are orthonormal") {
    // Gauss-Legendre would do as well; a fine midpoint rule is enough at 1e-6.
    const int k = 1, lMax = 6, n = 200000;
    std::vector<std::vector<double>> gram(lMax, std::vector<double>(lMax, 0.0));
    for (int q = 0; q < n; ++q) {
        const double x = -1.0 + (q + 0.5) * 2.0 / n;
        const auto P = normalized_legendre(k, lMax, x);
        for (int i = 0; i < lMax; ++i)
            for (int j = 0; j < lMax; ++j) gram[i][j] += P[i] * P[j] * 2.0 / n;
    }
    for (int i = 0; i < lMax; ++i)
        for (int j = 0; j < lMax; ++j) CHECK(gram[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-6));
}

TEST_CASE("Legendre limit of the parity blocks") {
    const OracleResult even = oracle_eigenvalues(0, 0.0, Parity::Even, 4);
    const double expectEven[] = {0.0, 6.0, 20.0, 42.0};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(even.values[i] - expectEven[i]) <= 1e-12 * std::max(1.0, expectEven[i]));
    const OracleResult k2 = oracle_eigenvalues(2, 0.0, Parity::Even, 3);
    CHECK(k2.values[0] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(k2.values[1] == doctest::Approx(20.0).epsilon(1e-12));
    const OracleResult k2o = oracle_eigenvalues(2, 0.0, Parity::Odd, 2);
    CHECK(k2o.values[0] == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("oracle agrees with independent oblate characteristic values") {
    for (const Fixture& f : kFixtures) {
        CAPTURE(f.k);
        CAPTURE(f.omega);
        CHECK(oracle_eigenvalue(f.k, f.omega, f.par, f.m) == doctest::Approx(f.lambda).epsilon(1e-9));
    }
}

TEST_CASE("40 and 60 term truncations agree at k = 0, Omega = 1") {
    const auto v40 = block_eigenvalues(assemble(0, 1.0, 80), Parity::Even, 1);
    const auto v60 = block_eigenvalues(assemble(0, 1.0, 120), Parity::Even, 1);
    CHECK(v40[0] == doctest::Approx(v60[0]).epsilon(1e-14));
    CHECK(v40[0] == doctest::Approx(0.6513976005297302).epsilon(1e-12));
}

TEST_CASE("mirror symmetry (Omega, k) -> (-Omega, -k)") {
    for (Parity par : {Parity::Even, Parity::Odd}) {
        const auto a = oracle_eigenvalues(2, 7.0, par, 5).values;
        const auto b = oracle_eigenvalues(-2, -7.0, par, 5).values;
        for (int i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
}

TEST_CASE("truncation convergence evidence") {
    const OracleResult r = oracle_eigenvalues(1, 20.0, Parity::Odd, 6);
    CHECK(r.converged);
    CHECK(r.maxRelChange <= 1e-9);
    REQUIRE(r.previous.size() == r.values.size());
    CHECK(r.size >= 16);
    OracleOptions tiny;
    tiny.maxSize = 24;
    tiny.tol = 1e-15;
    CHECK_THROWS_AS(oracle_eigenvalues(0, 200.0, Parity::Even, 8, tiny), SolverError);
}

TEST_CASE("Weyl growth: lambda_2m / lambda_m near 4 at m = 40") {
    const auto v = oracle_eigenvalues(0, 5.0, Parity::Even, 81).values;
    CHECK(v[80] / v[40] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("large-Omega slope of the lowest branch") {
    // d lambda / d Omega -> 2 for the lowest even k = 0 branch.
    const double a = oracle_eigenvalue(0, 200.0, Parity::Even, 0);
    const double b = oracle_eigenvalue(0, 201.0, Parity::Even, 0);
    CHECK(b - a == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("block eigenvector reconstructs the Legendre function") {
    std::vector<std::vector<double>> vecs;
    block_eigenvalues(assemble(0, 0.0, 20), Parity::Odd, 1, &vecs);
    REQUIRE(!vecs.empty());
    // Theta = +-sqrt(3/2) x for P_1.
    const double t = oracle_eigenfunction(0, Parity::Odd, vecs[0], 0.5);
    CHECK(std::abs(t) == doctest::Approx(std::sqrt(1.5) * 0.5).epsilon(1e-12));
}
