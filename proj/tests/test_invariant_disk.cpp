#include <doctest.h>

#include <cmath>
#include <memory>

#include "spheroidal/invariant_disk.hpp"

using namespace spheroidal;

namespace {

/// V = v0 + s u.
class LinearPotential final : public Potential {
public:
    LinearPotential(double v0, double s) : v0_(v0), s_(s) {}
    double value(double u) const override { return v0_ + s_ * u; }
    PotentialEval eval(double u) const override { return {u, value(u), s_, 0.0}; }
    double third(double) const override { return 0.0; }

private:
    double v0_, s_;
};

/// V = -1/(4 u^2), the pure pole.
class PolePotential final : public Potential {
public:
    double value(double u) const override { return -0.25 / (u * u); }
    PotentialEval eval(double u) const override {
        return {u, value(u), 0.5 / (u * u * u), -1.5 / (u * u * u * u)};
    }
    double third(double u) const override { return 6.0 / std::pow(u, 5); }
    std::optional<std::pair<double, double>> pole_remainder(double) const override {
        return std::make_pair(0.0, 0.0);
    }
};

RiccatiOptions tight() {
    RiccatiOptions o = spheroidal_options();
    o.step.atol = 1e-13;
    o.step.rtol = 1e-12;
    return o;
}

// No pole step cap, for harnesses that start at u = 0.
RiccatiOptions plain() {
    RiccatiOptions o;
    o.step.atol = 1e-13;
    o.step.rtol = 1e-12;
    return o;
}

ContainmentOptions plain_containment() {
    ContainmentOptions c;
    c.riccati = plain();
    return c;
}

/// Exact solution y = z'/z of the pole equation, z = sqrt(v) (log v - i).
cplx pole_exact(double v) {
    const double L = std::log(v);
    return {0.5 / v + L / (v * (1.0 + L * L)), 1.0 / (v * (1.0 + L * L))};
}

}  // namespace

TEST_CASE("disk field identities hold pointwise") {
    auto V = std::make_shared<LinearPotential>(-20.0, 3.0);
    const double a = 0.0, b = 2.0, alpha = 0.7, T0 = 1.5;
    const DiskEstimate d = build_disk(AlphaProfile::constant(alpha), V, a, b, 1, T0);
    REQUIRE(d.samples.size() > 10);
    for (const DiskPoint& p : d.samples) {
        const double U = V->value(p.u) - alpha * alpha;
        CHECK(p.U == doctest::Approx(U).epsilon(1e-12));
        CHECK(p.sigma == doctest::Approx(std::exp(2.0 * alpha * (p.u - a))).epsilon(1e-10));
        // sigma^2 U = e^{4 alpha u} U is monotone here, so the total variation is exact.
        const double tv = std::abs(std::log(std::abs(p.sigma * p.sigma * U)) -
                                   std::log(std::abs(V->value(a) - alpha * alpha)));
        CHECK(p.T == doctest::Approx(T0 * std::exp(0.5 * tv)).epsilon(1e-10));
        CHECK(p.beta == doctest::Approx(0.5 * std::sqrt(-U) * (p.T + 1.0 / p.T)).epsilon(1e-12));
        CHECK(p.R == doctest::Approx(0.5 * std::sqrt(-U) * (p.T - 1.0 / p.T)).epsilon(1e-12));
        CHECK(p.R >= 0.0);
        CHECK(p.beta >= p.R);
        CHECK(p.m.real() == alpha);
        CHECK(p.m.imag() == p.beta);
    }
}

TEST_CASE("real Riccati solution as alpha: the disk degenerates") {
    // V = 0, alpha = 1/(1+u) solves alpha' = -alpha^2, hence U = 0.
    auto V = std::make_shared<ConstantPotential>(0.0);
    auto a = [](double u) { return 1.0 / (1.0 + u); };
    auto ap = [](double u) {
        const double x = 1.0 / (1.0 + u);
        return -x * x;
    };
    const DiskEstimate d = build_disk(AlphaProfile::custom(a, ap), V, 0.0, 1.0, 1, 1.0);
    CHECK(d.degenerate);
    for (const DiskPoint& p : d.samples) {
        CHECK(p.R == 0.0);
        CHECK(p.beta == 0.0);
    }
}

TEST_CASE("V = -E with alpha = Re y: T stays at T0") {
    const double E = 16.0, T0 = 2.0;
    auto V = std::make_shared<ConstantPotential>(-E);
    const DiskEstimate d = build_disk(AlphaProfile::constant(0.0), V, 0.0, 3.0, 1, T0);
    for (const DiskPoint& p : d.samples) {
        CHECK(p.T == doctest::Approx(T0));
        CHECK(p.beta == doctest::Approx(0.5 * 4.0 * (T0 + 1.0 / T0)));
        CHECK(p.R == doctest::Approx(0.5 * 4.0 * (T0 - 1.0 / T0)));
    }
}

TEST_CASE("U-positive and T0 < 1 are rejected") {
    auto V = std::make_shared<LinearPotential>(-1.0, 2.0);
    CHECK_THROWS_AS(build_disk(AlphaProfile::constant(0.0), V, 0.0, 1.0, 1, 1.0), SolverError);
    try {
        build_disk(AlphaProfile::constant(0.0), V, 0.0, 1.0, 1, 1.0);
    } catch (const SolverError& e) {
        CHECK(e.kind() == ErrorKind::Hypothesis);
        CHECK(std::string(e.what()).find("U-positive") != std::string::npos);
    }
    CHECK_THROWS_AS(build_disk(AlphaProfile::constant(0.0), std::make_shared<ConstantPotential>(-1.0), 0.0,
                               1.0, 1, 0.5),
                    SolverError);
}

TEST_CASE("containment: trajectory on the disk center") {
    const double E = 4.0;
    auto V = std::make_shared<ConstantPotential>(-E);
    const DiskEstimate d = build_disk(AlphaProfile::constant(0.0), V, 0.0, 2.0, 1, 1.0);
    RiccatiState s0;
    s0.y = {0.0, 2.0};
    const Trajectory t = integrate(s0, 2.0, *V, plain());
    const ContainmentReport r = certify_containment(d, t, plain_containment());
    CHECK(r.pass);
    CHECK(r.minSlack >= -1e-12);
}

TEST_CASE("containment: a start outside the disk fails at the start") {
    auto V = std::make_shared<ConstantPotential>(-4.0);
    const DiskEstimate d = build_disk(AlphaProfile::constant(0.0), V, 0.0, 2.0, 1, 1.0);
    RiccatiState s0;
    s0.y = {0.1, 2.0};
    const ContainmentReport r = certify_containment(d, integrate(s0, 2.0, *V, plain()), plain_containment());
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.startContained);
    REQUIRE(r.firstViolation.has_value());
    CHECK(*r.firstViolation == doctest::Approx(0.0));
}

TEST_CASE("containment: perturbed start inside a wider disk stays inside") {
    auto V = std::make_shared<LinearPotential>(-30.0, 5.0);
    const RiccatiState s0 = [] {
        RiccatiState s;
        s.y = {0.4, 5.0};
        return s;
    }();
    const double T0 = minimal_T0(AlphaProfile::constant(0.0), *V, 0.0, s0.y);
    CHECK(T0 >= 1.0);
    const DiskEstimate d = build_disk(AlphaProfile::constant(0.0), V, 0.0, 3.0, 1, T0 * 1.01);
    const ContainmentReport r = certify_containment(d, integrate(s0, 3.0, *V, plain()), plain_containment());
    CHECK(r.pass);
}

TEST_CASE("WKB enclosure: V = -E gives K = 0") {
    const WkbEnclosure w = wkb_enclosure(std::make_shared<ConstantPotential>(-9.0), 0.0, 1.0, 1);
    CHECK(w.K == 0.0);
    CHECK(w.T0 == 1.0);
    CHECK(w.error_bound(0.5) == 0.0);
    CHECK(w.im_lower_bound(0.5) == doctest::Approx(0.3));
}

TEST_CASE("WKB enclosure on a spheroidal semiclassical interval") {
    auto V = std::make_shared<SpheroidalPotential>(real_params(0, 50.0, 3000.0));
    const double a = 0.2, b = 1.2;
    const WkbEnclosure w = wkb_enclosure(V, a, b, 1);
    CHECK(w.K <= 1.0);
    CHECK(w.T0 == doctest::Approx(1.0 + w.K));
    const Trajectory t = integrate(init_wkb(*V, a), b, *V, tight());
    const auto [errRatio, imRatio] = w.check(t);
    CHECK(errRatio < 1.0);
    CHECK(imRatio < 1.0);
    CHECK(certify_containment(w.disk, t).pass);
    // T - 1 <= 2 e K for K <= 1.
    for (const DiskPoint& p : w.disk.samples) CHECK(p.T - 1.0 <= 2.0 * std::exp(1.0) * w.K + 1e-12);
}

TEST_CASE("WKB enclosure names the failed hypothesis") {
    try {
        wkb_enclosure(std::make_shared<ConstantPotential>(1.0), 0.0, 1.0, 1);
        FAIL("expected a hypothesis error");
    } catch (const SolverError& e) {
        CHECK(e.kind() == ErrorKind::Hypothesis);
    }
    try {
        wkb_enclosure(std::make_shared<LinearPotential>(-5.0, -1.0), 0.0, 1.0, 1);
        FAIL("expected a hypothesis error");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("monotone") != std::string::npos);
    }
}

TEST_CASE("quantum enclosure constants") {
    auto V = std::make_shared<LinearPotential>(-4.0, 1.0);
    const QuantumEnclosure q = quantum_enclosure(V, 0.0, 0.4, 1, 1.0, 1.0);
    CHECK(q.c2 == doctest::Approx(32.0 * std::exp(2.0) + 1.0).epsilon(1e-14));
    CHECK(q.c2 == doctest::Approx(237.45).epsilon(1e-4));
    CHECK(q.T0 == doctest::Approx(8.0));
    RiccatiState s0;
    s0.y = {0.0, 2.0};
    const Trajectory t = integrate(s0, 0.4, *V, plain());
    const auto [absRatio, imRatio] = q.check(t);
    CHECK(absRatio <= 1.0);
    CHECK(imRatio <= 1.0);
    CHECK(certify_containment(q.disk, t, plain_containment()).pass);
    // sqrt|V0| (b - a) = 0.8 > 0.5
    CHECK_THROWS_AS(quantum_enclosure(V, 0.0, 0.4, 1, 1.0, 0.5), SolverError);
}

TEST_CASE("required c1") {
    CHECK(required_c1(cplx(0.0, 2.0), -4.0) == doctest::Approx(1.0));
    CHECK(required_c1(cplx(0.0, 1.0), -4.0) == doctest::Approx(2.0));
    CHECK(required_c1(cplx(6.0, 2.0), -4.0) == doctest::Approx(std::sqrt(40.0) / 2.0));
}

TEST_CASE("pole enclosure around the exact pole solution") {
    auto V = std::make_shared<PolePotential>();
    const double uMax = 0.1, lo = 1e-5;
    RiccatiState s0;
    s0.u = uMax;
    s0.y = pole_exact(uMax);
    const Trajectory t = integrate(s0, lo, *V, tight());
    for (const auto& s : t.samples) CHECK(std::abs(s.y - pole_exact(s.u)) < 1e-7 * std::abs(pole_exact(s.u)));

    const double C = required_C(s0.y, V->value(uMax));
    const PoleEnclosure pe = pole_enclosure(V, lo, uMax, 0.0, C);
    CHECK(pe.Bnorm == 0.0);
    CHECK(pe.Bcond <= 0.125);
    for (double r : pe.check(t)) CHECK(r <= 1.0);
    CHECK(certify_containment(pe.disk, t).pass);

    // Closed-form integral of the Im y envelope: int dv/(v log^2 v) = -1/log v.
    const double K = 64.0 * C * C * C * (1.0 + std::log(uMax) * std::log(uMax));
    CHECK(pe.im_upper_integral(lo, uMax) ==
          doctest::Approx(K * (-1.0 / std::log(uMax) + 1.0 / std::log(lo))).epsilon(1e-12));
    // The accumulated phase over the interval lies below it.
    CHECK(std::abs(t.back().phase - t.front().phase) <= pe.im_upper_integral(lo, uMax));
}

TEST_CASE("convexity lower bound: V = 0, y0 = i") {
    const ConstantPotential V(0.0);
    RiccatiState s0;
    s0.y = {0.0, 1.0};
    const ConvexityLower c = convexity_lower_bound(integrate(s0, 4.0, V, plain()), V);
    CHECK(c.bound == doctest::Approx(1.0));
    CHECK(c.minRho == doctest::Approx(1.0));
    CHECK(c.pass);
}

TEST_CASE("convexity lower bound: V = 0, oblique start attains the minimum") {
    // rho(u) = |1 + y0 u|, minimum Im y0 / |y0| at u = -Re y0 / |y0|^2.
    const ConstantPotential V(0.0);
    RiccatiState s0;
    s0.y = {-1.0, 1.0};
    const Trajectory t = integrate(s0, 3.0, V, plain());
    const ConvexityLower c = convexity_lower_bound(t, V);
    CHECK(c.bound == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c.minRho == doctest::Approx(c.bound).epsilon(1e-4));
    CHECK(c.minRho >= c.bound * (1.0 - 1e-12));
    CHECK(c.pass);
}

TEST_CASE("convexity integral bound: V = E") {
    const ConstantPotential V(4.0);
    RiccatiState s0;
    s0.y = {10.0, 1e-3};
    const ConvexityIntegral ci = convexity_integral_bound(integrate(s0, 3.0, V, plain()), V);
    CHECK(ci.L == doctest::Approx(1.5));
    CHECK(ci.lhs <= ci.rhs);
    CHECK(ci.pass);

    RiccatiState s1 = s0;
    const Trajectory empty = integrate(s1, 0.0, V, plain());
    const ConvexityIntegral z = convexity_integral_bound(empty, V);
    CHECK(z.lhs == 0.0);
    CHECK(z.pass);
}
