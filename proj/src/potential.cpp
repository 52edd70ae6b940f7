#include "spheroidal/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spheroidal/monotone.hpp"

namespace spheroidal {

namespace {

void require_real(const ProblemParams& p) {
    if (!p.is_real()) throw config_error("real-path potential requires real omega and lambda");
}

}  // namespace

SpheroidalPotential::SpheroidalPotential(const ProblemParams& p)
    : p_(p),
      om2_(p.omega.real() * p.omega.real()),
      c_(static_cast<double>(p.k) * p.k - 0.25),
      mu_(p.mu().real()) {
    require_real(p);
}

double SpheroidalPotential::value(double u) const {
    double s2 = std::sin(u);
    s2 *= s2;
    return om2_ * s2 + c_ / s2 - mu_;
}

PotentialEval SpheroidalPotential::eval(double u) const {
    const double s = std::sin(u), c = std::cos(u);
    const double s2 = s * s;
    PotentialEval e;
    e.u = u;
    e.V = om2_ * s2 + c_ / s2 - mu_;
    e.Vp = om2_ * 2.0 * s * c - 2.0 * c_ * c / (s2 * s);
    e.Vpp = 2.0 * om2_ * (c * c - s2) + 2.0 * c_ * (1.0 / s2 + 3.0 * c * c / (s2 * s2));
    return e;
}

double SpheroidalPotential::third(double u) const {
    const double s = std::sin(u), c = std::cos(u);
    const double s3 = s * s * s;
    return -8.0 * om2_ * s * c - 2.0 * c_ * (8.0 * c / s3 + 12.0 * c * c * c / (s3 * s * s));
}

std::optional<std::pair<double, double>> SpheroidalPotential::pole_remainder(double u) const {
    if (p_.k != 0) return std::nullopt;
    const double s = std::sin(u), c = std::cos(u);
    // q = 1/u^2 - 1/sin^2 u and q'; series below 0.1 where the difference cancels.
    double q, qp;
    if (u < 0.1) {
        const double u2 = u * u;
        q = -(1.0 / 3.0 + u2 * (1.0 / 15.0 + u2 * (2.0 / 189.0 + u2 * (1.0 / 675.0 + u2 * 2.0 / 10395.0))));
        qp = -u * (2.0 / 15.0 + u2 * (8.0 / 189.0 + u2 * (6.0 / 675.0 + u2 * 16.0 / 10395.0)));
    } else {
        q = 1.0 / (u * u) - 1.0 / (s * s);
        qp = -2.0 / (u * u * u) + 2.0 * c / (s * s * s);
    }
    return std::pair{om2_ * s * s - mu_ + 0.25 * q, 2.0 * om2_ * s * c + 0.25 * qp};
}

PotentialEval eval_potential(double u, const ProblemParams& p) {
    if (!(u > 0.0) || u > kHalfPi) throw config_error("eval_potential: u must lie in (0, pi/2]");
    return SpheroidalPotential(p).eval(u);
}

cplx potential_complex(double u, const ProblemParams& p) {
    const double s2 = std::sin(u) * std::sin(u);
    return p.omega * p.omega * s2 + (static_cast<double>(p.k) * p.k - 0.25) / s2 - p.mu();
}

const char* to_string(RegionKind k) {
    switch (k) {
        case RegionKind::Pole: return "pole";
        case RegionKind::Quantum: return "quantum";
        case RegionKind::Semiclassical: return "semiclassical";
        case RegionKind::Convex: return "convex";
    }
    return "?";
}

RegionPartition partition_regions(const ProblemParams& p, const PartitionConfig& cfg) {
    require_real(p);
    RegionPartition part;
    part.k = p.k;
    part.omega = std::abs(p.omega.real());
    part.lambda = p.lambda.real();
    part.cfg = cfg;
    const double om = part.omega;
    const double lam = part.lambda;
    part.inRange = om > cfg.Omega0 && lam > 2.0 * cfg.LambdaBig * om;
    if (!(om > 0.0)) {
        part.degenerate = true;
        part.reason = "partition requires Omega > 0";
        return part;
    }

    SpheroidalPotential pot(p);
    auto V = [&](double u) { return pot.value(u); };
    const double kappa2 = cfg.kappa * cfg.kappa;
    auto fail = [&](const std::string& why) {
        part.degenerate = true;
        if (part.reason.empty()) part.reason = why;
    };

    // Right turning point, S boundary on the right, and start of the C region.
    auto right_side = [&](double u0) {
        double uPlus = kHalfPi;
        if (V(kHalfPi) > 0.0) uPlus = bisect_root(V, u0, kHalfPi, 1e-12);
        part.uPlus = uPlus;
        auto g = [&](double u) { return std::abs(V(u)) * (uPlus - u) * (uPlus - u) - kappa2; };
        if (g(u0) > 0.0) {
            part.uPlusS = bisect_root(g, u0, uPlus, 1e-13);
        } else {
            part.uPlusS = u0;
            fail("region S: empty semiclassical region right of u0");
        }
        const double target = std::pow(om, 1.5);
        auto h = [&](double u) { return V(u) - target; };
        if (uPlus < kHalfPi && h(kHalfPi) > 0.0)
            part.uI = bisect_root(h, uPlus, kHalfPi, 1e-12);
        else
            part.uI = kHalfPi;
    };

    if (p.k != 0) {
        const double c = std::sqrt(static_cast<double>(p.k) * p.k - 0.25);
        const double s2 = c / om;
        if (s2 > 1.0) {
            fail("region S: no interior minimum of V: sin^2 u0 = sqrt(k^2-1/4)/Omega exceeds 1");
            return part;
        }
        const double u0 = std::asin(std::sqrt(s2));
        part.u0 = u0;
        if (V(u0) >= 0.0) {
            fail("region S: V(u0) >= 0: no classically allowed region");
            return part;
        }
        // V decreases on (0, u0) from +infinity.
        double lo = u0;
        while (V(lo) < 0.0 && lo > 1e-300) lo *= 0.5;
        const double uMinus = bisect_root(V, lo, u0, 1e-12);
        part.uMinus = uMinus;
        auto g = [&](double u) { return std::abs(V(u)) * (u - uMinus) * (u - uMinus) - kappa2; };
        if (g(u0) > 0.0) {
            part.uMinusS = bisect_root(g, uMinus, u0, 1e-13);
        } else {
            part.uMinusS = u0;
            fail("region S: empty semiclassical region left of u0");
        }
        right_side(u0);
    } else {
        if (!(lam > 1.0)) {
            fail("region S: k=0 partition requires lambda > 1");
            return part;
        }
        const double L = std::log(lam);
        part.uJ = 1.0 / (8.0 * std::sqrt(lam) * L * L);
        const double u0 = cfg.kappa / std::sqrt(lam);
        part.u0 = u0;
        part.u1 = 1.0 / std::sqrt(om);
        if (u0 >= kHalfPi || *part.uJ >= u0) {
            fail("region S: u0 = kappa/sqrt(lambda) is not inside (uJ, pi/2)");
            return part;
        }
        if (V(u0) >= 0.0) {
            fail("region S: V(u0) >= 0 at u0 = kappa/sqrt(lambda)");
            return part;
        }
        right_side(u0);
    }
    return part;
}

std::vector<Region> region_list(const RegionPartition& part, double uEps) {
    if (part.degenerate) throw hypothesis_error("degenerate partition: " + part.reason);
    std::vector<Region> out;
    auto add = [&](const char* name, RegionKind kind, double a, double b, int dir) {
        if (b > a) out.push_back({name, kind, a, b, dir});
    };
    const double u0 = *part.u0;
    if (part.k == 0) {
        add("P", RegionKind::Pole, uEps, *part.uJ, -1);
        add("J", RegionKind::Quantum, *part.uJ, u0, -1);
        add("S", RegionKind::Semiclassical, u0, *part.uPlusS, +1);
    } else {
        add("I-", RegionKind::Convex, uEps, *part.uMinus, -1);
        add("I-", RegionKind::Quantum, *part.uMinus, *part.uMinusS, -1);
        add("S-", RegionKind::Semiclassical, *part.uMinusS, u0, -1);
        add("S+", RegionKind::Semiclassical, u0, *part.uPlusS, +1);
    }
    add("I+", RegionKind::Quantum, *part.uPlusS, *part.uPlus, +1);
    add("I+", RegionKind::Convex, *part.uPlus, *part.uI, +1);
    add("C", RegionKind::Convex, *part.uI, kHalfPi, +1);
    return out;
}

int check_monotone_sign(double a, double b, const Potential& V, int sign) {
    auto f = [&](double u) { return V.value(u); };
    auto df = [&](double u) { return V.eval(u).Vp; };
    MonotonePieces mp = analyze_monotone(f, df, a, b, 512);
    if (mp.knots.size() > 2) {
        std::ostringstream os;
        os << "monotonicity fails on [" << a << ", " << b << "] near u=" << mp.knots[1];
        throw hypothesis_error(os.str());
    }
    if (sign < 0 && mp.sup >= 0.0) throw hypothesis_error("V is not negative on the interval");
    if (sign > 0 && mp.inf <= 0.0) throw hypothesis_error("V is not positive on the interval");
    if (sign == 0 && mp.inf < 0.0) throw hypothesis_error("V is not non-negative on the interval");
    return mp.values.back() >= mp.values.front() ? 1 : -1;
}

double compute_K(double a, double b, const Potential& V) {
    if (!(b >= a)) throw config_error("compute_K: empty interval");
    check_monotone_sign(a, b, V, -1);
    auto v2 = [&](double u) { return V.eval(u).Vpp; };
    auto v3 = [&](double u) { return V.third(u); };
    MonotonePieces pp = analyze_monotone(v2, v3, a, b);
    const double supAbs = std::max(std::abs(pp.sup), std::abs(pp.inf));
    const double vmax = std::max(V.value(a), V.value(b));

    // sup V'^2/|V|^3, with |V|^3 = -V^3 for V < 0.
    auto q = [&](double u) {
        PotentialEval e = V.eval(u);
        return -e.Vp * e.Vp / (e.V * e.V * e.V);
    };
    auto dq = [&](double u) {
        PotentialEval e = V.eval(u);
        const double v3c = e.V * e.V * e.V;
        return -2.0 * e.Vp * e.Vpp / v3c + 3.0 * e.Vp * e.Vp * e.Vp / (v3c * e.V);
    };
    MonotonePieces qp = analyze_monotone(q, dq, a, b);
    return (supAbs + pp.tv) / (vmax * vmax) + qp.sup;
}

double compute_L(double a, double b, const Potential& V, int direction) {
    if (!(b >= a)) throw config_error("compute_L: empty interval");
    if (a == b) {
        const double v = V.value(a);
        if (!(v > 0.0)) throw hypothesis_error("compute_L: V must be positive");
        return 3.0 / std::sqrt(v);
    }
    const int mono = check_monotone_sign(a, b, V, +1);
    if (mono != direction) throw hypothesis_error("compute_L: V is not increasing along the direction");
    const double d = static_cast<double>(direction);
    // Along the direction of integration the derivative is d * V'.
    auto g = [&](double u) {
        PotentialEval e = V.eval(u);
        return d * e.Vp / (e.V * e.V);
    };
    auto dg = [&](double u) {
        PotentialEval e = V.eval(u);
        return d * (e.Vpp / (e.V * e.V) - 2.0 * e.Vp * e.Vp / (e.V * e.V * e.V));
    };
    auto f = [&](double u) { return 3.0 / std::sqrt(V.value(u)) + g(u); };
    auto df = [&](double u) {
        PotentialEval e = V.eval(u);
        return -1.5 * e.Vp / (e.V * std::sqrt(e.V)) + dg(u);
    };
    MonotonePieces gp = analyze_monotone(g, dg, a, b);
    MonotonePieces fp = analyze_monotone(f, df, a, b);
    return fp.sup + gp.tv;
}

}  // namespace spheroidal
