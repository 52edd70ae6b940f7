#include "spheroidal/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spheroidal/frobenius.hpp"

namespace spheroidal {

const RiccatiState& Trajectory::nearest(double u) const {
    auto it = std::min_element(samples.begin(), samples.end(), [u](const auto& a, const auto& b) {
        return std::abs(a.u - u) < std::abs(b.u - u);
    });
    return *it;
}

RiccatiOptions spheroidal_options() {
    RiccatiOptions o;
    o.step.poleFraction = 0.5;
    return o;
}

RiccatiState init_at_singularity(const ProblemParams& p, double uEps, int seriesTerms,
                                 double truncTol) {
    if (!p.is_real()) throw config_error("init_at_singularity: real parameters required");
    if (!(uEps > 0.0) || uEps > 0.1) throw config_error("init_at_singularity: uEps must lie in (0, 0.1]");
    using D = Dual<double>;
    const double om = p.omega.real();
    FrobeniusSeries<D> fs(p.k, D(om * om), D(p.mu().real(), 1.0), seriesTerms);
    const double trunc = fs.truncation_estimate(uEps);
    if (trunc > truncTol) {
        std::ostringstream os;
        os << "Frobenius truncation estimate " << trunc << " exceeds " << truncTol
           << " at uEps=" << uEps << "; use a smaller uEps";
        throw numerical_error(os.str());
    }
    const D rl = fs.reg_logderiv(uEps);
    const D sl = fs.sing_logderiv(uEps);
    const D q = fs.ratio(uEps);  // Yr/Ys > 0
    const D one(1.0);
    const D den = one + q * q;
    const D re = (sl + q * q * rl) / den;
    const D im = q * (rl - sl) / den;

    RiccatiState s;
    s.u = uEps;
    s.y = {re.v, im.v};
    s.yLambda = {re.d, im.d};
    s.phase = std::atan(q.v);
    s.phaseLambda = q.d / den.v;
    const double ys = fs.sing_value(uEps).v;
    s.logRho = std::log(ys) + 0.5 * std::log1p(q.v * q.v);
    return s;
}

RiccatiState init_wkb(const Potential& V, double u0) {
    const PotentialEval e = V.eval(u0);
    if (!(e.V < 0.0)) {
        std::ostringstream os;
        os << "init_wkb: V(u0) = " << e.V << " is not negative at u0 = " << u0;
        throw hypothesis_error(os.str());
    }
    const double root = std::sqrt(-e.V);
    const double dl = V.dlambda();
    RiccatiState s;
    s.u = u0;
    s.y = {-e.Vp / (4.0 * e.V), root};
    s.yLambda = {e.Vp * dl / (4.0 * e.V * e.V), -dl / (2.0 * root)};
    return s;
}

RiccatiState init_wkb(const ProblemParams& p, double u0) {
    return init_wkb(SpheroidalPotential(p), u0);
}

namespace {

template <std::size_t N>
Trajectory run(const RiccatiState& s0, double uTarget, const Potential& V,
               const RiccatiOptions& opts) {
    constexpr bool sens = N == 7;
    using State = std::array<double, N>;
    if (!(s0.y.imag() > 0.0)) throw numerical_error("integrate: initial Im y must be positive");

    const double dl = V.dlambda();
    auto rhs = [&](double u, const State& x, State& dx) {
        const double a = x[0];
        const double b = std::exp(x[1]);
        const double v = V.value(u);
        dx[0] = v - a * a + b * b;
        dx[1] = -2.0 * a;
        dx[2] = b;
        dx[3] = a;
        if constexpr (sens) {
            // y_lambda' = dV/dlambda - 2 y y_lambda
            const double lr = x[4], li = x[5];
            dx[4] = dl - 2.0 * (a * lr - b * li);
            dx[5] = -2.0 * (a * li + b * lr);
            dx[6] = li;
        }
    };
    auto accept = [&](double, const State& x) {
        for (double c : x)
            if (!std::isfinite(c)) return false;
        return true;
    };

    Trajectory traj;
    traj.sensitivity = sens;
    auto observe = [&](double u, const State& x, const State&) {
        RiccatiState s;
        s.u = u;
        s.y = {x[0], std::exp(x[1])};
        s.phase = x[2];
        s.logRho = x[3];
        if constexpr (sens) {
            s.yLambda = {x[4], x[5]};
            s.phaseLambda = x[6];
        }
        if (!(s.y.imag() > 0.0) && std::isfinite(x[1]) && x[1] > -700.0) {
            std::ostringstream os;
            os << "positivity-loss: Im y <= 0 at u=" << u;
            throw numerical_error(os.str());
        }
        if (std::abs(s.y.real()) > opts.yCeiling || x[1] > std::log(opts.yCeiling)) {
            std::ostringstream os;
            os << "blow-up: |y| exceeds " << opts.yCeiling << " at u=" << u;
            throw numerical_error(os.str());
        }
        traj.samples.push_back(s);
    };

    State x{};
    x[0] = s0.y.real();
    x[1] = std::log(s0.y.imag());
    x[2] = s0.phase;
    x[3] = s0.logRho;
    if constexpr (sens) {
        x[4] = s0.yLambda.real();
        x[5] = s0.yLambda.imag();
        x[6] = s0.phaseLambda;
    }
    Dopri5<double, N> solver(opts.step);
    solver.run(rhs, s0.u, x, uTarget, accept, observe, opts.stops);
    traj.stats = solver.stats();
    return traj;
}

}  // namespace

Trajectory integrate(const RiccatiState& s0, double uTarget, const Potential& V,
                     const RiccatiOptions& opts) {
    if (opts.sensitivity) return run<7>(s0, uTarget, V, opts);
    return run<4>(s0, uTarget, V, opts);
}

double sensitivity_integral(const Trajectory& traj) {
    if (!traj.sensitivity) throw config_error("sensitivity_integral: trajectory has no sensitivity");
    const double d = traj.back().phaseLambda - traj.front().phaseLambda;
    return traj.back().u >= traj.front().u ? d : -d;
}

double sensitivity_quadrature(const Trajectory& traj, const Potential& V) {
    if (!traj.sensitivity) throw config_error("sensitivity_quadrature: trajectory has no sensitivity");
    const auto& s = traj.samples;
    const double dl = V.dlambda();
    auto f = [](const RiccatiState& r) { return r.yLambda.imag(); };
    auto df = [&](const RiccatiState& r) { return (cplx(dl, 0.0) - 2.0 * r.y * r.yLambda).imag(); };
    double fine = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double h = s[i].u - s[i - 1].u;
        fine += 0.5 * h * (f(s[i]) + f(s[i - 1])) + h * h / 12.0 * (df(s[i - 1]) - df(s[i]));
    }
    double coarse = 0.0;
    std::size_t i = 2;
    for (; i < s.size(); i += 2) {
        const double h = s[i].u - s[i - 2].u;
        coarse += 0.5 * h * (f(s[i]) + f(s[i - 2])) + h * h / 12.0 * (df(s[i - 2]) - df(s[i]));
    }
    if (i - 2 + 1 < s.size()) {
        const std::size_t j = s.size() - 1, k = i - 2;
        const double h = s[j].u - s[k].u;
        coarse += 0.5 * h * (f(s[j]) + f(s[k])) + h * h / 12.0 * (df(s[k]) - df(s[j]));
    }
    // The corrected trapezoid is fourth order.
    double est = fine + (fine - coarse) / 15.0;
    return traj.back().u >= traj.front().u ? est : -est;
}

namespace {

// Hermite-corrected trapezoid of f z^2 over the samples, where f and f' are
// supplied per sample and (z^2)' = 2 y z^2.
template <class F, class DF>
cplx weighted_z2_integral(const Trajectory& traj, F f, DF df) {
    const auto& s = traj.samples;
    const double lr0 = s.front().logRho, ph0 = s.front().phase;
    auto z2 = [&](const RiccatiState& r) {
        return std::exp(cplx(2.0 * (r.logRho - lr0), 2.0 * (r.phase - ph0)));
    };
    cplx acc = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double h = s[i].u - s[i - 1].u;
        const cplx g0 = f(s[i - 1]) * z2(s[i - 1]), g1 = f(s[i]) * z2(s[i]);
        const cplx d0 = (df(s[i - 1]) + 2.0 * s[i - 1].y * f(s[i - 1])) * z2(s[i - 1]);
        const cplx d1 = (df(s[i]) + 2.0 * s[i].y * f(s[i])) * z2(s[i]);
        acc += 0.5 * h * (g0 + g1) + h * h / 12.0 * (d0 - d1);
    }
    return acc;
}

}  // namespace

cplx ylambda_via_variation(const Trajectory& traj) {
    const auto& s = traj.samples;
    const cplx I = weighted_z2_integral(
        traj, [](const RiccatiState&) { return cplx(1.0); },
        [](const RiccatiState&) { return cplx(0.0); });
    const RiccatiState& a = s.front();
    const RiccatiState& b = s.back();
    const cplx z2b = std::exp(cplx(2.0 * (b.logRho - a.logRho), 2.0 * (b.phase - a.phase)));
    // z^2 y_l |_a^b = -int z^2, with z(a)^2 = 1 in this normalization.
    return (a.yLambda - I) / z2b;
}

cplx ylambda_via_identity(const Trajectory& traj, const Potential& V) {
    const auto& s = traj.samples;
    auto g = [&](const RiccatiState& r) {
        const double v = V.value(r.u);
        return (v - r.y * r.y) / (2.0 * r.y * r.y);
    };
    // g = V/(2y^2) - 1/2, g' = V'/(2y^2) - V y'/y^3 with y' = V - y^2.
    auto dg = [&](const RiccatiState& r) {
        const PotentialEval e = V.eval(r.u);
        const cplx yp = e.V - r.y * r.y;
        return e.Vp / (2.0 * r.y * r.y) - e.V * yp / (r.y * r.y * r.y);
    };
    const cplx I = weighted_z2_integral(traj, g, dg);
    const RiccatiState& a = s.front();
    const RiccatiState& b = s.back();
    const cplx z2b = std::exp(cplx(2.0 * (b.logRho - a.logRho), 2.0 * (b.phase - a.phase)));
    const cplx lhsA = a.yLambda + 1.0 / (2.0 * a.y);
    return (lhsA - I) / z2b - 1.0 / (2.0 * b.y);
}

}  // namespace spheroidal
