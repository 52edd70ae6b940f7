#include "spheroidal/invariant_disk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spheroidal {

const char* to_string(AlphaKind k) {
    switch (k) {
        case AlphaKind::WKB: return "wkb";
        case AlphaKind::Constant: return "constant";
        case AlphaKind::Pole: return "pole";
        case AlphaKind::Custom: return "custom";
    }
    return "?";
}

AlphaProfile AlphaProfile::wkb() { return {}; }

AlphaProfile AlphaProfile::constant(double a) {
    AlphaProfile p;
    p.kind = AlphaKind::Constant;
    p.value = a;
    return p;
}

AlphaProfile AlphaProfile::pole(double at) {
    AlphaProfile p;
    p.kind = AlphaKind::Pole;
    p.poleAt = at;
    return p;
}

AlphaProfile AlphaProfile::custom(std::function<double(double)> a, std::function<double(double)> ap) {
    AlphaProfile p;
    p.kind = AlphaKind::Custom;
    p.alpha = std::move(a);
    p.alphaPrime = std::move(ap);
    return p;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Value with first and second derivative.
struct Jet {
    double v, d1, d2;
};

Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
Jet operator*(Jet a, Jet b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
Jet inv(Jet b) {
    const double r = 1.0 / b.v;
    return {r, -b.d1 * r * r, -b.d2 * r * r + 2.0 * b.d1 * b.d1 * r * r * r};
}
Jet jlog(Jet b) { return {std::log(b.v), b.d1 / b.v, b.d2 / b.v - b.d1 * b.d1 / (b.v * b.v)}; }
Jet cnst(double c) { return {c, 0.0, 0.0}; }

struct AlphaJet {
    double a, ap, app;
};

// f(v) = 1/(2v) + log v / (v (1 + log^2 v)) = (1/2) d/dv log(v (1 + log^2 v)).
AlphaJet pole_f(double v) {
    const Jet x{v, 1.0, 0.0};
    const Jet L = jlog(x);
    const Jet f = inv(cnst(2.0) * x) + L * inv(x * (cnst(1.0) + L * L));
    return {f.v, f.d1, f.d2};
}

AlphaJet alpha_jet(const AlphaProfile& pr, const Potential& V, double u) {
    switch (pr.kind) {
        case AlphaKind::WKB: {
            const PotentialEval e = V.eval(u);
            const double v3 = V.third(u);
            const double v = e.V, v2 = v * v;
            return {-e.Vp / (4.0 * v), -e.Vpp / (4.0 * v) + e.Vp * e.Vp / (4.0 * v2),
                    -v3 / (4.0 * v) + 3.0 * e.Vp * e.Vpp / (4.0 * v2) - e.Vp * e.Vp * e.Vp / (2.0 * v2 * v)};
        }
        case AlphaKind::Constant:
            return {pr.value, 0.0, 0.0};
        case AlphaKind::Pole: {
            const double s = u >= pr.poleAt ? 1.0 : -1.0;
            const AlphaJet f = pole_f(std::abs(u - pr.poleAt));
            return {s * f.a, f.ap, s * f.app};
        }
        case AlphaKind::Custom: {
            const double h = 1e-6 * std::max(1.0, std::abs(u));
            return {pr.alpha(u), pr.alphaPrime(u), (pr.alphaPrime(u + h) - pr.alphaPrime(u - h)) / (2.0 * h)};
        }
    }
    return {0.0, 0.0, 0.0};
}

double U_of(const AlphaProfile& pr, const Potential& V, double u) {
    const AlphaJet j = alpha_jet(pr, V, u);
    return V.value(u) - j.a * j.a - j.ap;
}

double Up_of(const AlphaProfile& pr, const Potential& V, double u) {
    const AlphaJet j = alpha_jet(pr, V, u);
    return V.eval(u).Vp - 2.0 * j.a * j.ap - j.app;
}

// Coordinate in which TV and sign analysis are carried out. For the pole
// profile t = +-log|u - at|, increasing in u, which resolves the 1/v scale.
struct Coord {
    bool log = false;
    double at = 0.0;
    double s = 1.0;
    double to(double u) const {
        if (!log) return u;
        return s > 0 ? std::log(u - at) : -std::log(at - u);
    }
    double from(double t) const {
        if (!log) return t;
        return s > 0 ? at + std::exp(t) : at - std::exp(-t);
    }
    double dudt(double t) const { return log ? std::abs(from(t) - at) : 1.0; }
};

Coord coord_for(const AlphaProfile& pr, double a, double b) {
    Coord c;
    if (pr.kind != AlphaKind::Pole) return c;
    if (pr.poleAt > a && pr.poleAt < b) throw config_error("pole profile: pole lies inside the interval");
    c.log = true;
    c.at = pr.poleAt;
    c.s = pr.poleAt <= a ? 1.0 : -1.0;
    return c;
}

double interp(const std::vector<double>& x, const std::vector<double>& y, double u) {
    if (u <= x.front()) return y.front();
    if (u >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double t = (u - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + t * (y[i] - y[i - 1]);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

bool inside(double u, double a, double b) {
    const double tol = 1e-12 * std::max(1.0, std::abs(b));
    return u >= a - tol && u <= b + tol;
}

// Rethrows monotonicity/sign failures with a context prefix.
int monotone_sign(const char* who, double a, double b, const Potential& V, int sign) {
    try {
        return check_monotone_sign(a, b, V, sign);
    } catch (const SolverError& e) {
        throw hypothesis_error(std::string(who) + ": " + e.what());
    }
}

}  // namespace

double DiskEstimate::primitive(double u) const {
    switch (profile.kind) {
        case AlphaKind::WKB: return -0.25 * std::log(std::abs(V_->value(u)));
        case AlphaKind::Constant: return profile.value * u;
        case AlphaKind::Pole: {
            const double v = std::abs(u - profile.poleAt);
            const double L = std::log(v);
            return 0.5 * std::log(v * (1.0 + L * L));
        }
        case AlphaKind::Custom: return interp(grid_, prim_, u);
    }
    return 0.0;
}

double DiskEstimate::g(double u) const {
    return 4.0 * primitive(u) + std::log(std::abs(U_of(profile, *V_, u)));
}

double DiskEstimate::tv_from_start(double u) const {
    if (degenerate) return 0.0;
    if (profile.kind == AlphaKind::Custom) {
        const double c = interp(grid_, cumTv_, u);
        return direction > 0 ? c : cumTv_.back() - c;
    }
    const Coord c = coord_for(profile, a, b);
    auto gt = [&](double t) { return g(c.from(t)); };
    const double x = c.to(std::clamp(u, a, b));
    return direction > 0 ? gPieces_.variation_to(x, gt) : gPieces_.variation_from(x, gt);
}

DiskPoint DiskEstimate::at(double u) const {
    DiskPoint d;
    d.u = u;
    const AlphaJet j = alpha_jet(profile, *V_, u);
    d.alpha = j.a;
    d.sigma = std::exp(2.0 * (primitive(u) - primitive(start())));
    if (degenerate) {
        d.T = T0;
        d.m = {j.a, 0.0};
        return d;
    }
    d.U = V_->value(u) - j.a * j.a - j.ap;
    d.T = T0 * std::exp(0.5 * tv_from_start(u));
    const double s = std::sqrt(std::abs(d.U));
    d.beta = 0.5 * s * (d.T + 1.0 / d.T);
    d.R = 0.5 * s * (d.T - 1.0 / d.T);
    d.m = {d.alpha, d.beta};
    return d;
}

DiskEstimate build_disk(const AlphaProfile& profile, std::shared_ptr<const Potential> V, double a,
                        double b, int direction, double T0, int sampleCount) {
    if (!V) throw config_error("build_disk: no potential");
    if (!(b > a)) throw config_error("build_disk: empty interval");
    if (!(T0 >= 1.0)) throw config_error("build_disk: T0 must be at least 1");
    if (direction != 1 && direction != -1) throw config_error("build_disk: direction must be +-1");
    if (profile.kind == AlphaKind::Custom && (!profile.alpha || !profile.alphaPrime))
        throw config_error("build_disk: custom profile needs alpha and alpha'");

    DiskEstimate d;
    d.profile = profile;
    d.a = a;
    d.b = b;
    d.direction = direction;
    d.T0 = T0;
    d.V_ = std::move(V);
    const Potential& pot = *d.V_;
    const Coord c = coord_for(profile, a, b);
    d.logCoord_ = c.log;
    const double ta = c.to(a), tb = c.to(b);

    // Identically vanishing U: alpha solves the real Riccati equation.
    {
        double maxU = 0.0, scale = 1.0;
        for (int i = 0; i <= 256; ++i) {
            const double u = c.from(ta + (tb - ta) * i / 256.0);
            maxU = std::max(maxU, std::abs(U_of(profile, pot, u)));
            scale = std::max(scale, std::abs(pot.value(u)));
        }
        d.degenerate = maxU <= 1e-12 * scale;
    }

    auto report_positive = [&](double uBad, double Ubad) {
        std::ostringstream os;
        os << "U-positive: U = " << Ubad << " > 0 at u = " << fmt(uBad) << " (" << to_string(profile.kind)
           << " profile on [" << fmt(a) << ", " << fmt(b) << "])";
        throw hypothesis_error(os.str());
    };
    auto first_positive = [&](int n) -> std::optional<double> {
        for (int i = 0; i <= n; ++i) {
            const double f = static_cast<double>(i) / n;
            const double t = direction > 0 ? ta + (tb - ta) * f : tb - (tb - ta) * f;
            const double u = c.from(t);
            if (U_of(profile, pot, u) > 0.0) return u;
        }
        return std::nullopt;
    };

    if (profile.kind == AlphaKind::Custom) {
        const int fine = 20000;
        d.grid_.resize(fine + 1);
        d.prim_.assign(fine + 1, 0.0);
        d.cumTv_.assign(fine + 1, 0.0);
        std::vector<double> al(fine + 1), logU(fine + 1);
        for (int i = 0; i <= fine; ++i) {
            const double u = a + (b - a) * i / fine;
            d.grid_[i] = u;
            al[i] = profile.alpha(u);
            const double U = pot.value(u) - al[i] * al[i] - profile.alphaPrime(u);
            if (U > 0.0 && !d.degenerate) {
                auto fp = first_positive(fine);
                report_positive(fp.value_or(u), U);
            }
            logU[i] = std::log(std::abs(U));
        }
        for (int i = 1; i <= fine; ++i)
            d.prim_[i] = d.prim_[i - 1] + 0.5 * (d.grid_[i] - d.grid_[i - 1]) * (al[i] + al[i - 1]);
        if (!d.degenerate) {
            double coarse = 0.0;
            std::vector<double> gv(fine + 1);
            for (int i = 0; i <= fine; ++i) gv[i] = 4.0 * d.prim_[i] + logU[i];
            for (int i = 1; i <= fine; ++i) d.cumTv_[i] = d.cumTv_[i - 1] + std::abs(gv[i] - gv[i - 1]);
            for (int i = 10; i <= fine; i += 10) coarse += std::abs(gv[i] - gv[i - 10]);
            d.tvTotal = d.cumTv_.back();
            d.tvConverged = std::abs(d.tvTotal - coarse) <= 1e-3 * d.tvTotal + 1e-12;
        }
    } else if (!d.degenerate) {
        auto Ut = [&](double t) { return U_of(profile, pot, c.from(t)); };
        auto dUt = [&](double t) { return Up_of(profile, pot, c.from(t)) * c.dudt(t); };
        const MonotonePieces up = analyze_monotone(Ut, dUt, ta, tb, 1024);
        if (up.sup > 0.0) {
            auto fp = first_positive(8192);
            std::size_t i = static_cast<std::size_t>(std::max_element(up.values.begin(), up.values.end()) - up.values.begin());
            report_positive(fp.value_or(c.from(up.knots[i])), up.sup);
        }
        auto gt = [&](double t) { return d.g(c.from(t)); };
        auto dgt = [&](double t) {
            const double u = c.from(t);
            const AlphaJet j = alpha_jet(profile, pot, u);
            return (4.0 * j.a + Up_of(profile, pot, u) / U_of(profile, pot, u)) * c.dudt(t);
        };
        d.gPieces_ = analyze_monotone(gt, dgt, ta, tb, 1024);
        d.tvTotal = d.gPieces_.tv;
    }

    sampleCount = std::max(sampleCount, 2);
    d.samples.reserve(sampleCount);
    for (int i = 0; i < sampleCount; ++i) {
        const double t = ta + (tb - ta) * i / (sampleCount - 1);
        d.samples.push_back(d.at(i + 1 == sampleCount ? b : (i == 0 ? a : c.from(t))));
    }
    return d;
}

double minimal_T0(const AlphaProfile& profile, const Potential& V, double u, cplx y0) {
    const AlphaJet j = alpha_jet(profile, V, u);
    const double U = V.value(u) - j.a * j.a - j.ap;
    if (!(U < 0.0)) throw hypothesis_error("minimal_T0: U is not negative at the start point");
    const double x = y0.real() - j.a, eta = y0.imag(), s = std::sqrt(-U);
    if (!(eta > 0.0)) return kInf;
    // |y - m| <= R  <=>  x^2 + eta^2 + s^2 <= eta s (T + 1/T).
    const double q = std::max(2.0, (x * x + eta * eta + s * s) / (eta * s));
    return std::max(1.0, 0.5 * (q + std::sqrt(q * q - 4.0)));
}

ContainmentReport certify_containment(const DiskEstimate& disk, const Trajectory& traj,
                                      const ContainmentOptions& opts) {
    ContainmentReport rep;
    rep.minSlack = kInf;
    RiccatiOptions ro = opts.riccati;
    ro.sensitivity = false;
    ro.stops.clear();
    const Potential& V = disk.potential();

    auto check = [&](double u, cplx y) {
        const DiskPoint dp = disk.at(u);
        const double scale = std::max(1.0, std::abs(dp.m));
        const double slack = (dp.R - std::abs(y - dp.m)) / scale;
        ++rep.checked;
        if (slack < rep.minSlack) {
            rep.minSlack = slack;
            rep.minSlackU = u;
        }
        if (slack < -opts.tol) {
            rep.pass = false;
            if (!rep.firstViolation) rep.firstViolation = u;
        }
        return slack;
    };

    const auto& s = traj.samples;
    bool first = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!inside(s[i].u, disk.a, disk.b)) continue;
        const double slack = check(std::clamp(s[i].u, disk.a, disk.b), s[i].y);
        if (first) {
            rep.startContained = slack >= -opts.tol;
            first = false;
        }
        if (opts.midpoints && i + 1 < s.size() && inside(s[i + 1].u, disk.a, disk.b)) {
            const double mid = 0.5 * (s[i].u + s[i + 1].u);
            if (mid != s[i].u) {
                const Trajectory t = integrate(s[i], mid, V, ro);
                check(mid, t.back().y);
            }
        }
    }
    if (rep.checked == 0) throw config_error("certify_containment: trajectory does not meet the disk interval");
    return rep;
}

// ---- semiclassical ----

double WkbEnclosure::error_bound(double u) const {
    return 20.0 * std::sqrt(std::abs(disk.potential().value(u))) * K;
}

double WkbEnclosure::im_lower_bound(double u) const {
    return std::sqrt(std::abs(disk.potential().value(u))) / 10.0;
}

std::pair<double, double> WkbEnclosure::check(const Trajectory& traj) const {
    double r1 = 0.0, r2 = 0.0;
    for (const auto& s : traj.samples) {
        if (!inside(s.u, disk.a, disk.b)) continue;
        const PotentialEval e = disk.potential().eval(s.u);
        const double root = std::sqrt(std::abs(e.V));
        const double dev = std::abs(s.y - cplx(0.0, root) + e.Vp / (4.0 * e.V));
        const double allowed = 20.0 * root * K;
        r1 = std::max(r1, allowed > 0.0 ? dev / allowed : (dev <= 1e-12 * root ? 0.0 : kInf));
        r2 = std::max(r2, (root / 10.0) / s.y.imag());
    }
    return {r1, r2};
}

WkbEnclosure wkb_enclosure(std::shared_ptr<const Potential> V, double a, double b, int direction) {
    if (!(b > a)) throw config_error("wkb_enclosure: empty interval");
    const int mono = monotone_sign("WKB enclosure (negativity/monotonicity)", a, b, *V, -1);
    if (mono != direction) throw hypothesis_error("WKB enclosure: V is not monotone increasing along the flow");
    WkbEnclosure w;
    w.K = compute_K(a, b, *V);
    if (!(w.K <= 1.0)) throw hypothesis_error("WKB enclosure: K = " + fmt(w.K) + " exceeds 1");
    w.T0 = 1.0 + w.K;
    w.disk = build_disk(AlphaProfile::wkb(), std::move(V), a, b, direction, w.T0);
    return w;
}

// ---- quantum ----

double QuantumEnclosure::abs_bound() const { return c2 * std::sqrt(Vinf); }
double QuantumEnclosure::im_lower_bound() const { return std::abs(V0) / (c2 * std::sqrt(Vinf)); }

std::pair<double, double> QuantumEnclosure::check(const Trajectory& traj) const {
    double r1 = 0.0, r2 = 0.0;
    for (const auto& s : traj.samples) {
        if (!inside(s.u, disk.a, disk.b)) continue;
        r1 = std::max(r1, std::abs(s.y) / abs_bound());
        r2 = std::max(r2, im_lower_bound() / s.y.imag());
    }
    return {r1, r2};
}

double required_c1(cplx y0, double V0) {
    const double r = std::sqrt(std::abs(V0));
    return std::max({1.0, std::abs(y0) / r, r / y0.imag()});
}

QuantumEnclosure quantum_enclosure(std::shared_ptr<const Potential> V, double a, double b,
                                   int direction, double c1, double kappa) {
    if (!(b > a)) throw config_error("quantum_enclosure: empty interval");
    if (!(c1 >= 1.0)) throw config_error("quantum_enclosure: c1 must be at least 1");
    const double start = direction > 0 ? a : b;
    {
        // V < 0 on the half-open interval; V may vanish at the far end.
        auto v = [&](double u) { return V->value(u); };
        auto dv = [&](double u) { return V->eval(u).Vp; };
        const MonotonePieces mp = analyze_monotone(v, dv, a, b, 512);
        if (mp.knots.size() > 2) throw hypothesis_error("quantum enclosure: V is not monotone on the interval");
        const double vStart = V->value(start), vEnd = V->value(direction > 0 ? b : a);
        if (!(vStart < 0.0) || vEnd > 1e-9 * std::abs(vStart))
            throw hypothesis_error("quantum enclosure: V is not negative on the interval");
    }
    QuantumEnclosure q;
    q.c1 = c1;
    q.kappa = kappa;
    q.V0 = V->value(start);
    const double reach = std::sqrt(std::abs(q.V0)) * (b - a);
    if (reach > kappa * (1.0 + 1e-12))
        throw hypothesis_error("quantum enclosure: sqrt|V0| (b - a) = " + fmt(reach) + " exceeds kappa = " + fmt(kappa));
    q.Vinf = std::max(std::abs(V->value(a)), std::abs(V->value(b)));
    const double w = c1 * (1.0 + c1) * (1.0 + c1);
    q.T0 = 2.0 * w;
    q.Tmax = 4.0 * q.T0 * std::exp(2.0 * kappa) * std::sqrt(q.Vinf / std::abs(q.V0));
    q.c2 = 8.0 * w * std::exp(2.0 * kappa) + 1.0;
    q.disk = build_disk(AlphaProfile::constant(direction * std::sqrt(std::abs(q.V0))), std::move(V), a, b,
                        direction, q.T0);
    return q;
}

// ---- pole ----

namespace {
double log_factor(double uMax) {
    const double L = std::log(uMax);
    return 1.0 + L * L;
}
}  // namespace

double PoleEnclosure::abs_bound(double u) const { return 64.0 * C * C * C / std::abs(u - poleAt); }

double PoleEnclosure::im_upper_bound(double u) const {
    const double v = std::abs(u - poleAt), lv = std::log(v);
    return 64.0 * C * C * C * log_factor(uMax) / (v * lv * lv);
}

double PoleEnclosure::im_lower_bound(double u) const {
    const double v = std::abs(u - poleAt), lv = std::log(v);
    return 1.0 / (64.0 * C * C * C * log_factor(uMax) * v * lv * lv);
}

double PoleEnclosure::im_upper_integral(double lo, double hi) const {
    // int dv / (v log^2 v) = -1 / log v
    return 64.0 * C * C * C * log_factor(uMax) * (1.0 / std::log(lo) - 1.0 / std::log(hi));
}

std::array<double, 3> PoleEnclosure::check(const Trajectory& traj) const {
    std::array<double, 3> r{0.0, 0.0, 0.0};
    for (const auto& s : traj.samples) {
        if (!inside(s.u, disk.a, disk.b)) continue;
        r[0] = std::max(r[0], std::abs(s.y) / abs_bound(s.u));
        r[1] = std::max(r[1], s.y.imag() / im_upper_bound(s.u));
        r[2] = std::max(r[2], im_lower_bound(s.u) / s.y.imag());
    }
    return r;
}

double required_C(cplx y0, double V0) { return required_c1(y0, V0); }

PoleEnclosure pole_enclosure(std::shared_ptr<const Potential> V, double a, double b, double poleAt,
                             double C) {
    if (!(b > a)) throw config_error("pole_enclosure: empty interval");
    if (!(C >= 1.0)) throw config_error("pole_enclosure: C must be at least 1");
    const AlphaProfile prof = AlphaProfile::pole(poleAt);
    const Coord c = coord_for(prof, a, b);
    const bool left = poleAt <= a;
    PoleEnclosure pe;
    pe.C = C;
    pe.poleAt = poleAt;
    pe.uMax = left ? b - poleAt : poleAt - a;
    if (!(pe.uMax < 1.0)) throw hypothesis_error("pole enclosure: the interval must lie within distance 1 of the pole");

    const Potential& pot = *V;
    const bool exact = poleAt == 0.0 && pot.pole_remainder(b).has_value();
    auto B = [&](double u) {
        if (exact) return pot.pole_remainder(u)->first;
        const double v = std::abs(u - poleAt);
        return pot.value(u) + 0.25 / (v * v);
    };
    auto Bp = [&](double u) {
        if (exact) return pot.pole_remainder(u)->second;
        const double v = std::abs(u - poleAt);
        return pot.eval(u).Vp - c.s * 0.5 / (v * v * v);
    };
    auto Bt = [&](double t) { return B(c.from(t)); };
    auto dBt = [&](double t) { return Bp(c.from(t)) * c.dudt(t); };
    const MonotonePieces bp = analyze_monotone(Bt, dBt, c.to(a), c.to(b), 1024);
    if (bp.knots.size() > 2)
        throw hypothesis_error("pole enclosure: B = V + 1/(4 v^2) is not monotone (turns at u = " +
                               fmt(c.from(bp.knots[1])) + ")");
    pe.Bnorm = std::max(std::abs(bp.sup), std::abs(bp.inf));
    pe.Bcond = pe.uMax * pe.uMax * log_factor(pe.uMax) * log_factor(pe.uMax) * pe.Bnorm;
    if (pe.Bcond > 0.125)
        throw hypothesis_error("pole enclosure: uMax^2 (1 + log^2 uMax)^2 ||B|| = " + fmt(pe.Bcond) + " exceeds 1/8");
    pe.T0 = 2.0 * C * (1.0 + C) * (1.0 + C) * log_factor(pe.uMax);
    pe.disk = build_disk(prof, std::move(V), a, b, left ? -1 : 1, pe.T0);
    return pe;
}

// ---- convexity ----

namespace {

struct FlowInfo {
    double lo, hi;
    int dir;
};

FlowInfo flow_info(const Trajectory& traj) {
    if (traj.samples.empty()) throw config_error("convexity: empty trajectory");
    const double u0 = traj.front().u, u1 = traj.back().u;
    return {std::min(u0, u1), std::max(u0, u1), u1 >= u0 ? 1 : -1};
}

}  // namespace

ConvexityLower convexity_lower_bound(const Trajectory& traj, const Potential& V) {
    const FlowInfo f = flow_info(traj);
    if (f.hi > f.lo) {
        auto v = [&](double u) { return V.value(u); };
        auto dv = [&](double u) { return V.eval(u).Vp; };
        const MonotonePieces mp = analyze_monotone(v, dv, f.lo, f.hi, 512);
        if (mp.knots.size() > 2) throw hypothesis_error("convexity lower bound: V is not monotone");
        if (mp.inf < -1e-9 * std::max(1.0, std::abs(mp.sup)))
            throw hypothesis_error("convexity lower bound: V is negative on the segment");
        const int mono = mp.values.back() >= mp.values.front() ? 1 : -1;
        if (mono != f.dir) throw hypothesis_error("convexity lower bound: V is not increasing along the flow");
    }
    ConvexityLower r;
    const RiccatiState& s0 = traj.front();
    r.bound = s0.y.imag() / std::abs(s0.y);
    const double logSupFactor = std::log(2.0 * std::abs(s0.y) / s0.y.imag());
    double minLog = 0.0, runSup = 0.0, worst = -kInf;
    for (const auto& s : traj.samples) {
        const double l = s.logRho - s0.logRho;
        minLog = std::min(minLog, l);
        runSup = std::max(runSup, l);
        worst = std::max(worst, runSup - l - logSupFactor);
    }
    r.minRho = std::exp(minLog);
    r.supRatio = std::exp(worst);
    r.pass = r.minRho >= r.bound * (1.0 - 1e-9) && r.supRatio <= 1.0 + 1e-9;
    return r;
}

ConvexityIntegral convexity_integral_bound(const Trajectory& traj, const Potential& V) {
    const FlowInfo f = flow_info(traj);
    ConvexityIntegral r;
    r.L = compute_L(f.lo, f.hi, V, f.dir);
    // Gauss-Legendre nodes on [0, 1].
    static const double gx[5] = {0.04691007703066802, 0.2307653449471585, 0.5, 0.7692346550528415,
                                 0.9530899229693320};
    static const double gw[5] = {0.1184634425280945, 0.2393143352496832, 0.2844444444444444,
                                 0.2393143352496832, 0.1184634425280945};
    const auto& s = traj.samples;
    // Running integral of rho^2 e^{-2M}, M the running max of log rho.
    double M = s.front().logRho, S = 0.0, worst = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double l0 = s[i - 1].logRho, l1 = s[i].logRho;
        const double h = s[i].u - s[i - 1].u;
        const double d0 = s[i - 1].y.real() * h, d1 = s[i].y.real() * h;
        const double Mn = std::max({M, l0, l1});
        S *= std::exp(2.0 * (M - Mn));
        M = Mn;
        double step = 0.0;
        for (int q = 0; q < 5; ++q) {
            const double t = gx[q], t2 = t * t, t3 = t2 * t;
            const double l = (2 * t3 - 3 * t2 + 1) * l0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * l1 +
                             (t3 - t2) * d1;
            step += gw[q] * std::exp(2.0 * (l - M));
        }
        S += std::abs(h) * step;
        worst = std::max(worst, S / r.L);
    }
    r.lhs = S;
    r.rhs = r.L;
    r.worstRatio = worst;
    r.pass = worst <= 1.0;
    return r;
}

Trajectory restrict(const Trajectory& traj, double a, double b) {
    Trajectory out;
    out.stats = traj.stats;
    out.sensitivity = traj.sensitivity;
    for (const auto& s : traj.samples)
        if (inside(s.u, a, b)) out.samples.push_back(s);
    return out;
}

// ---- region-level certification ----

namespace {

struct Chosen {
    RegionPartition part;
    std::vector<Region> regions;
    double kappa;
};

Chosen choose_partition(const ProblemParams& p, const CertifyOptions& opts, const Potential& pot) {
    std::optional<Chosen> fallback;
    std::string lastReason = "empty kappa ladder";
    for (double kappa : opts.kappaLadder) {
        PartitionConfig cfg = opts.partition;
        cfg.kappa = kappa;
        RegionPartition part = partition_regions(p, cfg);
        if (part.degenerate) {
            lastReason = part.reason;
            continue;
        }
        Chosen c{part, region_list(part, opts.uEps), kappa};
        bool allSmall = true;
        for (const auto& r : c.regions) {
            if (r.kind != RegionKind::Semiclassical) continue;
            try {
                if (!(compute_K(r.a, r.b, pot) <= 1.0)) allSmall = false;
            } catch (const SolverError&) {
                allSmall = false;
            }
        }
        if (allSmall) return c;
        if (!fallback) fallback = c;
    }
    if (fallback) return *fallback;
    throw hypothesis_error("certify: no usable region partition (" + lastReason + ")");
}

void set_disk_result(RegionCertificate& rc, const DiskEstimate& disk, const Trajectory& seg,
                     const ContainmentOptions& copts) {
    const ContainmentReport cr = certify_containment(disk, seg, copts);
    rc.contained = cr.pass;
    rc.minSlack = cr.minSlack;
    rc.T0 = disk.T0;
    if (!cr.startContained) rc.hypothesisNote += (rc.hypothesisNote.empty() ? "" : "; ") + std::string("start outside disk");
}

}  // namespace

CertifyReport certify(const ProblemParams& p, const CertifyOptions& opts) {
    if (!p.is_real()) throw config_error("certify: real parameters required");
    auto pot = std::make_shared<SpheroidalPotential>(p);
    CertifyReport rep;
    rep.params = p;
    const Chosen ch = choose_partition(p, opts, *pot);
    rep.partition = ch.part;
    rep.kappa = ch.kappa;
    rep.inRange = ch.part.inRange;

    std::vector<double> stops;
    for (const auto& r : ch.regions) {
        stops.push_back(r.a);
        stops.push_back(r.b);
    }
    RiccatiOptions ro = opts.containment.riccati;
    ro.sensitivity = true;
    ro.stops = stops;
    const double u0 = *ch.part.u0;
    const RiccatiState s0 = init_wkb(*pot, u0);
    const Trajectory bwd = integrate(s0, opts.uEps, *pot, ro);
    const Trajectory fwd = integrate(s0, kHalfPi, *pot, ro);

    for (const auto& region : ch.regions) {
        RegionCertificate rc;
        rc.region = region;
        const Trajectory seg = restrict(region.direction < 0 ? bwd : fwd, region.a, region.b);
        rc.samples = static_cast<int>(seg.samples.size());
        if (seg.samples.empty()) {
            rc.hypothesisNote = "no trajectory samples in region";
            rc.contained = false;
            rep.regions.push_back(rc);
            continue;
        }
        const cplx y0 = seg.front().y;
        const double V0 = pot->value(region.start());
        try {
            switch (region.kind) {
                case RegionKind::Semiclassical: {
                    rc.method = "wkb";
                    try {
                        const WkbEnclosure w = wkb_enclosure(pot, region.a, region.b, region.direction);
                        rc.K = w.K;
                        rc.hypothesesMet = true;
                        rep.kWithinDelta = rep.kWithinDelta && w.K <= opts.delta;
                        set_disk_result(rc, w.disk, seg, opts.containment);
                        const auto [r1, r2] = w.check(seg);
                        rc.worstBoundRatio = std::max(r1, r2);
                        rc.boundsHold = r1 <= 1.0 && r2 <= 1.0;
                    } catch (const SolverError& e) {
                        if (e.kind() != ErrorKind::Hypothesis) throw;
                        rc.hypothesisNote = e.what();
                        rep.kWithinDelta = false;
                        try {
                            rc.K = compute_K(region.a, region.b, *pot);
                        } catch (const SolverError&) {
                        }
                        // Lemma-level disk with the WKB profile and the smallest
                        // admissible T0; the theorem bounds are not asserted.
                        const double T0 = std::max(1.0 + rc.K.value_or(0.0),
                                                   minimal_T0(AlphaProfile::wkb(), *pot, region.start(), y0) *
                                                       (1.0 + 1e-9));
                        const DiskEstimate d = build_disk(AlphaProfile::wkb(), pot, region.a, region.b,
                                                          region.direction, T0);
                        rc.lemmaOnly = true;
                        set_disk_result(rc, d, seg, opts.containment);
                    }
                    break;
                }
                case RegionKind::Quantum: {
                    rc.method = "quantum";
                    const double c1 = required_c1(y0, V0);
                    const double kappa = std::sqrt(std::abs(V0)) * region.length();
                    const QuantumEnclosure q =
                        quantum_enclosure(pot, region.a, region.b, region.direction, c1, kappa);
                    rc.c1 = c1;
                    rc.c2 = q.c2;
                    rc.hypothesesMet = true;
                    set_disk_result(rc, q.disk, seg, opts.containment);
                    const auto [r1, r2] = q.check(seg);
                    rc.worstBoundRatio = std::max(r1, r2);
                    rc.boundsHold = r1 <= 1.0 && r2 <= 1.0;
                    break;
                }
                case RegionKind::Pole: {
                    rc.method = "pole";
                    const double C = required_C(y0, V0);
                    const PoleEnclosure pe = pole_enclosure(pot, region.a, region.b, 0.0, C);
                    rc.C = C;
                    rc.Bcond = pe.Bcond;
                    rc.hypothesesMet = true;
                    set_disk_result(rc, pe.disk, seg, opts.containment);
                    const auto r = pe.check(seg);
                    rc.worstBoundRatio = std::max({r[0], r[1], r[2]});
                    rc.boundsHold = rc.worstBoundRatio <= 1.0;
                    break;
                }
                case RegionKind::Convex: {
                    rc.method = "convexity";
                    const ConvexityLower lo = convexity_lower_bound(seg, *pot);
                    rc.hypothesesMet = true;
                    rc.boundsHold = lo.pass;
                    rc.worstBoundRatio = std::max(lo.bound / lo.minRho, lo.supRatio);
                    if (region.name == "C") {
                        const ConvexityIntegral ci = convexity_integral_bound(seg, *pot);
                        rc.L = ci.L;
                        rc.boundsHold = rc.boundsHold && ci.pass;
                        rc.worstBoundRatio = std::max(rc.worstBoundRatio, ci.worstRatio);
                        rep.lWithinOmega0 = ci.L <= 3.0 / std::sqrt(opts.partition.Omega0);
                    }
                    break;
                }
            }
        } catch (const SolverError& e) {
            if (e.kind() != ErrorKind::Hypothesis) throw;
            rc.hypothesesMet = false;
            rc.lemmaOnly = false;
            rc.hypothesisNote = e.what();
        }
        rep.regions.push_back(rc);
    }

    rep.sensitivityTotal = sensitivity_integral(fwd) - sensitivity_integral(bwd);
    rep.sensitivityWithinEpsilon = rep.sensitivityTotal <= opts.epsilon;
    double reIm = kInf;
    for (const auto& s : fwd.samples) reIm = std::min(reIm, s.y.real() / s.y.imag());
    rep.reImMin = reIm;
    rep.phaseSeparation = 0.5 * kPi - std::atan(std::max(0.0, -reIm));
    rep.gapLowerBound = rep.phaseSeparation / rep.sensitivityTotal;
    rep.allCertified = !rep.regions.empty() &&
                       std::all_of(rep.regions.begin(), rep.regions.end(),
                                   [](const RegionCertificate& r) { return r.certified(); });
    return rep;
}

}  // namespace spheroidal
