#include "spheroidal/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "spheroidal/frobenius.hpp"
#include "spheroidal/monotone.hpp"
#include "spheroidal/oracle.hpp"
#include "spheroidal/parallel.hpp"

namespace spheroidal {

RiccatiOptions ShootOptions::tight_riccati_options() {
    RiccatiOptions o = spheroidal_options();
    o.step.atol = 1e-12;
    o.step.rtol = 1e-10;
    return o;
}

double anchor_point(const ProblemParams& p, const ShootOptions& opts) {
    const double om = std::abs(p.omega_re());
    if (p.k != 0) {
        if (om == 0.0) return kHalfPi;
        const double s2 = std::sqrt(p.k * p.k - 0.25) / om;
        return s2 < 1.0 ? std::asin(std::sqrt(s2)) : kHalfPi;
    }
    const SpheroidalPotential V(p);
    const double mu = p.mu().real();
    double u = std::min(opts.anchorKappa / std::sqrt(std::max(mu, 1.0)), kHalfPi);
    if (V.value(kHalfPi) > 0.0) {
        // V increases on (0, pi/2] for k = 0; stay inside the well.
        const double lo = std::min(opts.uEps, 1e-8);
        const double up = V.value(lo) < 0.0 ? bisect_root([&](double x) { return V.value(x); }, lo, kHalfPi, 1e-14)
                                            : 20.0 * opts.uEps;
        u = std::min(u, 0.5 * up);
    }
    return std::max(u, 20.0 * opts.uEps);
}

RiccatiState anchor_state(const Potential& V, double u) {
    const PotentialEval e = V.eval(u);
    const double q = e.V * e.V + 1.0;
    const double dl = V.dlambda();
    RiccatiState s;
    s.u = u;
    s.y = {-e.Vp * e.V / (4.0 * q), std::pow(q, 0.25)};
    // d/dlambda through V only (V' does not depend on lambda).
    s.yLambda = {-e.Vp / 4.0 * dl * (1.0 - e.V * e.V) / (q * q), 0.5 * e.V * dl / std::pow(q, 0.75)};
    return s;
}

std::vector<RiccatiState> ShotResult::merged() const {
    std::vector<RiccatiState> out;
    out.reserve(backward.samples.size() + forward.samples.size());
    const double off = poleCorrection - backward.back().phase;
    const double offL = poleCorrectionLambda - backward.back().phaseLambda;
    for (auto it = backward.samples.rbegin(); it != backward.samples.rend(); ++it) {
        RiccatiState s = *it;
        s.phase += off;
        s.phaseLambda += offL;
        out.push_back(s);
    }
    for (std::size_t i = 1; i < forward.samples.size(); ++i) {
        RiccatiState s = forward.samples[i];
        s.phase += off;
        s.phaseLambda += offL;
        out.push_back(s);
    }
    return out;
}

ShotResult shoot(const ProblemParams& p, const ShootOptions& opts, bool sensitivity,
                 std::vector<double> stops, double uEnd) {
    if (!p.is_real()) throw config_error("shoot: real Omega and lambda required");
    if (!(opts.uEps > 0.0) || opts.uEps > 0.1) throw config_error("shoot: uEps must lie in (0, 0.1]");
    const SpheroidalPotential V(p);
    ShotResult r;
    r.lambda = p.lambda_re();
    r.sensitivity = sensitivity;
    r.anchor = std::min(anchor_point(p, opts), uEnd);
    const RiccatiState s0 = anchor_state(V, r.anchor);

    RiccatiOptions ro = opts.riccati;
    ro.sensitivity = sensitivity;
    std::vector<double> below, above;
    for (double x : stops) (x < r.anchor ? below : above).push_back(x);
    ro.stops = std::move(below);
    r.backward = integrate(s0, opts.uEps, V, ro);
    if (uEnd > r.anchor) {
        ro.stops = std::move(above);
        r.forward = integrate(s0, uEnd, V, ro);
    } else {
        r.forward.samples.push_back(s0);
        r.forward.sensitivity = sensitivity;
    }

    // Match with the regular Frobenius solution at uEps.
    using D = Dual<double>;
    const double om = p.omega_re();
    FrobeniusSeries<D> fs(p.k, D(om * om), D(p.mu().real(), 1.0), opts.seriesTerms);
    const double trunc = fs.truncation_estimate(opts.uEps);
    if (trunc > opts.truncTol) {
        std::ostringstream os;
        os << "Frobenius truncation estimate " << trunc << " exceeds " << opts.truncTol
           << " at uEps=" << opts.uEps << "; use a smaller uEps";
        throw numerical_error(os.str());
    }
    const D rl = fs.reg_logderiv(opts.uEps);
    const RiccatiState& b = r.backward.back();
    const cplx diff = rl.v - b.y;
    r.poleCorrection = -std::arg(diff);
    if (sensitivity) r.poleCorrectionLambda = -((rl.d - b.yLambda) / diff).imag();

    const RiccatiState& e = r.forward.back();
    r.phase = e.phase - b.phase + r.poleCorrection;
    r.yEnd = e.y;
    if (sensitivity) {
        r.dphase = e.phaseLambda - b.phaseLambda + r.poleCorrectionLambda;
        r.yLambdaEnd = e.yLambda;
    }
    return r;
}

double boundary_angle(const ShotResult& s, Parity par) {
    if (par == Parity::Odd) return s.phase;
    // arg z'(pi/2) = phi + arg y; atan2 copes with Im y underflowing to zero.
    return s.phase + std::atan2(s.yEnd.imag(), s.yEnd.real());
}

double boundary_angle_derivative(const ShotResult& s, Parity par) {
    if (par == Parity::Odd) return s.dphase;
    return s.dphase + (s.yLambdaEnd / s.yEnd).imag();
}

double phase_shift(double lambda, const ProblemParams& p, Parity, const ShootOptions& opts) {
    return shoot(p.with_lambda(lambda), opts, false).phase;
}

double phase_target(const ShotResult& s, Parity par, int m) {
    if (par == Parity::Odd) return (m + 1) * kPi;
    return kHalfPi + (kHalfPi - std::atan2(s.yEnd.imag(), s.yEnd.real())) + m * kPi;
}

namespace {

// Degree of the Legendre function reached by branch m at Omega = 0.
int legendre_degree(int m, Parity par, int k) { return std::abs(k) + 2 * m + (par == Parity::Odd ? 1 : 0); }

struct NodeCounts {
    int fromPhase = -1;
    int fromSign = -1;
};

int count_from_phase(const std::vector<RiccatiState>& s, double endTol) {
    const double end = s.back().phase;
    // Crossings of j pi strictly inside (0, pi/2); one within endTol of the
    // final phase is the boundary zero itself.
    return std::max(0, static_cast<int>(std::floor((end - endTol) / kPi)));
}

int count_from_sign(const std::vector<RiccatiState>& s, double endTol) {
    const double end = s.back().phase;
    int n = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double a = std::sin(s[i - 1].phase), b = std::sin(s[i].phase);
        if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) {
            // Cells span less than pi of phase, so the crossed multiple of pi is
            // the one just below phi_i; drop the boundary zero.
            const double crossing = std::floor(s[i].phase / kPi) * kPi;
            if (end - crossing > endTol) ++n;
        }
    }
    return n;
}

// Stops that split every sample interval into cells with a phase
// increase of at most `maxDphi`.
std::vector<double> refining_stops(const std::vector<RiccatiState>& s, double maxDphi) {
    std::vector<double> stops;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double dphi = s[i].phase - s[i - 1].phase;
        const int cells = static_cast<int>(std::ceil(dphi / maxDphi));
        for (int c = 1; c < cells; ++c)
            stops.push_back(s[i - 1].u + (s[i].u - s[i - 1].u) * c / static_cast<double>(cells));
    }
    return stops;
}

NodeCounts node_counts(const ProblemParams& p, const std::vector<RiccatiState>& coarse,
                       const ShootOptions& opts) {
    NodeCounts c;
    c.fromPhase = count_from_phase(coarse, 1e-6);
    const ShotResult fine = shoot(p, opts, false, refining_stops(coarse, 0.5));
    c.fromSign = count_from_sign(fine.merged(), 1e-6);
    return c;
}

}  // namespace

int count_nodes_from_phase(const std::vector<RiccatiState>& merged, double endTol) {
    return count_from_phase(merged, endTol);
}

int count_nodes(const EigenvalueRecord& rec, const ShootOptions& opts) {
    const ProblemParams p = real_params(rec.k, rec.omega, rec.lambda);
    const ShotResult coarse = shoot(p, opts, false);
    const NodeCounts c = node_counts(p, coarse.merged(), opts);
    if (c.fromPhase != c.fromSign) {
        std::ostringstream os;
        os << "count_nodes: phase count " << c.fromPhase << " differs from sign count " << c.fromSign;
        throw numerical_error(os.str());
    }
    return c.fromPhase;
}

EigenvalueRecord find_eigenvalue(int m, Parity par, int k, double omega, const EigenOptions& o) {
    if (m < 0) throw config_error("find_eigenvalue: node count must be non-negative");
    EigenvalueRecord rec;
    rec.m = m;
    rec.parity = par;
    rec.k = k;
    rec.omega = omega;

    double guess;
    if (o.guess) {
        guess = *o.guess;
    } else if (o.useOracle) {
        guess = oracle_eigenvalue(k, omega, par, m);
    } else {
        const int l = legendre_degree(m, par, k);
        guess = l * (l + 1.0) + 2.0 * omega * k + 0.5 * omega * omega;
    }

    const double target = (m + 1) * kPi;
    const ProblemParams base = real_params(k, omega, 0.0);
    struct Eval {
        double lam = 0.0, f = 0.0, df = 0.0;
        ShotResult shot;
    };
    auto F = [&](double lam) {
        Eval e;
        e.lam = lam;
        e.shot = shoot(base.with_lambda(lam), o.shoot, true);
        e.f = boundary_angle(e.shot, par) - target;
        e.df = boundary_angle_derivative(e.shot, par);
        ++rec.evaluations;
        return e;
    };

    // Bracket: the sign of F is that of (interior zeros in (0, pi/2]) - m - 1/2,
    // which is monotone in lambda by Sturm comparison.
    double delta = std::max(1.0, 0.01 * std::abs(guess));
    Eval lo = F(guess - delta), hi = F(guess + delta);
    int expansions = 0;
    while (lo.f > 0.0) {
        if (expansions++ >= o.maxExpansions) throw numerical_error("bracket-not-found (below)");
        hi = lo;
        delta *= 2.0;
        lo = F(lo.lam - delta);
    }
    while (hi.f < 0.0) {
        if (expansions++ >= o.maxExpansions) throw numerical_error("bracket-not-found (above)");
        lo = hi;
        delta *= 2.0;
        hi = F(hi.lam + delta);
    }

    double x = guess;
    if (!(x > lo.lam && x < hi.lam)) x = lo.lam - lo.f * (hi.lam - lo.lam) / (hi.f - lo.f);
    Eval cur = F(x);
    double prevStep = std::numeric_limits<double>::infinity();
    double polish = 0.0;
    for (int it = 1; it <= o.maxIterations; ++it) {
        rec.iterations = it;
        if (cur.f <= 0.0)
            lo = cur;
        else
            hi = cur;
        const double scale = 1.0 + std::abs(cur.lam);
        const double step = cur.df > 0.0 ? -cur.f / cur.df : std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(step)) {
            // Converged, or at the noise floor of the phase where Newton stops
            // contracting; either way the last step is a valid polish.
            const bool small = std::abs(step) <= o.tol * scale;
            const bool stalled = it >= 3 && std::abs(step) <= o.acceptTol * scale && std::abs(step) > 0.5 * prevStep;
            if (small || stalled) {
                polish = step;
                break;
            }
        }
        if (hi.lam - lo.lam <= o.tol * scale) break;
        double xn = cur.lam + step;
        if (!std::isfinite(xn) || !(xn > lo.lam && xn < hi.lam)) xn = 0.5 * (lo.lam + hi.lam);
        prevStep = std::isfinite(step) ? std::abs(step) : prevStep;
        cur = F(xn);
    }

    rec.lambda = cur.lam + polish;
    rec.phaseResidual = std::abs(cur.f);
    rec.dAngle = cur.df;
    rec.residual = cur.df > 0.0 ? std::abs(cur.f / cur.df) : std::numeric_limits<double>::infinity();
    rec.bracketLo = std::min(lo.lam, rec.lambda);
    rec.bracketHi = std::max(hi.lam, rec.lambda);
    if (!(cur.df > 0.0)) {
        std::ostringstream os;
        os << "non-monotone phase: d(angle)/dlambda = " << cur.df << " at lambda = " << cur.lam;
        throw numerical_error(os.str());
    }
    rec.converged = rec.residual <= o.acceptTol * (1.0 + std::abs(rec.lambda));
    if (!rec.converged) {
        std::ostringstream os;
        os << "eigenvalue iteration did not converge: m=" << m << " residual " << rec.residual;
        throw numerical_error(os.str());
    }
    if (o.verifyNodes) {
        const NodeCounts c = node_counts(base.with_lambda(rec.lambda), cur.shot.merged(), o.shoot);
        rec.nodes = c.fromSign;
        rec.nodeCountVerified = c.fromPhase == m && c.fromSign == m;
    }
    return rec;
}

EigenfunctionSamples reconstruct_eigenfunction(const EigenvalueRecord& rec, int sampleCount,
                                               const ShootOptions& opts) {
    if (sampleCount < 3) throw config_error("reconstruct_eigenfunction: need at least 3 samples");
    if (sampleCount % 2 == 0) ++sampleCount;
    const ProblemParams p = real_params(rec.k, rec.omega, rec.lambda);
    const SpheroidalPotential V(p);
    const double a = opts.uEps, b = kHalfPi;
    const double h = (b - a) / (sampleCount - 1);
    std::vector<double> grid(sampleCount);
    for (int i = 0; i < sampleCount; ++i) grid[i] = a + h * i;
    grid.back() = b;

    // Matching point: the equatorial turning point when V(pi/2) > 0, where the
    // solution continued from u = 0 stops being accurate; else pi/2 itself.
    double um = b;
    if (V.value(b) > 0.0 && V.value(a * 10.0) < 0.0) {
        um = bisect_root([&](double u) { return V.value(u); }, a * 10.0, b, 1e-13);
    } else if (V.value(b) > 0.0) {
        // V never negative near the pole: take the point of minimal V.
        const auto mp = analyze_monotone([&](double u) { return V.value(u); },
                                         [&](double u) { return V.eval(u).Vp; }, a * 10.0, b);
        um = mp.knots.size() > 2 ? mp.knots[1] : b;
    }

    std::vector<double> leftStops;
    for (double g : grid)
        if (g > a && g < um) leftStops.push_back(g);
    const ShotResult shot = shoot(p, opts, false, leftStops, um);
    Trajectory left;
    left.samples = shot.merged();
    Trajectory right;
    if (um < b) {
        // z(pi/2) chosen so that Im z satisfies the parity condition at pi/2.
        RiccatiState r0;
        r0.u = b;
        r0.y = cplx(0.0, 1.0);
        r0.phase = rec.parity == Parity::Odd ? 0.0 : kHalfPi;
        RiccatiOptions rr = opts.riccati;
        rr.sensitivity = false;
        rr.step.poleFraction = 0.0;
        for (double g : grid)
            if (g > um && g < b) rr.stops.push_back(g);
        right = integrate(r0, um, V, rr);
    }

    auto value = [](const RiccatiState& s, double lr0) { return std::exp(s.logRho - lr0) * std::sin(s.phase); };
    auto deriv = [](const RiccatiState& s, double lr0) {
        const cplx z = std::exp(cplx(s.logRho - lr0, s.phase));
        return (s.y * z).imag();
    };

    // Values at grid points, each side scaled by its own log-amplitude at um.
    std::vector<double> Y(sampleCount, 0.0);
    const double lrL = left.back().logRho;
    auto fill = [&](const Trajectory& t, double lr0, double scale) {
        for (const auto& s : t.samples) {
            // Samples land exactly on stops; match by equality.
            auto it = std::lower_bound(grid.begin(), grid.end(), s.u);
            if (it != grid.end() && *it == s.u) Y[it - grid.begin()] = scale * value(s, lr0);
        }
    };
    fill(left, lrL, 1.0);
    if (um < b) {
        const RiccatiState& lm = left.back();
        const RiccatiState& rm = right.back();
        const double lrR = rm.logRho;
        const double yl = value(lm, lrL), dl = deriv(lm, lrL);
        const double yr = value(rm, lrR), dr = deriv(rm, lrR);
        const double c = (yl * yr + dl * dr) / (yr * yr + dr * dr);
        fill(right, lrR, c);
        auto it = std::lower_bound(grid.begin(), grid.end(), um);
        if (it != grid.end() && *it == um) Y[it - grid.begin()] = yl;
    }

    // Simpson on the uniform grid; the [0, uEps] piece is O(uEps^2).
    double norm = 0.0;
    for (int i = 0; i < sampleCount; ++i) {
        const double w = (i == 0 || i == sampleCount - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        norm += w * Y[i] * Y[i];
    }
    norm *= h / 3.0;
    double scale = std::sqrt(0.5 / norm);
    std::size_t first = 1;
    while (first < Y.size() && Y[first] == 0.0) ++first;
    if (first < Y.size() && Y[first] < 0.0) scale = -scale;

    EigenfunctionSamples out;
    out.u = grid;
    out.Y.resize(sampleCount);
    out.Theta.resize(sampleCount);
    for (int i = 0; i < sampleCount; ++i) {
        out.Y[i] = scale * Y[i];
        out.Theta[i] = out.Y[i] / std::sqrt(std::sin(grid[i]));
    }
    return out;
}

double predicted_slope(int m, int k) { return 2.0 * (2.0 * m + std::abs(k) + k + 1.0); }

GapScanResult gap_scan(const GapScanConfig& cfg) {
    if (cfg.omegas.empty()) throw config_error("gap_scan: empty Omega grid");
    if (cfg.mMin < 0 || cfg.mMax < cfg.mMin) throw config_error("gap_scan: invalid node range");
    const int nm = cfg.mMax - cfg.mMin + 2;  // through mMax + 1
    const std::size_t nO = cfg.omegas.size();
    const std::size_t nP = cfg.parities.size();

    GapScanResult res;
    res.lambdas.assign(nP, std::vector<std::vector<double>>(nm, std::vector<double>(nO, 0.0)));
    std::vector<std::vector<std::vector<char>>> nodesOk(
        nP, std::vector<std::vector<char>>(nm, std::vector<char>(nO, 1)));

    parallel_for(nP * nO, cfg.jobs, [&](std::size_t task) {
        const std::size_t ip = task / nO, io = task % nO;
        const Parity par = cfg.parities[ip];
        const double om = cfg.omegas[io];
        const OracleResult orc = oracle_eigenvalues(cfg.k, om, par, cfg.mMax + 2);
        for (int j = 0; j < nm; ++j) {
            const int m = cfg.mMin + j;
            EigenOptions eo = cfg.eigen;
            eo.guess = orc.values[m];
            const EigenvalueRecord r = find_eigenvalue(m, par, cfg.k, om, eo);
            res.lambdas[ip][j][io] = r.lambda;
            nodesOk[ip][j][io] = (!eo.verifyNodes || r.nodeCountVerified) ? 1 : 0;
        }
    });
    res.solves = static_cast<int>(nP * nO * nm);

    res.empiricalN.assign(nP, std::nullopt);
    for (std::size_t ip = 0; ip < nP; ++ip) {
        std::vector<double> minGaps;
        for (int j = 0; j + 1 < nm; ++j) {
            GapRow row;
            row.parity = cfg.parities[ip];
            row.m = cfg.mMin + j;
            row.predictedSlope = predicted_slope(row.m, cfg.k);
            const auto& lm = res.lambdas[ip][j];
            const auto& ln = res.lambdas[ip][j + 1];
            row.minGap = std::numeric_limits<double>::infinity();
            for (std::size_t io = 0; io < nO; ++io) {
                const double g = ln[io] - lm[io];
                if (g < row.minGap) {
                    row.minGap = g;
                    row.argminOmega = cfg.omegas[io];
                }
                row.nodesVerified = row.nodesVerified && nodesOk[ip][j][io];
            }
            for (std::size_t io = 0; io + 1 < nO; ++io) {
                const double o1 = cfg.omegas[io], o2 = cfg.omegas[io + 1];
                const double bound = std::abs(o1 - o2) * (std::abs(o1) + std::abs(o2) + 2.0 * std::abs(cfg.k));
                const double diff = std::abs(lm[io] - lm[io + 1]);
                const double slack = 1e-8 * (1.0 + std::abs(lm[io]));
                if (bound > 0.0) row.maxLipschitzRatio = std::max(row.maxLipschitzRatio, diff / bound);
                if (diff > bound + slack) ++row.lipschitzViolations;
            }
            // Least-squares slope over the fitting window.
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int n = 0;
            for (std::size_t io = 0; io < nO; ++io) {
                const double om = cfg.omegas[io];
                if (om < cfg.slopeLo || om > cfg.slopeHi) continue;
                sx += om;
                sy += lm[io];
                sxx += om * om;
                sxy += om * lm[io];
                ++n;
            }
            if (n >= 2 && n * sxx - sx * sx > 0.0) {
                row.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
                row.slopeRelError = std::abs(*row.slope - row.predictedSlope) / row.predictedSlope;
            }
            minGaps.push_back(row.minGap);
            res.rows.push_back(row);
        }
        // Empirical N(gamma): every branch from m0 on keeps its gap above gamma.
        int m0 = -1;
        for (int j = static_cast<int>(minGaps.size()) - 1; j >= 0; --j) {
            if (minGaps[j] >= cfg.gamma)
                m0 = cfg.mMin + j;
            else
                break;
        }
        if (m0 >= 0) res.empiricalN[ip] = m0;
    }
    return res;
}

}  // namespace spheroidal
