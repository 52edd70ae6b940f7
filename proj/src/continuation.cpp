#include "spheroidal/continuation.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spheroidal/dopri5.hpp"
#include "spheroidal/dual.hpp"
#include "spheroidal/frobenius.hpp"
#include "spheroidal/oracle.hpp"

namespace spheroidal {

namespace {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

std::string fmt(cplx z) {
    std::ostringstream os;
    os.precision(10);
    os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
    return os.str();
}

CMat to_matrix(const std::vector<cplx>& a, int n) {
    CMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = a[static_cast<std::size_t>(i) * n + j];
    return m;
}

double spectral_norm(const CMat& x) {
    if (x.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(x.adjoint() * x, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

int numerical_rank(const CMat& x) {
    Eigen::SelfAdjointEigenSolver<CMat> es(x.adjoint() * x, Eigen::EigenvaluesOnly);
    // Nonzero singular values of a projector are >= 1.
    int r = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 0.25) ++r;
    return r;
}

std::vector<cplx> block_spectrum(int k, cplx omega, Parity par, int size) {
    CMat a = to_matrix(assemble_block_complex(k, omega, par, size), size);
    Eigen::ComplexEigenSolver<CMat> es(a, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + size);
    std::sort(ev.begin(), ev.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
    return ev;
}

// Leading cluster of ascending real eigenvalues: gaps <= gamma join neighbours.
int cluster_size(const std::vector<double>& ev, double gamma) {
    int last = -1;
    for (std::size_t i = 0; i + 1 < ev.size(); ++i)
        if (ev[i + 1] - ev[i] <= gamma) last = static_cast<int>(i);
    return last + 2;
}

}  // namespace

PerturbationSplit PerturbationSplit::make(double c, int k) {
    if (!(c > 0.0)) throw config_error("strip constant c must be positive");
    PerturbationSplit s;
    s.c = c;
    s.k = k;
    s.rho = 2.0 * (2.0 * (std::abs(k) + 1.0) * c + c * c);
    s.gamma = 8.0 * s.rho;
    return s;
}

ShootingValue shooting_value(cplx lambda, cplx omega, int k, Parity par, const ShootingOptions& o) {
    using D = Dual<cplx>;
    const cplx om2 = omega * omega;
    const cplx mu = lambda - 2.0 * omega * static_cast<double>(k) + 0.25;
    FrobeniusSeries<D> fs(k, D(om2), D(mu, cplx(1.0)), o.seriesTerms);
    const D z0 = fs.reg_value(o.uEps);
    const D z1 = fs.reg_deriv(o.uEps);
    const double s0 = std::abs(z0.v);
    // x = (z, z', z_lambda, z_lambda'); z'' = V z, z_lambda'' = V z_lambda - z.
    std::array<cplx, 4> x{z0.v / s0, z1.v / s0, z0.d / s0, z1.d / s0};
    const double ck = static_cast<double>(k) * k - 0.25;
    auto rhs = [&](double u, const std::array<cplx, 4>& y, std::array<cplx, 4>& dy) {
        const double sn = std::sin(u), s2 = sn * sn;
        const cplx V = om2 * s2 + ck / s2 - mu;
        dy = {y[1], V * y[0], y[3], V * y[2] - y[0]};
    };

    StepOptions so;
    so.atol = o.atol;
    so.rtol = o.rtol;
    so.poleFraction = 0.25;
    ShootingValue out;
    double sup = 1.0;
    const int segs = std::max(1, o.segments);
    for (int i = 0; i < segs; ++i) {
        const double a = o.uEps + (kHalfPi - o.uEps) * i / segs;
        const double b = i + 1 == segs ? kHalfPi : o.uEps + (kHalfPi - o.uEps) * (i + 1) / segs;
        Dopri5<cplx, 4> dp(so);
        x = dp.run(rhs, a, x, b, [](double, const std::array<cplx, 4>&) { return true; },
                   [&](double, const std::array<cplx, 4>& y, const std::array<cplx, 4>&) {
                       sup = std::max(sup, std::abs(y[0]));
                   });
        out.steps += dp.stats().accepted;
        for (auto& v : x) v /= sup;
        sup = 1.0;
    }
    if (par == Parity::Even) {
        out.value = x[1];
        out.dlambda = x[3];
    } else {
        out.value = x[0];
        out.dlambda = x[2];
    }
    return out;
}

cplx shooting_function(cplx lambda, cplx omega, int k, Parity par, const ShootingOptions& opts) {
    return shooting_value(lambda, omega, k, par, opts).value;
}

NewtonResult newton_complex(cplx guess, cplx omega, int k, Parity par, double maxStep,
                            const ShootingOptions& opts, double tol, int maxIterations) {
    NewtonResult r;
    r.lambda = guess;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= maxIterations; ++it) {
        const ShootingValue sv = shooting_value(r.lambda, omega, k, par, opts);
        r.iterations = it;
        if (sv.dlambda == cplx(0.0)) return r;
        const cplx step = sv.value / sv.dlambda;
        const double h = std::abs(step);
        if (!std::isfinite(h) || std::abs(r.lambda - step - guess) > maxStep) return r;
        r.lambda -= step;
        r.residual = h;
        const double scale = 1.0 + std::abs(r.lambda);
        // Near machine precision the step sequence stalls at the noise level.
        if (h <= tol * scale || (h <= 1e-10 * scale && h >= 0.5 * prev)) {
            r.converged = true;
            return r;
        }
        prev = h;
    }
    return r;
}

std::vector<cplx> linear_path(cplx a, cplx b, int steps) {
    if (steps < 1) throw config_error("path needs at least one step");
    std::vector<cplx> p(steps + 1);
    for (int i = 0; i <= steps; ++i) p[i] = a + (b - a) * (static_cast<double>(i) / steps);
    p.back() = b;
    return p;
}

ComplexEigenPath continue_eigenvalue(const Branch& branch, const std::vector<cplx>& omegaPath,
                                     const StripSpec& strip, const ContinuationOptions& opts) {
    if (omegaPath.empty()) throw config_error("continuation path is empty");
    if (omegaPath.front().imag() != 0.0)
        throw config_error("continuation path must start on the real axis");
    ComplexEigenPath path;
    path.branch = branch;
    path.strip = strip;
    path.split = PerturbationSplit::make(strip.c, branch.k);
    if (opts.requireStrip) {
        for (cplx om : omegaPath)
            if (!strip.contains(om))
                throw hypothesis_error("Omega = " + fmt(om) + " lies outside the strip");
    }

    const double om0 = omegaPath.front().real();
    const EigenvalueRecord rec = find_eigenvalue(branch.m, branch.parity, branch.k, om0, opts.eigen);
    if (!rec.converged) throw numerical_error("continuation: real eigenvalue did not converge");

    // Neighbouring eigenvalues at the start fix the branch-jump guard and N.
    const int oracleSize = std::max(opts.oracleSize, branch.m + 40);
    std::vector<double> real0;
    for (cplx z : block_spectrum(branch.k, om0, branch.parity, oracleSize)) real0.push_back(z.real());
    path.split.N = cluster_size(real0, path.split.gamma);
    double gap = std::numeric_limits<double>::infinity();
    if (branch.m + 1 < static_cast<int>(real0.size())) gap = real0[branch.m + 1] - real0[branch.m];
    if (branch.m > 0) gap = std::min(gap, real0[branch.m] - real0[branch.m - 1]);
    const double maxStep = 0.5 * gap;

    auto record = [&](cplx om, const NewtonResult& nr, int substeps) {
        PathSample s;
        s.omega = om;
        s.lambda = nr.lambda;
        s.newtonResidual = nr.residual;
        s.newtonIterations = nr.iterations;
        s.inStrip = strip.contains(om);
        s.stripLoad = strip.load(om);
        s.substeps = substeps;
        const auto ev = block_spectrum(branch.k, om, branch.parity, oracleSize);
        std::vector<double> d;
        for (cplx z : ev) d.push_back(std::abs(z - nr.lambda));
        std::sort(d.begin(), d.end());
        s.oracleDistance = d[0];
        s.nearestOther = d.size() > 1 ? d[1] : std::numeric_limits<double>::infinity();
        s.collision = s.nearestOther < path.split.gamma / 4.0;
        path.samples.push_back(s);
    };

    NewtonResult first = newton_complex(cplx(rec.lambda), omegaPath.front(), branch.k, branch.parity,
                                        maxStep, opts.shooting, opts.newtonTol);
    if (!first.converged) throw numerical_error("continuation: Newton failed at the real start point");
    record(omegaPath.front(), first, 1);

    cplx omA = omegaPath.front(), lamA = first.lambda, slope = 0.0;
    bool haveSlope = false;
    for (std::size_t i = 1; i < omegaPath.size(); ++i) {
        const cplx target = omegaPath[i];
        int substeps = 0;
        NewtonResult last;
        // Advance from omA to target, halving failed steps.
        std::vector<cplx> pending{target};
        int depth = 0;
        while (!pending.empty()) {
            const cplx omB = pending.back();
            const cplx pred = lamA + (haveSlope ? slope * (omB - omA) : cplx(0.0));
            NewtonResult nr = newton_complex(pred, omB, branch.k, branch.parity, maxStep, opts.shooting,
                                             opts.newtonTol);
            if (!nr.converged) {
                if (++depth > opts.maxHalvings)
                    throw numerical_error("continuation: Newton diverged near Omega = " + fmt(omB) +
                                          " after " + std::to_string(opts.maxHalvings) + " halvings");
                pending.push_back(0.5 * (omA + omB));
                continue;
            }
            if (omB != omA) {
                slope = (nr.lambda - lamA) / (omB - omA);
                haveSlope = true;
            }
            omA = omB;
            lamA = nr.lambda;
            last = nr;
            pending.pop_back();
            ++substeps;
        }
        record(target, last, substeps);
    }

    path.fittedC = 0.0;
    for (const auto& s : path.samples) {
        path.fittedC = std::max(path.fittedC, std::abs(s.lambda) / (1.0 + std::abs(s.omega)));
        if (s.collision) path.clusterRegime = true;
        if (s.omega.imag() == 0.0) path.maxImOnAxis = std::max(path.maxImOnAxis, std::abs(s.lambda.imag()));
        if (branch.n() >= 1) {
            const double e = std::abs(s.lambda) / branch.n();
            path.fittedEps = path.fittedEps ? std::min(*path.fittedEps, e) : e;
        }
    }
    return path;
}

double dlambda_domega(const Branch& branch, double omega, double h, const ContinuationOptions& opts) {
    const auto path = continue_eigenvalue(branch, {cplx(omega), cplx(omega, h)}, StripSpec{1e300}, opts);
    return path.samples.back().lambda.imag() / h;
}

HolomorphyReport verify_holomorphy(const std::vector<cplx>& lambdas, cplx center, double radius,
                                   std::optional<cplx> centerValue) {
    HolomorphyReport r;
    const int n = static_cast<int>(lambdas.size());
    if (n < 4) throw config_error("holomorphy check needs at least 4 nodes");
    r.center = center;
    r.radius = radius;
    r.nodes = n;
    r.lambdas = lambdas;
    double mx = 1.0;
    cplx integral = 0.0;
    for (int j = 0; j < n; ++j) {
        const cplx e = std::polar(1.0, 2.0 * kPi * j / n);
        r.omegas.push_back(center + radius * e);
        mx = std::max(mx, std::abs(lambdas[j]));
        integral += lambdas[j] * cplx(0.0, 1.0) * radius * e * (2.0 * kPi / n);
    }
    r.scale = mx;
    r.cauchyIntegral = std::abs(integral) / (2.0 * kPi * radius * mx);
    // Boundary values of a function holomorphic in the disk carry only
    // nonnegative Fourier modes; the Nyquist mode is ambiguous and skipped.
    double neg = 0.0;
    cplx mean = 0.0;
    for (int p = -(n - 1) / 2; p <= 0; ++p) {
        cplx a = 0.0;
        for (int j = 0; j < n; ++j) a += lambdas[j] * std::polar(1.0, -2.0 * kPi * p * j / n);
        a /= static_cast<double>(n);
        if (p < 0) neg += std::norm(a);
        else mean = a;
    }
    r.dbarResidual = std::sqrt(neg) / mx;
    if (centerValue) r.meanValueResidual = std::abs(mean - *centerValue) / mx;
    return r;
}

HolomorphyReport verify_holomorphy(const std::function<cplx(cplx)>& f, cplx center, double radius,
                                   int nodes, std::optional<cplx> centerValue) {
    std::vector<cplx> v;
    for (int j = 0; j < nodes; ++j) v.push_back(f(center + radius * std::polar(1.0, 2.0 * kPi * j / nodes)));
    return verify_holomorphy(v, center, radius, centerValue);
}

HolomorphyReport branch_holomorphy(const Branch& branch, cplx center, double radius, int nodes,
                                   const StripSpec& strip, const ContinuationOptions& opts) {
    if (nodes < 4) throw config_error("holomorphy check needs at least 4 nodes");
    if (!(radius > 0.0)) throw config_error("circle radius must be positive");
    // Real axis -> center -> first node -> around the circle.
    const double stepLen = std::min(0.05, radius / 2.0);
    std::vector<cplx> p;
    const cplx base(center.real(), 0.0);
    const int up = std::max(1, static_cast<int>(std::ceil(std::abs(center.imag()) / stepLen)));
    for (cplx z : linear_path(base, center, up)) p.push_back(z);
    const std::size_t centerIdx = p.size() - 1;
    const int out = std::max(1, static_cast<int>(std::ceil(radius / stepLen)));
    auto ray = linear_path(center, center + radius, out);
    p.insert(p.end(), ray.begin() + 1, ray.end());
    std::vector<std::size_t> nodeIdx{p.size() - 1};
    const int sub = std::max(1, static_cast<int>(std::ceil(2.0 * kPi * radius / nodes / stepLen)));
    for (int j = 1; j < nodes; ++j) {
        for (int s = 1; s <= sub; ++s) {
            const double th = 2.0 * kPi * (j - 1 + static_cast<double>(s) / sub) / nodes;
            p.push_back(center + radius * std::polar(1.0, th));
        }
        nodeIdx.push_back(p.size() - 1);
    }
    const auto path = continue_eigenvalue(branch, p, strip, opts);
    std::vector<cplx> vals;
    for (std::size_t i : nodeIdx) vals.push_back(path.samples[i].lambda);
    auto rep = verify_holomorphy(vals, center, radius, path.samples[centerIdx].lambda);
    return rep;
}

ProjectorReport projector_diagnostics(int k, cplx omega, Parity par, int n, double c,
                                      const ProjectorOptions& opts) {
    if (n < 4) throw config_error("projector diagnostics need a truncation of at least 4");
    ProjectorReport r;
    r.k = k;
    r.omega = omega;
    r.parity = par;
    r.size = n;
    r.split = PerturbationSplit::make(c, k);
    r.inStrip = StripSpec{c}.contains(omega);
    const double rho = r.split.rho;

    const CMat A = to_matrix(assemble_block_complex(k, omega, par, n), n);
    const CMat A0 = to_matrix(assemble_block_complex(k, cplx(omega.real()), par, n), n);
    r.normW = spectral_norm(A - A0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(A0.real());
    const Eigen::VectorXd e0 = es0.eigenvalues();
    const Eigen::MatrixXd V0 = es0.eigenvectors();
    r.unperturbed.assign(e0.data(), e0.data() + n);
    {
        Eigen::ComplexEigenSolver<CMat> es(A, false);
        r.perturbed.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
        std::sort(r.perturbed.begin(), r.perturbed.end(),
                  [](cplx x, cplx y) { return x.real() < y.real(); });
    }

    // Clusters of A0 eigenvalues joined by gaps <= gamma; the first is Q_0.
    std::vector<std::pair<int, int>> clusters;
    int start = 0;
    for (int i = 0; i < n; ++i) {
        if (i + 1 == n || r.unperturbed[i + 1] - r.unperturbed[i] > r.split.gamma) {
            clusters.emplace_back(start, i);
            start = i + 1;
        }
    }
    r.split.N = clusters.front().second + 1;
    r.gapConditionHolds = true;
    for (std::size_t i = 1; i < clusters.size(); ++i)
        if (clusters[i].second > clusters[i].first) r.gapConditionHolds = false;
    r.contours = static_cast<int>(clusters.size());

    // One circle per cluster, a distance rho beyond its outer eigenvalues. For
    // the leading cluster this encloses the same spectrum as the union of the
    // rho-circles whenever the gap to the next eigenvalue exceeds 2 rho.
    std::vector<cplx> centers;
    std::vector<double> radii;
    for (auto [lo, hi] : clusters) {
        centers.emplace_back(0.5 * (r.unperturbed[lo] + r.unperturbed[hi]), 0.0);
        radii.push_back(0.5 * (r.unperturbed[hi] - r.unperturbed[lo]) + rho);
    }
    r.contourClearance = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < centers.size(); ++q)
        for (cplx z : r.perturbed)
            r.contourClearance = std::min(r.contourClearance, std::abs(std::abs(z - centers[q]) - radii[q]));

    const CMat I = CMat::Identity(n, n);
    // Trapezoid rule on M nodes shifted by `offset` node spacings.
    auto quad = [&](std::size_t q, int M, double offset) {
        CMat acc = CMat::Zero(n, n);
        for (int j = 0; j < M; ++j) {
            const cplx e = std::polar(1.0, 2.0 * kPi * (j + offset) / M);
            const cplx z = centers[q] + radii[q] * e;
            acc += (radii[q] * e) * (z * I - A).partialPivLu().inverse();
        }
        return CMat(acc / static_cast<double>(M));
    };
    int M = std::max(4, opts.minNodes);
    std::vector<CMat> Q(centers.size());
    for (std::size_t q = 0; q < centers.size(); ++q) Q[q] = quad(q, M, 0.0);
    for (;;) {
        double change = 0.0;
        for (std::size_t q = 0; q < centers.size(); ++q) {
            CMat next = 0.5 * (Q[q] + quad(q, M, 0.5));
            change = std::max(change, (next - Q[q]).norm());
            Q[q] = std::move(next);
        }
        M *= 2;
        r.quadratureChange = change;
        if (change <= opts.changeTol) break;
        if (M >= opts.maxNodes) break;
    }
    r.quadratureNodes = M;

    r.ranksOk = true;
    CMat P = CMat::Zero(n, n);
    // Fixed test vectors: first basis vector, decaying coefficients, flat.
    std::vector<CVec> tests(3, CVec::Zero(n));
    tests[0](0) = 1.0;
    for (int i = 0; i < n; ++i) {
        tests[1](i) = 1.0 / ((i + 1.0) * (i + 1.0));
        tests[2](i) = 1.0;
    }
    for (auto& v : tests) v.normalize();
    r.residualTails.assign(tests.size(), {});
    for (std::size_t q = 0; q < Q.size(); ++q) {
        const CMat& Qk = Q[q];
        r.maxIdempotency = std::max(r.maxIdempotency, spectral_norm(Qk * Qk - Qk));
        const int rank = numerical_rank(Qk);
        const int expected = clusters[q].second - clusters[q].first + 1;
        if (q == 0) r.rankQ0 = rank;
        if (rank != expected) r.ranksOk = false;
        r.maxQNorm = std::max(r.maxQNorm, spectral_norm(Qk));
        r.maxOrthogonality = std::max(r.maxOrthogonality, spectral_norm(Qk - Qk.adjoint()));
        P += Qk;
        const int upto = clusters[q].second + 1;
        const Eigen::MatrixXd Vk = V0.leftCols(upto);
        const CMat P0 = (Vk * Vk.transpose()).cast<cplx>();
        r.projectorDistance.push_back(spectral_norm(P - P0));
        for (std::size_t t = 0; t < tests.size(); ++t) r.residualTails[t].push_back(((P - I) * tests[t]).norm());
    }
    r.maxProjectorDistance = *std::max_element(r.projectorDistance.begin(), r.projectorDistance.end());
    r.completeness = spectral_norm(P - I);
    r.tailsDecrease = true;
    for (const auto& tail : r.residualTails) {
        if (tail.back() > 1e-8) r.tailsDecrease = false;
        for (std::size_t i = 1; i < tail.size(); ++i)
            if (tail[i] > tail[i - 1] + 1e-10) r.tailsDecrease = false;
    }
    r.pass = r.maxIdempotency <= opts.idempotencyTol && r.ranksOk &&
             (!r.gapConditionHolds || r.maxProjectorDistance <= 0.5);
    return r;
}

}  // namespace spheroidal
