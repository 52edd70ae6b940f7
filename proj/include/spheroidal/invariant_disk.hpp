#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spheroidal/eigensolver.hpp"
#include "spheroidal/monotone.hpp"
#include "spheroidal/potential.hpp"
#include "spheroidal/riccati.hpp"
#include "spheroidal/types.hpp"

namespace spheroidal {

enum class AlphaKind { WKB, Constant, Pole, Custom };

const char* to_string(AlphaKind k);

/// Real part of the approximate Riccati solution around which the disk is
/// built. All profiles are expressed in the original coordinate u; flows
/// towards smaller u use the same formulas (see DiskEstimate).
struct AlphaProfile {
    AlphaKind kind = AlphaKind::WKB;
    double value = 0.0;   ///< Constant: alpha
    double poleAt = 0.0;  ///< Pole: location of the -1/(4 v^2) singularity
    std::function<double(double)> alpha, alphaPrime;  ///< Custom

    /// alpha = -V'/(4V).
    static AlphaProfile wkb();
    static AlphaProfile constant(double a);
    /// alpha = s (1/(2v) + log v / (v (1 + log^2 v))), v = |u - at|, s = sign(u - at):
    /// the real part of the exact solution for V = -1/(4 v^2).
    static AlphaProfile pole(double at = 0.0);
    static AlphaProfile custom(std::function<double(double)> a, std::function<double(double)> ap);
};

struct DiskPoint {
    double u = 0.0;
    double alpha = 0.0;
    double sigma = 0.0;
    double U = 0.0;
    double T = 0.0;
    double beta = 0.0;
    double R = 0.0;
    cplx m;
};

/// Invariant disk |y - m| <= R on [a, b] for the flow started at a
/// (direction +1) or at b (direction -1):
///   sigma = exp(2 int_start^u alpha), U = V - alpha^2 - alpha',
///   T = T0 exp(TV_{start..u} log|sigma^2 U| / 2),
///   beta = sqrt|U| (T + 1/T)/2, R = sqrt|U| (T - 1/T)/2, m = alpha + i beta.
/// A backward flow is the forward flow of y~ = -conj(y) in u~ = -u, which maps
/// these definitions onto themselves.
class DiskEstimate {
public:
    AlphaProfile profile;
    double a = 0.0;
    double b = 0.0;
    int direction = 1;
    double T0 = 1.0;
    bool degenerate = false;     ///< U vanishes identically: beta = R = 0
    bool tvConverged = true;     ///< Custom profiles: dense TV stable under 10x refinement
    double tvTotal = 0.0;        ///< TV log|sigma^2 U| over [a, b]
    std::vector<DiskPoint> samples;

    double start() const { return direction > 0 ? a : b; }
    DiskPoint at(double u) const;
    const Potential& potential() const { return *V_; }
    std::shared_ptr<const Potential> potential_ptr() const { return V_; }

private:
    friend DiskEstimate build_disk(const AlphaProfile&, std::shared_ptr<const Potential>, double,
                                   double, int, double, int);
    std::shared_ptr<const Potential> V_;
    bool logCoord_ = false;
    MonotonePieces gPieces_;
    // Custom profiles: tabulated primitive of alpha and cumulative TV.
    std::vector<double> grid_, prim_, cumTv_;

    double primitive(double u) const;
    double g(double u) const;
    double tv_from_start(double u) const;
};

/// Populates a disk on [a, b]. Throws a Hypothesis error ("U-positive") with
/// the first u along the flow where U > 0, and a Config error for T0 < 1.
DiskEstimate build_disk(const AlphaProfile& profile, std::shared_ptr<const Potential> V, double a,
                        double b, int direction, double T0, int sampleCount = 65);

/// Smallest T0 >= 1 for which y0 lies in the disk at the start point.
double minimal_T0(const AlphaProfile& profile, const Potential& V, double u, cplx y0);

struct ContainmentReport {
    bool pass = true;
    double minSlack = 0.0;     ///< min (R - |y - m|) / max(1, |m|)
    double minSlackU = 0.0;
    int checked = 0;
    std::optional<double> firstViolation;
    bool startContained = true;
};

struct ContainmentOptions {
    bool midpoints = true;     ///< also check re-integrated midpoints of every step
    double tol = 1e-9;         ///< admitted relative excess of |y - m| over R
    RiccatiOptions riccati = ShootOptions::tight_riccati_options();
};

/// |y(u) - m(u)| <= R(u) at every trajectory sample inside the disk interval,
/// plus midpoints obtained by re-integrating the Riccati equation from the
/// preceding sample.
ContainmentReport certify_containment(const DiskEstimate& disk, const Trajectory& traj,
                                      const ContainmentOptions& opts = {});

/// Semiclassical enclosure: alpha = -V'/(4V), T0 = 1 + K.
struct WkbEnclosure {
    double K = 0.0;
    double T0 = 1.0;
    DiskEstimate disk;
    double error_bound(double u) const;      ///< 20 sqrt|V| K
    double im_lower_bound(double u) const;   ///< sqrt|V| / 10
    /// Max over samples of |y - i sqrt|V| + V'/(4V)| / (20 sqrt|V| K) and of
    /// (sqrt|V|/10) / Im y; both must be <= 1.
    std::pair<double, double> check(const Trajectory& traj) const;
};

/// Requires V < 0, monotone increasing along the flow, and K <= 1; throws a
/// Hypothesis error naming the failed condition.
WkbEnclosure wkb_enclosure(std::shared_ptr<const Potential> V, double a, double b, int direction);

/// Quantum-regime enclosure: alpha = direction sqrt|V0| (V0 at the start),
/// T0 = 2 c1 (1 + c1)^2, c2 = 8 c1 (1 + c1)^2 e^{2 kappa} + 1.
struct QuantumEnclosure {
    double c1 = 1.0;
    double c2 = 0.0;
    double kappa = 0.0;
    double V0 = 0.0;
    double Vinf = 0.0;
    double T0 = 1.0;
    double Tmax = 0.0;
    DiskEstimate disk;
    double abs_bound() const;       ///< c2 sqrt||V||
    double im_lower_bound() const;  ///< |V0| / (c2 sqrt||V||)
    std::pair<double, double> check(const Trajectory& traj) const;
};

/// c1 = max(1, |y0|/sqrt|V0|, sqrt|V0|/Im y0).
double required_c1(cplx y0, double V0);

/// Requires V < 0 and monotone on the interval and sqrt|V0| (b - a) <= kappa.
QuantumEnclosure quantum_enclosure(std::shared_ptr<const Potential> V, double a, double b,
                                   int direction, double c1, double kappa);

/// Enclosure near a -1/(4 v^2) pole at the far end of the flow. The flow
/// starts at distance uMax from the pole and runs towards it.
struct PoleEnclosure {
    double C = 1.0;
    double uMax = 0.0;
    double poleAt = 0.0;
    double Bnorm = 0.0;
    double Bcond = 0.0;   ///< uMax^2 (1 + log^2 uMax)^2 ||B||, must be <= 1/8
    double T0 = 1.0;
    DiskEstimate disk;
    double abs_bound(double u) const;       ///< 64 C^3 / v
    double im_upper_bound(double u) const;  ///< 64 C^3 (1 + log^2 uMax) / (v log^2 v)
    double im_lower_bound(double u) const;  ///< 1 / (64 C^3 (1 + log^2 uMax) v log^2 v)
    /// Closed form of the integral of the Im y upper bound from v = lo to v = hi.
    double im_upper_integral(double lo, double hi) const;
    std::array<double, 3> check(const Trajectory& traj) const;
};

/// C for the pole lemma's initial bounds: max(1, |y0|/sqrt|V0|, sqrt|V0|/Im y0).
double required_C(cplx y0, double V0);

/// Pole at `poleAt` adjacent to the interval [a, b]; the flow starts at the
/// end farther from the pole. B = V + 1/(4 v^2) must be monotone and satisfy
/// uMax^2 (1 + log^2 uMax)^2 ||B|| <= 1/8.
PoleEnclosure pole_enclosure(std::shared_ptr<const Potential> V, double a, double b, double poleAt,
                             double C);

/// rho is measured relative to rho0 = rho(start).
struct ConvexityLower {
    double bound = 0.0;      ///< Im y0 / |y0|
    double minRho = 0.0;
    double supRatio = 0.0;   ///< max over u of sup_{start..u} rho / (rho(u) 2|y0|/Im y0)
    bool pass = false;
};

/// Requires V >= 0 and monotone increasing along the flow of the trajectory.
ConvexityLower convexity_lower_bound(const Trajectory& traj, const Potential& V);

struct ConvexityIntegral {
    double L = 0.0;
    double lhs = 0.0;        ///< int rho^2 over the segment, in units of sup rho^2
    double rhs = 0.0;        ///< L (sup rho^2 in the same units)
    double worstRatio = 0.0; ///< max over u of int_start^u rho^2 / (L sup_{start..u} rho^2)
    bool pass = false;
};

/// Requires V > 0 and monotone increasing along the flow.
ConvexityIntegral convexity_integral_bound(const Trajectory& traj, const Potential& V);

/// Samples of a trajectory restricted to [a, b], in flow order.
Trajectory restrict(const Trajectory& traj, double a, double b);

// ---- Region-level certification ----

struct RegionCertificate {
    Region region;
    std::string method;
    bool hypothesesMet = false;
    std::string hypothesisNote;
    bool lemmaOnly = false;   ///< theorem hypotheses unmet; disk uses the minimal admissible T0
    bool contained = true;    ///< disk containment (where a disk is built)
    double minSlack = 0.0;
    bool boundsHold = true;   ///< theorem or convexity bounds at all samples
    double worstBoundRatio = 0.0;  ///< max over checked bounds of actual / allowed
    int samples = 0;
    std::optional<double> K, L, c1, c2, C, T0, Bcond;
    bool certified() const { return contained && boundsHold && (hypothesesMet || lemmaOnly); }
};

struct CertifyOptions {
    PartitionConfig partition;
    std::vector<double> kappaLadder{4.0, 2.0, 1.0, 0.5};
    double delta = 1.0;       ///< K <= delta runtime check
    double epsilon = 1.0;     ///< int Im y_lambda <= epsilon runtime check
    double uEps = 1e-6;
    ContainmentOptions containment;
};

struct CertifyReport {
    ProblemParams params;
    RegionPartition partition;
    double kappa = 0.0;
    bool inRange = false;
    std::vector<RegionCertificate> regions;
    double sensitivityTotal = 0.0;   ///< int_{uEps}^{pi/2} Im y_lambda
    bool sensitivityWithinEpsilon = false;
    double reImMin = 0.0;            ///< min of Re y / Im y on [u0, pi/2]
    double phaseSeparation = 0.0;    ///< pi/2 - arctan(max(0, -reImMin))
    double gapLowerBound = 0.0;      ///< phaseSeparation / sensitivityTotal
    bool kWithinDelta = true;
    bool lWithinOmega0 = true;
    bool allCertified = false;
};

/// Partition (trying the kappa ladder), WKB start at u0, integration to both
/// ends with breakpoints as stops, and per-region enclosure checks. Throws a
/// Hypothesis error when no kappa gives a usable partition.
CertifyReport certify(const ProblemParams& p, const CertifyOptions& opts = {});

}  // namespace spheroidal
