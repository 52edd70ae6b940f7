#pragma once

#include <optional>
#include <vector>

#include "spheroidal/riccati.hpp"
#include "spheroidal/types.hpp"

namespace spheroidal {

struct ShootOptions {
    RiccatiOptions riccati = tight_riccati_options();
    double uEps = 1e-6;
    int seriesTerms = 3;
    double truncTol = 1e-12;
    /// k = 0 anchor: u* = min(anchorKappa / sqrt(max(mu, 1)), u+/2, pi/2).
    double anchorKappa = 4.0;

    static RiccatiOptions tight_riccati_options();
};

/// Anchor u* of the shooting scheme: the minimum of V for k != 0 (pi/2 when
/// it does not exist), a point well inside the polar well for k = 0.
double anchor_point(const ProblemParams& p, const ShootOptions& opts = {});

/// Regularized WKB data at the anchor: Im y = (V^2 + 1)^{1/4},
/// Re y = -V' V / (4 (V^2 + 1)), which tends to i sqrt|V| - V'/(4V) for
/// |V| >> 1 and keeps Im y > 0 and smooth dependence on lambda for every V.
RiccatiState anchor_state(const Potential& V, double u);

/// One phase-shooting evaluation at fixed lambda.
///
/// A complex solution z is started at the anchor and integrated forward to
/// pi/2 and backward to uEps; both directions follow the dominant solution,
/// so neither loses accuracy. At uEps, z ∝ Ys + t Yr, where r and s are the
/// log-derivatives of the regular and second Frobenius solutions, and
/// phi(uEps) - phi(0) = -arg(r - y(uEps)) exactly. The boundary-selected
/// solution is Y = Im(e^{-i alpha} z), alpha = phi(0), so Y = rho sin(phi - alpha).
struct ShotResult {
    double lambda = 0.0;
    double anchor = 0.0;
    double phase = 0.0;          ///< phi(pi/2) - phi(0)
    double dphase = 0.0;         ///< d/dlambda of `phase` (0 without sensitivity)
    double poleCorrection = 0.0; ///< phi(uEps) - phi(0)
    double poleCorrectionLambda = 0.0;
    cplx yEnd;                   ///< y at the end of the forward run
    cplx yLambdaEnd;
    bool sensitivity = false;
    Trajectory backward;         ///< anchor -> uEps, descending u
    Trajectory forward;          ///< anchor -> pi/2

    /// Samples from uEps to the end, phase shifted so that phi(0) = 0.
    std::vector<RiccatiState> merged() const;
    long steps() const { return backward.stats.accepted + forward.stats.accepted; }
};

ShotResult shoot(const ProblemParams& p, const ShootOptions& opts = {}, bool sensitivity = true,
                 std::vector<double> stops = {}, double uEnd = kHalfPi);

/// Boundary angle: phi for odd parity; phi + pi/2 - arctan(Re y / Im y) at pi/2
/// for even parity. An eigenvalue with m interior nodes has angle (m+1) pi.
double boundary_angle(const ShotResult& s, Parity par);
double boundary_angle_derivative(const ShotResult& s, Parity par);

/// phi|_0^{pi/2} at lambda.
double phase_shift(double lambda, const ProblemParams& p, Parity par, const ShootOptions& opts = {});

/// Parity-specific phase target for node count m, given the shot. Odd: (m+1) pi.
/// Even: pi/2 + arctan(Re y(pi/2)/Im y(pi/2)) + m pi.
double phase_target(const ShotResult& s, Parity par, int m);

struct EigenOptions {
    ShootOptions shoot;
    double tol = 1e-11;          ///< Newton stops when |dlambda| <= tol (1 + |lambda|)
    double acceptTol = 1e-8;     ///< record accepted when residual <= acceptTol (1 + |lambda|)
    int maxExpansions = 8;
    int maxIterations = 80;
    bool verifyNodes = true;
    bool useOracle = true;       ///< oracle estimate for the initial bracket
    std::optional<double> guess; ///< overrides the oracle estimate
};

struct EigenvalueRecord {
    int m = 0;
    Parity parity = Parity::Even;
    int k = 0;
    double omega = 0.0;
    double lambda = 0.0;
    double residual = 0.0;       ///< |F/F'| at the returned lambda (lambda units)
    double phaseResidual = 0.0;  ///< |angle - (m+1) pi|
    double dAngle = 0.0;         ///< d angle / d lambda at lambda
    double bracketLo = 0.0;
    double bracketHi = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    bool nodeCountVerified = false;
    int nodes = -1;
    std::optional<double> gapToNext;
};

EigenvalueRecord find_eigenvalue(int m, Parity par, int k, double omega, const EigenOptions& opts = {});

/// Interior zeros of Y on (0, pi/2): from phase samples, jumps of floor(phi/pi);
/// a zero sitting on pi/2 itself (odd parity) is excluded.
int count_nodes_from_phase(const std::vector<RiccatiState>& merged, double endTol = 1e-6);

/// Re-shoots at the record's lambda and counts zeros twice: from the phase and
/// from sign changes of the reconstructed Y on a grid fine enough that no cell
/// spans a phase increase of pi. Returns the count; throws if the two disagree.
int count_nodes(const EigenvalueRecord& rec, const ShootOptions& opts = {});

struct EigenfunctionSamples {
    std::vector<double> u, Y, Theta;
};

/// Y on a uniform grid of `sampleCount` points (odd; forced) spanning
/// [uEps, pi/2], normalized to int_0^{pi/2} Y^2 = 1/2 (unit norm on (0, pi)
/// after parity doubling) and positive near u = 0. Theta = Y / sqrt(sin u).
EigenfunctionSamples reconstruct_eigenfunction(const EigenvalueRecord& rec, int sampleCount = 2001,
                                               const ShootOptions& opts = {});

/// Slope of lambda_m(Omega) for large Omega predicted by the harmonic
/// approximation at the equator: 2 (2m + |k| + k + 1) for Omega > 0, both parities.
double predicted_slope(int m, int k);

struct GapScanConfig {
    int k = 0;
    std::vector<double> omegas;
    int mMin = 0;
    int mMax = 4;
    std::vector<Parity> parities{Parity::Even, Parity::Odd};
    double gamma = 1.0;
    double slopeLo = 100.0;
    double slopeHi = 200.0;
    int jobs = 1;
    EigenOptions eigen;
};

struct GapRow {
    Parity parity = Parity::Even;
    int m = 0;
    double minGap = 0.0;           ///< min over Omega of lambda_{m+1} - lambda_m
    double argminOmega = 0.0;
    int lipschitzViolations = 0;   ///< for lambda_m between adjacent grid points
    double maxLipschitzRatio = 0.0;
    std::optional<double> slope;   ///< least squares over [slopeLo, slopeHi]
    double predictedSlope = 0.0;
    std::optional<double> slopeRelError;
    bool nodesVerified = true;
};

struct GapScanResult {
    std::vector<GapRow> rows;
    /// lambda[parity][m - mMin][omega index], m up to mMax + 1.
    std::vector<std::vector<std::vector<double>>> lambdas;
    /// Smallest m0 (>= mMin) with gap_m >= gamma for every m0 <= m <= mMax on the grid.
    std::vector<std::optional<int>> empiricalN;
    int solves = 0;
};

GapScanResult gap_scan(const GapScanConfig& cfg);

}  // namespace spheroidal
