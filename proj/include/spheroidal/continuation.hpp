#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "spheroidal/eigensolver.hpp"
#include "spheroidal/types.hpp"

namespace spheroidal {

/// The neighbourhood |Im Omega| < c / (1 + |Re Omega|) of the real axis.
struct StripSpec {
    double c = 1.0;

    bool contains(cplx omega) const {
        return std::abs(omega.imag()) < c / (1.0 + std::abs(omega.real()));
    }
    /// |Im Omega| (1 + |Re Omega|) / c; below 1 inside the strip.
    double load(cplx omega) const { return std::abs(omega.imag()) * (1.0 + std::abs(omega.real())) / c; }
};

/// Splitting A = A0 + W with A0 built from Re Omega and
/// W = 2i Im Omega (Re Omega sin^2 + k) - (Im Omega)^2 sin^2.
struct PerturbationSplit {
    double c = 0.0;
    int k = 0;
    double rho = 0.0;    ///< 2 (2 (|k| + 1) c + c^2), so |W| <= rho / 2
    double gamma = 0.0;  ///< 8 rho
    int N = 1;           ///< size of the leading cluster (gaps <= gamma)

    static PerturbationSplit make(double c, int k);
};

struct Branch {
    int m = 0;
    Parity parity = Parity::Even;
    int k = 0;

    /// Index among all eigenvalues of the full problem: 2m (even), 2m + 1 (odd).
    int n() const { return parity == Parity::Even ? 2 * m : 2 * m + 1; }
};

struct ShootingOptions {
    double uEps = 1e-6;
    int seriesTerms = 3;
    double atol = 1e-14;
    double rtol = 1e-12;
    int segments = 32;   ///< renormalization points between uEps and pi/2
};

/// Boundary defect of the regular solution of z'' = V z with complex
/// (lambda, Omega): z'(pi/2) for even parity, z(pi/2) for odd, in units of
/// sup |z| over the integration samples. `dlambda` is the derivative with the
/// normalization held fixed, so value/dlambda is a Newton step.
struct ShootingValue {
    cplx value;
    cplx dlambda;
    long steps = 0;
};

ShootingValue shooting_value(cplx lambda, cplx omega, int k, Parity par,
                             const ShootingOptions& opts = {});

cplx shooting_function(cplx lambda, cplx omega, int k, Parity par, const ShootingOptions& opts = {});

struct NewtonResult {
    cplx lambda;
    double residual = 0.0;   ///< |F/F'| at the returned lambda
    int iterations = 0;
    bool converged = false;
};

/// Newton on the shooting function from `guess`; steps longer than maxStep
/// count as divergence.
NewtonResult newton_complex(cplx guess, cplx omega, int k, Parity par, double maxStep,
                            const ShootingOptions& opts = {}, double tol = 1e-12,
                            int maxIterations = 40);

struct PathSample {
    cplx omega;
    cplx lambda;
    double newtonResidual = 0.0;
    int newtonIterations = 0;
    bool inStrip = true;
    double stripLoad = 0.0;
    /// Distance to the nearest other eigenvalue of the complex truncated block.
    double nearestOther = 0.0;
    /// |lambda - nearest eigenvalue of the truncated block|.
    double oracleDistance = 0.0;
    bool collision = false;   ///< nearestOther < gamma / 4
    int substeps = 1;
};

struct ComplexEigenPath {
    Branch branch;
    StripSpec strip;
    PerturbationSplit split;
    std::vector<PathSample> samples;
    bool clusterRegime = false;       ///< any sample flagged as a near-collision
    double fittedC = 0.0;             ///< max |lambda| / (1 + |Omega|)
    std::optional<double> fittedEps;  ///< min |lambda| / n (n >= 1)
    double maxImOnAxis = 0.0;         ///< max |Im lambda| over samples with Im Omega = 0
};

struct ContinuationOptions {
    ShootingOptions shooting;
    EigenOptions eigen;
    double newtonTol = 1e-12;
    int maxHalvings = 12;
    int oracleSize = 80;      ///< truncated complex block for collision detection
    bool requireStrip = false;
};

/// Continues the branch along omegaPath (the first point must be real).
/// Each step uses linear extrapolation from the last two points and Newton
/// on the shooting function; a failed step is retried over two halves.
ComplexEigenPath continue_eigenvalue(const Branch& branch, const std::vector<cplx>& omegaPath,
                                     const StripSpec& strip, const ContinuationOptions& opts = {});

/// Straight segment from a to b with `steps` steps (steps + 1 points).
std::vector<cplx> linear_path(cplx a, cplx b, int steps);

/// dlambda/dOmega at real Omega by the complex step Im lambda(Omega + i h) / h.
double dlambda_domega(const Branch& branch, double omega, double h = 1e-4,
                      const ContinuationOptions& opts = {});

struct HolomorphyReport {
    cplx center;
    double radius = 0.0;
    int nodes = 0;
    std::vector<cplx> omegas, lambdas;
    double cauchyIntegral = 0.0;  ///< |sum lambda dOmega| / (2 pi r scale)
    double dbarResidual = 0.0;    ///< l2 norm of negative Fourier modes / scale
    std::optional<double> meanValueResidual;  ///< |mean - lambda(center)| / scale
    double scale = 1.0;           ///< max(1, max |lambda|)
};

/// Samples f on `nodes` equispaced points of the circle and reports the
/// discrete Cauchy integral and the anti-holomorphic Fourier content.
HolomorphyReport verify_holomorphy(const std::function<cplx(cplx)>& f, cplx center, double radius,
                                   int nodes = 16, std::optional<cplx> centerValue = std::nullopt);

/// Same from precomputed samples on the circle (nodes in angular order from 0).
HolomorphyReport verify_holomorphy(const std::vector<cplx>& lambdas, cplx center, double radius,
                                   std::optional<cplx> centerValue = std::nullopt);

/// Lambda on a circle around `center`, each node reached by continuation
/// along the ray from Re center and then around the circle.
HolomorphyReport branch_holomorphy(const Branch& branch, cplx center, double radius, int nodes,
                                   const StripSpec& strip, const ContinuationOptions& opts = {});

struct ProjectorReport {
    int k = 0;
    cplx omega;
    Parity parity = Parity::Even;
    int size = 0;
    PerturbationSplit split;
    bool inStrip = true;
    double normW = 0.0;                  ///< spectral norm of the truncated W
    std::vector<double> unperturbed;     ///< eigenvalues of A0 (ascending)
    std::vector<cplx> perturbed;         ///< eigenvalues of A, sorted by real part
    int contours = 0;                    ///< Q_0 plus every separated eigenvalue
    /// min over contours and eigenvalues of A of the distance to the contour.
    double contourClearance = 0.0;
    int quadratureNodes = 0;             ///< final trapezoid nodes per contour
    double quadratureChange = 0.0;       ///< last doubling change
    double maxIdempotency = 0.0;         ///< max_k ||Q_k^2 - Q_k||
    int rankQ0 = 0;
    bool ranksOk = false;                ///< rank Q_0 = N, rank Q_k = 1
    std::vector<double> projectorDistance;  ///< ||P_K - P_K^0|| per K
    bool gapConditionHolds = false;      ///< gaps beyond the cluster >= gamma
    double maxProjectorDistance = 0.0;
    double completeness = 0.0;           ///< ||sum_k Q_k - I||
    double maxQNorm = 0.0;
    double maxOrthogonality = 0.0;       ///< max ||Q_k - Q_k^*|| (0 for real Omega)
    /// ||(P_K - I) v|| per K for the fixed test vectors.
    std::vector<std::vector<double>> residualTails;
    bool tailsDecrease = false;
    bool pass = false;
};

struct ProjectorOptions {
    int minNodes = 64;
    int maxNodes = 4096;
    double changeTol = 1e-9;
    double idempotencyTol = 1e-8;
};

/// Contour-integral projectors of one truncated parity block.
ProjectorReport projector_diagnostics(int k, cplx omega, Parity par, int size, double c,
                                      const ProjectorOptions& opts = {});

}  // namespace spheroidal
