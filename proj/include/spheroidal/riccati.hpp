#pragma once

#include <vector>

#include "spheroidal/dopri5.hpp"
#include "spheroidal/potential.hpp"
#include "spheroidal/types.hpp"

namespace spheroidal {

/// One point of a complex Riccati trajectory y = z'/z, z = rho e^{i phi}.
struct RiccatiState {
    double u = 0.0;
    cplx y;                  ///< z'/z, Im y > 0
    double phase = 0.0;      ///< accumulated integral of Im y
    double logRho = 0.0;     ///< accumulated integral of Re y
    cplx yLambda;            ///< dy/dlambda
    double phaseLambda = 0.0;  ///< accumulated integral of Im y_lambda

    /// Wronskian Im(conj(z) z') = rho^2 Im y.
    double w() const { return std::exp(2.0 * logRho) * y.imag(); }
};

struct Trajectory {
    std::vector<RiccatiState> samples;
    StepStats stats;
    bool sensitivity = false;

    const RiccatiState& front() const { return samples.front(); }
    const RiccatiState& back() const { return samples.back(); }
    /// Sample with u closest to `u`.
    const RiccatiState& nearest(double u) const;
};

struct RiccatiOptions {
    StepOptions step;
    bool sensitivity = true;
    double yCeiling = 1e15;        ///< |y| above this is reported as blow-up
    std::vector<double> stops;     ///< points to land on exactly
};

/// Default options for spheroidal trajectories: pole-capped steps.
RiccatiOptions spheroidal_options();

/// z = Ys + i Yr from the Frobenius pair at uEps, so that the boundary-selected
/// solution is Yr = Im z and arg z -> 0 as u -> 0. logRho is log|z|, hence
/// w() equals the series Wronskian (1 for k = 0, 2|k| otherwise).
RiccatiState init_at_singularity(const ProblemParams& p, double uEps, int seriesTerms = 3,
                                 double truncTol = 1e-12);

/// y(u0) = i sqrt|V(u0)| - V'(u0)/(4 V(u0)), rho(u0) = 1, phase 0.
RiccatiState init_wkb(const Potential& V, double u0);
RiccatiState init_wkb(const ProblemParams& p, double u0);

/// Integrates y' = V - y^2 together with phase, log-amplitude and (optionally)
/// y_lambda' = dV/dlambda - 2 y y_lambda from s0.u to uTarget (either
/// direction). Im y is carried as log(Im y), so positivity is structural and
/// rho^2 Im y is a linear invariant of the stepped system.
Trajectory integrate(const RiccatiState& s0, double uTarget, const Potential& V,
                     const RiccatiOptions& opts);

/// Integral of Im y_lambda between the first and last sample (signed by
/// direction: positive when integrating towards larger u).
double sensitivity_integral(const Trajectory& traj);

/// Independent quadrature of Im y_lambda over the samples: trapezoid with the
/// endpoint-derivative correction on every step, plus a Richardson estimate
/// against the every-other-sample rule. Used to validate the carried integral.
double sensitivity_quadrature(const Trajectory& traj, const Potential& V);

/// Right-hand side of the alternative sensitivity identity on [u, v]:
/// z^2 y_lambda |_u^v = -z^2/(2y) |_u^v - int (V - y^2)/(2 y^2) z^2.
/// Returns the predicted y_lambda at the last sample given the first one.
cplx ylambda_via_identity(const Trajectory& traj, const Potential& V);

/// Same prediction through z^2 y_lambda |_u^v = -int z^2 (dV/dlambda = -1).
cplx ylambda_via_variation(const Trajectory& traj);

}  // namespace spheroidal
