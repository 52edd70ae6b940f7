#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spheroidal/types.hpp"

namespace spheroidal {

struct PotentialEval {
    double u = 0.0;
    double V = 0.0;
    double Vp = 0.0;
    double Vpp = 0.0;
};

/// Real potential of a Sturm-Liouville problem -Y'' + V Y = 0 on an interval.
/// The enclosure engine and the Riccati integrator only see this interface,
/// so test harnesses can substitute closed-form potentials.
class Potential {
public:
    virtual ~Potential() = default;
    virtual double value(double u) const = 0;
    virtual PotentialEval eval(double u) const = 0;
    virtual double third(double u) const = 0;  ///< V'''
    /// dV/dlambda. The spheroidal potential depends on lambda through -mu.
    virtual double dlambda() const { return -1.0; }
    /// B = V + 1/(4u^2) and B' without cancellation, for potentials whose
    /// singular part at u = 0 is exactly -1/(4u^2). Empty otherwise.
    virtual std::optional<std::pair<double, double>> pole_remainder(double) const { return std::nullopt; }
};

/// V(u) = Omega^2 sin^2 u + (k^2 - 1/4)/sin^2 u - mu, real parameters.
class SpheroidalPotential final : public Potential {
public:
    explicit SpheroidalPotential(const ProblemParams& p);
    double value(double u) const override;
    PotentialEval eval(double u) const override;
    double third(double u) const override;
    std::optional<std::pair<double, double>> pole_remainder(double u) const override;

    const ProblemParams& params() const { return p_; }

private:
    ProblemParams p_;
    double om2_;
    double c_;   // k^2 - 1/4
    double mu_;
};

/// V = c, constant.
class ConstantPotential final : public Potential {
public:
    explicit ConstantPotential(double c) : c_(c) {}
    double value(double) const override { return c_; }
    PotentialEval eval(double u) const override { return {u, c_, 0.0, 0.0}; }
    double third(double) const override { return 0.0; }

private:
    double c_;
};

/// Throws a Config error unless 0 < u <= pi/2; lambda must be real.
PotentialEval eval_potential(double u, const ProblemParams& p);

/// V for complex (Omega, lambda); used by the z-form shooting.
cplx potential_complex(double u, const ProblemParams& p);

struct PartitionConfig {
    double kappa = 4.0;
    double LambdaBig = 64.0;
    double Omega0 = 16.0;
};

struct RegionPartition {
    int k = 0;
    double omega = 0.0;
    double lambda = 0.0;
    std::optional<double> uJ, u0, u1, uMinus, uMinusS, uPlusS, uPlus, uI;
    PartitionConfig cfg;
    bool inRange = false;     ///< Omega > Omega0 and lambda > 2 Lambda Omega
    bool degenerate = false;  ///< some region required by the analysis is empty
    std::string reason;
};

enum class RegionKind { Pole, Quantum, Semiclassical, Convex };

const char* to_string(RegionKind k);

/// A sub-interval together with the direction in which the Riccati flow is
/// followed through it (+1: from a towards b, -1: from b towards a).
struct Region {
    std::string name;
    RegionKind kind;
    double a = 0.0;
    double b = 0.0;
    int direction = 1;
    double start() const { return direction > 0 ? a : b; }
    double end() const { return direction > 0 ? b : a; }
    double length() const { return b - a; }
};

/// Breakpoints of the region partition; never reorders them.
RegionPartition partition_regions(const ProblemParams& p, const PartitionConfig& cfg = {});

/// Regions of a non-degenerate partition, from u = uEps to pi/2.
std::vector<Region> region_list(const RegionPartition& part, double uEps);

/// K = (sup|V''| + TV V'') / V_max^2 + sup V'^2/|V|^3 on [a, b].
double compute_K(double a, double b, const Potential& V);

/// L = sup(3/sqrt V + V'/V^2) + TV(V'/V^2) on [a, b]. `direction` = -1 means
/// V increases towards a and the interval is read backwards.
double compute_L(double a, double b, const Potential& V, int direction = 1);

/// Checks that V keeps a strict sign and is monotone on [a, b]; returns +1 if
/// V is increasing, -1 if decreasing. Throws a Hypothesis error otherwise.
int check_monotone_sign(double a, double b, const Potential& V, int sign);

}  // namespace spheroidal
