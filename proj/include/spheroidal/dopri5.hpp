#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "spheroidal/types.hpp"

namespace spheroidal {

/// Tolerances and limits for the adaptive Dormand-Prince 5(4) driver.
struct StepOptions {
    double atol = 1e-11;
    double rtol = 1e-9;
    double hInit = 0.0;       ///< 0 picks a starting step from the interval length
    double hMin = 1e-14;      ///< absolute floor on |h|
    double hMax = 0.0;        ///< 0 means unbounded
    long maxSteps = 2'000'000;
    /// Step cap as a fraction of the distance to u = 0 (the pole). 0 disables.
    double poleFraction = 0.0;
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    double hMinUsed = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }

// Dormand-Prince 5(4) tableau.
struct DP5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Adaptive DOPRI5 with PI step-size control. Integrates in either direction.
///
/// `rhs(u, x, dx)` evaluates the vector field. `accept(u, x)` may veto a trial
/// step (returns false), which is treated like an error-test failure.
/// `observe(u, x, dx)` is called on the initial point and every accepted step.
/// Every point of `stops` lying strictly inside the interval is hit exactly.
template <class T, std::size_t N>
class Dopri5 {
public:
    using State = std::array<T, N>;

    explicit Dopri5(StepOptions opts) : opts_(opts) {}

    const StepStats& stats() const { return stats_; }

    template <class Rhs, class Accept, class Observe>
    State run(Rhs&& rhs, double u0, State x, double u1, Accept&& accept, Observe&& observe,
              std::vector<double> stops = {}) {
        using detail::DP5;
        const double dir = u1 >= u0 ? 1.0 : -1.0;
        const double span = std::abs(u1 - u0);
        State k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, tmp{}, xn{};
        rhs(u0, x, k1);
        observe(u0, x, k1);
        if (span == 0.0) return x;

        std::erase_if(stops, [&](double s) { return dir * (s - u0) <= 0.0 || dir * (u1 - s) <= 0.0; });
        std::sort(stops.begin(), stops.end(), [&](double a, double b) { return dir * a < dir * b; });
        std::size_t nextStop = 0;

        double h = opts_.hInit > 0.0 ? opts_.hInit : initial_step(span, x, k1);
        double errOld = 1e-4;
        double u = u0;
        bool lastRejected = false;

        while (dir * (u1 - u) > 0.0) {
            if (stats_.accepted + stats_.rejected > opts_.maxSteps)
                throw numerical_error("integrator step budget exhausted at u=" + std::to_string(u));
            h = cap(h, u);
            const double hFree = h;
            double target = nextStop < stops.size() ? stops[nextStop] : u1;
            bool hitTarget = false;
            if (h >= std::abs(target - u) * (1.0 - 1e-12)) {
                h = std::abs(target - u);
                hitTarget = true;
            }
            if (h < opts_.hMin && !hitTarget)
                throw numerical_error("step size underflow at u=" + std::to_string(u));
            const double hs = dir * h;

            for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + hs * DP5::a21 * k1[i];
            rhs(u + DP5::c2 * hs, tmp, k2);
            for (std::size_t i = 0; i < N; ++i) tmp[i] = x[i] + hs * (DP5::a31 * k1[i] + DP5::a32 * k2[i]);
            rhs(u + DP5::c3 * hs, tmp, k3);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = x[i] + hs * (DP5::a41 * k1[i] + DP5::a42 * k2[i] + DP5::a43 * k3[i]);
            rhs(u + DP5::c4 * hs, tmp, k4);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = x[i] + hs * (DP5::a51 * k1[i] + DP5::a52 * k2[i] + DP5::a53 * k3[i] +
                                      DP5::a54 * k4[i]);
            rhs(u + DP5::c5 * hs, tmp, k5);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = x[i] + hs * (DP5::a61 * k1[i] + DP5::a62 * k2[i] + DP5::a63 * k3[i] +
                                      DP5::a64 * k4[i] + DP5::a65 * k5[i]);
            const double uNew = hitTarget ? target : u + hs;
            rhs(u + hs, tmp, k6);
            for (std::size_t i = 0; i < N; ++i)
                xn[i] = x[i] + hs * (DP5::a71 * k1[i] + DP5::a73 * k3[i] + DP5::a74 * k4[i] +
                                     DP5::a75 * k5[i] + DP5::a76 * k6[i]);
            rhs(uNew, xn, k7);

            double err = 0.0;
            bool finite = true;
            for (std::size_t i = 0; i < N; ++i) {
                T e = hs * (DP5::e1 * k1[i] + DP5::e3 * k3[i] + DP5::e4 * k4[i] + DP5::e5 * k5[i] +
                            DP5::e6 * k6[i] + DP5::e7 * k7[i]);
                double sc = opts_.atol +
                            opts_.rtol * std::max(detail::magnitude(x[i]), detail::magnitude(xn[i]));
                double r = detail::magnitude(e) / sc;
                if (!std::isfinite(r)) finite = false;
                err += r * r;
            }
            err = std::sqrt(err / static_cast<double>(N));

            if (finite && err <= 1.0 && accept(uNew, xn)) {
                // PI controller (Hairer's DOPRI5 constants).
                constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75;
                double e = std::max(err, 1e-10);
                double fac = std::pow(e, expo1) / std::pow(errOld, beta) / 0.9;
                fac = std::clamp(fac, 0.1, 5.0);
                double hNew = h / fac;
                if (lastRejected) hNew = std::min(hNew, h);
                errOld = e;
                lastRejected = false;
                stats_.accepted += 1;
                if (!hitTarget) stats_.hMinUsed = std::min(stats_.hMinUsed, h);
                u = uNew;
                x = xn;
                k1 = k7;
                observe(u, x, k1);
                if (hitTarget && nextStop < stops.size()) ++nextStop;
                h = hitTarget ? std::max(hNew, hFree) : hNew;
            } else {
                stats_.rejected += 1;
                lastRejected = true;
                double fac = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.25;
                h *= fac;
            }
        }
        return x;
    }

private:
    double cap(double h, double u) const {
        if (opts_.hMax > 0.0) h = std::min(h, opts_.hMax);
        if (opts_.poleFraction > 0.0) h = std::min(h, opts_.poleFraction * std::abs(u));
        return h;
    }

    double initial_step(double span, const State& x, const State& k1) const {
        double xs = 0.0, ds = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double sc = opts_.atol + opts_.rtol * detail::magnitude(x[i]);
            xs += std::pow(detail::magnitude(x[i]) / sc, 2);
            ds += std::pow(detail::magnitude(k1[i]) / sc, 2);
        }
        xs = std::sqrt(xs / N);
        ds = std::sqrt(ds / N);
        double h = (xs < 1e-5 || ds < 1e-5) ? 1e-6 : 0.01 * xs / ds;
        return std::min(h, 0.1 * span);
    }

    StepOptions opts_;
    StepStats stats_;
};

}  // namespace spheroidal
