#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "spheroidal/dual.hpp"
#include "spheroidal/types.hpp"

namespace spheroidal {

namespace detail {

template <class S> struct ScalarTraits;
template <> struct ScalarTraits<double> {
    static double from(double x) { return x; }
    static double mag(double x) { return std::abs(x); }
};
template <> struct ScalarTraits<cplx> {
    static cplx from(double x) { return {x, 0.0}; }
    static double mag(cplx x) { return std::abs(x); }
};
template <class T> struct ScalarTraits<Dual<T>> {
    static Dual<T> from(double x) { return Dual<T>(ScalarTraits<T>::from(x)); }
    static double mag(const Dual<T>& x) { return ScalarTraits<T>::mag(x.v); }
};

/// Coefficients of 1/sin^2 u - 1/u^2 and of sin^2 u as power series in u^2.
inline void trig_series(int n, std::vector<double>& invSin2, std::vector<double>& sin2) {
    // (sin u / u)^2 = sum t_j u^{2j};  sin^2 u = sum_{j>=1} (-1)^{j+1} 2^{2j-1}/(2j)! u^{2j}
    std::vector<double> t(n + 2);
    sin2.assign(n + 2, 0.0);
    double fact = 1.0;  // (2j)!
    for (int j = 1; j <= n + 2; ++j) {
        fact *= (2.0 * j - 1.0) * (2.0 * j);
        double sj = ((j % 2) ? 1.0 : -1.0) * std::ldexp(1.0, 2 * j - 1) / fact;
        if (j < n + 2) sin2[j] = sj;
        t[j - 1] = sj;
    }
    std::vector<double> r(n + 2);
    r[0] = 1.0;
    for (int m = 1; m < n + 2; ++m) {
        double acc = 0.0;
        for (int i = 1; i <= m; ++i) acc += t[i] * r[m - i];
        r[m] = -acc;
    }
    invSin2.assign(n + 1, 0.0);
    for (int j = 0; j <= n; ++j) invSin2[j] = r[j + 1];
}

}  // namespace detail

/// Frobenius solutions of Y'' = V Y near u = 0 for
/// V = Omega^2 sin^2 u + (k^2 - 1/4)/sin^2 u - mu.
///
/// Regular solution:  Yr = u^{1/2+|k|} sum a_n u^{2n},  a_0 = 1.
/// Second solution:   Ys = C log(u) Yr + u^{1/2-|k|} sum b_n u^{2n};
///   k = 0:  C = -1, b_0 = 0, so Ys ~ -sqrt(u) log u;
///   k != 0: b_0 = 1, b_{|k|} = 0, C fixed by the resonance at n = |k|.
/// In both cases W(Ys, Yr) = Ys Yr' - Ys' Yr equals 1 (k = 0) or 2|k|.
/// The scalar S may be double, complex, or a Dual carrying d/dlambda.
template <class S>
class FrobeniusSeries {
public:
    using Tr = detail::ScalarTraits<S>;

    FrobeniusSeries(int k, S omega2, S mu, int nTerms = 3) : k_(std::abs(k)), n_(nTerms) {
        std::vector<double> r, s2;
        detail::trig_series(n_ + 1, r, s2);
        const double c = static_cast<double>(k_) * k_ - 0.25;
        std::vector<S> q(n_ + 1);
        for (int j = 0; j <= n_; ++j) {
            q[j] = Tr::from(c * r[j]) + omega2 * s2[j];
        }
        q[0] = q[0] - mu;

        a_.assign(n_, Tr::from(0.0));
        a_[0] = Tr::from(1.0);
        for (int n = 1; n < n_; ++n) {
            S acc = Tr::from(0.0);
            for (int j = 0; j <= n - 1; ++j) acc = acc + q[j] * a_[n - 1 - j];
            a_[n] = acc / (4.0 * n * (n + k_));
        }

        b_.assign(n_, Tr::from(0.0));
        if (k_ == 0) {
            C_ = Tr::from(-1.0);
        } else {
            b_[0] = Tr::from(1.0);
            C_ = Tr::from(0.0);
        }
        for (int n = 1; n < n_; ++n) {
            S acc = Tr::from(0.0);
            for (int j = 0; j <= n - 1; ++j) acc = acc + q[j] * b_[n - 1 - j];
            if (n == k_) {
                C_ = acc / (2.0 * k_);
                b_[n] = Tr::from(0.0);
                continue;
            }
            if (n > k_) acc = acc - C_ * a_[n - k_] * (2.0 * k_ + 4.0 * (n - k_));
            b_[n] = acc / (4.0 * n * (n - k_));
        }
        // A resonance beyond the truncation leaves C = 0; the omitted log term
        // is then of the same order as the truncation error.
    }

    int k() const { return k_; }
    S log_coefficient() const { return C_; }

    /// Yr'/Yr at u.
    S reg_logderiv(double u) const {
        S P = Tr::from(0.0), Q = Tr::from(0.0);
        const double s = 0.5 + k_;
        double u2n = 1.0;
        for (int n = 0; n < n_; ++n) {
            P = P + a_[n] * u2n;
            Q = Q + a_[n] * ((s + 2.0 * n) * u2n);
            u2n *= u * u;
        }
        return Q / P / u;
    }

    /// Ys'/Ys at u.
    S sing_logderiv(double u) const {
        S num, den;
        sing_parts(u, num, den);
        return num / den / u;
    }

    /// Yr/Ys at u (small near the origin).
    S ratio(double u) const {
        S num, den;
        sing_parts(u, num, den);
        return reg_poly(u) * std::pow(u, 2.0 * k_) / den;
    }

    /// Yr and Yr' at u.
    S reg_value(double u) const { return reg_poly(u) * std::pow(u, 0.5 + k_); }
    S reg_deriv(double u) const { return reg_value(u) * reg_logderiv(u); }
    /// Ys and Ys' at u.
    S sing_value(double u) const {
        S num, den;
        sing_parts(u, num, den);
        return den * std::pow(u, 0.5 - k_);
    }
    S sing_deriv(double u) const {
        S num, den;
        sing_parts(u, num, den);
        return num * std::pow(u, -0.5 - k_);
    }

    /// W(Ys, Yr) evaluated from the truncated series at u.
    S wronskian(double u) const {
        return sing_value(u) * reg_deriv(u) - sing_deriv(u) * reg_value(u);
    }

    /// Exact limit of the Wronskian as u -> 0.
    double wronskian_limit() const { return k_ == 0 ? 1.0 : 2.0 * k_; }

    /// Relative size of the last retained term of either series at u.
    double truncation_estimate(double u) const {
        const double u2 = u * u;
        double last = std::pow(u2, n_ - 1);
        double ra = Tr::mag(a_[n_ - 1]) * last / std::max(1e-300, Tr::mag(reg_poly(u)));
        double rb = 0.0;
        if (k_ != 0) {
            S num, den;
            sing_parts(u, num, den);
            rb = Tr::mag(b_[n_ - 1]) * last / std::max(1e-300, Tr::mag(den));
        }
        // The first omitted term is one power of u^2 smaller again, times a
        // coefficient ratio of comparable size; report the retained tail.
        return std::max(ra, rb) * u2;
    }

private:
    S reg_poly(double u) const {
        S P = Tr::from(0.0);
        double u2n = 1.0;
        for (int n = 0; n < n_; ++n) {
            P = P + a_[n] * u2n;
            u2n *= u * u;
        }
        return P;
    }

    // Ys = u^{s'} den,  Ys' = u^{s'-1} num.
    void sing_parts(double u, S& num, S& den) const {
        const double s = 0.5 + k_, sp = 0.5 - k_;
        const double L = std::log(u);
        S Pr = Tr::from(0.0), Qr = Tr::from(0.0), Pb = Tr::from(0.0), Qb = Tr::from(0.0);
        double u2n = 1.0;
        for (int n = 0; n < n_; ++n) {
            Pr = Pr + a_[n] * u2n;
            Qr = Qr + a_[n] * ((s + 2.0 * n) * u2n);
            Pb = Pb + b_[n] * u2n;
            Qb = Qb + b_[n] * ((sp + 2.0 * n) * u2n);
            u2n *= u * u;
        }
        const double u2k = std::pow(u, 2.0 * k_);
        den = C_ * (Pr * (L * u2k)) + Pb;
        num = C_ * ((Pr + Qr * L) * u2k) + Qb;
    }

    int k_;
    int n_;
    std::vector<S> a_, b_;
    S C_;
};

}  // namespace spheroidal
