#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spheroidal {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

enum class Parity { Even, Odd };

inline const char* to_string(Parity p) { return p == Parity::Even ? "even" : "odd"; }

/// Failure categories. The CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind { Hypothesis, Numerical, Config };

class SolverError : public std::runtime_error {
public:
    SolverError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline SolverError hypothesis_error(const std::string& s) { return {ErrorKind::Hypothesis, s}; }
inline SolverError numerical_error(const std::string& s) { return {ErrorKind::Numerical, s}; }
inline SolverError config_error(const std::string& s) { return {ErrorKind::Config, s}; }

/// One instance of the angular equation. mu is always derived, never stored.
struct ProblemParams {
    int k = 0;
    cplx omega = 0.0;
    cplx lambda = 0.0;

    cplx mu() const { return lambda - 2.0 * omega * static_cast<double>(k) + 0.25; }

    double omega_re() const { return omega.real(); }
    double lambda_re() const { return lambda.real(); }
    bool is_real() const { return omega.imag() == 0.0 && lambda.imag() == 0.0; }

    /// Same equation under (Omega, k) -> (-Omega, -k).
    ProblemParams mirrored() const { return {-k, -omega, lambda}; }

    ProblemParams with_lambda(cplx l) const { return {k, omega, l}; }
};

inline ProblemParams real_params(int k, double omega, double lambda) {
    return {k, cplx(omega, 0.0), cplx(lambda, 0.0)};
}

}  // namespace spheroidal
