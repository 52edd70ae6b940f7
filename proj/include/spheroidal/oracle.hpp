#pragma once

#include <vector>

#include "spheroidal/symmetric_eigen.hpp"
#include "spheroidal/types.hpp"

namespace spheroidal {

/// Truncation of the angular operator
///   A = -(1/sin) d/dtheta sin d/dtheta + k^2/sin^2 + 2 Omega k + Omega^2 sin^2
/// in the orthonormal associated Legendre basis P_l^k, l = |k|, ..., |k|+size-1.
/// sin^2 = 1 - cos^2 couples l with l and l +- 2 only, so each parity block
/// (l - |k| even or odd) is tridiagonal.
struct OracleMatrix {
    int k = 0;
    double omega = 0.0;
    int size = 0;
    int baseDegree = 0;

    double entry(int i, int j) const;  ///< full matrix element, row index i <-> l = |k| + i
    int block_size(Parity par) const;
    /// Tridiagonal block: diagonal and coupling of consecutive same-parity degrees.
    void block(Parity par, std::vector<double>& diag, std::vector<double>& off) const;
};

/// a_l = sqrt((l^2 - k^2) / ((2l - 1)(2l + 1))), the cos-recurrence coefficient:
/// x P_l = a_{l+1} P_{l+1} + a_l P_{l-1} for orthonormal P_l^k.
double legendre_coupling(int l, int k);

OracleMatrix assemble(int k, double omega, int size);

/// Full dense matrix of a parity block with complex Omega (complex symmetric).
std::vector<cplx> assemble_block_complex(int k, cplx omega, Parity par, int blockSize);

/// Lowest `count` eigenvalues of one parity block, ascending. Optionally the
/// block eigenvectors (coefficients on l = |k| + parityOffset + 2 j).
std::vector<double> block_eigenvalues(const OracleMatrix& mat, Parity par, int count,
                                      std::vector<std::vector<double>>* vectors = nullptr);

struct OracleResult {
    int k = 0;
    double omega = 0.0;
    Parity parity = Parity::Even;
    std::vector<double> values;    ///< at the accepted size
    std::vector<double> previous;  ///< at size - 16
    int size = 0;
    double maxRelChange = 0.0;
    bool converged = false;
};

struct OracleOptions {
    double tol = 1e-9;
    int startSize = 0;   ///< 0: chosen from count and omega
    int maxSize = 4000;
};

/// Eigenvalues of a parity block, growing the truncation by 16 until two
/// consecutive sizes agree to `tol` relative (absolute near zero). Throws a
/// Numerical error (truncation-not-converged) when maxSize is reached.
OracleResult oracle_eigenvalues(int k, double omega, Parity par, int count,
                                const OracleOptions& opts = {});

/// Convenience: the m-th eigenvalue of a parity block.
double oracle_eigenvalue(int k, double omega, Parity par, int m);

/// Orthonormal associated Legendre functions P_l^k(x), l = |k| .. lMax, with
/// int_{-1}^{1} P^2 dx = 1 and P_{|k|}^k > 0 on (-1, 1).
std::vector<double> normalized_legendre(int k, int lMax, double x);

/// Theta(x) = sum_j c_j P_{l_j}^k(x) for a block eigenvector.
double oracle_eigenfunction(int k, Parity par, const std::vector<double>& coeffs, double x);

}  // namespace spheroidal
