#pragma once

#include <vector>

namespace spheroidal {

/// Row-major dense square matrix, used by the in-repo symmetric eigensolver.
struct DenseMatrix {
    int n = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    explicit DenseMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
    static DenseMatrix identity(int size);
};

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
/// `d` holds the diagonal, `e[i]` the coupling of rows i and i+1 (size n, last
/// entry ignored). On return `d` holds the eigenvalues in ascending order. If
/// `z` is non-null it must hold an orthogonal matrix Q on entry (identity for
/// the tridiagonal problem itself); on return column j of z is Q times the
/// j-th eigenvector.
void tridiagonal_ql(std::vector<double>& d, std::vector<double> e, DenseMatrix* z = nullptr);

/// Householder reduction of a dense symmetric matrix to tridiagonal form.
/// Returns (d, e) and, if requested, the accumulated orthogonal transform Q
/// with A = Q T Q^T.
void householder_tridiagonalize(const DenseMatrix& A, std::vector<double>& d, std::vector<double>& e,
                                DenseMatrix* q = nullptr);

/// Eigenvalues (ascending) and optionally eigenvectors (columns) of a dense
/// symmetric matrix: Householder reduction followed by implicit QL.
std::vector<double> symmetric_eigen(const DenseMatrix& A, DenseMatrix* vectors = nullptr);

}  // namespace spheroidal
