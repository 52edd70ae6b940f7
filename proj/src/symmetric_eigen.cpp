#include "spheroidal/symmetric_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spheroidal/types.hpp"

namespace spheroidal {

DenseMatrix DenseMatrix::identity(int size) {
    DenseMatrix m(size);
    for (int i = 0; i < size; ++i) m(i, i) = 1.0;
    return m;
}

void tridiagonal_ql(std::vector<double>& d, std::vector<double> e, DenseMatrix* z) {
    const int n = static_cast<int>(d.size());
    if (n == 0) return;
    e.resize(n);
    e[n - 1] = 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            // Look for a negligible off-diagonal element to split the matrix.
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m == l) break;
            if (++iter > 60) throw numerical_error("tridiagonal_ql: no convergence");

            // Shift from the leading 2x2 block.
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            int i = m - 1;
            bool deflated = false;
            for (; i >= l; --i) {
                const double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    // Underflow: the rotation chain decouples early.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if (z) {
                    for (int k = 0; k < z->n; ++k) {
                        const double t = (*z)(k, i + 1);
                        (*z)(k, i + 1) = s * (*z)(k, i) + c * t;
                        (*z)(k, i) = c * (*z)(k, i) - s * t;
                    }
                }
            }
            if (deflated) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (true);
    }

    // Sort ascending, carrying eigenvectors along.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
    std::vector<double> ds(n);
    for (int i = 0; i < n; ++i) ds[i] = d[idx[i]];
    d = ds;
    if (z) {
        DenseMatrix zs(z->n);
        for (int k = 0; k < z->n; ++k)
            for (int j = 0; j < n; ++j) zs(k, j) = (*z)(k, idx[j]);
        *z = zs;
    }
}

void householder_tridiagonalize(const DenseMatrix& A, std::vector<double>& d, std::vector<double>& e,
                                DenseMatrix* q) {
    const int n = A.n;
    DenseMatrix a = A;
    DenseMatrix Q = DenseMatrix::identity(n);
    std::vector<double> v(n), w(n);
    for (int k = 0; k + 2 < n; ++k) {
        double alpha = 0.0;
        for (int i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;
        if (a(k + 1, k) > 0.0) alpha = -alpha;
        std::fill(v.begin(), v.end(), 0.0);
        v[k + 1] = a(k + 1, k) - alpha;
        for (int i = k + 2; i < n; ++i) v[i] = a(i, k);
        double vv = 0.0;
        for (int i = k + 1; i < n; ++i) vv += v[i] * v[i];
        if (vv == 0.0) continue;
        // A <- H A H with H = I - 2 v v^T / (v^T v).
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            w[i] = 2.0 * s / vv;
        }
        double vw = 0.0;
        for (int i = k + 1; i < n; ++i) vw += v[i] * w[i];
        const double kf = vw / vv;
        for (int i = 0; i < n; ++i) w[i] -= kf * v[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) -= v[i] * w[j] + w[i] * v[j];
        // Q <- Q H
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += Q(i, j) * v[j];
            s *= 2.0 / vv;
            for (int j = k + 1; j < n; ++j) Q(i, j) -= s * v[j];
        }
    }
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (int i = 0; i < n; ++i) d[i] = a(i, i);
    for (int i = 0; i + 1 < n; ++i) e[i] = a(i + 1, i);
    if (q) *q = Q;
}

std::vector<double> symmetric_eigen(const DenseMatrix& A, DenseMatrix* vectors) {
    std::vector<double> d, e;
    DenseMatrix Q;
    householder_tridiagonalize(A, d, e, vectors ? &Q : nullptr);
    if (vectors) {
        tridiagonal_ql(d, e, &Q);
        *vectors = Q;
    } else {
        tridiagonal_ql(d, e, nullptr);
    }
    return d;
}

}  // namespace spheroidal
