#include "spheroidal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace spheroidal {

double legendre_coupling(int l, int k) {
    const int ak = std::abs(k);
    if (l <= ak) return 0.0;
    const double L = l, K = ak;
    return std::sqrt((L * L - K * K) / ((2.0 * L - 1.0) * (2.0 * L + 1.0)));
}

namespace {

// <l| x^2 |l> and <l| x^2 |l+2> in the orthonormal basis.
double x2_diag(int l, int k) {
    const double a = legendre_coupling(l, k), b = legendre_coupling(l + 1, k);
    return a * a + b * b;
}

double x2_off(int l, int k) { return legendre_coupling(l + 1, k) * legendre_coupling(l + 2, k); }

int parity_offset(Parity par) { return par == Parity::Even ? 0 : 1; }

}  // namespace

double OracleMatrix::entry(int i, int j) const {
    if (i > j) std::swap(i, j);
    const int l = baseDegree + i;
    const double om2 = omega * omega;
    if (i == j) return l * (l + 1.0) + 2.0 * omega * k + om2 * (1.0 - x2_diag(l, k));
    if (j == i + 2) return -om2 * x2_off(l, k);
    return 0.0;
}

int OracleMatrix::block_size(Parity par) const {
    return par == Parity::Even ? (size + 1) / 2 : size / 2;
}

void OracleMatrix::block(Parity par, std::vector<double>& diag, std::vector<double>& off) const {
    const int n = block_size(par);
    const int o = parity_offset(par);
    diag.resize(n);
    off.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        diag[j] = entry(o + 2 * j, o + 2 * j);
        if (j + 1 < n) off[j] = entry(o + 2 * j, o + 2 * j + 2);
    }
}

OracleMatrix assemble(int k, double omega, int size) {
    if (size < 8) throw config_error("assemble: truncation size must be at least 8");
    OracleMatrix m;
    m.k = k;
    m.omega = omega;
    m.size = size;
    m.baseDegree = std::abs(k);
    return m;
}

std::vector<cplx> assemble_block_complex(int k, cplx omega, Parity par, int n) {
    const int o = parity_offset(par);
    const int base = std::abs(k);
    const cplx om2 = omega * omega;
    std::vector<cplx> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        const int l = base + o + 2 * j;
        a[static_cast<std::size_t>(j) * n + j] =
            l * (l + 1.0) + 2.0 * omega * static_cast<double>(k) + om2 * (1.0 - x2_diag(l, k));
        if (j + 1 < n) {
            const cplx v = -om2 * x2_off(l, k);
            a[static_cast<std::size_t>(j) * n + j + 1] = v;
            a[static_cast<std::size_t>(j + 1) * n + j] = v;
        }
    }
    return a;
}

std::vector<double> block_eigenvalues(const OracleMatrix& mat, Parity par, int count,
                                      std::vector<std::vector<double>>* vectors) {
    const int n = mat.block_size(par);
    if (count > n / 2 - 4 && count > 0) {
        std::ostringstream os;
        os << "oracle: " << count << " eigenvalues requested from a block of size " << n;
        throw config_error(os.str());
    }
    std::vector<double> d, e;
    mat.block(par, d, e);
    if (vectors) {
        DenseMatrix z = DenseMatrix::identity(n);
        tridiagonal_ql(d, e, &z);
        vectors->assign(count, std::vector<double>(n));
        for (int c = 0; c < count; ++c) {
            auto& v = (*vectors)[c];
            for (int i = 0; i < n; ++i) v[i] = z(i, c);
            // Fix the sign: positive leading coefficient of largest magnitude
            // among the first entries keeps output deterministic.
            const auto it = std::max_element(v.begin(), v.end(),
                                             [](double a, double b) { return std::abs(a) < std::abs(b); });
            if (*it < 0.0)
                for (double& x : v) x = -x;
        }
    } else {
        tridiagonal_ql(d, e, nullptr);
    }
    d.resize(count);
    return d;
}

OracleResult oracle_eigenvalues(int k, double omega, Parity par, int count, const OracleOptions& opts) {
    if (count < 1) throw config_error("oracle: count must be positive");
    // A localized branch at large Omega needs degrees up to a few times
    // sqrt(lambda) ~ sqrt(Omega m); the start size errs on the generous side.
    int block = opts.startSize > 0 ? opts.startSize
                                   : 2 * count + 16 + static_cast<int>(2.0 * std::sqrt(std::abs(omega) * (count + 1)));
    block = std::max(block, 2 * count + 10);
    OracleResult r;
    r.k = k;
    r.omega = omega;
    r.parity = par;
    std::vector<double> prev = block_eigenvalues(assemble(k, omega, 2 * block + 1), par, count);
    while (true) {
        block += 16;
        if (2 * block > opts.maxSize) {
            std::ostringstream os;
            os << "truncation-not-converged: k=" << k << " omega=" << omega << " at size " << 2 * block;
            throw numerical_error(os.str());
        }
        std::vector<double> cur = block_eigenvalues(assemble(k, omega, 2 * block + 1), par, count);
        double worst = 0.0;
        for (int i = 0; i < count; ++i)
            worst = std::max(worst, std::abs(cur[i] - prev[i]) / std::max(1.0, std::abs(cur[i])));
        if (worst <= opts.tol) {
            r.values = cur;
            r.previous = prev;
            r.size = 2 * block + 1;
            r.maxRelChange = worst;
            r.converged = true;
            return r;
        }
        prev = std::move(cur);
    }
}

double oracle_eigenvalue(int k, double omega, Parity par, int m) {
    return oracle_eigenvalues(k, omega, par, m + 1).values.at(m);
}

std::vector<double> normalized_legendre(int k, int lMax, double x) {
    const int ak = std::abs(k);
    std::vector<double> p;
    if (lMax < ak) return p;
    p.resize(lMax - ak + 1);
    double c = 1.0 / std::sqrt(2.0);
    for (int j = 1; j <= ak; ++j) c *= std::sqrt((2.0 * j + 1.0) / (2.0 * j));
    p[0] = c * std::pow(std::max(0.0, 1.0 - x * x), 0.5 * ak);
    if (lMax == ak) return p;
    p[1] = x * p[0] / legendre_coupling(ak + 1, ak);
    for (int l = ak + 1; l < lMax; ++l) {
        const int i = l - ak;
        p[i + 1] = (x * p[i] - legendre_coupling(l, ak) * p[i - 1]) / legendre_coupling(l + 1, ak);
    }
    return p;
}

double oracle_eigenfunction(int k, Parity par, const std::vector<double>& coeffs, double x) {
    const int ak = std::abs(k);
    const int o = parity_offset(par);
    const int n = static_cast<int>(coeffs.size());
    const std::vector<double> p = normalized_legendre(ak, ak + o + 2 * (n - 1), x);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += coeffs[j] * p[o + 2 * j];
    return s;
}

}  // namespace spheroidal
