#include "spheroidal/monotone.hpp"

#include <algorithm>
#include <cmath>

#include "spheroidal/types.hpp"

namespace spheroidal {

double bisect_root(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw numerical_error("bisect_root: no sign change on bracket");
    for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

MonotonePieces analyze_monotone(const std::function<double(double)>& f,
                                const std::function<double(double)>& df, double a, double b,
                                int grid) {
    MonotonePieces out;
    out.knots.push_back(a);
    if (b > a) {
        const double h = (b - a) / grid;
        double x0 = a;
        double d0 = df(a);
        for (int i = 1; i <= grid; ++i) {
            double x1 = (i == grid) ? b : a + i * h;
            double d1 = df(x1);
            bool change = (d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0);
            if (change) {
                double r = bisect_root(df, x0, x1, 1e-15 * std::max(1.0, std::abs(x1)));
                // A root of df at an endpoint (e.g. an extremum of f at a) is
                // not an interior turning point.
                const double edge = 1e-10 * (b - a);
                if (r > out.knots.back() + edge && r < b - edge) out.knots.push_back(r);
            }
            if (d1 != 0.0) {
                x0 = x1;
                d0 = d1;
            }
        }
        if (out.knots.back() < b) out.knots.push_back(b);
    }
    out.values.reserve(out.knots.size());
    for (double x : out.knots) out.values.push_back(f(x));
    out.sup = *std::max_element(out.values.begin(), out.values.end());
    out.inf = *std::min_element(out.values.begin(), out.values.end());
    for (std::size_t i = 1; i < out.values.size(); ++i)
        out.tv += std::abs(out.values[i] - out.values[i - 1]);
    return out;
}

double MonotonePieces::variation_to(double x, const std::function<double(double)>& f) const {
    double tvx = 0.0;
    std::size_t i = 1;
    for (; i < knots.size() && knots[i] <= x; ++i) tvx += std::abs(values[i] - values[i - 1]);
    if (x > knots[i - 1]) tvx += std::abs(f(x) - values[i - 1]);
    return tvx;
}

double MonotonePieces::variation_from(double x, const std::function<double(double)>& f) const {
    double tvx = 0.0;
    std::size_t n = knots.size();
    std::size_t i = n - 1;
    for (; i > 0 && knots[i - 1] >= x; --i) tvx += std::abs(values[i] - values[i - 1]);
    if (i > 0 && x < knots[i]) tvx += std::abs(values[i] - f(x));
    return tvx;
}

double dense_total_variation(const std::function<double(double)>& f, double a, double b, int n) {
    double tv = 0.0;
    double prev = f(a);
    for (int i = 1; i <= n; ++i) {
        double cur = f(a + (b - a) * i / n);
        tv += std::abs(cur - prev);
        prev = cur;
    }
    return tv;
}

}  // namespace spheroidal
