#pragma once

#include <functional>
#include <vector>

namespace spheroidal {

/// A function split into monotone pieces by the sign changes of its derivative.
struct MonotonePieces {
    std::vector<double> knots;   ///< a, interior critical points, b (ascending)
    std::vector<double> values;  ///< f at the knots
    double tv = 0.0;             ///< total variation on [a, b]
    double sup = 0.0;
    double inf = 0.0;

    /// Variation of f between a and x (x inside [a, b]); uses the knots plus f(x).
    double variation_to(double x, const std::function<double(double)>& f) const;
    /// Variation of f between x and b.
    double variation_from(double x, const std::function<double(double)>& f) const;
};

/// Locates the sign changes of df on a grid of `grid` cells, refines each by
/// bisection, and evaluates f at the resulting knots. Total variation and
/// extrema are then exact up to the root tolerance, provided no two critical
/// points share a grid cell.
MonotonePieces analyze_monotone(const std::function<double(double)>& f,
                                const std::function<double(double)>& df, double a, double b,
                                int grid = 1024);

/// Brute-force total variation on a uniform grid (reference for tests).
double dense_total_variation(const std::function<double(double)>& f, double a, double b, int n);

/// Root of a continuous function with a sign change on [a, b], by bisection.
double bisect_root(const std::function<double(double)>& f, double a, double b, double tol = 1e-13);

}  // namespace spheroidal
