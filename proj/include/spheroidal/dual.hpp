#pragma once

#include <complex>
#include <type_traits>

namespace spheroidal {

/// Forward-mode derivative carrier: value plus derivative in one parameter.
/// Used to push d/dlambda through the Frobenius recurrences.
template <class T>
struct Dual {
    T v{};
    T d{};

    Dual() = default;
    Dual(T value) : v(value), d(T{}) {}
    Dual(T value, T deriv) : v(value), d(deriv) {}

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
    Dual& operator/=(const Dual& o) {
        d = (d * o.v - v * o.d) / (o.v * o.v);
        v /= o.v;
        return *this;
    }
};

template <class T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }

template <class T>
    requires(!std::is_same_v<T, double>)
Dual<T> operator*(Dual<T> a, const T& s) { a.v *= s; a.d *= s; return a; }
template <class T>
    requires(!std::is_same_v<T, double>)
Dual<T> operator*(const T& s, Dual<T> a) { a.v *= s; a.d *= s; return a; }
template <class T> Dual<T> operator*(Dual<T> a, double s) { a.v *= s; a.d *= s; return a; }
template <class T> Dual<T> operator*(double s, Dual<T> a) { a.v *= s; a.d *= s; return a; }
template <class T> Dual<T> operator/(Dual<T> a, double s) { a.v /= s; a.d /= s; return a; }

}  // namespace spheroidal
