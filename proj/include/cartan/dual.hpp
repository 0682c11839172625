#pragma once

#include <Eigen/Core>
#include <cmath>

namespace cartan::ad {

/// Forward-mode dual number carrying one directional derivative. Nesting
/// (Dual<Dual<double>> and deeper) yields exact higher derivatives.
template <class T>
struct Dual {
  T v{};  // value
  T d{};  // derivative along the active direction

  Dual() = default;
  Dual(double x) : v(x), d(T(0)) {}  // NOLINT: implicit promotion intended
  Dual(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v = v * o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v = v / o.v;
    return *this;
  }
};

template <class T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T>
Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T>
Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T>
Dual<T> operator-(const Dual<T>& a) { return {T(0) - a.v, T(0) - a.d}; }
template <class T>
Dual<T> operator+(const Dual<T>& a) { return a; }

template <class T>
Dual<T> operator+(double a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <class T>
Dual<T> operator+(const Dual<T>& a, double b) { return a + Dual<T>(b); }
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) { return a - Dual<T>(b); }
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) { return Dual<T>(a) * b; }
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) { return a * Dual<T>(b); }
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) { return a / Dual<T>(b); }

// Comparisons act on values; used only for pivot selection and bounds checks.
inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) { return value_of(x.v); }

template <class T>
bool operator<(const Dual<T>& a, const Dual<T>& b) { return value_of(a) < value_of(b); }
template <class T>
bool operator>(const Dual<T>& a, const Dual<T>& b) { return value_of(a) > value_of(b); }
template <class T>
bool operator==(const Dual<T>& a, const Dual<T>& b) { return value_of(a) == value_of(b); }
template <class T>
bool operator!=(const Dual<T>& a, const Dual<T>& b) { return !(a == b); }

using std::exp;
using std::log;
using std::pow;
using std::sqrt;

template <class T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, a.d * e};
}

template <class T>
Dual<T> log(const Dual<T>& a) {
  return {log(a.v), a.d / a.v};
}

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}

template <class T>
Dual<T> abs(const Dual<T>& a) {
  return value_of(a) < 0.0 ? -a : a;
}

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

}  // namespace cartan::ad

namespace Eigen {

template <class T>
struct NumTraits<cartan::ad::Dual<T>> : GenericNumTraits<cartan::ad::Dual<T>> {
  using Real = cartan::ad::Dual<T>;
  using NonInteger = cartan::ad::Dual<T>;
  using Nested = cartan::ad::Dual<T>;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 9,
  };
  static Real epsilon() { return Real(NumTraits<double>::epsilon()); }
  static Real dummy_precision() { return Real(NumTraits<double>::dummy_precision()); }
  static int digits10() { return NumTraits<double>::digits10(); }
};

template <class T, class BinOp>
struct ScalarBinaryOpTraits<cartan::ad::Dual<T>, double, BinOp> {
  typedef cartan::ad::Dual<T> ReturnType;
};
template <class T, class BinOp>
struct ScalarBinaryOpTraits<double, cartan::ad::Dual<T>, BinOp> {
  typedef cartan::ad::Dual<T> ReturnType;
};

}  // namespace Eigen
