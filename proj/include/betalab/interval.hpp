#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace betalab {

/// Closed double interval with outward rounding by one ulp per operation.
/// Enough for the few-hundred-term sums used here; not a general interval library.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double x) { return {x, x}; }
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

inline double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
inline double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

inline Interval operator+(Interval a, Interval b) { return {down(a.lo + b.lo), up(a.hi + b.hi)}; }
inline Interval operator-(Interval a, Interval b) { return {down(a.lo - b.hi), up(a.hi - b.lo)}; }

inline Interval operator*(Interval a, Interval b) {
  const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {down(*std::min_element(p, p + 4)), up(*std::max_element(p, p + 4))};
}

/// Requires 0 outside b.
inline Interval operator/(Interval a, Interval b) {
  const double p[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return {down(*std::min_element(p, p + 4)), up(*std::max_element(p, p + 4))};
}

/// Disk in the complex plane: |z - mid| <= rad.
struct ComplexBall {
  std::complex<double> mid;
  double rad = 0.0;

  bool contains(std::complex<double> z) const { return std::abs(z - mid) <= rad; }
};

}  // namespace betalab
