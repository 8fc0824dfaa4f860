#pragma once

#include <gmpxx.h>

#include <string>
#include <utility>

namespace betalab {

/// Exact element u + v*sqrt(d) of a real quadratic field, u and v rational and
/// d a square-free integer >= 2. Rationals are stored with v = 0 and d = 1.
///
/// Binary operations require both operands to live in the same field, or one
/// of them to be rational.
class QuadNumber {
 public:
  QuadNumber() : u_(0), v_(0), d_(1) {}
  QuadNumber(long value) : u_(value), v_(0), d_(1) {}  // NOLINT(google-explicit-constructor)
  explicit QuadNumber(mpq_class u) : u_(std::move(u)), v_(0), d_(1) { u_.canonicalize(); }
  /// Normalizes d: square factors move into v; a perfect square collapses to a rational.
  QuadNumber(mpq_class u, mpq_class v, long d);

  const mpq_class& rational_part() const { return u_; }
  const mpq_class& radical_coeff() const { return v_; }
  long radicand() const { return d_; }
  bool is_rational() const { return v_ == 0; }

  int sign() const;
  mpz_class floor() const;

  /// Integers lo <= value * 2^bits <= hi with hi - lo <= 2 (lo == hi when the
  /// scaled value is an integer).
  std::pair<mpz_class, mpz_class> enclose(long bits) const;

  double to_double() const;
  std::string str() const;

  /// True when a and b can be combined without leaving a single quadratic field.
  static bool compatible(const QuadNumber& a, const QuadNumber& b) {
    return a.d_ == 1 || b.d_ == 1 || a.d_ == b.d_;
  }

  friend QuadNumber operator+(const QuadNumber& a, const QuadNumber& b);
  friend QuadNumber operator-(const QuadNumber& a, const QuadNumber& b);
  friend QuadNumber operator*(const QuadNumber& a, const QuadNumber& b);
  friend QuadNumber operator-(const QuadNumber& a);
  friend bool operator==(const QuadNumber& a, const QuadNumber& b) {
    return a.u_ == b.u_ && a.v_ == b.v_ && (a.v_ == 0 || a.d_ == b.d_);
  }
  friend bool operator<(const QuadNumber& a, const QuadNumber& b) { return (a - b).sign() < 0; }

 private:
  static long common_field(const QuadNumber& a, const QuadNumber& b);

  mpq_class u_;
  mpq_class v_;
  long d_;
};

/// Ceiling of a rational.
mpz_class ceil_q(const mpq_class& q);
/// Floor of a rational.
mpz_class floor_q(const mpq_class& q);

/// Parses "p", "-p", "p/q" or a plain decimal "d.ddd" into an exact rational.
mpq_class parse_rational(const std::string& text);

}  // namespace betalab
