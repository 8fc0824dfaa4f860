#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "betalab/quadratic.hpp"

namespace betalab {

/// Dyadic interval [lo, hi] * 2^-scale, optionally carrying the exact value it
/// encloses. Points of [0,1) satisfy 0 <= lo <= hi < 2^scale; the seed 1 of the
/// orbit of one is the only closed-endpoint exception.
struct Enclosure {
  mpz_class lo;
  mpz_class hi;
  long scale = 0;
  std::optional<QuadNumber> exact;

  static Enclosure from_exact(const QuadNumber& value, long scale);
  /// Exact dyadic point num * 2^-scale.
  static Enclosure dyadic(const mpz_class& num, long scale);
  /// Exact dyadic point equal to a finite double.
  static Enclosure from_double(double x);

  /// Same value at another scale: recomputed from the exact value when present,
  /// otherwise rescaled with outward rounding.
  Enclosure at_scale(long new_scale) const;

  bool is_point() const { return lo == hi; }
  /// Lower endpoint rounded down / upper endpoint rounded up to double.
  double lo_d() const;
  double hi_d() const;
  double mid() const;
  double width() const;
  mpq_class lo_q() const;
  mpq_class hi_q() const;
};

/// Leading k decimal digits after the point shared by both endpoints, or nullopt
/// when the enclosure is too wide to certify them.
std::optional<std::string> certified_decimal_digits(const Enclosure& e, int k);

enum class BetaKind { Rational, Quadratic, BigFloat };

const char* to_string(BetaKind kind);

/// Certified base b > 1 of the map T_b(x) = b x mod 1.
class BetaNumber {
 public:
  /// Exact rational or quadratic base.
  static BetaNumber exact(const QuadNumber& value, long requested_bits = 128, std::string descriptor = {});
  /// Decimal base: exact decimal value, or known only to `known_bits` bits when given.
  static BetaNumber bigfloat(const mpq_class& decimal, std::optional<long> known_bits, long requested_bits = 128,
                             std::string descriptor = {});

  BetaKind kind() const { return kind_; }
  bool is_exact() const { return exact_.has_value(); }
  const std::optional<QuadNumber>& exact_value() const { return exact_; }
  std::optional<long> known_bits() const { return known_bits_; }
  long floor_b() const { return floor_; }
  long ceil_b() const { return ceil_; }
  const Enclosure& value_enclosure() const { return enclosure_; }
  const std::string& descriptor() const { return descriptor_; }

  /// Enclosure of b at the given scale. For a precision-limited bigfloat the width
  /// never drops below its error radius.
  Enclosure enclosure(long scale) const;

  double to_double() const { return approx_; }
  double log2() const;
  bool is_integer() const { return floor_ == ceil_; }

 private:
  BetaNumber() = default;
  void finish(long requested_bits);

  BetaKind kind_ = BetaKind::Rational;
  std::optional<QuadNumber> exact_;
  mpq_class decimal_;
  std::optional<long> known_bits_;
  long floor_ = 0;
  long ceil_ = 0;
  double approx_ = 0.0;
  Enclosure enclosure_;
  std::string descriptor_;
};

/// A parsed real: exact quadratic/rational, or a decimal literal with optional bit limit.
struct ParsedReal {
  std::optional<QuadNumber> exact;
  mpq_class decimal;
  std::optional<long> known_bits;
  bool is_decimal = false;
};

/// Grammar: INT | "p/q" | "(u+v*sqrtD)/w" (also "u+sqrtD", "sqrt(D)") | "d.ddd[@bits]".
ParsedReal parse_real(const std::string& text);

/// Parses a base descriptor; rejects values <= 1 and enclosures straddling an integer.
BetaNumber parse_beta(const std::string& text, long requested_bits = 128);

/// Parses a point of [0,1) (same grammar). Decimal literals become exact rationals.
Enclosure parse_point(const std::string& text, long scale = 128);

struct PrecisionBudget {
  long initial_bits = 0;
  long max_bits = 0;

  /// ceil(N log2 b) + 64 + ceil(digits log2 10); max = 16x initial unless given.
  static PrecisionBudget for_orbit(const BetaNumber& b, long n_steps, int digits_required,
                                   std::optional<long> max_bits = std::nullopt);
};

struct TbStep {
  Enclosure value;
  long digit = 0;
};

/// One application of T_b. Exact when both b and x carry compatible exact values,
/// interval arithmetic at x.scale otherwise. Throws AmbiguousBranch when the
/// enclosure of b*x contains an integer in its interior or upper end.
TbStep tb_apply(const BetaNumber& b, const Enclosure& x);

enum class OrbitPath { Auto, Exact, Interval };

struct OrbitOptions {
  int digits_required = 8;
  OrbitPath path = OrbitPath::Auto;
  std::optional<long> initial_bits;
  std::optional<long> max_bits;
};

/// points[i] = T_b^{i+1}(x0); digits[i] = floor(b T_b^i(x0)).
struct Orbit {
  std::vector<Enclosure> points;
  std::vector<long> digits;
  long bits = 0;
  bool exact = false;
};

/// N iterates of T_b with every enclosure no wider than 10^-digits_required.
/// The interval path restarts with doubled precision on any ambiguous branch.
Orbit tb_orbit(const BetaNumber& b, const Enclosure& x0, long n_steps, const OrbitOptions& options = {});

/// Lightweight interval orbit for numerical kernels: midpoints of x_0 .. x_N
/// (N + 1 values, starting with the seed) and the widest enclosure observed.
struct OrbitSamples {
  std::vector<double> points;
  double max_width = 0.0;
  long bits = 0;
};
OrbitSamples orbit_samples(const BetaNumber& b, const Enclosure& x0, long n_steps, int digits_required = 8,
                           std::optional<long> max_bits = std::nullopt);

}  // namespace betalab
