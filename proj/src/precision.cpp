#include "betalab/precision.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <regex>

#include "betalab/errors.hpp"

namespace betalab {
namespace {

constexpr double kLog2Of10 = 3.3219280948873623;

double scaled_to_double(const mpz_class& z, long scale) {
  if (z == 0) return 0.0;
  long exp = 0;
  double m = mpz_get_d_2exp(&exp, z.get_mpz_t());  // truncated towards zero
  return std::ldexp(m, static_cast<int>(exp - scale));
}

bool scaled_is_exact_double(const mpz_class& z) {
  // exact iff the magnitude fits in 53 significant bits
  if (z == 0) return true;
  mpz_class a = abs(z);
  mp_bitcnt_t low = mpz_scan1(a.get_mpz_t(), 0);
  return mpz_sizeinbase(a.get_mpz_t(), 2) - low <= 53;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

// ---------------------------------------------------------------- Enclosure

Enclosure Enclosure::from_exact(const QuadNumber& value, long scale) {
  auto [lo, hi] = value.enclose(scale);
  return Enclosure{std::move(lo), std::move(hi), scale, value};
}

Enclosure Enclosure::dyadic(const mpz_class& num, long scale) { return Enclosure{num, num, scale, std::nullopt}; }

Enclosure Enclosure::from_double(double x) {
  if (!std::isfinite(x)) throw DomainError("non-finite point");
  if (x == 0.0) return dyadic(0, 0);
  int exp = 0;
  double m = std::frexp(x, &exp);
  mpz_class num(std::ldexp(m, 53));
  long shift = static_cast<long>(exp) - 53;
  if (shift >= 0) {
    num <<= static_cast<mp_bitcnt_t>(shift);
    return dyadic(num, 0);
  }
  long scale = -shift;
  // strip trailing zero bits to keep the scale minimal
  mp_bitcnt_t low = mpz_scan1(num.get_mpz_t(), 0);
  long strip = std::min<long>(static_cast<long>(low), scale);
  mpz_fdiv_q_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(strip));
  return dyadic(num, scale - strip);
}

Enclosure Enclosure::at_scale(long new_scale) const {
  if (exact) return from_exact(*exact, new_scale);
  Enclosure out{lo, hi, new_scale, std::nullopt};
  if (new_scale >= scale) {
    auto shift = static_cast<mp_bitcnt_t>(new_scale - scale);
    out.lo <<= shift;
    out.hi <<= shift;
  } else {
    auto shift = static_cast<mp_bitcnt_t>(scale - new_scale);
    mpz_fdiv_q_2exp(out.lo.get_mpz_t(), lo.get_mpz_t(), shift);
    mpz_cdiv_q_2exp(out.hi.get_mpz_t(), hi.get_mpz_t(), shift);
  }
  return out;
}

double Enclosure::lo_d() const {
  double d = scaled_to_double(lo, scale);
  if (!scaled_is_exact_double(lo) && lo < 0) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
  return d;
}

double Enclosure::hi_d() const {
  double d = scaled_to_double(hi, scale);
  if (!scaled_is_exact_double(hi) && hi > 0) d = std::nextafter(d, std::numeric_limits<double>::infinity());
  return d;
}

double Enclosure::mid() const {
  mpz_class s = lo + hi;
  return scaled_to_double(s, scale + 1);
}

double Enclosure::width() const {
  mpz_class w = hi - lo;
  return scaled_to_double(w, scale);
}

mpq_class Enclosure::lo_q() const {
  mpq_class q(lo);
  mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(scale));
  return q;
}

mpq_class Enclosure::hi_q() const {
  mpq_class q(hi);
  mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(scale));
  return q;
}

std::optional<std::string> certified_decimal_digits(const Enclosure& e, int k) {
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(k));
  mpz_class tlo = e.lo * p10, thi = e.hi * p10;
  mpz_fdiv_q_2exp(tlo.get_mpz_t(), tlo.get_mpz_t(), static_cast<mp_bitcnt_t>(e.scale));
  mpz_fdiv_q_2exp(thi.get_mpz_t(), thi.get_mpz_t(), static_cast<mp_bitcnt_t>(e.scale));
  if (tlo != thi) return std::nullopt;
  mpz_class frac;
  mpz_fdiv_r(frac.get_mpz_t(), tlo.get_mpz_t(), p10.get_mpz_t());
  std::string s = frac.get_str();
  if (static_cast<int>(s.size()) < k) s.insert(0, static_cast<std::size_t>(k) - s.size(), '0');
  return s;
}

// ---------------------------------------------------------------- BetaNumber

const char* to_string(BetaKind kind) {
  switch (kind) {
    case BetaKind::Rational:
      return "rational";
    case BetaKind::Quadratic:
      return "quadratic";
    case BetaKind::BigFloat:
      return "bigfloat";
  }
  return "?";
}

BetaNumber BetaNumber::exact(const QuadNumber& value, long requested_bits, std::string descriptor) {
  if ((value - QuadNumber(1)).sign() <= 0) throw DomainError("base must be > 1");
  BetaNumber b;
  b.kind_ = value.is_rational() ? BetaKind::Rational : BetaKind::Quadratic;
  b.exact_ = value;
  mpz_class f = value.floor();
  b.floor_ = f.get_si();
  bool integral = value.is_rational() && value.rational_part().get_den() == 1;
  b.ceil_ = integral ? b.floor_ : b.floor_ + 1;
  b.approx_ = value.to_double();
  b.descriptor_ = descriptor.empty() ? value.str() : std::move(descriptor);
  b.finish(requested_bits);
  return b;
}

BetaNumber BetaNumber::bigfloat(const mpq_class& decimal, std::optional<long> known_bits, long requested_bits,
                                std::string descriptor) {
  BetaNumber b;
  b.kind_ = BetaKind::BigFloat;
  b.decimal_ = decimal;
  b.known_bits_ = known_bits;
  b.approx_ = decimal.get_d();
  b.descriptor_ = descriptor.empty() ? decimal.get_str() : std::move(descriptor);
  mpq_class radius = 0;
  if (known_bits) {
    if (*known_bits < 2) throw DomainError("bigfloat precision must be at least 2 bits");
    radius = 1;
    mpq_div_2exp(radius.get_mpq_t(), radius.get_mpq_t(), static_cast<mp_bitcnt_t>(*known_bits));
  }
  mpq_class lo = decimal - radius, hi = decimal + radius;
  if (lo <= 1) throw DomainError("base must be > 1");
  mpz_class flo = floor_q(lo), fhi = floor_q(hi);
  bool lo_integral = lo.get_den() == 1;
  if (flo != fhi || (radius > 0 && lo_integral)) throw DomainError("base enclosure straddles an integer");
  b.floor_ = flo.get_si();
  b.ceil_ = (radius == 0 && lo_integral) ? b.floor_ : b.floor_ + 1;
  b.finish(requested_bits);
  return b;
}

void BetaNumber::finish(long requested_bits) {
  if (requested_bits < 8) throw DomainError("requested precision too small");
  enclosure_ = enclosure(requested_bits);
}

Enclosure BetaNumber::enclosure(long scale) const {
  if (exact_) return Enclosure::from_exact(*exact_, scale);
  mpq_class radius = 0;
  if (known_bits_) {
    radius = 1;
    mpq_div_2exp(radius.get_mpq_t(), radius.get_mpq_t(), static_cast<mp_bitcnt_t>(*known_bits_));
  }
  mpq_class lo = decimal_ - radius, hi = decimal_ + radius;
  mpq_mul_2exp(lo.get_mpq_t(), lo.get_mpq_t(), static_cast<mp_bitcnt_t>(scale));
  mpq_mul_2exp(hi.get_mpq_t(), hi.get_mpq_t(), static_cast<mp_bitcnt_t>(scale));
  return Enclosure{floor_q(lo), ceil_q(hi), scale, std::nullopt};
}

double BetaNumber::log2() const { return std::log2(approx_); }

// ---------------------------------------------------------------- parsing

ParsedReal parse_real(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw DomainError("empty descriptor");
  static const std::regex decimal_re(R"(^([+-]?\d*\.\d+)(?:@(\d+))?$)");
  static const std::regex rational_re(R"(^[+-]?\d+(?:/\d+)?$)");
  static const std::regex outer_re(R"(^\((.*)\)\s*(?:/\s*(\d+))?$)");
  static const std::regex inner_re(
      R"(^\s*([+-]?\d+(?:/\d+)?)?\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*)?\s*sqrt\s*(\()?\s*(\d+)\s*(\))?\s*$)");

  ParsedReal out;
  std::smatch m;
  if (std::regex_match(text, m, decimal_re)) {
    out.is_decimal = true;
    out.decimal = parse_rational(m[1].str());
    if (m[2].matched) out.known_bits = std::stol(m[2].str());
    return out;
  }
  if (std::regex_match(text, rational_re)) {
    out.exact = QuadNumber(parse_rational(text));
    return out;
  }
  if (text.find("sqrt") == std::string::npos) throw DomainError("malformed descriptor '" + raw + "'");

  std::string inner = text;
  mpz_class w = 1;
  if (std::regex_match(text, m, outer_re)) {
    inner = m[1].str();
    if (m[2].matched) w = mpz_class(m[2].str());
  }
  std::smatch q;
  if (!std::regex_match(inner, q, inner_re)) throw DomainError("malformed quadratic descriptor '" + raw + "'");
  if (q[1].matched && !q[2].matched && !q[3].matched) throw DomainError("missing sign in '" + raw + "'");
  if (q[4].matched != q[6].matched) throw DomainError("unbalanced parenthesis in '" + raw + "'");
  if (w == 0) throw DomainError("zero denominator in '" + raw + "'");
  mpq_class u = q[1].matched ? parse_rational(q[1].str()) : mpq_class(0);
  mpq_class v = q[3].matched ? parse_rational(q[3].str()) : mpq_class(1);
  if (q[2].matched && q[2].str() == "-") v = -v;
  long d = std::stol(q[5].str());
  if (d <= 0) throw DomainError("radicand must be positive in '" + raw + "'");
  out.exact = QuadNumber(u / w, v / w, d);
  return out;
}

BetaNumber parse_beta(const std::string& text, long requested_bits) {
  ParsedReal r = parse_real(text);
  if (r.is_decimal) return BetaNumber::bigfloat(r.decimal, r.known_bits, requested_bits, trim(text));
  return BetaNumber::exact(*r.exact, requested_bits, trim(text));
}

Enclosure parse_point(const std::string& text, long scale) {
  ParsedReal r = parse_real(text);
  if (r.is_decimal && r.known_bits) {
    mpq_class radius = 1;
    mpq_div_2exp(radius.get_mpq_t(), radius.get_mpq_t(), static_cast<mp_bitcnt_t>(*r.known_bits));
    mpq_class lo = r.decimal - radius, hi = r.decimal + radius;
    if (lo < 0) lo = 0;
    if (hi >= 1) throw DomainError("point must lie in [0,1)");
    mpq_mul_2exp(lo.get_mpq_t(), lo.get_mpq_t(), static_cast<mp_bitcnt_t>(scale));
    mpq_mul_2exp(hi.get_mpq_t(), hi.get_mpq_t(), static_cast<mp_bitcnt_t>(scale));
    return Enclosure{floor_q(lo), ceil_q(hi), scale, std::nullopt};
  }
  QuadNumber v = r.is_decimal ? QuadNumber(r.decimal) : *r.exact;
  if (v.sign() < 0 || (v - QuadNumber(1)).sign() >= 0) throw DomainError("point must lie in [0,1)");
  return Enclosure::from_exact(v, scale);
}

PrecisionBudget PrecisionBudget::for_orbit(const BetaNumber& b, long n_steps, int digits_required,
                                           std::optional<long> max_bits) {
  PrecisionBudget p;
  p.initial_bits = static_cast<long>(std::ceil(static_cast<double>(n_steps) * b.log2())) + 64 +
                   static_cast<long>(std::ceil(digits_required * kLog2Of10));
  p.max_bits = max_bits ? *max_bits : 16 * p.initial_bits;
  if (p.max_bits < p.initial_bits) p.max_bits = p.initial_bits;
  return p;
}

// ---------------------------------------------------------------- T_b

namespace {

bool exact_step_possible(const BetaNumber& b, const Enclosure& x) {
  return b.is_exact() && x.exact && QuadNumber::compatible(*b.exact_value(), *x.exact);
}

/// Fixed-point interval orbit at scale P. Emits x_0 .. x_N through `sink(i, lo, hi, digit)`
/// where digit is floor(b x_{i-1}) for i >= 1. Returns false if a branch is ambiguous
/// or an enclosure exceeds `width_cap`.
template <class Sink>
bool run_interval(const Enclosure& b_enc, const Enclosure& x0, long n_steps, const mpz_class& width_cap,
                  Sink&& sink) {
  const long p = b_enc.scale;
  const auto shift = static_cast<mp_bitcnt_t>(p);
  mpz_class xlo = x0.lo, xhi = x0.hi, plo, phi, dlo, dhi;
  if (xhi - xlo > width_cap) return false;
  sink(0L, xlo, xhi, 0L);
  for (long i = 1; i <= n_steps; ++i) {
    mpz_mul(plo.get_mpz_t(), b_enc.lo.get_mpz_t(), xlo.get_mpz_t());
    mpz_mul(phi.get_mpz_t(), b_enc.hi.get_mpz_t(), xhi.get_mpz_t());
    mpz_fdiv_q_2exp(plo.get_mpz_t(), plo.get_mpz_t(), shift);
    mpz_cdiv_q_2exp(phi.get_mpz_t(), phi.get_mpz_t(), shift);
    mpz_fdiv_q_2exp(dlo.get_mpz_t(), plo.get_mpz_t(), shift);
    mpz_fdiv_q_2exp(dhi.get_mpz_t(), phi.get_mpz_t(), shift);
    if (dlo != dhi) return false;
    mpz_class base = dlo;
    base <<= shift;
    xlo = plo - base;
    xhi = phi - base;
    if (xhi - xlo > width_cap) return false;
    sink(i, xlo, xhi, dlo.get_si());
  }
  return true;
}

mpz_class width_cap_for(long scale, int digits_required) {
  mpz_class cap = 1, p10;
  cap <<= static_cast<mp_bitcnt_t>(scale);
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(digits_required));
  return cap / p10;
}

void check_seed(const Enclosure& x0) {
  if (x0.lo < 0) throw DomainError("orbit seed must be >= 0");
  mpz_class one = 1;
  one <<= static_cast<mp_bitcnt_t>(x0.scale);
  if (x0.hi > one) throw DomainError("orbit seed must be <= 1");
}

}  // namespace

TbStep tb_apply(const BetaNumber& b, const Enclosure& x) {
  check_seed(x);
  if (exact_step_possible(b, x)) {
    QuadNumber y = *b.exact_value() * *x.exact;
    mpz_class k = y.floor();
    QuadNumber r = y - QuadNumber(mpq_class(k));
    return {Enclosure::from_exact(r, std::max(x.scale, 64L)), k.get_si()};
  }
  const long s = std::max(x.scale, 64L);
  Enclosure xs = x.at_scale(s);
  Enclosure bs = b.enclosure(s);
  const auto shift = static_cast<mp_bitcnt_t>(s);
  mpz_class plo = bs.lo * xs.lo, phi = bs.hi * xs.hi, dlo, dhi;
  mpz_fdiv_q_2exp(plo.get_mpz_t(), plo.get_mpz_t(), shift);
  mpz_cdiv_q_2exp(phi.get_mpz_t(), phi.get_mpz_t(), shift);
  mpz_fdiv_q_2exp(dlo.get_mpz_t(), plo.get_mpz_t(), shift);
  mpz_fdiv_q_2exp(dhi.get_mpz_t(), phi.get_mpz_t(), shift);
  if (dlo != dhi) throw AmbiguousBranch("enclosure of b*x contains an integer");
  mpz_class base = dlo;
  base <<= shift;
  return {Enclosure{plo - base, phi - base, s, std::nullopt}, dlo.get_si()};
}

Orbit tb_orbit(const BetaNumber& b, const Enclosure& x0, long n_steps, const OrbitOptions& options) {
  if (n_steps < 1) throw DomainError("orbit length must be >= 1");
  if (options.digits_required < 1) throw DomainError("digits_required must be >= 1");
  check_seed(x0);
  const bool exact_ok = exact_step_possible(b, x0);
  OrbitPath path = options.path;
  if (path == OrbitPath::Auto) path = exact_ok ? OrbitPath::Exact : OrbitPath::Interval;
  if (path == OrbitPath::Exact && !exact_ok) throw DomainError("exact orbit needs exact b and x0 in one field");

  Orbit out;
  out.points.reserve(static_cast<std::size_t>(n_steps));
  out.digits.reserve(static_cast<std::size_t>(n_steps));
  if (path == OrbitPath::Exact) {
    out.exact = true;
    out.bits = static_cast<long>(std::ceil(options.digits_required * kLog2Of10)) + 16;
    const QuadNumber& bq = *b.exact_value();
    QuadNumber x = *x0.exact;
    for (long i = 0; i < n_steps; ++i) {
      QuadNumber y = bq * x;
      mpz_class k = y.floor();
      x = y - QuadNumber(mpq_class(k));
      out.digits.push_back(k.get_si());
      out.points.push_back(Enclosure::from_exact(x, out.bits));
    }
    return out;
  }

  PrecisionBudget budget = PrecisionBudget::for_orbit(b, n_steps, options.digits_required, options.max_bits);
  long p = options.initial_bits ? *options.initial_bits : budget.initial_bits;
  for (;;) {
    Enclosure b_enc = b.enclosure(p);
    Enclosure seed = x0.at_scale(p);
    seed.exact.reset();
    mpz_class cap = width_cap_for(p, options.digits_required);
    out.points.clear();
    out.digits.clear();
    bool ok = run_interval(b_enc, seed, n_steps, cap,
                           [&](long i, const mpz_class& lo, const mpz_class& hi, long digit) {
                             if (i == 0) return;
                             out.points.push_back(Enclosure{lo, hi, p, std::nullopt});
                             out.digits.push_back(digit);
                           });
    if (ok) {
      out.bits = p;
      return out;
    }
    p *= 2;
    if (p > budget.max_bits) throw PrecisionExhausted("orbit could not be certified within the precision budget");
  }
}

OrbitSamples orbit_samples(const BetaNumber& b, const Enclosure& x0, long n_steps, int digits_required,
                           std::optional<long> max_bits) {
  if (n_steps < 0) throw DomainError("orbit length must be >= 0");
  check_seed(x0);
  PrecisionBudget budget = PrecisionBudget::for_orbit(b, n_steps, digits_required, max_bits);
  OrbitSamples out;
  out.points.reserve(static_cast<std::size_t>(n_steps) + 1);
  for (long p = budget.initial_bits;; p *= 2) {
    if (p > budget.max_bits) throw PrecisionExhausted("orbit could not be certified within the precision budget");
    Enclosure b_enc = b.enclosure(p);
    Enclosure seed = x0.at_scale(p);
    mpz_class cap = width_cap_for(p, digits_required);
    out.points.clear();
    mpz_class widest = 0, sum;
    bool ok = run_interval(b_enc, seed, n_steps, cap, [&](long, const mpz_class& lo, const mpz_class& hi, long) {
      sum = lo + hi;
      out.points.push_back(scaled_to_double(sum, p + 1));
      if (hi - lo > widest) widest = hi - lo;
    });
    if (ok) {
      out.bits = p;
      out.max_width = scaled_to_double(widest, p);
      return out;
    }
  }
}

}  // namespace betalab
