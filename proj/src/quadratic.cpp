#include "betalab/quadratic.hpp"

#include <cctype>
#include <cmath>

#include "betalab/errors.hpp"

namespace betalab {

mpz_class floor_q(const mpq_class& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

mpz_class ceil_q(const mpq_class& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

QuadNumber::QuadNumber(mpq_class u, mpq_class v, long d) : u_(std::move(u)), v_(std::move(v)), d_(d) {
  u_.canonicalize();
  v_.canonicalize();
  if (d_ < 1) throw DomainError("quadratic radicand must be a positive integer");
  // pull square factors of d into v
  long square = 1;
  for (long f = 2; f * f <= d_; ++f) {
    while (d_ % (f * f) == 0) {
      d_ /= f * f;
      square *= f;
    }
  }
  v_ *= square;
  if (d_ == 1) {
    u_ += v_;
    v_ = 0;
  }
  if (v_ == 0) d_ = 1;
}

long QuadNumber::common_field(const QuadNumber& a, const QuadNumber& b) {
  if (!compatible(a, b)) throw DomainError("operands live in different quadratic fields");
  return a.d_ != 1 ? a.d_ : b.d_;
}

QuadNumber operator+(const QuadNumber& a, const QuadNumber& b) {
  long d = QuadNumber::common_field(a, b);
  return QuadNumber(a.u_ + b.u_, a.v_ + b.v_, d);
}

QuadNumber operator-(const QuadNumber& a, const QuadNumber& b) {
  long d = QuadNumber::common_field(a, b);
  return QuadNumber(a.u_ - b.u_, a.v_ - b.v_, d);
}

QuadNumber operator-(const QuadNumber& a) { return QuadNumber(-a.u_, -a.v_, a.d_); }

QuadNumber operator*(const QuadNumber& a, const QuadNumber& b) {
  long d = QuadNumber::common_field(a, b);
  mpq_class u = a.u_ * b.u_ + a.v_ * b.v_ * d;
  mpq_class v = a.u_ * b.v_ + a.v_ * b.u_;
  return QuadNumber(std::move(u), std::move(v), d);
}

int QuadNumber::sign() const {
  int su = sgn(u_);
  int sv = sgn(v_);
  if (sv == 0) return su;
  if (su == 0 || su == sv) return sv;
  // opposite signs: compare u^2 with v^2 d
  int c = cmp(u_ * u_, v_ * v_ * d_);
  return su > 0 ? c : -c;
}

std::pair<mpz_class, mpz_class> QuadNumber::enclose(long bits) const {
  if (v_ == 0) {
    mpq_class scaled = u_;
    mpq_mul_2exp(scaled.get_mpq_t(), u_.get_mpq_t(), static_cast<mp_bitcnt_t>(bits));
    return {floor_q(scaled), ceil_q(scaled)};
  }
  // guard bits absorb the |v| magnification of the sqrt enclosure
  long guard = static_cast<long>(mpz_sizeinbase(v_.get_num_mpz_t(), 2)) + 4;
  long work = bits + guard;
  mpz_class radicand = d_;
  radicand <<= static_cast<mp_bitcnt_t>(2 * work);
  mpz_class s;
  mpz_sqrt(s.get_mpz_t(), radicand.get_mpz_t());  // s < sqrt(d) 2^work < s + 1
  mpq_class us = u_;
  mpq_mul_2exp(us.get_mpq_t(), u_.get_mpq_t(), static_cast<mp_bitcnt_t>(work));
  mpq_class a = us + v_ * mpq_class(s);
  mpq_class b = us + v_ * mpq_class(s + 1);
  if (v_ < 0) std::swap(a, b);
  mpz_class lo = floor_q(a);
  mpz_class hi = ceil_q(b);
  mpz_fdiv_q_2exp(lo.get_mpz_t(), lo.get_mpz_t(), static_cast<mp_bitcnt_t>(guard));
  mpz_cdiv_q_2exp(hi.get_mpz_t(), hi.get_mpz_t(), static_cast<mp_bitcnt_t>(guard));
  return {lo, hi};
}

mpz_class QuadNumber::floor() const {
  if (v_ == 0) return floor_q(u_);
  // irrational values are never integers, so refinement terminates
  for (long bits = 64;; bits *= 2) {
    auto [lo, hi] = enclose(bits);
    mpz_class flo, fhi;
    mpz_fdiv_q_2exp(flo.get_mpz_t(), lo.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
    mpz_fdiv_q_2exp(fhi.get_mpz_t(), hi.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
    if (flo == fhi) return flo;
  }
}

double QuadNumber::to_double() const {
  if (v_ == 0) return u_.get_d();
  auto [lo, hi] = enclose(80);
  mpz_class mid = (lo + hi) / 2;
  return std::ldexp(mid.get_d(), -80);
}

std::string QuadNumber::str() const {
  if (v_ == 0) return u_.get_str();
  return u_.get_str() + (v_ < 0 ? "-" : "+") + mpq_class(abs(v_)).get_str() + "*sqrt" + std::to_string(d_);
}

mpq_class parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw DomainError("empty number");
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    i = 1;
  }
  std::string body = s.substr(i);
  auto digits_only = [](const std::string& t) {
    if (t.empty()) return false;
    for (char c : t)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  mpq_class q;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    std::string p = body.substr(0, slash), r = body.substr(slash + 1);
    if (!digits_only(p) || !digits_only(r)) throw DomainError("malformed rational '" + text + "'");
    mpz_class den(r);
    if (den == 0) throw DomainError("zero denominator in '" + text + "'");
    q = mpq_class(mpz_class(p), den);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    std::string ip = body.substr(0, dot), fp = body.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !digits_only(ip)) || (!fp.empty() && !digits_only(fp)))
      throw DomainError("malformed decimal '" + text + "'");
    mpz_class num(ip.empty() ? std::string("0") : ip);
    mpz_class den = 1;
    for (char c : fp) {
      num = num * 10 + (c - '0');
      den *= 10;
    }
    q = mpq_class(num, den);
  } else {
    if (!digits_only(body)) throw DomainError("malformed number '" + text + "'");
    q = mpq_class(mpz_class(body));
  }
  q.canonicalize();
  return neg ? mpq_class(-q) : q;
}

}  // namespace betalab
