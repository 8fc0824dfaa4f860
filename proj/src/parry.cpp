#include "betalab/parry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "betalab/beta_shift.hpp"
#include "betalab/errors.hpp"
#include "betalab/random.hpp"

namespace betalab {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Interval to_interval(const Enclosure& e) { return {e.lo_d(), e.hi_d()}; }

bool is_zero(const Enclosure& e) {
  if (e.exact) return e.exact->sign() == 0;
  return e.lo == 0 && e.hi == 0;
}

// sign of x - r: -1, 0, +1, or nullopt when the enclosure straddles x
std::optional<int> compare(const mpq_class& x, const Enclosure& r) {
  mpq_class scaled = x;
  mpq_mul_2exp(scaled.get_mpq_t(), scaled.get_mpq_t(), static_cast<mp_bitcnt_t>(r.scale));
  if (scaled < r.lo) return -1;
  if (scaled > r.hi) return 1;
  if (r.is_point()) return scaled == r.lo ? 0 : (scaled < r.lo ? -1 : 1);
  if (r.exact) {
    QuadNumber q(x);
    if (q == *r.exact) return 0;
    return q < *r.exact ? -1 : 1;
  }
  return std::nullopt;
}

// x < r_n, refining the orbit of 1 when the stored enclosure is too coarse
bool below(const ParryDensity& d, const mpq_class& x, std::size_t n) {
  if (auto c = compare(x, d.orbit()[n])) return *c < 0;
  for (int digits = 40; digits <= 2560; digits *= 2) {
    OrbitOptions opts;
    opts.digits_required = digits;
    try {
      BExpansion e = expansion_of_one(d.base(), static_cast<long>(n), opts);
      if (auto c = compare(x, e.orbit[n - 1])) return *c < 0;
    } catch (const PrecisionExhausted&) {
      break;
    }
  }
  throw PrecisionExhausted("cannot separate the point from T_b^" + std::to_string(n) + "(1)");
}

void check_tol(double tol) {
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
}

}  // namespace

ParryDensity ParryDensity::build(const BetaNumber& b, double tol) {
  check_tol(tol);
  ParryDensity d(b);
  const Enclosure& be = b.value_enclosure();
  const Interval bi = to_interval(be);
  // b^-N / (b - 1) <= tol/2 with b replaced by its lower bound
  const double blo = bi.lo;
  long n = static_cast<long>(std::ceil(std::log(2.0 / (tol * (blo - 1.0))) / std::log(blo)));
  n = std::max(n, 1L);

  std::optional<BExpansion> exp;
  for (int digits = std::max(20, static_cast<int>(-std::log10(tol)) + 6); digits >= 1 && !exp; digits /= 2) {
    OrbitOptions opts;
    opts.digits_required = digits;
    try {
      exp = expansion_of_one(b, n, opts);
    } catch (const PrecisionExhausted&) {
      if (digits == 1) throw;
    }
  }

  d.r_.push_back(b.is_exact() ? Enclosure::from_exact(QuadNumber(1), 64) : Enclosure::dyadic(1, 0));
  bool finite = false;
  for (const Enclosure& e : exp->orbit) {
    if (is_zero(e)) {
      finite = true;
      break;
    }
    d.r_.push_back(e);
  }
  Interval w = Interval::point(1.0);
  const Interval one = Interval::point(1.0);
  for (std::size_t i = 0; i < d.r_.size(); ++i) {
    d.rd_.push_back(to_interval(d.r_[i]));
    d.w_.push_back(w);
    w = w / bi;
  }
  if (!finite) {
    // sum_{k > N} b^-k = b^-N / (b - 1)
    const Interval tail = d.w_.back() / (bi - one);
    d.tail_ = tail.hi;
  }
  return d;
}

ParryDensity ParryDensity::refined(double tol) const {
  check_tol(tol);
  if (tail_ <= tol / 2) return *this;
  return build(base_, tol);
}

Interval density_at(const ParryDensity& d0, double x, double tol) {
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("density_at needs x in [0,1)");
  const ParryDensity d = d0.refined(tol);
  const mpq_class xq(x);
  Interval sum = Interval::point(0.0);
  for (std::size_t n = 0; n < d.orbit().size(); ++n)
    if (n == 0 || below(d, xq, n)) sum = sum + d.weights()[n];
  return {sum.lo, up(sum.hi + d.tail_bound())};
}

Interval normalizer(const ParryDensity& d0, double tol) {
  const ParryDensity d = d0.refined(tol);
  Interval sum = Interval::point(0.0);
  for (std::size_t n = 0; n < d.orbit().size(); ++n) sum = sum + d.weights()[n] * d.r(n);
  return {sum.lo, up(sum.hi + d.tail_bound())};
}

Interval interval_mass(const ParryDensity& d0, double u, double v, double tol) {
  if (!(u >= 0.0 && u < v && v <= 1.0)) throw DomainError("interval_mass needs 0 <= u < v <= 1");
  const ParryDensity d = d0.refined(tol / 4);
  Interval num = Interval::point(0.0);
  for (std::size_t n = 0; n < d.orbit().size(); ++n) {
    // |[u,v) ∩ [0,r)| is nondecreasing in r
    const Interval r = d.r(n);
    const Interval overlap{std::max(0.0, down(std::min(v, r.lo) - u)), std::max(0.0, up(std::min(v, r.hi) - u))};
    num = num + d.weights()[n] * overlap;
  }
  num.hi = up(num.hi + d.tail_bound() * (v - u));
  Interval m = num / normalizer(d, tol / 4);
  return {std::max(0.0, m.lo), std::min(1.0, m.hi)};
}

ComplexBall parry_fourier(const ParryDensity& d0, long m, double tol) {
  if (m == 0) return {1.0, 0.0};
  const ParryDensity d = d0.refined(tol * std::numbers::pi);
  const double twopim = 2.0 * std::numbers::pi * static_cast<double>(m);
  std::complex<double> sum = 0.0;
  double rad = 0.0;
  for (std::size_t n = 0; n < d.orbit().size(); ++n) {
    const Enclosure& r = d.orbit()[n];
    // phase m * mid(r) mod 1, reduced exactly
    const long s = r.scale + 1;
    mpz_class t = (r.lo + r.hi) * m;
    mpz_class mod = mpz_class(1) << s;
    mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), mod.get_mpz_t());
    long e2 = 0;
    const double mant = mpz_get_d_2exp(&e2, t.get_mpz_t());
    const double frac = std::ldexp(mant, static_cast<int>(e2 - s));
    const std::complex<double> term = (std::polar(1.0, 2.0 * std::numbers::pi * frac) - 1.0) /
                                      std::complex<double>(0.0, twopim);
    const Interval w = d.weights()[n];
    sum += w.mid() * term;
    // the primitive (e(mr) - 1)/(2 pi i m) is 1-Lipschitz in r and bounded by 1/(pi |m|)
    rad += w.width() / (std::numbers::pi * std::abs(static_cast<double>(m))) +
           w.hi * (0.5 * d.r(n).width() + 8 * kEps);
  }
  rad += d.tail_bound() / (std::numbers::pi * std::abs(static_cast<double>(m)));
  const Interval z = normalizer(d, tol / 4);
  const double zm = z.mid();
  const std::complex<double> c = sum / zm;
  const double crad = rad / z.lo + std::abs(sum) * (0.5 * z.width()) / (z.lo * zm) + 4 * kEps * std::abs(c);
  return {c, up(crad)};
}

std::vector<std::pair<double, double>> tb_preimage(const BetaNumber& b, double u, double v) {
  if (!(u >= 0.0 && u < v && v <= 1.0)) throw DomainError("tb_preimage needs 0 <= u < v <= 1");
  const double bd = b.to_double();
  std::vector<std::pair<double, double>> out;
  for (long k = 0; k < b.ceil_b(); ++k) {
    const double lo = (static_cast<double>(k) + u) / bd;
    if (lo >= 1.0) break;
    out.emplace_back(lo, std::min(1.0, (static_cast<double>(k) + v) / bd));
  }
  return out;
}

double ParryCdf::operator()(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const std::size_t j = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), x) - breaks.begin()) - 1;
  return cdf[j] + density[j] * (x - breaks[j]);
}

double ParryCdf::inverse(double u) const {
  if (u <= 0.0) return 0.0;
  std::size_t j = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  j = std::min(j, density.size()) - 1;
  const double x = breaks[j] + (u - cdf[j]) / density[j];
  return std::min(x, std::nextafter(breaks[j + 1], 0.0));
}

ParryCdf parry_cdf(const ParryDensity& d) {
  ParryCdf out;
  out.breaks = {0.0, 1.0};
  for (std::size_t n = 1; n < d.orbit().size(); ++n) {
    const double r = d.r(n).mid();
    if (r > 0.0 && r < 1.0) out.breaks.push_back(r);
  }
  std::sort(out.breaks.begin(), out.breaks.end());
  out.breaks.erase(std::unique(out.breaks.begin(), out.breaks.end()), out.breaks.end());

  const std::size_t k = out.breaks.size() - 1;
  out.density.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t n = 0; n < d.orbit().size(); ++n)
      if (n == 0 || d.r(n).mid() > out.breaks[j]) out.density[j] += d.weights()[n].mid();

  out.cdf.assign(k + 1, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    out.cdf[j + 1] = out.cdf[j] + out.density[j] * (out.breaks[j + 1] - out.breaks[j]);
  const double z = out.cdf.back();
  for (double& f : out.density) f /= z;
  for (double& c : out.cdf) c /= z;
  out.cdf.back() = 1.0;
  return out;
}

std::vector<double> parry_sample(const ParryDensity& d, long n, std::uint64_t seed) {
  if (n < 1) throw DomainError("parry_sample needs n >= 1");
  const ParryCdf cdf = parry_cdf(d);
  std::mt19937_64 rng(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& x : out) x = cdf.inverse(uniform01(rng));
  return out;
}

void write_density_csv(std::ostream& out, const ParryDensity& d, long points) {
  if (points < 1) throw DomainError("grid needs at least one point");
  const ParryCdf cdf = parry_cdf(d);
  const double z = normalizer(d).mid();
  out << "x,f,density,cdf\n";
  out.precision(17);
  for (long j = 0; j < points; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(points);
    const double f = density_at(d, x).mid();
    out << x << ',' << f << ',' << f / z << ',' << cdf(x) << '\n';
  }
}

}  // namespace betalab
