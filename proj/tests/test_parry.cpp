#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "betalab/errors.hpp"
#include "betalab/parry.hpp"
#include "doctest.h"

using namespace betalab;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;

// Composite Gauss-Legendre (5 nodes) on [a, c] of g, fully independent of the closed form.
template <class G>
std::complex<double> gauss_legendre(G g, double a, double c, int panels) {
  static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                              0.2369268850561891};
  std::complex<double> s = 0;
  const double h = (c - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double m = a + (p + 0.5) * h;
    for (int i = 0; i < 5; ++i) s += w[i] * g(m + 0.5 * h * x[i]) * (0.5 * h);
  }
  return s;
}

std::complex<double> e(double t) { return std::polar(1.0, 2 * std::numbers::pi * t); }

}  // namespace

TEST_CASE("density_at examples") {
  ParryDensity two = ParryDensity::build(parse_beta("2"));
  CHECK(two.tail_bound() == 0.0);
  CHECK(density_at(two, 0.3).contains(1.0));
  CHECK(density_at(two, 0.3).width() < 1e-15);

  ParryDensity g = ParryDensity::build(parse_beta("(1+sqrt5)/2"));
  CHECK(g.tail_bound() == 0.0);
  CHECK(density_at(g, 0.3).contains(kPhi));
  CHECK(density_at(g, 0.3).width() < 1e-14);
  CHECK(density_at(g, 0.7).contains(1.0));

  CHECK_THROWS_AS(density_at(g, 1.0), DomainError);
  CHECK_THROWS_AS(density_at(g, -0.1), DomainError);
}

TEST_CASE("density for a non-simple base honours the tolerance") {
  ParryDensity d = ParryDensity::build(parse_beta("1.8"), 1e-10);
  CHECK(d.tail_bound() > 0.0);
  CHECK(d.tail_bound() <= 0.5e-10);
  for (double x : {0.05, 0.31, 0.62, 0.97}) {
    Interval f = density_at(d, x, 1e-10);
    CHECK(f.width() <= 1e-10);
    CHECK(f.lo >= 1 - 1 / 1.8);
    CHECK(f.hi <= 1 / (1 - 1 / 1.8) * (1 + 1e-12));
  }
  // tighter tolerance refines the truncation and stays inside the coarse interval
  Interval coarse = density_at(d, 0.31, 1e-6), fine = density_at(d, 0.31, 1e-12);
  CHECK(coarse.lo <= fine.lo);
  CHECK(fine.hi <= coarse.hi);
}

TEST_CASE("normalizer examples") {
  CHECK(normalizer(ParryDensity::build(parse_beta("2"))).contains(1.0));
  Interval zg = normalizer(ParryDensity::build(parse_beta("(1+sqrt5)/2")));
  CHECK(zg.contains(1 + 1 / (kPhi * kPhi)));
  CHECK(zg.width() < 1e-14);
  const double s2 = std::sqrt(2.0);
  Interval zs = normalizer(ParryDensity::build(parse_beta("1+sqrt2")));
  CHECK(zs.mid() == doctest::Approx(1 + (s2 - 1) / (1 + s2)).epsilon(1e-14));
  CHECK(zs.mid() == doctest::Approx(1.1716).epsilon(1e-4));
}

TEST_CASE("interval_mass examples") {
  ParryDensity two = ParryDensity::build(parse_beta("2"));
  CHECK(interval_mass(two, 0, 0.5).contains(0.5));
  ParryDensity g = ParryDensity::build(parse_beta("(1+sqrt5)/2"));
  Interval m = interval_mass(g, 0, 1 / kPhi);
  CHECK(m.mid() == doctest::Approx(1 / (1 + 1 / (kPhi * kPhi))).epsilon(1e-12));
  CHECK(m.mid() == doctest::Approx(0.7236).epsilon(1e-4));
  for (const char* desc : {"2", "(1+sqrt5)/2", "1+sqrt2", "1.8", "5/2"}) {
    Interval whole = interval_mass(ParryDensity::build(parse_beta(desc)), 0, 1);
    CHECK(std::abs(whole.mid() - 1.0) < 1e-11);
  }
  CHECK_THROWS_AS(interval_mass(g, 0.5, 0.5), DomainError);
}

TEST_CASE("parry_fourier examples") {
  ParryDensity two = ParryDensity::build(parse_beta("2"));
  CHECK(parry_fourier(two, 5).contains(0.0));
  CHECK(parry_fourier(two, 5).rad < 1e-14);
  ParryDensity g = ParryDensity::build(parse_beta("(1+sqrt5)/2"));
  ComplexBall zero = parry_fourier(g, 0);
  CHECK(zero.mid == std::complex<double>(1.0, 0.0));
  CHECK(zero.rad == 0.0);

  // quadrature oracle with the explicit golden-mean density
  const double z = 1 + 1 / (kPhi * kPhi);
  for (long m : {1L, -1L, 3L, 17L}) {
    auto g1 = [&](double x) { return e(static_cast<double>(m) * x) * kPhi / z; };
    auto g2 = [&](double x) { return e(static_cast<double>(m) * x) / z; };
    std::complex<double> q = gauss_legendre(g1, 0, 1 / kPhi, 64) + gauss_legendre(g2, 1 / kPhi, 1, 64);
    ComplexBall c = parry_fourier(g, m);
    CHECK(std::abs(c.mid - q) < 1e-8);
    CHECK(c.rad < 1e-12);
  }
}

TEST_CASE("tb_preimage") {
  auto pre = tb_preimage(parse_beta("(1+sqrt5)/2"), 0.2, 0.9);
  REQUIRE(pre.size() == 2);
  CHECK(pre[0].first == doctest::Approx(0.2 / kPhi));
  CHECK(pre[1].first == doctest::Approx(1.2 / kPhi));
  CHECK(pre[1].second == 1.0);  // (1 + 0.9)/phi > 1, clipped
  CHECK(tb_preimage(parse_beta("2"), 0.0, 1.0).size() == 2);
}

TEST_CASE("parry_sample examples") {
  ParryDensity two = ParryDensity::build(parse_beta("2"));
  const long n = 10000;
  std::vector<double> xs = parry_sample(two, n, 7);
  std::sort(xs.begin(), xs.end());
  double ks = 0;
  for (long i = 0; i < n; ++i) {
    const double x = xs[static_cast<std::size_t>(i)];
    ks = std::max({ks, std::abs(static_cast<double>(i + 1) / n - x), std::abs(x - static_cast<double>(i) / n)});
  }
  CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(n)));

  ParryDensity g = ParryDensity::build(parse_beta("(1+sqrt5)/2"));
  const long n2 = 100000;
  std::vector<double> ys = parry_sample(g, n2, 11);
  const double p = 0.7236067977499790;
  const double hits = static_cast<double>(std::count_if(ys.begin(), ys.end(), [](double y) { return y < 1 / kPhi; }));
  CHECK(std::abs(hits / n2 - p) <= 3 * std::sqrt(p * (1 - p) / n2));

  CHECK(parry_sample(g, 5, 3) == parry_sample(g, 5, 3));
  CHECK(parry_sample(g, 5, 3) != parry_sample(g, 5, 4));
  CHECK_THROWS_AS(parry_sample(g, 0, 1), DomainError);
}

TEST_CASE("csv export") {
  std::ostringstream os;
  write_density_csv(os, ParryDensity::build(parse_beta("(1+sqrt5)/2")), 4);
  std::string s = os.str();
  CHECK(s.rfind("x,f,density,cdf\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 5);
}

TEST_CASE("property: T_b invariance on random intervals") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const char* desc : {"(1+sqrt5)/2", "1+sqrt2", "5/2", "1.8", "(3+sqrt5)/2"}) {
    BetaNumber b = parse_beta(desc);
    ParryDensity d = ParryDensity::build(b);
    for (int t = 0; t < 40; ++t) {
      double u = unif(rng), v = unif(rng);
      if (u > v) std::swap(u, v);
      if (u == v) continue;
      double pre = 0;
      for (auto [lo, hi] : tb_preimage(b, u, v)) pre += interval_mass(d, lo, hi).mid();
      CHECK(std::abs(pre - interval_mass(d, u, v).mid()) <= 1e-10);
    }
  }
}

TEST_CASE("property: density within the stated bounds and CDF consistent with masses") {
  for (const char* desc : {"(1+sqrt5)/2", "1+sqrt2", "5/2", "1.8", "2.2"}) {
    BetaNumber b = parse_beta(desc);
    ParryDensity d = ParryDensity::build(b);
    const double bd = b.to_double();
    ParryCdf cdf = parry_cdf(d);
    for (int j = 0; j < 50; ++j) {
      const double x = (j + 0.37) / 50;
      Interval f = density_at(d, x);
      CHECK(f.lo >= 1 - 1 / bd - 1e-15);
      CHECK(f.hi <= 1 / (1 - 1 / bd) * (1 + 1e-12));
      CHECK(cdf(x) == doctest::Approx(interval_mass(d, 0, x).mid()).epsilon(1e-9));
    }
    Interval z = normalizer(d);
    CHECK(z.lo >= 1 - 1 / bd);
    CHECK(z.hi <= 1 / (1 - 1 / bd) * (1 + 1e-12));
  }
}

TEST_CASE("property: integer bases give Lebesgue measure") {
  for (const char* desc : {"2", "3", "7"}) {
    ParryDensity d = ParryDensity::build(parse_beta(desc));
    for (long m : {1L, 2L, 9L, -4L}) CHECK(std::abs(parry_fourier(d, m).mid) < 1e-15);
  }
}

TEST_CASE("property: closed-form coefficient matches quadrature for a non-simple base") {
  ParryDensity d = ParryDensity::build(parse_beta("1.8"));
  ParryCdf cdf = parry_cdf(d);
  for (long m : {1L, 5L}) {
    std::complex<double> q = 0;
    for (std::size_t j = 0; j + 1 < cdf.breaks.size(); ++j) {
      const double dens = cdf.density[j];
      q += gauss_legendre([&](double x) { return e(static_cast<double>(m) * x) * dens; }, cdf.breaks[j],
                          cdf.breaks[j + 1], 16);
    }
    CHECK(std::abs(parry_fourier(d, m).mid - q) < 1e-8);
  }
}
