#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "betalab/interval.hpp"
#include "betalab/precision.hpp"

namespace betalab {

/// Parry density f(x) = sum over n >= 0 with x < T_b^n(1) of b^-n, truncated at n = N.
/// r[0] = 1 by convention, r[n] = T_b^n(1). When the orbit of 1 certifiably reaches 0
/// the series is finite and the tail is zero.
class ParryDensity {
 public:
  /// Smallest truncation whose tail b^-N/(b-1) is <= tol/2.
  static ParryDensity build(const BetaNumber& b, double tol = 1e-13);

  const BetaNumber& base() const { return base_; }
  const std::vector<Enclosure>& orbit() const { return r_; }
  long truncation() const { return static_cast<long>(r_.size()) - 1; }
  double tail_bound() const { return tail_; }
  /// Enclosure of b^-n for n = 0..N.
  const std::vector<Interval>& weights() const { return w_; }
  /// Double enclosure of r_n.
  Interval r(std::size_t n) const { return rd_[n]; }

  /// Same base with tail <= tol/2; returns *this if already fine enough.
  ParryDensity refined(double tol) const;

 private:
  explicit ParryDensity(BetaNumber b) : base_(std::move(b)) {}

  BetaNumber base_;
  std::vector<Enclosure> r_;
  std::vector<Interval> rd_;
  std::vector<Interval> w_;
  double tail_ = 0.0;
};

/// Unnormalized density at x in [0,1). Comparisons x < r_n are exact against the
/// orbit enclosures and refined (or decided exactly) when they straddle.
Interval density_at(const ParryDensity& d, double x, double tol = 1e-12);
Interval normalizer(const ParryDensity& d, double tol = 1e-12);
/// Normalized Parry mass of [u, v), 0 <= u < v <= 1, by exact piecewise-linear integration.
Interval interval_mass(const ParryDensity& d, double u, double v, double tol = 1e-12);
/// Normalized coefficient int e_m dmu with e_m(x) = exp(2 pi i m x); m = 0 gives exactly 1.
ComplexBall parry_fourier(const ParryDensity& d, long m, double tol = 1e-12);

/// Branch preimages of [u, v) under T_b: [(k+u)/b, (k+v)/b) clipped to [0,1).
std::vector<std::pair<double, double>> tb_preimage(const BetaNumber& b, double u, double v);

/// Piecewise-constant normalized density used for inverse-CDF sampling.
struct ParryCdf {
  std::vector<double> breaks;   ///< 0 = t_0 < ... < t_K = 1
  std::vector<double> density;  ///< normalized value on [t_j, t_{j+1})
  std::vector<double> cdf;      ///< F(t_j), K + 1 entries
  double operator()(double x) const;
  double inverse(double u) const;
};
ParryCdf parry_cdf(const ParryDensity& d);

/// n i.i.d. Parry-distributed points; deterministic in seed.
std::vector<double> parry_sample(const ParryDensity& d, long n, std::uint64_t seed);

/// CSV "x,f,density,cdf" on the uniform grid x_j = j/points, j = 0..points-1.
void write_density_csv(std::ostream& out, const ParryDensity& d, long points);

}  // namespace betalab
