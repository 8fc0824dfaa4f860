#include "betalab/orbit_fourier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "betalab/errors.hpp"
#include "betalab/kernels.hpp"
#include "betalab/random.hpp"

namespace betalab {
namespace {

constexpr long kMaxFrequency = 1L << 20;

void check_checkpoints(const std::vector<long>& checkpoints) {
  if (checkpoints.empty()) throw DomainError("at least one checkpoint is required");
  if (checkpoints.front() < 1) throw DomainError("checkpoints must be >= 1");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (checkpoints[i] <= checkpoints[i - 1]) throw DomainError("checkpoints must be strictly increasing");
}

long max_abs(const std::vector<long>& ms) {
  long out = 0;
  for (long m : ms) out = std::max(out, std::abs(m));
  return out;
}

// Neumaier-compensated complex sum
struct CompensatedSum {
  double re = 0, im = 0, cre = 0, cim = 0;
  static void add(double& s, double& c, double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  void operator+=(std::complex<double> z) {
    add(re, cre, z.real());
    add(im, cim, z.imag());
  }
  std::complex<double> value() const { return {re + cre, im + cim}; }
};

// smallest c with x = c^k
mpz_class integer_root(const mpz_class& x) {
  const long bits = static_cast<long>(mpz_sizeinbase(x.get_mpz_t(), 2));
  for (long k = bits; k >= 2; --k) {
    mpz_class r;
    if (mpz_root(r.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(k)) != 0) return r;
  }
  return x;
}

Independence against_rational(long a, const mpq_class& r) {
  if (r.get_den() != 1) return Independence::Verified;  // a^p is an integer, r^q is not
  return integer_root(mpz_class(a)) == integer_root(r.get_num()) ? Independence::Dependent : Independence::Verified;
}

double sorted_near_pairs(const std::vector<double>& y, double r) {
  // ordered pairs (i, j), i == j included, with |y_i - y_j| < r; y sorted
  double count = 0;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    while (y[i] - y[lo] >= r) ++lo;
    count += static_cast<double>(i - lo);
  }
  return 2 * count + static_cast<double>(y.size());
}

// primitive of s -> clamp(s, 0, len)
double clamp_primitive(double s, double len) {
  if (s <= 0) return 0;
  if (s <= len) return 0.5 * s * s;
  return 0.5 * len * len + len * (s - len);
}

// area of [u1,v1] x [u2,v2] with y - y' < t
double area_below(double u1, double v1, double u2, double v2, double t) {
  return clamp_primitive(v2 + t - u1, v1 - u1) - clamp_primitive(u2 + t - u1, v1 - u1);
}

}  // namespace

WeylSeries weyl_from_points(std::vector<double> points, const std::vector<long>& checkpoints,
                            const std::vector<long>& ms, bool parallel) {
  check_checkpoints(checkpoints);
  if (static_cast<long>(points.size()) < checkpoints.back()) throw DomainError("fewer points than the last checkpoint");
  WeylSeries s;
  s.checkpoints = checkpoints;
  s.ms = ms;
  std::vector<std::complex<double>> flat;
  if (parallel)
    kernels::parallel_weyl(points, ms, checkpoints, flat);
  else
    kernels::serial_weyl(points, ms, checkpoints, flat);
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    s.values.emplace_back(flat.begin() + static_cast<long>(c * ms.size()), flat.begin() + static_cast<long>((c + 1) * ms.size()));
    for (std::size_t j = 0; j < ms.size(); ++j)
      if (ms[j] == 0) s.values[c][j] = 1.0;
  }
  s.points = std::move(points);
  return s;
}

WeylSeries weyl_sums(const BetaNumber& b, const Enclosure& x0, const std::vector<long>& checkpoints,
                     const std::vector<long>& ms, const WeylOptions& options) {
  check_checkpoints(checkpoints);
  const long mmax = max_abs(ms);
  if (mmax > kMaxFrequency) throw DomainError("frequencies are limited to |m| <= 2^20");
  const int digits = options.digits.value_or(8 + static_cast<int>(std::ceil(std::log10(static_cast<double>(std::max(mmax, 1L))))));
  OrbitSamples orbit = orbit_samples(b, x0, checkpoints.back(), digits);
  WeylSeries s = weyl_from_points(std::move(orbit.points), checkpoints, ms, options.parallel);
  s.base = b.descriptor();
  s.provenance = "orbit";
  s.orbit_width = orbit.max_width;
  s.bits = orbit.bits;
  return s;
}

const char* to_string(Independence v) {
  switch (v) {
    case Independence::Verified:
      return "verified";
    case Independence::Dependent:
      return "dependent";
    case Independence::Asserted:
      return "asserted";
  }
  return "?";
}

Independence multiplicative_independence(long a, const BetaNumber& b) {
  if (a < 2) throw DomainError("a must be >= 2");
  if (!b.is_exact()) return Independence::Asserted;
  const QuadNumber& q = *b.exact_value();
  if (q.is_rational()) return against_rational(a, q.rational_part());
  // b^k rational forces b / b' to be a real root of unity, i.e. trace 0 and b^2 rational
  if (q.rational_part() == 0) return against_rational(a, q.radical_coeff() * q.radical_coeff() * q.radicand());
  return Independence::Verified;
}

DecayProfile mean_decay_profile(const MarkovSource& src, const BetaNumber& b, long a, const std::vector<long>& ms,
                                long n, long samples, std::uint64_t seed, const DecayOptions& options) {
  if (src.alphabet() != a) throw DomainError("source alphabet must equal a");
  if (samples < 16) throw DomainError("at least 16 samples are required");
  if (n < 4) throw DomainError("N must be >= 4");
  DecayProfile out;
  out.independence = multiplicative_independence(a, b);
  if (out.independence == Independence::Dependent)
    throw DomainError("a and b are multiplicatively dependent (log a / log b is rational)");
  out.ms = ms;
  out.checkpoints = {n / 4, n / 2, n};
  out.sample_count = samples;

  // enough base-a digits that the orbit of length N sees only sampled digits
  const long digits = static_cast<long>(std::ceil(static_cast<double>(n) * b.log2() / std::log2(static_cast<double>(a)))) + 64;
  std::vector<std::vector<double>> per_sample(static_cast<std::size_t>(samples));
  std::vector<long> bits(static_cast<std::size_t>(samples));
  auto run = [&](long s) {
    const Enclosure x = sample_point(src, digits, derive_seed(seed, static_cast<std::uint64_t>(s)));
    WeylSeries w = weyl_sums(b, x, out.checkpoints, ms);
    std::vector<double> best(ms.size(), 0.0);
    for (std::size_t c = 0; c < w.checkpoints.size(); ++c)
      for (std::size_t j = 0; j < ms.size(); ++j) best[j] = std::max(best[j], std::abs(w.values[c][j]));
    per_sample[static_cast<std::size_t>(s)] = std::move(best);
    bits[static_cast<std::size_t>(s)] = w.bits;
  };
  if (options.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < samples; ++s) run(s);
  } else {
    for (long s = 0; s < samples; ++s) run(s);
  }

  out.D.assign(ms.size(), 0.0);
  for (const auto& row : per_sample)
    for (std::size_t j = 0; j < ms.size(); ++j) out.D[j] += row[j];
  for (double& d : out.D) d /= static_cast<double>(samples);
  for (std::size_t j = 0; j < ms.size(); ++j)
    if (ms[j] == 0) out.D[j] = 1.0;
  out.max_bits = *std::max_element(bits.begin(), bits.end());

  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < ms.size(); ++j)
    if (ms[j] != 0 && out.D[j] > 0) {
      lx.push_back(std::log(static_cast<double>(std::abs(ms[j]))));
      ly.push_back(std::log(out.D[j]));
    }
  if (lx.size() >= 2) out.fitted_exponent = ls_slope(lx, ly);

  const ConditionEstimates est = fit_condition_exponents(src, 10);
  if (est.alpha_hat > 0 && est.ordered) out.predicted_exponent = predicted_exponent(est.alpha_hat, std::max(est.alpha_hat, est.beta_hat));
  return out;
}

double predicted_exponent(double alpha, double beta) {
  if (!(alpha > 0) || !(beta > 0)) throw DomainError("alpha and beta must be positive");
  if (alpha > beta) throw DomainError("alpha must not exceed beta");
  return -alpha * beta / (beta * (1 + alpha) + 2 * alpha + 1);
}

double exponent_objective(double alpha, double beta, double gamma, double delta) {
  return std::max({-delta * alpha, (-1 - delta * (alpha - 1) + gamma * delta) / 2, delta * (1 - gamma * beta) / 2});
}

ExponentOptimum optimize_exponent_grid(double alpha, double beta, long resolution, int zoom_levels, bool parallel) {
  if (resolution < 100) throw DomainError("grid resolution must be >= 100 per axis");
  if (zoom_levels < 0) throw DomainError("zoom levels must be >= 0");
  if (!(alpha > 0) || !(beta > 0)) throw DomainError("alpha and beta must be positive");
  ExponentOptimum best{0, 0, std::numeric_limits<double>::infinity(), 0};
  double g_lo = 0, g_hi = 10, d_lo = 0, d_hi = 10;
  double half_g = 5, half_d = 5;
  for (int level = 0; level <= zoom_levels; ++level) {
    const double gs = (g_hi - g_lo) / static_cast<double>(resolution), ds = (d_hi - d_lo) / static_cast<double>(resolution);
    // per-row minima, reduced in row order so the result is independent of scheduling
    std::vector<ExponentOptimum> rows(static_cast<std::size_t>(resolution));
    auto scan = [&](long i) {
      const double g = g_lo + gs * static_cast<double>(i + 1);
      ExponentOptimum r{g, 0, std::numeric_limits<double>::infinity(), 0};
      for (long j = 1; j <= resolution; ++j) {
        const double d = d_lo + ds * static_cast<double>(j);
        const double v = exponent_objective(alpha, beta, g, d);
        if (v < r.value) r = {g, d, v, 0};
      }
      rows[static_cast<std::size_t>(i)] = r;
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
      for (long i = 0; i < resolution; ++i) scan(i);
    } else {
      for (long i = 0; i < resolution; ++i) scan(i);
    }
    for (const ExponentOptimum& r : rows)
      if (r.value < best.value) best = {r.gamma, r.delta, r.value, best.evaluations};
    best.evaluations += resolution * resolution;
    // halve the window around the incumbent; slow shrinking lets the window travel along
    // the narrow valley where the three planes of the objective meet
    half_g /= 2;
    half_d /= 2;
    g_lo = std::max(0.0, best.gamma - half_g);
    g_hi = std::min(10.0, best.gamma + half_g);
    d_lo = std::max(0.0, best.delta - half_d);
    d_hi = std::min(10.0, best.delta + half_d);
  }
  return best;
}

AnalyticMeasure AnalyticMeasure::uniform() { return {"uniform", {0.0, 1.0}, {1.0}}; }

AnalyticMeasure AnalyticMeasure::parry(const ParryDensity& d) {
  ParryCdf cdf = parry_cdf(d);
  return {"parry(" + d.base().descriptor() + ")", std::move(cdf.breaks), std::move(cdf.density)};
}

double AnalyticMeasure::mass(double c, double d) const {
  double m = 0;
  for (std::size_t j = 0; j < density.size(); ++j) {
    const double u = std::max(c, breaks[j]), v = std::min(d, breaks[j + 1]);
    if (v > u) m += density[j] * (v - u);
  }
  return m;
}

Lemma32Result lemma32_check(const Lemma32Input& in) {
  if (in.m == 0) throw DomainError("m must be nonzero");
  if (!(in.r > 0)) throw DomainError("r must be positive");
  if (!(in.c < in.d)) throw DomainError("need c < d");
  if (!(in.b > 1)) throw DomainError("need b > 1");
  if (in.quad_nodes < 2) throw DomainError("need at least two quadrature nodes");
  const bool cloud = !in.analytic;
  if (cloud && in.cloud.size() < 10000) throw DomainError("sample clouds need at least 10^4 points");

  Lemma32Result out;
  const double log_b = std::log(in.b);
  const double span = std::max(std::abs(in.c), std::abs(in.d));
  // 16 nodes per unit change of the phase m b^z y over z in [0, 1]
  out.nodes = std::max(in.quad_nodes, static_cast<long>(std::ceil(16 * std::abs(in.m) * (in.b - 1) * span)));

  std::function<double(long)> midpoint;
  std::vector<double> y, w;
  if (cloud) {
    std::vector<double> sorted = in.cloud;
    std::sort(sorted.begin(), sorted.end());
    const auto dup = static_cast<double>(sorted.size() - static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin()));
    if (dup > 0.01 * static_cast<double>(in.cloud.size())) throw DomainError("sample cloud looks atomic (more than 1% duplicates)");
    const double n = static_cast<double>(in.cloud.size());
    for (double v : in.cloud)
      if (v >= in.c && v <= in.d) y.push_back(v);
    std::sort(y.begin(), y.end());
    w.assign(y.size(), 1.0 / n);
    out.mass = static_cast<double>(y.size()) / n;
    out.near_diag = sorted_near_pairs(y, in.r) / (n * n);
    out.mc_error = 6 * std::sqrt(out.mass / n) + out.mass / n;
    midpoint = [&](long nodes) {
      return in.parallel ? kernels::parallel_scaled_energy(y, w, in.m, log_b, nodes)
                         : kernels::serial_scaled_energy(y, w, in.m, log_b, nodes);
    };
  } else {
    const AnalyticMeasure& mu = *in.analytic;
    std::vector<std::pair<double, double>> pieces;  // clipped to [c, d]
    std::vector<double> dens;
    for (std::size_t j = 0; j < mu.density.size(); ++j) {
      const double u = std::max(in.c, mu.breaks[j]), v = std::min(in.d, mu.breaks[j + 1]);
      if (v > u) {
        pieces.emplace_back(u, v);
        dens.push_back(mu.density[j]);
      }
    }
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      out.mass += dens[i] * (pieces[i].second - pieces[i].first);
      for (std::size_t j = 0; j < pieces.size(); ++j) {
        const auto [u1, v1] = pieces[i];
        const auto [u2, v2] = pieces[j];
        out.near_diag += dens[i] * dens[j] * (area_below(u1, v1, u2, v2, in.r) - area_below(u1, v1, u2, v2, -in.r));
      }
    }
    midpoint = [&, pieces, dens](long nodes) {
      double sum = 0;
      for (long k = 0; k < nodes; ++k) {
        const double lambda = in.m * std::exp((static_cast<double>(k) + 0.5) / static_cast<double>(nodes) * log_b);
        std::complex<double> f = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i)
          f += dens[i] * (kernels::expi(lambda * pieces[i].second) - kernels::expi(lambda * pieces[i].first));
        sum += std::norm(f / std::complex<double>(0, 2 * std::numbers::pi * lambda));
      }
      return sum / static_cast<double>(nodes);
    };
  }

  const double coarse = midpoint(out.nodes), fine = midpoint(2 * out.nodes);
  out.lhs = (4 * fine - coarse) / 3;
  out.quad_error = std::abs(fine - coarse) / 3 + 1e-14;
  out.rhs = 2 * out.mass * out.mass / (in.r * std::abs(in.m)) + out.near_diag;
  out.slack = out.rhs - out.lhs;
  return out;
}

double wiener_atom_estimate(const std::vector<std::complex<double>>& coeffs) {
  if (coeffs.size() < 2) throw DomainError("need coefficients for m = 0..M with M >= 1");
  const double big_m = static_cast<double>(coeffs.size() - 1);
  double s = std::norm(coeffs[0]);
  for (std::size_t m = 1; m < coeffs.size(); ++m) s += 2 * std::norm(coeffs[m]);
  return s / (2 * big_m + 1);
}

double invariance_defect(const WeylSeries& series, long degree) {
  if (degree < 1) throw DomainError("test degree must be >= 1");
  const long n = series.checkpoints.back();
  if (static_cast<long>(series.points.size()) < n + 1) throw DomainError("series does not contain x_N");
  const std::vector<double>& x = series.points;
  double worst = 0;
  for (long m = 1; m <= degree; ++m) {
    CompensatedSum orbit, shifted;
    for (long i = 0; i < n; ++i) {
      orbit += kernels::expi(static_cast<double>(m) * x[static_cast<std::size_t>(i)]);
      shifted += kernels::expi(static_cast<double>(m) * x[static_cast<std::size_t>(i + 1)]);
    }
    const double inv = 1.0 / static_cast<double>(n);
    worst = std::max(worst, std::abs(orbit.value() * inv - shifted.value() * inv));
  }
  return worst;
}

double parry_distance(const WeylSeries& series, const ParryDensity& d, long M) {
  if (M < 0) throw DomainError("M must be >= 0");
  const long n = series.checkpoints.back();
  double total = 0;
  for (long m = 1; m <= M; ++m) {
    CompensatedSum s;
    for (long i = 0; i < n; ++i) s += kernels::expi(static_cast<double>(m) * series.points[static_cast<std::size_t>(i)]);
    const std::complex<double> lam = s.value() / static_cast<double>(n);
    // conjugate symmetry: m and -m contribute equally
    total += 2 * std::norm(lam - parry_fourier(d, m).mid) / (1.0 + static_cast<double>(m * m));
  }
  return total;
}

}  // namespace betalab
