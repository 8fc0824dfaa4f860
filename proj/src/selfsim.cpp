#include "betalab/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "betalab/beta_shift.hpp"
#include "betalab/errors.hpp"
#include "betalab/kernels.hpp"
#include "betalab/parry.hpp"
#include "betalab/random.hpp"
#include "betalab/source.hpp"

namespace betalab {

SelfSimilarMeasure::SelfSimilarMeasure(BetaNumber b, double p1, bool allow_boundary)
    : base_(std::move(b)), b_(base_.to_double()), p1_(p1) {
  const bool two = base_.is_integer() && base_.floor_b() == 2;
  if (!(base_.floor_b() >= 2 && !(two && !allow_boundary)))
    throw DomainError("self-similar measures need b > 2 (b = 2 only as the Lebesgue oracle)");
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("p1 must lie in [0, 1]");
}

ComplexBall ssm_fourier(const SelfSimilarMeasure& m, double xi, double tol) {
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const double b = m.b(), p0 = m.p0(), p1 = m.p1();
  std::complex<double> prod = 1.0;
  double theta = xi / b;
  // factor k differs from 1 by at most 2 pi p1 |theta_k|; the tail sums geometrically
  while (2 * std::numbers::pi * p1 * std::abs(theta) * b / (b - 1) > tol) {
    prod *= p0 + p1 * kernels::expi(theta);
    theta /= b;
  }
  return {prod, 2 * std::numbers::pi * p1 * std::abs(theta) * b / (b - 1)};
}

double ssm_selfsim_residual(const SelfSimilarMeasure& m, double xi) {
  const std::complex<double> lhs = ssm_fourier(m, xi).mid;
  const std::complex<double> rhs = (m.p0() + m.p1() * kernels::expi(xi / m.b())) * ssm_fourier(m, xi / m.b()).mid;
  return std::abs(lhs - rhs);
}

std::vector<double> ssm_sample(const SelfSimilarMeasure& m, long n, int depth, std::uint64_t seed) {
  if (depth < 1) throw DomainError("depth must be >= 1");
  if (n < 1) throw DomainError("need at least one sample");
  std::mt19937_64 rng(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& x : out) {
    // Horner from the deepest digit keeps rounding at one ulp per level
    std::vector<int> w(static_cast<std::size_t>(depth));
    for (int& d : w) d = uniform01(rng) < m.p1() ? 1 : 0;
    double v = 0;
    for (int i = depth - 1; i >= 0; --i) v = (v + w[static_cast<std::size_t>(i)]) / m.b();
    x = v;
  }
  return out;
}

SingularityWitness singularity_witness(const SelfSimilarMeasure& m, const std::vector<double>& samples, int level,
                                       double slack) {
  if (!(m.b() > 2)) throw DomainError("the gap structure needs b > 2");
  if (level < 0) throw DomainError("level must be >= 0");
  if (samples.empty()) throw DomainError("no samples");
  const double b = m.b();
  const double len = 1 / (b - 1);  // every level-k cylinder, rescaled by b^k, is [w, w + 1/(b-1)]
  long inside = 0;
  for (double x : samples) {
    double y = x;
    double tol = slack;
    bool ok = y >= -tol && y <= len + tol;
    for (int k = 0; k < level && ok; ++k) {
      y *= b;
      tol *= b;
      const int d = y >= 1 - tol ? 1 : 0;  // the gap (1/(b-1), 1) separates the two branches
      y -= d;
      ok = y >= -tol && y <= len + tol;
    }
    inside += ok ? 1 : 0;
  }
  SingularityWitness w;
  w.coverage_fraction = static_cast<double>(inside) / static_cast<double>(samples.size());
  w.total_length = std::pow(2 / b, level) / (b - 1);
  return w;
}

std::vector<std::pair<double, double>> uniform_grid(long k) {
  if (k < 1) throw DomainError("grid needs at least one interval");
  std::vector<std::pair<double, double>> g;
  for (long i = 0; i < k; ++i) g.emplace_back(static_cast<double>(i) / static_cast<double>(k), static_cast<double>(i + 1) / static_cast<double>(k));
  return g;
}

InvarianceCheck invariance_on_cloud(const BetaNumber& b, const std::vector<std::pair<double, double>>& grid,
                                    const std::vector<double>& cloud) {
  if (cloud.empty()) throw DomainError("empty cloud");
  std::vector<double> sorted = cloud;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto count = [&](double u, double v) {
    return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), v) - std::lower_bound(sorted.begin(), sorted.end(), u));
  };
  InvarianceCheck out;
  out.samples = static_cast<long>(cloud.size());
  for (auto [u, v] : grid) {
    const double in_a = count(u, v);
    double in_pre = 0;
    // preimage pieces are disjoint from each other; overlaps with A are what the variance needs
    double both = 0;
    for (auto [lo, hi] : tb_preimage(b, u, v)) {
      in_pre += count(lo, hi);
      both += count(std::max(lo, u), std::min(hi, v)) * (std::min(hi, v) > std::max(lo, u) ? 1 : 0);
    }
    const double diff = (in_pre - in_a) / n;
    // d = 1_{T^-1 A} - 1_A takes values in {-1, 0, 1}; E d^2 = P(exactly one)
    const double ed2 = (in_pre + in_a - 2 * both) / n;
    const double sigma = std::sqrt(std::max(ed2 - diff * diff, 0.0) / n);
    out.max_defect = std::max(out.max_defect, std::abs(diff));
    if (diff != 0) out.max_z = std::max(out.max_z, sigma > 0 ? std::abs(diff) / sigma : std::numeric_limits<double>::infinity());
  }
  return out;
}

InvarianceCheck ssm_invariance_check(const SelfSimilarMeasure& m, const std::vector<std::pair<double, double>>& grid,
                                     long n, std::uint64_t seed, int depth) {
  if (!(m.b() > 2)) throw DomainError("invariance check needs b > 2");
  if (grid.size() < 32) throw DomainError("grid needs at least 32 intervals");
  return invariance_on_cloud(m.base(), grid, ssm_sample(m, n, depth, seed));
}

DecayScan ssm_decay_profile(const SelfSimilarMeasure& m, double xi_max, int points_per_unit, bool parallel) {
  if (!(xi_max >= 1e3)) throw DomainError("xi_max must be >= 1000");
  if (points_per_unit < 1) throw DomainError("points_per_unit must be >= 1");
  DecayScan out;
  std::vector<double> lx, ly;
  for (double lo = 1; lo < xi_max; lo *= 2) {
    const double hi = std::min(2 * lo, xi_max);
    const long k = static_cast<long>(std::ceil((hi - lo) * points_per_unit));
    std::vector<double> xi(static_cast<std::size_t>(k) + 1), val;
    for (long i = 0; i <= k; ++i) xi[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k);
    if (parallel)
      kernels::parallel_ssm_abs(xi, m.b(), m.p1(), 1e-12, val);
    else
      kernels::serial_ssm_abs(xi, m.b(), m.p1(), 1e-12, val);
    DecayWindow w{lo, hi, *std::max_element(val.begin(), val.end())};
    out.windows.push_back(w);
    if (lo >= 2 && w.max_abs > 0) {
      lx.push_back(std::log(std::log(std::sqrt(lo * hi))));
      ly.push_back(std::log(w.max_abs));
    }
  }
  if (lx.size() >= 2) out.fitted_c = -ls_slope(lx, ly);
  return out;
}

NonUniqueness nonuniqueness_exhibit(const BetaNumber& b, double p1_a, double p1_b, double u, double v, long n,
                                    std::uint64_t seed) {
  if (!(0 <= u && u < v && v <= 1)) throw DomainError("need 0 <= u < v <= 1");
  const SelfSimilarMeasure ma(b, p1_a), mb(b, p1_b);
  const std::vector<double> xa = ssm_sample(ma, n, 60, derive_seed(seed, 0)), xb = ssm_sample(mb, n, 60, derive_seed(seed, 1));
  auto frac = [&](const std::vector<double>& xs) {
    return static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x >= u && x < v; })) / static_cast<double>(n);
  };
  NonUniqueness out;
  out.mass_a = frac(xa);
  out.mass_b = frac(xb);
  out.sigma = std::sqrt((out.mass_a * (1 - out.mass_a) + out.mass_b * (1 - out.mass_b)) / static_cast<double>(n));
  out.z = out.sigma > 0 ? std::abs(out.mass_a - out.mass_b) / out.sigma : 0.0;
  const auto grid = uniform_grid(64);
  out.inv_a = invariance_on_cloud(b, grid, xa);
  out.inv_b = invariance_on_cloud(b, grid, xb);
  return out;
}

bool binary_words_admissible(const SelfSimilarMeasure& m, long words, int depth, std::uint64_t seed) {
  const AdmissibilityRule rule = make_admissibility_rule(m.base(), depth + 2);
  std::mt19937_64 rng(seed);
  std::vector<long> w(static_cast<std::size_t>(depth));
  for (long i = 0; i < words; ++i) {
    for (long& d : w) d = uniform01(rng) < m.p1() ? 1 : 0;
    if (!is_admissible(w, rule).admissible) return false;
  }
  return true;
}

}  // namespace betalab
