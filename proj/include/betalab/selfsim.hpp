#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "betalab/interval.hpp"
#include "betalab/precision.hpp"

namespace betalab {

/// Self-similar measure of the IFS f0(x) = x/b, f1(x) = x/b + 1/b with weights (p0, p1):
/// the law of sum_{i>=1} w_i b^-i with w_i i.i.d. Bernoulli(p1). Supported in [0, 1/(b-1)].
class SelfSimilarMeasure {
 public:
  /// Requires b > 2; b = 2 only when allow_boundary is set (the Lebesgue oracle).
  SelfSimilarMeasure(BetaNumber b, double p1, bool allow_boundary = false);

  const BetaNumber& base() const { return base_; }
  double b() const { return b_; }
  double p0() const { return 1.0 - p1_; }
  double p1() const { return p1_; }

 private:
  BetaNumber base_;
  double b_;
  double p1_;
};

/// prod_{k=1}^K (p0 + p1 e(xi b^-k)); the neglected factors change the product by at most rad <= tol.
ComplexBall ssm_fourier(const SelfSimilarMeasure& m, double xi, double tol = 1e-14);

/// |mu(xi) - (p0 + p1 e(xi/b)) mu(xi/b)|.
double ssm_selfsim_residual(const SelfSimilarMeasure& m, double xi);

/// n points sum_{i<=depth} w_i b^-i; truncation error <= b^-depth/(b-1). Deterministic in seed.
std::vector<double> ssm_sample(const SelfSimilarMeasure& m, long n, int depth, std::uint64_t seed);

struct SingularityWitness {
  double coverage_fraction = 0.0;  ///< samples decoded into the 2^n level-n cylinders
  double total_length = 0.0;       ///< 2^n b^-n / (b - 1)
};
/// Level-n cylinder intervals [sum w_i b^-i, + b^-n/(b-1)] are disjoint for b > 2; each
/// sample is decoded greedily level by level, allowing `slack` for truncation.
SingularityWitness singularity_witness(const SelfSimilarMeasure& m, const std::vector<double>& samples, int level,
                                       double slack = 1e-9);

struct InvarianceCheck {
  double max_defect = 0.0;  ///< max over A of |mu_n(T^-1 A) - mu_n(A)|
  double max_z = 0.0;       ///< max over A of defect / sigma_A
  long samples = 0;
  bool within(double z) const { return max_z <= z; }
};
/// Empirical T_b-invariance on the given intervals using branch preimages.
InvarianceCheck ssm_invariance_check(const SelfSimilarMeasure& m, const std::vector<std::pair<double, double>>& grid,
                                     long n, std::uint64_t seed, int depth = 60);
/// Same check on an existing cloud.
InvarianceCheck invariance_on_cloud(const BetaNumber& b, const std::vector<std::pair<double, double>>& grid,
                                    const std::vector<double>& cloud);
/// k equal intervals of [0, 1).
std::vector<std::pair<double, double>> uniform_grid(long k);

struct DecayWindow {
  double lo = 0.0, hi = 0.0;
  double max_abs = 0.0;
};
struct DecayScan {
  std::vector<DecayWindow> windows;
  /// c in max |mu| ~ (log xi)^-c, slope of log max against log log xi (windows with lo >= 2)
  double fitted_c = 0.0;
};
/// Window maxima of |mu(xi)| over [2^j, 2^{j+1}] (clipped at xi_max), sampled on a grid of
/// points_per_unit points per unit length.
DecayScan ssm_decay_profile(const SelfSimilarMeasure& m, double xi_max, int points_per_unit = 8,
                            bool parallel = false);

struct NonUniqueness {
  double mass_a = 0.0, mass_b = 0.0;
  double sigma = 0.0;  ///< standard error of mass_a - mass_b
  double z = 0.0;
  InvarianceCheck inv_a, inv_b;
};
/// Two weight vectors on the same b: both empirically T_b-invariant, different masses on [u, v).
NonUniqueness nonuniqueness_exhibit(const BetaNumber& b, double p1_a, double p1_b, double u, double v, long n,
                                    std::uint64_t seed);

/// Every sampled {0,1} digit word of the given depth passes Parry's admissibility test for b.
bool binary_words_admissible(const SelfSimilarMeasure& m, long words, int depth, std::uint64_t seed);

}  // namespace betalab
