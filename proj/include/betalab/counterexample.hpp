#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace betalab {

/// One stage of the marker construction over the uniform l-symbol Bernoulli shift.
/// Y_k is the union of the `count` lexicographically first depth-`depth` cylinders,
/// i.e. words whose base-l value is below count; script-Y_k = union_{j <= L} sigma^-j Y_k.
struct Stage {
  mpz_class n;
  mpq_class ln_lo, ln_hi;  ///< rational bracket of ln n
  long L = 0;              ///< floor(ln n)
  int depth = 0;
  mpz_class count;
  mpq_class nu_y;          ///< nu(Y_k) = count / l^depth
  mpq_class nu_stage;      ///< nu(script-Y_k), exact
  mpq_class budget;        ///< 1 - eps - sum of earlier nu(script-Y_i)
  bool union_bound = false;  ///< nu(script-Y_k) <= 1/ln n_k, certified
  long advanced = 0;         ///< steps past the budget minimum forced by the cumulative invariant
  double ln_n() const;
};

struct ConstructionParams {
  int l = 3;
  mpq_class epsilon;
  std::vector<Stage> stages;
  mpq_class cumulative;  ///< sum of nu(script-Y_k)
};

/// Natural log bracket lo < ln n < hi with rational endpoints (n >= 2).
std::pair<mpq_class, mpq_class> ln_bracket(const mpz_class& n, long bits = 256);

/// Smallest admissible n_k per stage; every invariant is verified in exact arithmetic.
ConstructionParams build_schedule(int l, const mpq_class& epsilon, int K);

/// Probability that a uniform string of length len contains a word with base-l value < count
/// among its length-depth factors.
mpq_class occurrence_probability(int l, int depth, const mpz_class& count, long len);

/// A {0,1} process R_n = chi(x_{n-1}, ..., x_{n+D-2}) coded from an i.i.d. uniform l-symbol
/// sequence through a window table. The coded process of the construction and the i.i.d.
/// fair-bit control are both of this form.
struct CodedProcess {
  int l = 2;
  int D = 1;
  std::vector<std::uint8_t> table;  ///< chi indexed by the window read as a base-l number
  long W = 1;                       ///< past window used for conditioning
  int stages = 0;
  mpq_class exact_mass() const;     ///< nu(chi = 1)
};

/// Coder chi of the union of the first K stages (K = 0 gives R = 0). W = 0 selects W = D.
CodedProcess make_coded_process(const ConstructionParams& p, int K, long W = 0);
/// Fair i.i.d. bits: the finite-memory control.
CodedProcess iid_control_process();

/// Empirical frequency of R = 1 along a simulated path and its standard error.
std::pair<double, double> simulate_marker_mass(const CodedProcess& proc, long n, std::uint64_t seed);

struct NearDiagonalEstimate {
  double scale = 0.0;     ///< n: the indicator is |x - y| < 1/n
  double estimate = 0.0;
  double std_err = 0.0;
  long pairs = 0;
  long pasts = 0;
  double lower_bound = 0.0;  ///< 0.25 ln(n)^-4 for stages of the construction, else 0
  bool meets_bound() const { return estimate >= lower_bound - 2 * std_err; }
};

/// E_eta of the mu_eta x mu_eta mass of {|x - y| < 1/n}: past windows eta are drawn from the
/// process, the hidden window state is filtered exactly given eta, and two independent
/// continuations are mapped to [0, 1) by sum R_i 2^-i.
NearDiagonalEstimate estimate_near_diagonal_at(const CodedProcess& proc, double scale, long pair_samples,
                                               long past_samples, std::uint64_t seed, bool parallel = false);
/// Same at n = n_k of the given stage (1-based); requires W >= floor(ln n_k) + depth_k.
NearDiagonalEstimate estimate_near_diagonal(const CodedProcess& proc, const ConstructionParams& p, int stage,
                                            long pair_samples, long past_samples, std::uint64_t seed,
                                            bool parallel = false);

struct WindowCheck {
  NearDiagonalEstimate base, doubled;
  bool consistent = false;  ///< |difference| <= 2 sqrt(se1^2 + se2^2)
};
WindowCheck window_doubling_check(const CodedProcess& proc, const ConstructionParams& p, int stage,
                                  long pair_samples, long past_samples, std::uint64_t seed, bool parallel = false);

struct EnvelopeFit {
  double beta = 0.0;  ///< estimate ~ C n^-beta by least squares in log-log
  double C = 0.0;
};
EnvelopeFit fit_polynomial_envelope(const std::vector<NearDiagonalEstimate>& est);

struct BetaProbe {
  double beta = 0.0;
  std::vector<double> ratios;       ///< estimate_k * n_k^beta
  std::vector<double> floor_ratios;  ///< 0.25 ln(n_k)^-4 * n_k^beta
  bool increasing = false;          ///< ratios strictly increasing in k
  double crossover_ln_n = 0.0;      ///< floor ratio increases only once ln n > 4/beta
};
struct ViolationReport {
  std::vector<NearDiagonalEstimate> stages;
  EnvelopeFit fit;
  std::vector<BetaProbe> probes;
  std::string verdict;  ///< "inconclusive", "violation" or "no violation at these scales"
};
/// Probes estimate / n_k^-beta for beta_target and a fixed ladder of betas.
ViolationReport condition_violation_report(const std::vector<NearDiagonalEstimate>& stages, double beta_target);

/// Lower bound (E X - d) / (a - d) for P(X > d) when X <= a almost surely.
double reverse_markov_bound(double a_bound, double d, double expectation);

}  // namespace betalab
