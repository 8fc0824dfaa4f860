#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include "betalab/precision.hpp"

namespace betalab {

/// Stationary order-n Markov chain on {0..a-1} (n = 0 is i.i.d.). Contexts of length n
/// are encoded base a with the oldest symbol most significant. All transition entries
/// must be positive, which makes the chain ergodic with positive entropy.
class MarkovSource {
 public:
  static MarkovSource iid(std::vector<mpq_class> p);
  /// rows[c][s] = P(next = s | context c), a^order rows.
  static MarkovSource markov(int order, std::vector<std::vector<mpq_class>> rows);

  int alphabet() const { return a_; }
  int order() const { return n_; }
  long contexts() const { return static_cast<long>(rows_.size()); }
  const mpq_class& prob(long context, int symbol) const { return rows_[static_cast<std::size_t>(context)][static_cast<std::size_t>(symbol)]; }
  long next(long context, int symbol) const;
  /// Stationary law of the length-n context (a single 1 for i.i.d.).
  const std::vector<mpq_class>& context_law() const { return pi_; }
  /// Largest single transition probability.
  const mpq_class& max_prob() const { return s_; }
  std::string descriptor() const;

 private:
  MarkovSource() = default;
  void finish();

  int a_ = 0;
  int n_ = 0;
  std::vector<std::vector<mpq_class>> rows_;
  std::vector<mpq_class> pi_;
  mpq_class s_;
};

/// "iid:p0,p1,..." or "markovN:row;row;..." with rational or decimal entries,
/// or a JSON object {"alphabet", "order", "transition": [[...], ...]}.
MarkovSource parse_source(const std::string& text);

/// Stationary distribution of the chain on words of length max(n, 1), exact.
/// For i.i.d. sources this is the symbol law itself.
std::vector<mpq_class> stationary_distribution(const MarkovSource& src);

/// Conditional law given the last n symbols of the past.
struct ConditionalMeasure {
  const MarkovSource* source = nullptr;
  std::vector<int> context;

  /// Mass of the base-a cylinder [w] = [0.w, 0.w + a^-|w|).
  mpq_class mass(const std::vector<int>& word) const;
  long context_index() const;
};
ConditionalMeasure conditional_measure(const MarkovSource& src, const std::vector<int>& context);

/// Largest conditional mass of a uniform interval of length 1/k. For k = a^m this is
/// the exact max over contexts and depth-m cylinders; otherwise a^m <= k < a^{m+1}
/// and each interval meets at most two depth-m cylinders, so twice that max is returned.
mpq_class ess_sup_interval_mass(const MarkovSource& src, long k);
/// Exact max over contexts of sum over same-or-adjacent depth-m cylinder pairs of
/// mu[w] mu[w'], k = a^m.
mpq_class near_diagonal_mass(const MarkovSource& src, long k);
/// Same quantity by enumerating all depth-m cylinders; test oracle for small m.
mpq_class near_diagonal_mass_brute(const MarkovSource& src, long k);

struct ConditionGridPoint {
  long k = 0;
  mpq_class ess_sup;
  mpq_class near_diag;
};

struct ConditionEstimates {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  std::vector<ConditionGridPoint> grid;
  /// alpha_hat <= beta_hat + 0.05
  bool ordered = true;
};
ConditionEstimates fit_condition_exponents(const MarkovSource& src, int m_max);

/// Entropy rate in nats.
double chain_entropy(const MarkovSource& src);

/// Digits of a stationary trajectory; deterministic in seed.
std::vector<int> sample_digits(const MarkovSource& src, long count, std::uint64_t seed);
/// Exact point sum w_i a^-i of a stationary trajectory.
Enclosure sample_point(const MarkovSource& src, long digits, std::uint64_t seed);

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace betalab
