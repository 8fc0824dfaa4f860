#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "betalab/precision.hpp"

namespace betalab {

/// Digit word of a point (or of 1) together with the orbit enclosures that produced it.
/// digits[i] = floor(b T_b^i(seed)); orbit[i] = T_b^{i+1}(seed).
struct BExpansion {
  BetaNumber base;
  std::vector<long> digits;
  std::vector<Enclosure> orbit;
  /// The expansion of 1 may use the extra leading digit floor(b).
  bool of_one = false;
};

BExpansion greedy_expansion(const BetaNumber& b, const Enclosure& x, long length, const OrbitOptions& options = {});
BExpansion expansion_of_one(const BetaNumber& b, long length, const OrbitOptions& options = {});

enum class Verdict { Simple, SimpleParry, Parry, SpecifiedWitness, Undetermined };
const char* to_string(Verdict v);

struct ClassEvidence {
  /// Smallest n >= 1 with T_b^n(1) = 0.
  std::optional<long> hit_zero_at;
  /// (preperiod, period) of the digit word of 1, certified by exact equality of orbit points.
  std::optional<std::pair<long, long>> period;
  long max_zero_run = 0;
  long certified_depth = 0;
};

struct NumberClass {
  Verdict verdict = Verdict::Undetermined;
  long depth = 0;
  ClassEvidence evidence;
  std::vector<long> digits;  ///< certified prefix of the expansion of 1
};

/// Classification of b from its orbit of 1 to the given depth. Periodicity is only
/// certified for exact kinds; SpecifiedWitness is evidence, never a proof.
NumberClass classify(const BetaNumber& b, long depth);

/// Comparison word for Parry's lexicographic criterion. For simple b with finite
/// expansion (a_0..a_{m-1}) the word is the periodic ((a_0..a_{m-1} - 1))^inf.
struct AdmissibilityRule {
  long ceil_b = 0;
  std::vector<long> comparison_word;
  bool quasi_greedy = false;  ///< comparison_word is one period, repeated forever

  long at(std::size_t i) const;
  std::size_t available() const;
};

AdmissibilityRule make_admissibility_rule(const BetaNumber& b, long depth);

struct Admissibility {
  bool admissible = true;
  /// Some suffix agreed with the comparison word on its whole length.
  bool depth_limited = false;
  explicit operator bool() const { return admissible; }
};

/// Every suffix (w_n, w_{n+1}, ...), n >= 1, must be lexicographically below the
/// comparison word; a suffix that ties on its whole length is accepted and flagged.
Admissibility is_admissible(std::span<const long> word, const AdmissibilityRule& rule);

struct SpecificationConstants {
  mpq_class m_b_lower;            ///< certified lower bound of the smallest positive r_n seen
  long discontinuity_budget = 0;  ///< ceil(a / m_b_lower)
  bool empty_positive_set = false;
};

/// Lower bound of m_b = inf{r_n > 0} over n < depth and the count ceil(a/m_b).
/// When no orbit value of 1 is positive (integer b) m_b is taken to be 1.
SpecificationConstants specification_constants(const BetaNumber& b, long a, long depth);

/// Digits as a plain string when every digit is < 10 and ceil_b <= 10, comma-separated otherwise.
std::string format_word(std::span<const long> word, long ceil_b);
std::vector<long> parse_word(const std::string& text);

}  // namespace betalab
