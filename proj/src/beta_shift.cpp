#include "betalab/beta_shift.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "betalab/errors.hpp"

namespace betalab {
namespace {

Enclosure seed_one(const BetaNumber& b) {
  if (b.is_exact()) return Enclosure::from_exact(QuadNumber(1), 64);
  return Enclosure::dyadic(1, 0);
}

bool is_zero(const Enclosure& e) {
  if (e.exact) return e.exact->sign() == 0;
  return e.lo == 0 && e.hi == 0;
}

long longest_zero_run(std::span<const long> digits) {
  long best = 0, run = 0;
  for (long d : digits) {
    run = d == 0 ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

}  // namespace

BExpansion greedy_expansion(const BetaNumber& b, const Enclosure& x, long length, const OrbitOptions& options) {
  if (length < 1) throw DomainError("expansion length must be >= 1");
  mpz_class one = 1;
  one <<= static_cast<mp_bitcnt_t>(x.scale);
  if (x.lo < 0 || x.hi >= one) throw DomainError("greedy expansion needs a point of [0,1)");
  Orbit o = tb_orbit(b, x, length, options);
  return BExpansion{b, std::move(o.digits), std::move(o.points), false};
}

BExpansion expansion_of_one(const BetaNumber& b, long length, const OrbitOptions& options) {
  if (length < 1) throw DomainError("expansion length must be >= 1");
  Orbit o = tb_orbit(b, seed_one(b), length, options);
  return BExpansion{b, std::move(o.digits), std::move(o.points), true};
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Simple:
      return "Simple";
    case Verdict::SimpleParry:
      return "SimpleParry";
    case Verdict::Parry:
      return "Parry";
    case Verdict::SpecifiedWitness:
      return "SpecifiedWitness";
    case Verdict::Undetermined:
      return "Undetermined";
  }
  return "?";
}

NumberClass classify(const BetaNumber& b, long depth) {
  if (depth < 2) throw DomainError("classification depth must be >= 2");
  NumberClass out;
  out.depth = depth;

  // certify as deep as the precision budget allows
  std::optional<BExpansion> exp;
  for (long d = depth; d >= 1 && !exp; d /= 2) {
    try {
      exp = expansion_of_one(b, d);
    } catch (const PrecisionExhausted&) {
      if (d == 1) break;
    }
  }
  if (!exp) {
    out.verdict = Verdict::Undetermined;
    return out;
  }
  const long got = static_cast<long>(exp->digits.size());
  out.evidence.certified_depth = got;
  out.digits = exp->digits;

  for (long n = 0; n < got; ++n) {
    if (is_zero(exp->orbit[static_cast<std::size_t>(n)])) {
      out.evidence.hit_zero_at = n + 1;
      break;
    }
  }
  if (out.evidence.hit_zero_at) {
    long finite = *out.evidence.hit_zero_at;
    out.evidence.max_zero_run = longest_zero_run(std::span<const long>(exp->digits).first(static_cast<std::size_t>(finite)));
    out.verdict = Verdict::Simple;
    return out;
  }
  out.evidence.max_zero_run = longest_zero_run(exp->digits);

  if (b.is_exact()) {
    std::map<std::string, long> seen;
    for (long j = 0; j < got; ++j) {
      const QuadNumber& v = *exp->orbit[static_cast<std::size_t>(j)].exact;
      auto [it, inserted] = seen.emplace(v.str(), j);
      if (!inserted) {
        long i = it->second;
        // T^{i+1}(1) = T^{j+1}(1): digits from index i+1 repeat with period j - i
        out.evidence.period = std::make_pair(i + 1, j - i);
        out.verdict = i == 0 ? Verdict::SimpleParry : Verdict::Parry;
        return out;
      }
    }
  }
  out.verdict = got < depth ? Verdict::Undetermined : Verdict::SpecifiedWitness;
  return out;
}

long AdmissibilityRule::at(std::size_t i) const {
  if (quasi_greedy) return comparison_word[i % comparison_word.size()];
  if (i >= comparison_word.size()) throw DomainError("admissibility rule is shorter than the word");
  return comparison_word[i];
}

std::size_t AdmissibilityRule::available() const {
  return quasi_greedy ? static_cast<std::size_t>(-1) : comparison_word.size();
}

AdmissibilityRule make_admissibility_rule(const BetaNumber& b, long depth) {
  if (depth < 1) throw DomainError("rule depth must be >= 1");
  BExpansion e = expansion_of_one(b, depth);
  AdmissibilityRule rule;
  rule.ceil_b = b.ceil_b();
  for (std::size_t n = 0; n < e.orbit.size(); ++n) {
    if (is_zero(e.orbit[n])) {
      rule.quasi_greedy = true;
      rule.comparison_word.assign(e.digits.begin(), e.digits.begin() + static_cast<std::ptrdiff_t>(n + 1));
      rule.comparison_word.back() -= 1;
      return rule;
    }
  }
  rule.comparison_word = std::move(e.digits);
  return rule;
}

Admissibility is_admissible(std::span<const long> word, const AdmissibilityRule& rule) {
  for (long d : word)
    if (d < 0 || d >= rule.ceil_b) throw DomainError("digit outside the alphabet {0,..,ceil(b)-1}");
  if (word.size() > rule.available()) throw DomainError("admissibility rule is shorter than the word");
  Admissibility out;
  for (std::size_t n = 1; n < word.size(); ++n) {
    bool decided = false;
    for (std::size_t j = 0; n + j < word.size(); ++j) {
      long c = rule.at(j);
      if (word[n + j] != c) {
        if (word[n + j] > c) {
          out.admissible = false;
          return out;
        }
        decided = true;
        break;
      }
    }
    if (!decided) out.depth_limited = true;
  }
  return out;
}

SpecificationConstants specification_constants(const BetaNumber& b, long a, long depth) {
  if (a < 2) throw DomainError("a must be >= 2");
  if (depth < 1) throw DomainError("depth must be >= 1");
  BExpansion e = expansion_of_one(b, depth);
  SpecificationConstants out;
  std::optional<mpq_class> best;
  for (const Enclosure& r : e.orbit) {
    if (is_zero(r)) continue;
    if (r.exact) {
      mpq_class lo = r.exact->sign() > 0 ? Enclosure::from_exact(*r.exact, 96).lo_q() : mpq_class(0);
      if (!best || lo < *best) best = lo;
      continue;
    }
    if (r.lo <= 0) throw Undetermined("orbit value of 1 not separated from 0");
    mpq_class lo = r.lo_q();
    if (!best || lo < *best) best = lo;
  }
  if (!best) {
    out.empty_positive_set = true;
    best = 1;
  }
  out.m_b_lower = *best;
  mpq_class ratio = mpq_class(a) / out.m_b_lower;
  out.discontinuity_budget = ceil_q(ratio).get_si();
  return out;
}

std::string format_word(std::span<const long> word, long ceil_b) {
  bool compact = ceil_b <= 10 && std::all_of(word.begin(), word.end(), [](long d) { return d >= 0 && d < 10; });
  std::string s;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!compact && i > 0) s.push_back(',');
    s += std::to_string(word[i]);
  }
  return s;
}

std::vector<long> parse_word(const std::string& text) {
  std::vector<long> out;
  if (text.find(',') != std::string::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find(',', start);
      if (end == std::string::npos) end = text.size();
      std::string tok = text.substr(start, end - start);
      if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw DomainError("malformed digit word '" + text + "'");
      out.push_back(std::stol(tok));
      start = end + 1;
    }
    return out;
  }
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw DomainError("malformed digit word '" + text + "'");
    out.push_back(c - '0');
  }
  return out;
}

}  // namespace betalab
