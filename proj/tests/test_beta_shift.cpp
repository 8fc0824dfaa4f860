#include <random>

#include "betalab/beta_shift.hpp"
#include "betalab/errors.hpp"
#include "doctest.h"

using namespace betalab;

namespace {

QuadNumber phi() { return QuadNumber(mpq_class(1, 2), mpq_class(1, 2), 5); }

Enclosure exact_point(const QuadNumber& q) { return Enclosure::from_exact(q, 64); }

}  // namespace

TEST_CASE("greedy_expansion examples") {
  CHECK(greedy_expansion(parse_beta("2"), exact_point(QuadNumber(mpq_class(1, 3))), 4).digits ==
        std::vector<long>{0, 1, 0, 1});
  CHECK(greedy_expansion(parse_beta("(1+sqrt5)/2"), exact_point(phi() - QuadNumber(1)), 4).digits ==
        std::vector<long>{1, 0, 0, 0});
  CHECK(greedy_expansion(parse_beta("5/2"), exact_point(QuadNumber(0)), 3).digits == std::vector<long>{0, 0, 0});
  CHECK_THROWS_AS(greedy_expansion(parse_beta("2"), exact_point(QuadNumber(0)), 0), DomainError);
}

TEST_CASE("expansion_of_one examples") {
  BExpansion two = expansion_of_one(parse_beta("2"), 3);
  CHECK(two.of_one);
  CHECK(two.digits == std::vector<long>{2, 0, 0});

  BExpansion g = expansion_of_one(parse_beta("(1+sqrt5)/2"), 4);
  CHECK(g.digits == std::vector<long>{1, 1, 0, 0});
  CHECK(*g.orbit[0].exact == phi() - QuadNumber(1));
  for (int i = 1; i < 4; ++i) CHECK(g.orbit[static_cast<std::size_t>(i)].exact->sign() == 0);

  BExpansion s = expansion_of_one(parse_beta("1+sqrt2"), 4);
  CHECK(s.digits == std::vector<long>{2, 1, 0, 0});
  CHECK(*s.orbit[0].exact == QuadNumber(-1, 1, 2));
}

TEST_CASE("classify examples") {
  NumberClass two = classify(parse_beta("2"), 10);
  CHECK(two.verdict == Verdict::Simple);
  CHECK(two.evidence.hit_zero_at == 1);

  NumberClass g = classify(parse_beta("(1+sqrt5)/2"), 10);
  CHECK(g.verdict == Verdict::Simple);
  CHECK(g.evidence.hit_zero_at == 2);
  CHECK(std::vector<long>(g.digits.begin(), g.digits.begin() + 3) == std::vector<long>{1, 1, 0});

  NumberClass big = classify(parse_beta("1.8"), 64);
  CHECK((big.verdict == Verdict::SpecifiedWitness || big.verdict == Verdict::Undetermined));
  CHECK(big.evidence.max_zero_run >= 1);
  CHECK(!big.evidence.period);

  // phi^2: 1 = 2/b + sum 1/b^k, orbit of 1 is eventually fixed at phi - 1
  NumberClass sq = classify(parse_beta("(3+sqrt5)/2"), 20);
  CHECK(sq.verdict == Verdict::SimpleParry);
  CHECK(sq.evidence.period == std::make_pair(1L, 1L));

  CHECK_THROWS_AS(classify(parse_beta("2"), 1), DomainError);
}

TEST_CASE("precision-limited base is undetermined past its certified depth") {
  NumberClass c = classify(parse_beta("1.8@40"), 200);
  CHECK(c.verdict == Verdict::Undetermined);
  CHECK(c.evidence.certified_depth < 200);
  CHECK(c.evidence.certified_depth > 0);
}

TEST_CASE("is_admissible examples") {
  AdmissibilityRule golden = make_admissibility_rule(parse_beta("(1+sqrt5)/2"), 8);
  CHECK(golden.quasi_greedy);
  CHECK(golden.comparison_word == std::vector<long>{1, 0});
  Admissibility alt = is_admissible(std::vector<long>{1, 0, 1, 0, 1, 0}, golden);
  CHECK(alt.admissible);
  CHECK(alt.depth_limited);
  CHECK_FALSE(is_admissible(std::vector<long>{0, 1, 1, 0}, golden).admissible);
  CHECK(is_admissible(std::vector<long>{}, golden).admissible);
  CHECK_THROWS_AS(is_admissible(std::vector<long>{2}, golden), DomainError);

  AdmissibilityRule limited = make_admissibility_rule(parse_beta("1.8"), 4);
  CHECK_FALSE(limited.quasi_greedy);
  CHECK_THROWS_AS(is_admissible(std::vector<long>{0, 0, 0, 0, 0, 0}, limited), DomainError);
}

TEST_CASE("specification_constants examples") {
  SpecificationConstants g = specification_constants(parse_beta("(1+sqrt5)/2"), 2, 16);
  CHECK(g.m_b_lower.get_d() == doctest::Approx(0.6180339887).epsilon(1e-9));
  CHECK(g.m_b_lower <= mpq_class("6180339888/10000000000"));
  CHECK(g.discontinuity_budget == 4);

  SpecificationConstants two = specification_constants(parse_beta("2"), 3, 8);
  CHECK(two.empty_positive_set);
  CHECK(two.m_b_lower == 1);
  CHECK(two.discontinuity_budget == 3);

  SpecificationConstants s = specification_constants(parse_beta("1+sqrt2"), 2, 16);
  CHECK(s.m_b_lower.get_d() == doctest::Approx(0.41421356).epsilon(1e-8));
  CHECK(s.discontinuity_budget == 5);

  CHECK_THROWS_AS(specification_constants(parse_beta("2"), 1, 8), DomainError);
}

TEST_CASE("word serialization") {
  std::vector<long> w{1, 0, 2};
  CHECK(format_word(w, 3) == "102");
  CHECK(format_word(std::vector<long>{10, 3}, 11) == "10,3");
  CHECK(parse_word("102") == w);
  CHECK(parse_word("10,3") == std::vector<long>{10, 3});
  CHECK_THROWS_AS(parse_word("1a"), DomainError);
}

TEST_CASE("property: greedy digits reconstruct x and are admissible") {
  std::mt19937_64 rng(3);
  for (const char* desc : {"(1+sqrt5)/2", "1+sqrt2", "5/2", "1.8", "(3+sqrt5)/2"}) {
    BetaNumber b = parse_beta(desc);
    AdmissibilityRule rule = make_admissibility_rule(b, 64);
    for (int t = 0; t < 5; ++t) {
      double x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      BExpansion e = greedy_expansion(b, Enclosure::from_double(x), 40);
      double bd = b.to_double(), sum = 0, w = 1;
      for (long d : e.digits) {
        w /= bd;
        sum += static_cast<double>(d) * w;
      }
      // remaining tail is T^L(x) b^-L < b^-L
      CHECK(std::abs(x - sum) <= std::pow(bd, -40.0) + 1e-14);
      CHECK(is_admissible(e.digits, rule).admissible);
    }
  }
}

TEST_CASE("property: classify evidence is monotone in depth") {
  for (const char* desc : {"1.8", "(1+sqrt13)/2", "7/3"}) {
    BetaNumber b = parse_beta(desc);
    NumberClass shallow = classify(b, 32), deep = classify(b, 64);
    REQUIRE(deep.digits.size() >= shallow.digits.size());
    CHECK(std::equal(shallow.digits.begin(), shallow.digits.end(), deep.digits.begin()));
    CHECK(shallow.evidence.max_zero_run <= deep.evidence.max_zero_run);
  }
}

TEST_CASE("property: interval digits equal exact digits for quadratic bases") {
  std::mt19937_64 rng(5);
  BetaNumber b = parse_beta("1+sqrt2");
  OrbitOptions interval;
  interval.path = OrbitPath::Interval;
  for (int t = 0; t < 5; ++t) {
    QuadNumber x(mpq_class(mpz_class(static_cast<unsigned long>(rng() >> 24)), mpz_class(1) << 40));
    CHECK(greedy_expansion(b, exact_point(x), 100).digits == greedy_expansion(b, exact_point(x), 100, interval).digits);
  }
}
