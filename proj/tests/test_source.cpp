#include <cmath>
#include <random>

#include "betalab/errors.hpp"
#include "betalab/source.hpp"
#include "doctest.h"

using namespace betalab;

namespace {

MarkovSource chain() { return parse_source("markov1:9/10,1/10;1/5,4/5"); }
MarkovSource biased() { return parse_source("iid:7/10,3/10"); }

mpq_class pow_q(mpq_class q, int e) {
  mpq_class r = 1;
  for (int i = 0; i < e; ++i) r *= q;
  return r;
}

MarkovSource random_source(std::mt19937_64& rng, int a, int order) {
  std::uniform_int_distribution<int> w(1, 9);
  long rows = 1;
  for (int i = 0; i < order; ++i) rows *= a;
  std::vector<std::vector<mpq_class>> t;
  for (long r = 0; r < rows; ++r) {
    std::vector<int> raw;
    int sum = 0;
    for (int s = 0; s < a; ++s) sum += raw.emplace_back(w(rng));
    std::vector<mpq_class> row;
    for (int x : raw) row.emplace_back(x, sum);
    for (auto& q : row) q.canonicalize();
    t.push_back(row);
  }
  return MarkovSource::markov(order, t);
}

}  // namespace

TEST_CASE("descriptor parsing") {
  MarkovSource s = biased();
  CHECK(s.alphabet() == 2);
  CHECK(s.order() == 0);
  CHECK(s.descriptor() == "iid:7/10,3/10");
  CHECK(parse_source("iid:0.7,0.3").descriptor() == "iid:7/10,3/10");
  CHECK(chain().descriptor() == "markov1:9/10,1/10;1/5,4/5");
  MarkovSource j = parse_source(R"({"alphabet": 2, "order": 1, "transition": [["9/10", "1/10"], ["1/5", "4/5"]]})");
  CHECK(j.descriptor() == chain().descriptor());
  CHECK_THROWS_AS(parse_source("iid:1,0"), DomainError);
  CHECK_THROWS_AS(parse_source("iid:1/2,1/3"), DomainError);
  CHECK_THROWS_AS(parse_source("markov1:1/2,1/2"), DomainError);
  CHECK_THROWS_AS(parse_source("hmm:1/2,1/2"), DomainError);
  CHECK_THROWS_AS(parse_source("iid:1"), DomainError);
}

TEST_CASE("stationary_distribution examples") {
  CHECK(stationary_distribution(parse_source("iid:1/2,1/2")) == std::vector<mpq_class>{mpq_class(1, 2), mpq_class(1, 2)});
  CHECK(stationary_distribution(chain()) == std::vector<mpq_class>{mpq_class(2, 3), mpq_class(1, 3)});
  CHECK(stationary_distribution(parse_source("markov1:1/2,1/2;1/2,1/2")) ==
        std::vector<mpq_class>{mpq_class(1, 2), mpq_class(1, 2)});
}

TEST_CASE("conditional_measure examples") {
  MarkovSource b = biased();
  CHECK(conditional_measure(b, {}).mass({0, 0}) == mpq_class(49, 100));
  MarkovSource c = chain();
  CHECK(conditional_measure(c, {0}).mass({0, 1}) == mpq_class(9, 100));
  CHECK(conditional_measure(c, {1}).mass({}) == 1);
  CHECK_THROWS_AS(conditional_measure(c, {2}), DomainError);
  CHECK_THROWS_AS(conditional_measure(c, {}), DomainError);
  CHECK_THROWS_AS(conditional_measure(c, {0}).mass({3}), DomainError);
}

TEST_CASE("ess_sup_interval_mass examples") {
  CHECK(ess_sup_interval_mass(biased(), 32) == mpq_class(16807, 100000));
  for (int m = 0; m <= 10; ++m) CHECK(ess_sup_interval_mass(parse_source("iid:1/2,1/2"), 1L << m) == pow_q(mpq_class(1, 2), m));
  CHECK(ess_sup_interval_mass(chain(), 4) == mpq_class(81, 100));
  // k = 5 is covered by two depth-2 cylinders
  CHECK(ess_sup_interval_mass(biased(), 5) == 2 * mpq_class(49, 100));
}

TEST_CASE("near_diagonal_mass examples") {
  MarkovSource u = parse_source("iid:1/2,1/2");
  for (int m = 1; m <= 12; ++m) CHECK(near_diagonal_mass(u, 1L << m) <= 3 * pow_q(mpq_class(1, 2), m));
  CHECK(near_diagonal_mass(u, 1) == 1);
  CHECK(near_diagonal_mass(biased(), 1) == 1);
  for (int m = 1; m <= 10; ++m) CHECK(near_diagonal_mass(biased(), 1L << m) == near_diagonal_mass_brute(biased(), 1L << m));
  CHECK_THROWS_AS(near_diagonal_mass(biased(), 6), DomainError);
}

TEST_CASE("fit_condition_exponents examples") {
  ConditionEstimates u = fit_condition_exponents(parse_source("iid:1/2,1/2"), 12);
  CHECK(u.alpha_hat == doctest::Approx(1.0).epsilon(0.05));
  CHECK(u.beta_hat == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit_condition_exponents(biased(), 12).alpha_hat == doctest::Approx(-std::log2(0.7)).epsilon(0.05));
  ConditionEstimates c = fit_condition_exponents(chain(), 12);
  CHECK(std::abs(c.alpha_hat - -std::log2(0.9)) <= 0.05);
  CHECK(c.ordered);
  CHECK(c.grid.size() == 12);
  CHECK_THROWS_AS(fit_condition_exponents(chain(), 2), DomainError);
}

TEST_CASE("chain_entropy examples") {
  CHECK(chain_entropy(parse_source("iid:1/2,1/2")) == doctest::Approx(std::log(2.0)));
  CHECK(chain_entropy(biased()) == doctest::Approx(0.6109).epsilon(1e-4));
  // pi = (2/3, 1/3)
  const double h = -(2.0 / 3) * (0.9 * std::log(0.9) + 0.1 * std::log(0.1)) - (1.0 / 3) * (0.2 * std::log(0.2) + 0.8 * std::log(0.8));
  CHECK(chain_entropy(chain()) == doctest::Approx(h));
}

TEST_CASE("sampling") {
  MarkovSource u = parse_source("iid:1/2,1/2");
  CHECK(sample_point(u, 4, 9).exact == sample_point(u, 4, 9).exact);
  Enclosure p = sample_point(u, 4, 9);
  REQUIRE(p.exact);
  CHECK(p.exact->sign() >= 0);
  CHECK(*p.exact < QuadNumber(1));

  const long n = 100000;
  for (const MarkovSource& s : {biased(), chain()}) {
    std::vector<int> d = sample_digits(s, n, 5);
    const double ones = static_cast<double>(std::count(d.begin(), d.end(), 1)) / n;
    const double p1 = stationary_distribution(s)[1].get_d();
    // the chain is positively correlated; sigma grows by sqrt((1 + lambda)/(1 - lambda)), lambda = 0.7
    const double inflate = s.order() == 0 ? 1.0 : std::sqrt(1.7 / 0.3);
    CHECK(std::abs(ones - p1) <= 3 * inflate * std::sqrt(p1 * (1 - p1) / n));
  }
  CHECK_THROWS_AS(sample_point(u, 0, 1), DomainError);
}

TEST_CASE("property: cylinder masses sum to one exactly") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 6; ++t) {
    MarkovSource s = random_source(rng, 2 + t % 2, t % 3);
    std::vector<int> ctx(static_cast<std::size_t>(s.order()), s.alphabet() - 1);
    ConditionalMeasure mu = conditional_measure(s, ctx);
    const int m = 5;
    long total_words = 1;
    for (int i = 0; i < m; ++i) total_words *= s.alphabet();
    mpq_class sum = 0;
    for (long w = 0; w < total_words; ++w) {
      std::vector<int> word(m);
      for (long v = w, i = m - 1; i >= 0; --i, v /= s.alphabet()) word[static_cast<std::size_t>(i)] = static_cast<int>(v % s.alphabet());
      sum += mu.mass(word);
    }
    CHECK(sum == 1);
  }
}

TEST_CASE("property: near-diagonal DP matches enumeration and dominates the diagonal") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 8; ++t) {
    MarkovSource s = random_source(rng, 2 + t % 3, t % 3);
    long k = 1;
    for (int m = 1; m <= 5; ++m) {
      k *= s.alphabet();
      const mpq_class nd = near_diagonal_mass(s, k);
      CHECK(nd == near_diagonal_mass_brute(s, k));
      mpq_class e = ess_sup_interval_mass(s, k);
      CHECK(e * e <= nd);
    }
  }
}

TEST_CASE("property: finite-memory bound on conditional interval masses") {
  // Counting the window [x_0^{m-1}] as m symbols: mass <= s^m <= s^{(m-1)/n + 1} for n >= 1.
  std::mt19937_64 rng(13);
  for (int t = 0; t < 6; ++t) {
    MarkovSource s = random_source(rng, 2, 1 + t % 2);
    long k = 1;
    for (int m = 1; m <= 12; ++m) {
      k *= 2;
      const double bound = std::pow(s.max_prob().get_d(), static_cast<double>(m - 1) / s.order() + 1);
      CHECK(ess_sup_interval_mass(s, k).get_d() <= bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("property: i.i.d. exponent fit recovers -log_a s") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 4; ++t) {
    MarkovSource s = random_source(rng, 2 + t % 2, 0);
    const double expected = -std::log(s.max_prob().get_d()) / std::log(s.alphabet());
    CHECK(std::abs(fit_condition_exponents(s, 10).alpha_hat - expected) <= 0.05);
  }
}
