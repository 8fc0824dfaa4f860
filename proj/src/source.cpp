#include "betalab/source.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "betalab/errors.hpp"
#include "betalab/random.hpp"
#include "betalab/quadratic.hpp"
#include "json.hpp"

namespace betalab {
namespace {

long ipow(long a, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= a;
  return r;
}

// m with a^m == k, or -1
int exact_log(long a, long k) {
  int m = 0;
  long p = 1;
  while (p < k) {
    p *= a;
    ++m;
  }
  return p == k ? m : -1;
}

int floor_log(long a, long k) {
  int m = 0;
  for (long p = a; p <= k; p *= a) ++m;
  return m;
}

void check_k(long k) {
  if (k < 1) throw DomainError("k must be >= 1");
}

int power_depth(const MarkovSource& src, long k) {
  check_k(k);
  const int m = exact_log(src.alphabet(), k);
  if (m < 0) throw DomainError("k must be a power of the alphabet size");
  return m;
}

// Solves x A = 0, sum x = 1 for the stochastic matrix P (A = P - I) by exact elimination.
std::vector<mpq_class> solve_stationary(const std::vector<std::vector<mpq_class>>& p) {
  const std::size_t s = p.size();
  // rows of M are the equations: (P^T - I) x = 0 with the last equation replaced by sum x = 1
  std::vector<std::vector<mpq_class>> m(s, std::vector<mpq_class>(s + 1));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) m[i][j] = p[j][i] - (i == j ? 1 : 0);
  for (std::size_t j = 0; j < s; ++j) m[s - 1][j] = 1;
  m[s - 1][s] = 1;
  for (std::size_t c = 0; c < s; ++c) {
    std::size_t piv = c;
    while (piv < s && m[piv][c] == 0) ++piv;
    if (piv == s) throw DomainError("transition matrix has no unique stationary law");
    std::swap(m[c], m[piv]);
    for (std::size_t r = 0; r < s; ++r) {
      if (r == c || m[r][c] == 0) continue;
      const mpq_class f = m[r][c] / m[c][c];
      for (std::size_t j = c; j <= s; ++j) m[r][j] -= f * m[c][j];
    }
  }
  std::vector<mpq_class> x(s);
  for (std::size_t i = 0; i < s; ++i) x[i] = m[i][s] / m[i][i];
  return x;
}

std::vector<mpq_class> parse_row(const std::string& text) {
  std::vector<mpq_class> row;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) row.push_back(parse_rational(item));
  return row;
}

std::vector<double> cumulative(const std::vector<mpq_class>& p) {
  std::vector<double> c;
  double acc = 0;
  for (const mpq_class& q : p) c.push_back(acc += q.get_d());
  c.back() = 1.0;
  return c;
}

int draw(const std::vector<double>& cdf, double u) {
  return static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

}  // namespace

MarkovSource MarkovSource::iid(std::vector<mpq_class> p) {
  MarkovSource s;
  s.a_ = static_cast<int>(p.size());
  s.n_ = 0;
  s.rows_ = {std::move(p)};
  s.finish();
  return s;
}

MarkovSource MarkovSource::markov(int order, std::vector<std::vector<mpq_class>> rows) {
  if (order < 0) throw DomainError("order must be >= 0");
  if (rows.empty()) throw DomainError("no transition rows");
  MarkovSource s;
  s.a_ = static_cast<int>(rows.front().size());
  s.n_ = order;
  if (s.a_ >= 2 && static_cast<long>(rows.size()) != ipow(s.a_, order))
    throw DomainError("an order-" + std::to_string(order) + " source needs a^order transition rows");
  s.rows_ = std::move(rows);
  s.finish();
  return s;
}

void MarkovSource::finish() {
  if (a_ < 2) throw DomainError("alphabet size must be >= 2");
  for (const auto& row : rows_) {
    if (static_cast<int>(row.size()) != a_) throw DomainError("transition rows must all have length a");
    mpq_class sum = 0;
    for (const mpq_class& q : row) {
      if (q <= 0) throw DomainError("transition entries must be positive (zero entries give a degenerate source)");
      sum += q;
    }
    if (sum != 1) throw DomainError("transition row does not sum to 1");
  }
  s_ = 0;
  for (const auto& row : rows_)
    for (const mpq_class& q : row) s_ = std::max(s_, q);
  if (n_ == 0) {
    pi_ = {1};
    return;
  }
  std::vector<std::vector<mpq_class>> p(rows_.size(), std::vector<mpq_class>(rows_.size()));
  for (long c = 0; c < contexts(); ++c)
    for (int s = 0; s < a_; ++s) p[static_cast<std::size_t>(c)][static_cast<std::size_t>(next(c, s))] += prob(c, s);
  pi_ = solve_stationary(p);
}

long MarkovSource::next(long context, int symbol) const {
  if (n_ == 0) return 0;
  return (context * a_ + symbol) % contexts();
}

std::string MarkovSource::descriptor() const {
  std::string out = n_ == 0 ? "iid:" : "markov" + std::to_string(n_) + ":";
  for (std::size_t c = 0; c < rows_.size(); ++c) {
    if (c) out += ';';
    for (std::size_t s = 0; s < rows_[c].size(); ++s) {
      if (s) out += ',';
      out += rows_[c][s].get_str();
    }
  }
  return out;
}

MarkovSource parse_source(const std::string& text) {
  const auto start = text.find_first_not_of(" \t\n");
  if (start != std::string::npos && text[start] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("source JSON: ") + e.what());
    }
    const int order = j.value("order", 0);
    std::vector<std::vector<mpq_class>> rows;
    for (const auto& r : j.at("transition")) {
      std::vector<mpq_class> row;
      for (const auto& v : r) row.push_back(v.is_string() ? parse_rational(v.get<std::string>()) : mpq_class(v.get<double>()));
      rows.push_back(std::move(row));
    }
    if (j.contains("alphabet") && !rows.empty() && j["alphabet"].get<std::size_t>() != rows.front().size())
      throw DomainError("alphabet does not match the transition rows");
    return order == 0 && rows.size() == 1 ? MarkovSource::iid(rows.front()) : MarkovSource::markov(order, rows);
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw DomainError("source descriptor needs 'iid:' or 'markovN:' prefix");
  const std::string kind = text.substr(0, colon), body = text.substr(colon + 1);
  if (kind == "iid") return MarkovSource::iid(parse_row(body));
  if (kind.rfind("markov", 0) == 0 && kind.size() > 6 &&
      std::all_of(kind.begin() + 6, kind.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    std::vector<std::vector<mpq_class>> rows;
    std::stringstream ss(body);
    std::string row;
    while (std::getline(ss, row, ';')) rows.push_back(parse_row(row));
    return MarkovSource::markov(std::stoi(kind.substr(6)), std::move(rows));
  }
  throw DomainError("unknown source kind '" + kind + "'");
}

std::vector<mpq_class> stationary_distribution(const MarkovSource& src) {
  if (src.order() == 0) {
    std::vector<mpq_class> p;
    for (int s = 0; s < src.alphabet(); ++s) p.push_back(src.prob(0, s));
    return p;
  }
  return src.context_law();
}

long ConditionalMeasure::context_index() const {
  long c = 0;
  for (int s : context) c = c * source->alphabet() + s;
  return c;
}

mpq_class ConditionalMeasure::mass(const std::vector<int>& word) const {
  mpq_class m = 1;
  long c = context_index();
  for (int s : word) {
    if (s < 0 || s >= source->alphabet()) throw DomainError("cylinder symbol outside the alphabet");
    m *= source->prob(c, s);
    c = source->next(c, s);
  }
  return m;
}

ConditionalMeasure conditional_measure(const MarkovSource& src, const std::vector<int>& context) {
  if (static_cast<int>(context.size()) != src.order()) throw DomainError("context length must equal the source order");
  for (int s : context)
    if (s < 0 || s >= src.alphabet()) throw DomainError("context symbol outside the alphabet");
  return {&src, context};
}

namespace {

// run[c] = mass of the constant word s^j from context c, for j = 0..m
std::vector<std::vector<mpq_class>> run_masses(const MarkovSource& src, int symbol, int m) {
  const auto nc = static_cast<std::size_t>(src.contexts());
  std::vector<std::vector<mpq_class>> r(static_cast<std::size_t>(m) + 1, std::vector<mpq_class>(nc, 1));
  for (int j = 1; j <= m; ++j)
    for (std::size_t c = 0; c < nc; ++c)
      r[static_cast<std::size_t>(j)][c] = src.prob(static_cast<long>(c), symbol) *
                                          r[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(src.next(static_cast<long>(c), symbol))];
  return r;
}

// max over words of length m of the conditional mass, per starting context
std::vector<mpq_class> max_word_mass(const MarkovSource& src, int m) {
  const auto nc = static_cast<std::size_t>(src.contexts());
  std::vector<mpq_class> v(nc, 1), w(nc);
  for (int j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < nc; ++c) {
      w[c] = 0;
      for (int s = 0; s < src.alphabet(); ++s)
        w[c] = std::max(w[c], mpq_class(src.prob(static_cast<long>(c), s) * v[static_cast<std::size_t>(src.next(static_cast<long>(c), s))]));
    }
    std::swap(v, w);
  }
  return v;
}

}  // namespace

mpq_class ess_sup_interval_mass(const MarkovSource& src, long k) {
  check_k(k);
  const int exact = exact_log(src.alphabet(), k);
  const int m = exact >= 0 ? exact : floor_log(src.alphabet(), k);
  std::vector<mpq_class> v = max_word_mass(src, m);
  mpq_class best = *std::max_element(v.begin(), v.end());
  return exact >= 0 ? best : mpq_class(2 * best);
}

mpq_class near_diagonal_mass(const MarkovSource& src, long k) {
  const int m = power_depth(src, k);
  const int a = src.alphabet();
  const auto nc = static_cast<std::size_t>(src.contexts());
  const auto last = run_masses(src, a - 1, m), first = run_masses(src, 0, m);

  mpq_class best = 0;
  for (std::size_t c0 = 0; c0 < nc; ++c0) {
    // q[c] = sum over prefixes p of length i ending in context c of mu[p]^2
    std::vector<mpq_class> q(nc, 0), q2(nc);
    q[c0] = 1;
    mpq_class adjacent = 0;
    for (int i = 0; i < m; ++i) {
      const auto j = static_cast<std::size_t>(m - i - 1);
      // pairs p s (a-1)^j and p (s+1) 0^j
      for (std::size_t c = 0; c < nc; ++c) {
        if (q[c] == 0) continue;
        const long cl = static_cast<long>(c);
        for (int s = 0; s + 1 < a; ++s)
          adjacent += q[c] * src.prob(cl, s) * last[j][static_cast<std::size_t>(src.next(cl, s))] * src.prob(cl, s + 1) *
                      first[j][static_cast<std::size_t>(src.next(cl, s + 1))];
      }
      std::fill(q2.begin(), q2.end(), 0);
      for (std::size_t c = 0; c < nc; ++c) {
        if (q[c] == 0) continue;
        for (int s = 0; s < a; ++s) {
          const mpq_class& p = src.prob(static_cast<long>(c), s);
          q2[static_cast<std::size_t>(src.next(static_cast<long>(c), s))] += q[c] * p * p;
        }
      }
      std::swap(q, q2);
    }
    mpq_class diag = 0;
    for (const mpq_class& x : q) diag += x;
    best = std::max(best, mpq_class(diag + 2 * adjacent));
  }
  return best;
}

mpq_class near_diagonal_mass_brute(const MarkovSource& src, long k) {
  const int m = power_depth(src, k);
  const int a = src.alphabet();
  mpq_class best = 0;
  for (long c0 = 0; c0 < src.contexts(); ++c0) {
    std::vector<int> ctx(static_cast<std::size_t>(src.order()));
    for (long c = c0, i = src.order() - 1; i >= 0; --i, c /= a) ctx[static_cast<std::size_t>(i)] = static_cast<int>(c % a);
    ConditionalMeasure mu = conditional_measure(src, ctx);
    std::vector<mpq_class> masses;
    for (long w = 0; w < k; ++w) {
      std::vector<int> word(static_cast<std::size_t>(m));
      for (long v = w, i = m - 1; i >= 0; --i, v /= a) word[static_cast<std::size_t>(i)] = static_cast<int>(v % a);
      masses.push_back(mu.mass(word));
    }
    mpq_class total = 0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      total += masses[i] * masses[i];
      if (i + 1 < masses.size()) total += 2 * masses[i] * masses[i + 1];
    }
    best = std::max(best, total);
  }
  return best;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConditionEstimates fit_condition_exponents(const MarkovSource& src, int m_max) {
  if (m_max < 3) throw DomainError("m_max must be >= 3");
  if (!(chain_entropy(src) > 0)) throw DomainError("degenerate source has zero entropy");
  ConditionEstimates out;
  std::vector<double> lk, le, ln;
  long k = 1;
  for (int m = 1; m <= m_max; ++m) {
    k *= src.alphabet();
    ConditionGridPoint g{k, ess_sup_interval_mass(src, k), near_diagonal_mass(src, k)};
    lk.push_back(std::log(static_cast<double>(k)));
    le.push_back(std::log(g.ess_sup.get_d()));
    ln.push_back(std::log(g.near_diag.get_d()));
    out.grid.push_back(std::move(g));
  }
  out.alpha_hat = -ls_slope(lk, le);
  out.beta_hat = -ls_slope(lk, ln);
  out.ordered = out.alpha_hat <= out.beta_hat + 0.05;
  return out;
}

double chain_entropy(const MarkovSource& src) {
  double h = 0;
  for (long c = 0; c < src.contexts(); ++c) {
    double hc = 0;
    for (int s = 0; s < src.alphabet(); ++s) {
      const double p = src.prob(c, s).get_d();
      hc -= p * std::log(p);
    }
    h += src.context_law()[static_cast<std::size_t>(c)].get_d() * hc;
  }
  return h;
}

std::vector<int> sample_digits(const MarkovSource& src, long count, std::uint64_t seed) {
  if (count < 0) throw DomainError("digit count must be >= 0");
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return uniform01(rng); };
  std::vector<std::vector<double>> rows;
  for (long c = 0; c < src.contexts(); ++c) {
    std::vector<mpq_class> row;
    for (int s = 0; s < src.alphabet(); ++s) row.push_back(src.prob(c, s));
    rows.push_back(cumulative(row));
  }
  long c = src.order() == 0 ? 0 : draw(cumulative(src.context_law()), uniform());
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int& d : out) {
    d = draw(rows[static_cast<std::size_t>(c)], uniform());
    c = src.next(c, d);
  }
  return out;
}

Enclosure sample_point(const MarkovSource& src, long digits, std::uint64_t seed) {
  if (digits < 1) throw DomainError("sample_point needs at least one digit");
  mpz_class num = 0;
  for (int d : sample_digits(src, digits, seed)) num = num * src.alphabet() + d;
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(src.alphabet()), static_cast<unsigned long>(digits));
  mpq_class x(num, den);
  x.canonicalize();
  const long bits = static_cast<long>(std::ceil(static_cast<double>(digits) * std::log2(src.alphabet()))) + 64;
  return Enclosure::from_exact(QuadNumber(x), bits);
}

}  // namespace betalab
