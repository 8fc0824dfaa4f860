#include "betalab/counterexample.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "betalab/errors.hpp"
#include "betalab/quadratic.hpp"
#include "betalab/random.hpp"
#include "betalab/source.hpp"

namespace betalab {

namespace {

mpq_class mpfr_to_q(mpfr_srcptr x) {
  mpz_class z;
  const mpfr_exp_t e = mpfr_get_z_2exp(z.get_mpz_t(), x);
  mpq_class q(z);
  if (e >= 0)
    mpz_mul_2exp(q.get_num_mpz_t(), q.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
  else
    mpz_mul_2exp(q.get_den_mpz_t(), q.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  q.canonicalize();
  return q;
}

// certified ln n > t; ln n is irrational for n >= 2 so refinement terminates
bool ln_exceeds(const mpz_class& n, const mpq_class& t) {
  for (long bits = 128; bits <= 16384; bits *= 2) {
    const auto [lo, hi] = ln_bracket(n, bits);
    if (lo > t) return true;
    if (hi < t) return false;
  }
  throw PrecisionExhausted("cannot compare ln n with the stage budget");
}

mpz_class smallest_n_above(const mpq_class& t, const mpz_class& min_n) {
  const long prec = static_cast<long>(t.get_d() * 1.45) + 96;
  mpfr_t x;
  mpfr_init2(x, prec);
  mpfr_set_q(x, t.get_mpq_t(), MPFR_RNDN);
  mpfr_exp(x, x, MPFR_RNDN);
  mpz_class n;
  mpfr_get_z(n.get_mpz_t(), x, MPFR_RNDD);
  mpfr_clear(x);
  n = std::max(mpz_class(n + 1), min_n);
  while (!ln_exceeds(n, t)) ++n;
  while (n - 1 >= min_n && ln_exceeds(mpz_class(n - 1), t)) --n;
  return n;
}

mpz_class ipow(long base, long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(e));
  return r;
}

// ln bracket refined until floor(lo) == floor(hi) and lo certifies 1/ln n < budget
void bracket_stage(Stage& s) {
  for (long bits = 256; bits <= 16384; bits *= 2) {
    std::tie(s.ln_lo, s.ln_hi) = ln_bracket(s.n, bits);
    if (floor_q(s.ln_lo) == floor_q(s.ln_hi) && s.ln_lo * s.budget > 1) {
      s.L = floor_q(s.ln_lo).get_si();
      return;
    }
  }
  throw PrecisionExhausted("cannot certify floor(ln n)");
}

bool fill_markers(Stage& s, int l) {
  const mpq_class lo2 = s.ln_lo * s.ln_lo, hi2 = s.ln_hi * s.ln_hi;
  for (int m = 1; m <= 40; ++m) {
    const mpz_class lm = ipow(l, m);
    const mpz_class c = floor_q(mpq_class(lm / (2 * lo2))) + 1;
    if (mpq_class(c, lm) * hi2 < 1) {
      s.depth = m;
      s.count = c;
      s.nu_y = mpq_class(c, lm);
      s.nu_y.canonicalize();
      return true;
    }
  }
  return false;
}

}  // namespace

double Stage::ln_n() const { return mpq_class((ln_lo + ln_hi) / 2).get_d(); }

std::pair<mpq_class, mpq_class> ln_bracket(const mpz_class& n, long bits) {
  if (n < 2) throw DomainError("ln bracket needs n >= 2");
  mpfr_t x, lo, hi;
  mpfr_inits2(bits, x, lo, hi, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_z(x, n.get_mpz_t(), MPFR_RNDD);
  mpfr_log(lo, x, MPFR_RNDD);
  mpfr_set_z(x, n.get_mpz_t(), MPFR_RNDU);
  mpfr_log(hi, x, MPFR_RNDU);
  std::pair<mpq_class, mpq_class> out{mpfr_to_q(lo), mpfr_to_q(hi)};
  mpfr_clears(x, lo, hi, static_cast<mpfr_ptr>(nullptr));
  return out;
}

mpq_class occurrence_probability(int l, int depth, const mpz_class& count, long len) {
  if (l < 2 || depth < 1 || count < 1) throw DomainError("bad marker word set");
  // trie nodes are prefixes (j, p) with p * l^(depth-j) < count; depth-j nodes are matches
  auto valid = [&](int j, const mpz_class& p) { return p * ipow(l, depth - j) < count; };
  std::map<std::pair<int, mpz_class>, int> index;
  std::vector<std::pair<int, mpz_class>> nodes;
  auto node_id = [&](int j, const mpz_class& p) {
    auto [it, fresh] = index.emplace(std::make_pair(j, p), static_cast<int>(nodes.size()));
    if (fresh) nodes.emplace_back(j, p);
    return it->second;
  };
  node_id(0, 0);
  std::vector<std::vector<int>> next;  // -1 marks a match
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto [j, p] = nodes[i];
    std::vector<int> row(static_cast<std::size_t>(l));
    for (int a = 0; a < l; ++a) {
      const mpz_class t = p * l + a;
      int to = -2;
      for (int len = j + 1; len >= 0 && to == -2; --len) {
        const mpz_class suffix = t % ipow(l, len);
        if (!valid(len, suffix)) continue;
        to = len == depth ? -1 : node_id(len, suffix);
      }
      row[static_cast<std::size_t>(a)] = to;
    }
    next.push_back(std::move(row));
  }
  std::vector<mpz_class> cnt(nodes.size(), 0);
  cnt[0] = 1;
  for (long step = 0; step < len; ++step) {
    std::vector<mpz_class> nc(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (cnt[i] == 0) continue;
      for (int to : next[i])
        if (to >= 0) nc[static_cast<std::size_t>(to)] += cnt[i];
    }
    cnt.swap(nc);
  }
  mpz_class avoid = 0;
  for (const auto& c : cnt) avoid += c;
  mpq_class q = 1 - mpq_class(avoid, ipow(l, len));
  q.canonicalize();
  return q;
}

ConstructionParams build_schedule(int l, const mpq_class& epsilon, int K) {
  if (l < 3) throw DomainError("the construction needs l >= 3 symbols");
  if (!(epsilon > 0 && epsilon < mpq_class(1, 2))) throw DomainError("epsilon must lie in (0, 0.5)");
  if (K < 1) throw DomainError("need at least one stage");
  ConstructionParams p;
  p.l = l;
  p.epsilon = epsilon;
  p.cumulative = 0;
  mpz_class min_n = 2;
  for (int k = 1; k <= K; ++k) {
    Stage s;
    s.budget = 1 - epsilon - p.cumulative;
    if (s.budget <= 0) throw DomainError("stage budget exhausted");
    s.n = smallest_n_above(mpq_class(1 / s.budget), min_n);
    // the per-stage union bound can fail, so the cumulative invariant is checked and n advanced if needed
    for (int attempt = 0;; ++attempt) {
      bracket_stage(s);
      if (!fill_markers(s, l)) throw DomainError("marker mass window unreachable at depth <= 40");
      s.nu_stage = occurrence_probability(l, s.depth, s.count, s.L + s.depth);
      if (p.cumulative + s.nu_stage < 1 - epsilon) break;
      if (attempt > 200) throw DomainError("cumulative marker mass does not fit the budget");
      s.n = attempt < 64 ? mpz_class(s.n + 1) : mpz_class(s.n * 2);
      ++s.advanced;
    }
    s.union_bound = s.nu_stage * s.ln_hi <= 1;
    p.cumulative += s.nu_stage;
    min_n = s.n + 1;
    p.stages.push_back(std::move(s));
  }
  return p;
}

mpq_class CodedProcess::exact_mass() const {
  const long ones = std::count(table.begin(), table.end(), std::uint8_t{1});
  mpq_class q(ones, static_cast<long>(table.size()));
  q.canonicalize();
  return q;
}

CodedProcess make_coded_process(const ConstructionParams& p, int K, long W) {
  if (K < 0 || K > static_cast<int>(p.stages.size())) throw DomainError("stage count out of range");
  CodedProcess proc;
  proc.l = p.l;
  proc.stages = K;
  proc.D = 1;
  for (int k = 0; k < K; ++k) proc.D = std::max(proc.D, static_cast<int>(p.stages[static_cast<std::size_t>(k)].L) + p.stages[static_cast<std::size_t>(k)].depth);
  const mpz_class size = ipow(p.l, proc.D);
  if (size > (1L << 24)) throw DomainError("coder window too long to simulate (l^D > 2^24)");
  const long n = size.get_si();
  proc.table.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> d(static_cast<std::size_t>(proc.D));
  for (long w = 0; w < n; ++w) {
    long v = w;
    for (int i = proc.D - 1; i >= 0; --i) {
      d[static_cast<std::size_t>(i)] = static_cast<int>(v % p.l);
      v /= p.l;
    }
    bool hit = false;
    for (int k = 0; k < K && !hit; ++k) {
      const Stage& s = p.stages[static_cast<std::size_t>(k)];
      const long c = s.count.get_si();
      for (long j = 0; j <= s.L && !hit; ++j) {
        long val = 0;
        for (int t = 0; t < s.depth; ++t) val = val * p.l + d[static_cast<std::size_t>(j + t)];
        hit = val < c;
      }
    }
    proc.table[static_cast<std::size_t>(w)] = hit ? 1 : 0;
  }
  proc.W = W > 0 ? W : proc.D;
  return proc;
}

CodedProcess iid_control_process() {
  CodedProcess proc;
  proc.l = 2;
  proc.D = 1;
  proc.table = {0, 1};
  proc.W = 1;
  return proc;
}

namespace {

long state_count(const CodedProcess& proc) {
  long s = 1;
  for (int i = 1; i < proc.D; ++i) s *= proc.l;
  return s;
}

struct Stepper {
  const CodedProcess& proc;
  long S;
  std::mt19937_64 rng;
  long symbol() { return static_cast<long>(rng() % static_cast<std::uint64_t>(proc.l)); }
  long random_state() {
    long s = 0;
    for (int i = 1; i < proc.D; ++i) s = s * proc.l + symbol();
    return s;
  }
  int step(long& s) {
    const long w = s * proc.l + symbol();
    s = w % S;
    return proc.table[static_cast<std::size_t>(w)];
  }
};

// mean over pairs of 1{|x - y| < 1/scale} for one past window
double one_past(const CodedProcess& proc, double scale, long pairs, std::uint64_t seed) {
  const long S = state_count(proc);
  Stepper st{proc, S, std::mt19937_64(seed)};
  std::vector<int> eta(static_cast<std::size_t>(proc.W));
  long s = st.random_state();
  for (int& r : eta) r = st.step(s);

  std::vector<double> alpha(static_cast<std::size_t>(S), 1.0 / static_cast<double>(S)), nxt(static_cast<std::size_t>(S));
  for (int r : eta) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (long q = 0; q < S; ++q) {
      const double a = alpha[static_cast<std::size_t>(q)];
      if (a == 0) continue;
      for (long sym = 0; sym < proc.l; ++sym) {
        const long w = q * proc.l + sym;
        if (proc.table[static_cast<std::size_t>(w)] == r) nxt[static_cast<std::size_t>(w % S)] += a;
      }
    }
    double total = 0;
    for (double v : nxt) total += v;
    if (!(total > 0)) throw Error("filter lost all mass on an observed past");
    for (std::size_t q = 0; q < nxt.size(); ++q) alpha[q] = nxt[q] / total;
  }
  std::vector<double> cdf(alpha.size());
  std::partial_sum(alpha.begin(), alpha.end(), cdf.begin());

  constexpr int kBits = 62;
  const double threshold = std::ldexp(1.0, kBits) / scale;
  auto draw = [&]() {
    const double u = uniform01(st.rng) * cdf.back();
    long q = static_cast<long>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    q = std::min(q, S - 1);
    std::uint64_t x = 0;
    for (int i = 0; i < kBits; ++i) x = (x << 1) | static_cast<std::uint64_t>(st.step(q));
    return x;
  };
  long hits = 0;
  for (long i = 0; i < pairs; ++i) {
    const std::uint64_t x = draw(), y = draw();
    const std::uint64_t diff = x > y ? x - y : y - x;
    hits += static_cast<double>(diff) < threshold ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs);
}

}  // namespace

std::pair<double, double> simulate_marker_mass(const CodedProcess& proc, long n, std::uint64_t seed) {
  constexpr long kBatches = 100;
  if (n < kBatches * 10) throw DomainError("need at least 1000 steps");
  Stepper st{proc, state_count(proc), std::mt19937_64(seed)};
  long s = st.random_state();
  const long per = n / kBatches;
  std::vector<double> means;
  for (long b = 0; b < kBatches; ++b) {
    long ones = 0;
    for (long i = 0; i < per; ++i) ones += st.step(s);
    means.push_back(static_cast<double>(ones) / static_cast<double>(per));
  }
  double m = 0, v = 0;
  for (double x : means) m += x;
  m /= kBatches;
  for (double x : means) v += (x - m) * (x - m);
  return {m, std::sqrt(v / (kBatches - 1) / kBatches)};
}

NearDiagonalEstimate estimate_near_diagonal_at(const CodedProcess& proc, double scale, long pair_samples,
                                               long past_samples, std::uint64_t seed, bool parallel) {
  if (pair_samples < 10000) throw DomainError("need at least 1e4 pair samples");
  if (past_samples < 2 || past_samples > pair_samples) throw DomainError("past samples must lie in [2, pair samples]");
  if (!(scale >= 1)) throw DomainError("scale must be >= 1");
  const long per = (pair_samples + past_samples - 1) / past_samples;
  std::vector<double> means(static_cast<std::size_t>(past_samples));
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < past_samples; ++i)
    means[static_cast<std::size_t>(i)] = one_past(proc, scale, per, derive_seed(seed, static_cast<std::uint64_t>(i)));
  double m = 0, v = 0;
  for (double x : means) m += x;
  m /= static_cast<double>(past_samples);
  for (double x : means) v += (x - m) * (x - m);
  NearDiagonalEstimate e;
  e.scale = scale;
  e.estimate = m;
  e.std_err = std::sqrt(v / static_cast<double>(past_samples - 1) / static_cast<double>(past_samples));
  e.pairs = per * past_samples;
  e.pasts = past_samples;
  return e;
}

NearDiagonalEstimate estimate_near_diagonal(const CodedProcess& proc, const ConstructionParams& p, int stage,
                                            long pair_samples, long past_samples, std::uint64_t seed,
                                            bool parallel) {
  if (stage < 1 || stage > static_cast<int>(p.stages.size())) throw DomainError("stage out of range");
  const Stage& s = p.stages[static_cast<std::size_t>(stage - 1)];
  if (proc.W < s.L + s.depth) throw DomainError("past window shorter than floor(ln n_k) + marker depth");
  NearDiagonalEstimate e = estimate_near_diagonal_at(proc, s.n.get_d(), pair_samples, past_samples, seed, parallel);
  e.lower_bound = 0.25 / std::pow(s.ln_n(), 4);
  return e;
}

WindowCheck window_doubling_check(const CodedProcess& proc, const ConstructionParams& p, int stage,
                                  long pair_samples, long past_samples, std::uint64_t seed, bool parallel) {
  WindowCheck c;
  c.base = estimate_near_diagonal(proc, p, stage, pair_samples, past_samples, seed, parallel);
  CodedProcess longer = proc;
  longer.W = 2 * proc.W;
  c.doubled = estimate_near_diagonal(longer, p, stage, pair_samples, past_samples, seed, parallel);
  c.consistent = std::abs(c.base.estimate - c.doubled.estimate) <=
                 2 * std::hypot(c.base.std_err, c.doubled.std_err);
  return c;
}

EnvelopeFit fit_polynomial_envelope(const std::vector<NearDiagonalEstimate>& est) {
  std::vector<double> x, y;
  for (const auto& e : est)
    if (e.estimate > 0) {
      x.push_back(std::log(e.scale));
      y.push_back(std::log(e.estimate));
    }
  if (x.size() < 2) throw DomainError("envelope fit needs two positive estimates");
  const double slope = ls_slope(x, y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  return {-slope, std::exp(my - slope * mx)};
}

ViolationReport condition_violation_report(const std::vector<NearDiagonalEstimate>& stages, double beta_target) {
  if (!(beta_target > 0)) throw DomainError("beta_target must be positive");
  ViolationReport r;
  r.stages = stages;
  if (stages.size() < 2) {
    r.verdict = "inconclusive";
    return r;
  }
  r.fit = fit_polynomial_envelope(stages);
  std::vector<double> betas{beta_target};
  for (double b : {0.05, 0.1, 0.25, 0.5, 1.0})
    if (b != beta_target) betas.push_back(b);
  bool all = true;
  for (double beta : betas) {
    BetaProbe pr;
    pr.beta = beta;
    pr.crossover_ln_n = 4 / beta;
    for (const auto& e : stages) {
      pr.ratios.push_back(e.estimate * std::pow(e.scale, beta));
      pr.floor_ratios.push_back(0.25 / std::pow(std::log(e.scale), 4) * std::pow(e.scale, beta));
    }
    pr.increasing = true;
    for (std::size_t i = 1; i < pr.ratios.size(); ++i) pr.increasing = pr.increasing && pr.ratios[i] > pr.ratios[i - 1];
    all = all && pr.increasing;
    r.probes.push_back(std::move(pr));
  }
  r.verdict = all ? "violation" : "no violation at these scales";
  return r;
}

double reverse_markov_bound(double a_bound, double d, double expectation) {
  if (!(d < expectation)) throw DomainError("reverse Markov needs d < E X");
  if (expectation > a_bound) throw DomainError("reverse Markov needs E X <= a");
  return (expectation - d) / (a_bound - d);
}

}  // namespace betalab
