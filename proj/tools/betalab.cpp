// Batch front-end: every subcommand writes <out>/<command>.json, optional CSV, and a manifest
// that `betalab replay` re-runs to byte-identical outputs.

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "betalab/beta_shift.hpp"
#include "betalab/counterexample.hpp"
#include "betalab/errors.hpp"
#include "betalab/orbit_fourier.hpp"
#include "betalab/parry.hpp"
#include "betalab/random.hpp"
#include "betalab/selfsim.hpp"
#include "betalab/source.hpp"

#ifndef BETALAB_VERSION
#define BETALAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace betalab;

namespace {

constexpr int kOk = 0, kUsage = 1, kViolation = 2, kPrecision = 3;

/// "1,2,5", "1:64" or "1:1024:8" (inclusive ranges), mixed with commas.
std::vector<long> parse_long_list(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(std::stol(item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    const long lo = std::stol(item.substr(0, c1));
    const long hi = std::stol(item.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
    const long step = c2 == std::string::npos ? 1 : std::stol(item.substr(c2 + 1));
    if (step <= 0) throw DomainError("range step must be positive");
    for (long v = lo; v <= hi; v += step) out.push_back(v);
  }
  if (out.empty()) throw DomainError("empty list: " + text);
  return out;
}

json interval_json(const Interval& v) { return json::array({v.lo, v.hi}); }

json enclosure_json(const Enclosure& e, int digits) {
  json j{{"lo", e.lo_d()}, {"hi", e.hi_d()}, {"scale_bits", e.scale}};
  if (auto d = certified_decimal_digits(e, digits)) j["certified_digits"] = "0." + *d;
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Context {
  std::string command;
  std::vector<std::string> args;  ///< subcommand arguments as given, replayed verbatim
  fs::path out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  json params = json::object();
  json precision = json::object();
  json proxies = json::object();
  std::vector<std::string> outputs;

  bool parallel() const { return threads > 1; }

  void write_text(const std::string& name, const std::string& text) {
    fs::create_directories(out);
    std::ofstream f(out / name, std::ios::binary);
    f << text;
    if (!f) throw Error("cannot write " + (out / name).string());
    outputs.push_back((out / name).string());
  }

  void finish(const json& result) {
    write_text(command + ".json", result.dump(2) + "\n");
    json m;
    m["command"] = command;
    m["args"] = args;
    m["params"] = params;
    m["seed"] = seed;
    m["threads"] = threads;
    m["version"] = BETALAB_VERSION;
    m["precision"] = precision;
    m["proxies"] = proxies;
    m["outputs"] = outputs;
    fs::create_directories(out);
    std::ofstream(out / (command + ".manifest.json"), std::ios::binary) << m.dump(2) << "\n";
    std::cout << result.dump(2) << "\n";
  }
};

/// Cached result for expensive commands, keyed by command and parameters.
std::optional<json> cache_lookup(const Context& ctx) {
  const char* dir = std::getenv("BETALAB_CACHE_DIR");
  if (!dir || !*dir) return std::nullopt;
  const fs::path p = fs::path(dir) / (ctx.command + "-" + std::to_string(fnv1a(ctx.params.dump())) + ".json");
  std::ifstream f(p);
  if (!f) return std::nullopt;
  std::cerr << "cache hit: " << p.string() << "\n";
  return json::parse(f);
}

void cache_store(const Context& ctx, const json& result) {
  const char* dir = std::getenv("BETALAB_CACHE_DIR");
  if (!dir || !*dir) return;
  fs::create_directories(dir);
  std::ofstream(fs::path(dir) / (ctx.command + "-" + std::to_string(fnv1a(ctx.params.dump())) + ".json")) << result.dump();
}

// ---- subcommands ----------------------------------------------------------------------------

struct ClassifyArgs {
  std::string beta;
  long depth = 64;
};
int run_classify(Context& ctx, const ClassifyArgs& a) {
  ctx.params = {{"beta", a.beta}, {"depth", a.depth}};
  const BetaNumber b = parse_beta(a.beta);
  const NumberClass c = classify(b, a.depth);
  json r{{"beta", b.descriptor()}, {"kind", to_string(b.kind())}, {"verdict", to_string(c.verdict)}};
  r["hit_zero_at"] = c.evidence.hit_zero_at ? json(*c.evidence.hit_zero_at) : json(nullptr);
  r["period"] = c.evidence.period ? json::array({c.evidence.period->first, c.evidence.period->second}) : json(nullptr);
  r["max_zero_run"] = c.evidence.max_zero_run;
  r["certified_depth"] = c.evidence.certified_depth;
  r["digits_of_one"] = format_word(c.digits, b.ceil_b());
  ctx.precision = {{"certified_depth", c.evidence.certified_depth}};
  ctx.finish(r);
  return kOk;
}

struct ExpandArgs {
  std::string beta, x = "1";
  long length = 32;
  int digits = 12;
};
int run_expand(Context& ctx, const ExpandArgs& a) {
  ctx.params = {{"beta", a.beta}, {"x", a.x}, {"length", a.length}, {"digits", a.digits}};
  const BetaNumber b = parse_beta(a.beta);
  OrbitOptions opt;
  opt.digits_required = a.digits;
  const bool one = a.x == "1";
  const BExpansion e = one ? expansion_of_one(b, a.length, opt) : greedy_expansion(b, parse_point(a.x), a.length, opt);
  json r{{"beta", b.descriptor()}, {"x", a.x}, {"of_one", one}, {"digits", format_word(e.digits, b.ceil_b())}};
  r["digit_list"] = e.digits;
  if (!e.orbit.empty()) r["remainder"] = enclosure_json(e.orbit.back(), a.digits);
  ctx.finish(r);
  return kOk;
}

struct ParryArgs {
  std::string beta;
  double tol = 1e-13;
  long points = 1000;
  long fourier = 0;
  long samples = 0;
};
int run_parry(Context& ctx, const ParryArgs& a) {
  ctx.params = {{"beta", a.beta}, {"tol", a.tol}, {"points", a.points}, {"fourier", a.fourier}, {"samples", a.samples}};
  const BetaNumber b = parse_beta(a.beta);
  const ParryDensity d = ParryDensity::build(b, a.tol);
  json r{{"beta", b.descriptor()}, {"truncation", d.truncation()}, {"tail_bound", d.tail_bound()}};
  r["normalizer"] = interval_json(normalizer(d, a.tol));
  json orbit = json::array();
  for (long n = 0; n <= std::min<long>(d.truncation(), 32); ++n) orbit.push_back(interval_json(d.r(static_cast<std::size_t>(n))));
  r["orbit_of_one_head"] = orbit;
  r["density_bounds"] = json::array({1 - 1 / b.to_double(), 1 / (1 - 1 / b.to_double())});
  if (a.fourier > 0) {
    json f = json::array();
    for (long m = 1; m <= a.fourier; ++m) {
      const ComplexBall c = parry_fourier(d, m, a.tol);
      f.push_back({{"m", m}, {"re", c.mid.real()}, {"im", c.mid.imag()}, {"rad", c.rad}});
    }
    r["fourier"] = f;
  }
  std::ostringstream csv;
  write_density_csv(csv, d, a.points);
  ctx.write_text("parry_density.csv", csv.str());
  if (a.samples > 0) {
    std::ostringstream s;
    s << "x\n";
    s.precision(17);
    for (double x : parry_sample(d, a.samples, ctx.seed)) s << x << "\n";
    ctx.write_text("parry_samples.csv", s.str());
  }
  ctx.precision = {{"tol", a.tol}, {"tail_bound", d.tail_bound()}};
  ctx.finish(r);
  return kOk;
}

struct OrbitArgs {
  std::string beta, x;
  long n = 1000;
  int digits = 30;
  std::string path = "auto";
};
int run_orbit(Context& ctx, const OrbitArgs& a) {
  ctx.params = {{"beta", a.beta}, {"x", a.x}, {"N", a.n}, {"digits", a.digits}, {"path", a.path}};
  const BetaNumber b = parse_beta(a.beta);
  OrbitOptions opt;
  opt.digits_required = a.digits;
  if (a.path == "exact")
    opt.path = OrbitPath::Exact;
  else if (a.path == "interval")
    opt.path = OrbitPath::Interval;
  else if (a.path != "auto")
    throw DomainError("path must be auto, exact or interval");
  const Orbit o = tb_orbit(b, parse_point(a.x), a.n, opt);
  json r{{"beta", b.descriptor()}, {"x0", a.x}, {"N", a.n}, {"exact", o.exact}, {"bits", o.bits}};
  r["final"] = enclosure_json(o.points.back(), a.digits);
  r["itinerary"] = format_word(o.digits, b.ceil_b());
  std::ostringstream csv;
  csv.precision(17);
  csv << "i,digit,lo,hi\n";
  for (std::size_t i = 0; i < o.points.size(); ++i)
    csv << i + 1 << "," << o.digits[i] << "," << o.points[i].lo_d() << "," << o.points[i].hi_d() << "\n";
  ctx.write_text("orbit.csv", csv.str());
  ctx.precision = {{"bits", o.bits}, {"digits_required", a.digits}};
  ctx.finish(r);
  return kOk;
}

struct WeylArgs {
  std::string beta, x, ms = "1", checkpoints = "10000";
};
int run_weyl(Context& ctx, const WeylArgs& a) {
  ctx.params = {{"beta", a.beta}, {"x", a.x}, {"m", a.ms}, {"N", a.checkpoints}};
  const BetaNumber b = parse_beta(a.beta);
  const auto ms = parse_long_list(a.ms), cps = parse_long_list(a.checkpoints);
  WeylOptions opt;
  opt.parallel = ctx.parallel();
  const WeylSeries s = weyl_sums(b, parse_point(a.x), cps, ms, opt);
  json r{{"beta", b.descriptor()}, {"x0", a.x}, {"bits", s.bits}, {"orbit_width", s.orbit_width}};
  json vals = json::array();
  for (std::size_t c = 0; c < cps.size(); ++c)
    for (std::size_t j = 0; j < ms.size(); ++j) {
      const double err = 2 * M_PI * std::abs(static_cast<double>(ms[j])) * s.orbit_width + 1e-15 * static_cast<double>(cps[c]);
      vals.push_back({{"N", cps[c]}, {"m", ms[j]}, {"re", s.at(c, j).real()}, {"im", s.at(c, j).imag()},
                      {"abs", std::abs(s.at(c, j))}, {"error_bound", err}});
    }
  r["values"] = vals;
  ctx.precision = {{"bits", s.bits}, {"orbit_width", s.orbit_width}};
  ctx.proxies = {{"error_bound", "2 pi |m| * widest orbit enclosure + accumulated rounding"}};
  ctx.finish(r);
  return kOk;
}

void write_decay_csv(Context& ctx, const json& r) {
  std::ostringstream csv;
  csv.precision(17);
  csv << "m,D\n";
  for (const auto& row : r["profile"]) csv << row["m"].get<long>() << "," << row["D"].get<double>() << "\n";
  ctx.write_text("decay.csv", csv.str());
}

struct DecayArgs {
  std::string source = "iid:0.7,0.3", beta, ms = "1:8,16,32,64,128,256,512:1024:64";
  long a = 2, n = 20000, samples = 128;
};
int run_decay(Context& ctx, const DecayArgs& a) {
  ctx.params = {{"source", a.source}, {"beta", a.beta}, {"a", a.a}, {"m", a.ms}, {"N", a.n}, {"samples", a.samples},
                {"seed", ctx.seed}};
  ctx.proxies = {{"D(m)", "mean over samples of max_{N' in {N/4, N/2, N}} |S_N'(m)|"}};
  if (auto cached = cache_lookup(ctx)) {
    write_decay_csv(ctx, *cached);
    ctx.precision = {{"max_bits", (*cached)["max_bits"]}};
    ctx.finish(*cached);
    return kOk;
  }
  const MarkovSource src = parse_source(a.source);
  const BetaNumber b = parse_beta(a.beta);
  const DecayProfile p = mean_decay_profile(src, b, a.a, parse_long_list(a.ms), a.n, a.samples, ctx.seed, {ctx.parallel()});
  json r{{"source", src.descriptor()}, {"beta", b.descriptor()}, {"a", a.a}, {"N", a.n}, {"samples", p.sample_count}};
  r["checkpoints"] = p.checkpoints;
  r["independence"] = to_string(p.independence);
  r["fitted_exponent"] = p.fitted_exponent;
  r["predicted_exponent"] = p.predicted_exponent ? json(*p.predicted_exponent) : json(nullptr);
  r["max_bits"] = p.max_bits;
  r["proxy"] = p.proxy;
  r["monte_carlo_floor"] = 1 / std::sqrt(static_cast<double>(a.n) / 4);
  json prof = json::array();
  for (std::size_t i = 0; i < p.ms.size(); ++i) prof.push_back({{"m", p.ms[i]}, {"D", p.D[i]}});
  r["profile"] = prof;
  write_decay_csv(ctx, r);
  ctx.precision = {{"max_bits", p.max_bits}};
  cache_store(ctx, r);
  ctx.finish(r);
  return kOk;
}

struct ExponentArgs {
  double alpha = 1, beta = 1;
  long resolution = 400;
};
int run_exponent(Context& ctx, const ExponentArgs& a) {
  ctx.params = {{"alpha", a.alpha}, {"beta", a.beta}, {"resolution", a.resolution}};
  const double closed = predicted_exponent(a.alpha, a.beta);
  const ExponentOptimum o = optimize_exponent_grid(a.alpha, a.beta, a.resolution, 40, ctx.parallel());
  json r{{"alpha", a.alpha}, {"beta", a.beta}, {"exponent", closed}};
  r["grid"] = {{"value", o.value}, {"gamma", o.gamma}, {"delta", o.delta}, {"evaluations", o.evaluations}};
  r["closed_form_is_minimax"] = a.alpha <= 1 + 1 / a.beta;
  r["grid_gap"] = std::abs(o.value - closed);
  ctx.finish(r);
  return kOk;
}

struct Lemma32Args {
  std::string measure = "uniform";
  double c = 0, d = 1, m = 64, r = 0.1, b = 2;
  long samples = 100000, nodes = 2048;
};
int run_lemma32(Context& ctx, const Lemma32Args& a) {
  ctx.params = {{"measure", a.measure}, {"c", a.c}, {"d", a.d}, {"m", a.m}, {"r", a.r}, {"b", a.b},
                {"samples", a.samples}, {"nodes", a.nodes}};
  Lemma32Input in;
  in.c = a.c;
  in.d = a.d;
  in.m = a.m;
  in.r = a.r;
  in.b = a.b;
  in.quad_nodes = a.nodes;
  in.parallel = ctx.parallel();
  const std::string& spec = a.measure;
  if (spec == "uniform") {
    in.analytic = AnalyticMeasure::uniform();
  } else if (spec.rfind("parry:", 0) == 0) {
    in.analytic = AnalyticMeasure::parry(ParryDensity::build(parse_beta(spec.substr(6))));
  } else if (spec.rfind("parry-cloud:", 0) == 0) {
    in.cloud = parry_sample(ParryDensity::build(parse_beta(spec.substr(12))), a.samples, ctx.seed);
  } else if (spec.rfind("selfsim:", 0) == 0) {
    const auto colon = spec.find(':', 8);
    if (colon == std::string::npos) throw DomainError("selfsim measure is selfsim:BETA:P1");
    const SelfSimilarMeasure ssm(parse_beta(spec.substr(8, colon - 8)), std::stod(spec.substr(colon + 1)));
    in.cloud = ssm_sample(ssm, a.samples, 60, ctx.seed);
  } else if (spec.rfind("cloud:", 0) == 0) {
    std::ifstream f(spec.substr(6));
    if (!f) throw DomainError("cannot read cloud file " + spec.substr(6));
    std::string line;
    while (std::getline(f, line))
      if (!line.empty() && (std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '.' || line[0] == '-'))
        in.cloud.push_back(std::stod(line));
  } else {
    throw DomainError("measure must be uniform, parry:B, parry-cloud:B, selfsim:B:P1 or cloud:FILE");
  }
  const Lemma32Result res = lemma32_check(in);
  json r{{"measure", a.measure}, {"lhs", res.lhs},          {"rhs", res.rhs},   {"slack", res.slack},
         {"mass", res.mass},     {"near_diag", res.near_diag}, {"quad_error", res.quad_error},
         {"mc_error", res.mc_error}, {"nodes", res.nodes},  {"holds", res.holds()}};
  ctx.precision = {{"nodes", res.nodes}, {"quad_error", res.quad_error}, {"mc_error", res.mc_error}};
  ctx.proxies = {{"mc_error", "6 sqrt(mass/n) + mass/n for sample clouds"}};
  ctx.finish(r);
  return res.holds() ? kOk : kViolation;
}

struct InvarianceArgs {
  std::string beta, x;
  long n = 10000, degree = 64, parry_m = 0;
};
int run_invariance(Context& ctx, const InvarianceArgs& a) {
  ctx.params = {{"beta", a.beta}, {"x", a.x}, {"N", a.n}, {"degree", a.degree}, {"parry_M", a.parry_m}};
  const BetaNumber b = parse_beta(a.beta);
  WeylOptions opt;
  opt.parallel = ctx.parallel();
  const WeylSeries s = weyl_sums(b, parse_point(a.x), {a.n}, {1}, opt);
  const double defect = invariance_defect(s, a.degree);
  const double bound = 2.0 / static_cast<double>(a.n);
  json r{{"beta", b.descriptor()}, {"x0", a.x}, {"N", a.n}, {"degree", a.degree}, {"defect", defect},
         {"bound", bound}, {"within_bound", defect <= bound * (1 + 1e-12)}};
  if (a.parry_m > 0) r["parry_distance"] = parry_distance(s, ParryDensity::build(b), a.parry_m);
  ctx.precision = {{"bits", s.bits}, {"orbit_width", s.orbit_width}};
  ctx.finish(r);
  return defect <= bound * (1 + 1e-12) ? kOk : kViolation;
}

struct SelfsimArgs {
  std::string beta = "11/5";
  double p1 = 0.5, xi_max = 1e5;
  int level = 12, points_per_unit = 8;
  long samples = 1000000, grid = 64, residual_probes = 100, csv_points = 2000;
};
int run_selfsim(Context& ctx, const SelfsimArgs& a) {
  ctx.params = {{"beta", a.beta}, {"p1", a.p1}, {"xi_max", a.xi_max}, {"level", a.level},
                {"points_per_unit", a.points_per_unit}, {"samples", a.samples}, {"grid", a.grid},
                {"residual_probes", a.residual_probes}, {"seed", ctx.seed}};
  const SelfSimilarMeasure m(parse_beta(a.beta), a.p1);
  std::mt19937_64 rng(ctx.seed);
  double residual = 0;
  for (long i = 0; i < a.residual_probes; ++i) residual = std::max(residual, ssm_selfsim_residual(m, 1 + uniform01(rng) * 1e4));
  const auto xs = ssm_sample(m, a.samples, 60, derive_seed(ctx.seed, 1));
  const SingularityWitness w = singularity_witness(m, xs, a.level);
  const InvarianceCheck inv = invariance_on_cloud(m.base(), uniform_grid(a.grid), xs);
  const DecayScan scan = ssm_decay_profile(m, a.xi_max, a.points_per_unit, ctx.parallel());
  json r{{"b", m.base().descriptor()}, {"p", json::array({m.p0(), m.p1()})}};
  json win = json::array();
  for (const auto& x : scan.windows) win.push_back({{"lo", x.lo}, {"hi", x.hi}, {"max_abs", x.max_abs}});
  r["windows"] = win;
  r["fitted_c"] = scan.fitted_c;
  r["invariance_defect"] = {{"max", inv.max_defect}, {"max_z", inv.max_z}, {"samples", inv.samples}};
  r["singularity"] = {{"level", a.level}, {"coverage_fraction", w.coverage_fraction}, {"total_length", w.total_length}};
  r["max_residual"] = residual;
  std::ostringstream csv;
  csv.precision(17);
  csv << "xi,abs_fourier\n";
  for (long i = 0; i < a.csv_points; ++i) {
    const double xi = std::exp(std::log(a.xi_max) * static_cast<double>(i) / static_cast<double>(a.csv_points - 1));
    csv << xi << "," << std::abs(ssm_fourier(m, xi).mid) << "\n";
  }
  ctx.write_text("selfsim.csv", csv.str());
  ctx.proxies = {{"decay", "window maxima on a grid of points_per_unit points per unit length; evidence only"}};
  ctx.finish(r);
  const bool ok = residual <= 1e-10 && inv.within(4.0) && w.coverage_fraction == 1.0;
  return ok ? kOk : kViolation;
}

struct CounterArgs {
  int l = 3, K = 4, simulate = 2;
  std::string epsilon = "1/4";
  long pairs = 100000, pasts = 2000, window = 0;
  double beta_target = 0.1;
};
int run_counterexample(Context& ctx, const CounterArgs& a) {
  ctx.params = {{"l", a.l}, {"epsilon", a.epsilon}, {"K", a.K}, {"simulate", a.simulate}, {"pairs", a.pairs},
                {"pasts", a.pasts}, {"window", a.window}, {"beta_target", a.beta_target}, {"seed", ctx.seed}};
  const ConstructionParams p = build_schedule(a.l, parse_rational(a.epsilon), a.K);
  json r{{"l", a.l}, {"epsilon", a.epsilon}, {"log", "natural"}};
  json sched = json::array();
  for (const Stage& s : p.stages)
    sched.push_back({{"n", s.n.get_str()}, {"ln_n", json::array({s.ln_lo.get_d(), s.ln_hi.get_d()})}, {"L", s.L},
                     {"depth", s.depth}, {"count", s.count.get_str()}, {"nu_Y", s.nu_y.get_str()},
                     {"nu_stage", s.nu_stage.get_str()}, {"nu_stage_value", s.nu_stage.get_d()},
                     {"budget", s.budget.get_d()}, {"union_bound_holds", s.union_bound}, {"advanced", s.advanced}});
  r["schedule"] = sched;
  r["cumulative_mass"] = p.cumulative.get_str();
  const int sim = std::min<int>(a.simulate, a.K);
  const CodedProcess proc = make_coded_process(p, sim, a.window);
  r["coder"] = {{"stages", sim}, {"window_length", proc.D}, {"past_window", proc.W},
                {"exact_mass", proc.exact_mass().get_str()}};
  const auto [mass, mass_se] = simulate_marker_mass(proc, 1000000, derive_seed(ctx.seed, 99));
  r["coder"]["simulated_mass"] = json::array({mass, mass_se});
  std::vector<NearDiagonalEstimate> est;
  json stages = json::array();
  bool ok = true;
  for (int k = 1; k <= sim; ++k) {
    const WindowCheck w = window_doubling_check(proc, p, k, a.pairs, a.pasts, derive_seed(ctx.seed, static_cast<std::uint64_t>(k)), ctx.parallel());
    est.push_back(w.base);
    ok = ok && w.base.meets_bound();
    stages.push_back({{"stage", k}, {"n", w.base.scale}, {"estimate", w.base.estimate}, {"std_err", w.base.std_err},
                      {"lower_bound", w.base.lower_bound}, {"meets_bound", w.base.meets_bound()},
                      {"doubled_window_estimate", w.doubled.estimate}, {"window_consistent", w.consistent}});
  }
  r["estimates"] = stages;
  const ViolationReport rep = condition_violation_report(est, a.beta_target);
  json probes = json::array();
  for (const auto& pr : rep.probes)
    probes.push_back({{"beta", pr.beta}, {"ratios", pr.ratios}, {"floor_ratios", pr.floor_ratios},
                      {"increasing", pr.increasing}, {"crossover_ln_n", pr.crossover_ln_n}});
  r["probes"] = probes;
  if (est.size() >= 2) r["envelope_fit"] = {{"beta", rep.fit.beta}, {"C", rep.fit.C}};
  r["verdict"] = rep.verdict;
  r["caveat"] = "finite number of stages; only the first stages are simulable";
  ctx.proxies = {{"conditional_measure", "exact filtering given a finite past window"},
                 {"embedding", "sum_{i=1}^{62} R_i 2^-i"}};
  ctx.finish(r);
  return ok ? kOk : kViolation;
}

struct ConditionsArgs {
  std::string source = "iid:0.7,0.3";
  int m_max = 12;
};
int run_conditions(Context& ctx, const ConditionsArgs& a) {
  ctx.params = {{"source", a.source}, {"m_max", a.m_max}};
  const MarkovSource src = parse_source(a.source);
  const ConditionEstimates c = fit_condition_exponents(src, a.m_max);
  const double s = src.max_prob().get_d();
  const int n = std::max(src.order(), 1);
  json grid = json::array();
  bool ok = true;
  long m = 1;
  for (const auto& g : c.grid) {
    const double bound = std::pow(s, static_cast<double>(m - 1) / n + 1);
    const bool within = g.ess_sup.get_d() <= bound * (1 + 1e-12);
    ok = ok && within;
    grid.push_back({{"k", g.k}, {"ess_sup", g.ess_sup.get_str()}, {"ess_sup_value", g.ess_sup.get_d()},
                    {"near_diag", g.near_diag.get_str()}, {"near_diag_value", g.near_diag.get_d()},
                    {"finite_memory_bound", bound}, {"within_bound", within}});
    ++m;
  }
  json r{{"source", src.descriptor()}, {"alpha_hat", c.alpha_hat}, {"beta_hat", c.beta_hat}, {"ordered", c.ordered},
         {"entropy", chain_entropy(src)}, {"max_prob", src.max_prob().get_str()}, {"grid", grid}};
  ctx.proxies = {{"finite_memory_bound", "s^((m-1)/n + 1) at k = a^m"}};
  ctx.finish(r);
  return ok ? kOk : kViolation;
}

int dispatch(const std::vector<std::string>& argv_in);

int run_replay(const std::string& manifest, const std::string& out) {
  std::ifstream f(manifest);
  if (!f) throw DomainError("cannot read manifest " + manifest);
  const json m = json::parse(f);
  std::vector<std::string> argv{"betalab", m.at("command").get<std::string>()};
  for (const auto& s : m.at("args")) argv.push_back(s.get<std::string>());
  argv.push_back("--seed");
  argv.push_back(std::to_string(m.at("seed").get<std::uint64_t>()));
  argv.push_back("--threads");
  argv.push_back(std::to_string(m.at("threads").get<int>()));
  argv.push_back("--out");
  argv.push_back(out);
  return dispatch(argv);
}

int dispatch(const std::vector<std::string>& argv_in) {
  CLI::App app{"betalab: beta-expansions, Parry measures and Fourier decay experiments"};
  app.require_subcommand(1);
  Context ctx;
  std::string out = ".";
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--seed", ctx.seed, "random seed")->capture_default_str();
    sub->add_option("--threads", ctx.threads, "worker threads (1 keeps runs reproducible)")->capture_default_str()->check(CLI::PositiveNumber);
  };

  ClassifyArgs ca;
  auto* classify_cmd = app.add_subcommand("classify", "number class of b from its expansion of 1");
  classify_cmd->add_option("--beta", ca.beta)->required();
  classify_cmd->add_option("--depth", ca.depth)->capture_default_str();
  common(classify_cmd);

  ExpandArgs ea;
  auto* expand_cmd = app.add_subcommand("expand", "greedy b-expansion of x (x = 1 gives the expansion of 1)");
  expand_cmd->add_option("--beta", ea.beta)->required();
  expand_cmd->add_option("--x", ea.x)->capture_default_str();
  expand_cmd->add_option("--length", ea.length)->capture_default_str();
  expand_cmd->add_option("--digits", ea.digits)->capture_default_str();
  common(expand_cmd);

  ParryArgs pa;
  auto* parry_cmd = app.add_subcommand("parry", "Parry density, normalizer, Fourier coefficients");
  parry_cmd->add_option("--beta", pa.beta)->required();
  parry_cmd->add_option("--tol", pa.tol)->capture_default_str();
  parry_cmd->add_option("--points", pa.points)->capture_default_str();
  parry_cmd->add_option("--fourier", pa.fourier, "coefficients m = 1..M")->capture_default_str();
  parry_cmd->add_option("--samples", pa.samples)->capture_default_str();
  common(parry_cmd);

  OrbitArgs oa;
  auto* orbit_cmd = app.add_subcommand("orbit", "certified orbit of T_b");
  orbit_cmd->add_option("--beta", oa.beta)->required();
  orbit_cmd->add_option("--x", oa.x)->required();
  orbit_cmd->add_option("--N", oa.n)->capture_default_str();
  orbit_cmd->add_option("--digits", oa.digits)->capture_default_str();
  orbit_cmd->add_option("--path", oa.path)->capture_default_str();
  common(orbit_cmd);

  WeylArgs wa;
  auto* weyl_cmd = app.add_subcommand("weyl", "Weyl averages along an orbit");
  weyl_cmd->add_option("--beta", wa.beta)->required();
  weyl_cmd->add_option("--x", wa.x)->required();
  weyl_cmd->add_option("--m", wa.ms, "frequencies, e.g. 1,2,5 or 1:64")->capture_default_str();
  weyl_cmd->add_option("--N", wa.checkpoints, "checkpoints")->capture_default_str();
  common(weyl_cmd);

  DecayArgs da;
  auto* decay_cmd = app.add_subcommand("decay", "mean Weyl decay profile over source-generic points");
  decay_cmd->add_option("--source", da.source)->capture_default_str();
  decay_cmd->add_option("--beta", da.beta)->required();
  decay_cmd->add_option("--a", da.a)->capture_default_str();
  decay_cmd->add_option("--m", da.ms)->capture_default_str();
  decay_cmd->add_option("--N", da.n)->capture_default_str();
  decay_cmd->add_option("--samples", da.samples)->capture_default_str();
  common(decay_cmd);

  ExponentArgs xa;
  auto* exponent_cmd = app.add_subcommand("exponent", "closed-form decay exponent and grid minimax");
  exponent_cmd->add_option("--alpha", xa.alpha)->capture_default_str();
  exponent_cmd->add_option("--beta", xa.beta)->capture_default_str();
  exponent_cmd->add_option("--resolution", xa.resolution)->capture_default_str();
  common(exponent_cmd);

  Lemma32Args la;
  auto* lemma_cmd = app.add_subcommand("lemma32", "check the oscillatory-integral inequality for one configuration");
  lemma_cmd->add_option("--measure", la.measure, "uniform | parry:B | parry-cloud:B | selfsim:B:P1 | cloud:FILE")->capture_default_str();
  lemma_cmd->add_option("--c", la.c)->capture_default_str();
  lemma_cmd->add_option("--d", la.d)->capture_default_str();
  lemma_cmd->add_option("--m", la.m)->capture_default_str();
  lemma_cmd->add_option("--r", la.r)->capture_default_str();
  lemma_cmd->add_option("--b", la.b)->capture_default_str();
  lemma_cmd->add_option("--samples", la.samples)->capture_default_str();
  lemma_cmd->add_option("--nodes", la.nodes)->capture_default_str();
  common(lemma_cmd);

  InvarianceArgs ia;
  auto* inv_cmd = app.add_subcommand("invariance", "invariance defect of the empirical orbit measure");
  inv_cmd->add_option("--beta", ia.beta)->required();
  inv_cmd->add_option("--x", ia.x)->required();
  inv_cmd->add_option("--N", ia.n)->capture_default_str();
  inv_cmd->add_option("--degree", ia.degree)->capture_default_str();
  inv_cmd->add_option("--parry-M", ia.parry_m, "also report the distance to the Parry measure")->capture_default_str();
  common(inv_cmd);

  SelfsimArgs sa;
  auto* ss_cmd = app.add_subcommand("selfsim", "self-similar measure: residual, singularity, invariance, decay");
  ss_cmd->add_option("--beta", sa.beta)->capture_default_str();
  ss_cmd->add_option("--p1", sa.p1)->capture_default_str();
  ss_cmd->add_option("--xi-max", sa.xi_max)->capture_default_str();
  ss_cmd->add_option("--level", sa.level)->capture_default_str();
  ss_cmd->add_option("--points-per-unit", sa.points_per_unit)->capture_default_str();
  ss_cmd->add_option("--samples", sa.samples)->capture_default_str();
  ss_cmd->add_option("--grid", sa.grid)->capture_default_str();
  ss_cmd->add_option("--residual-probes", sa.residual_probes)->capture_default_str();
  ss_cmd->add_option("--csv-points", sa.csv_points)->capture_default_str()->check(CLI::Range(2L, 10000000L));
  common(ss_cmd);

  CounterArgs xa2;
  auto* ce_cmd = app.add_subcommand("counterexample", "marker construction and near-diagonal simulation");
  ce_cmd->add_option("--l", xa2.l)->capture_default_str();
  ce_cmd->add_option("--epsilon", xa2.epsilon)->capture_default_str();
  ce_cmd->add_option("--K", xa2.K, "stages in the schedule")->capture_default_str();
  ce_cmd->add_option("--simulate", xa2.simulate, "stages coded into the simulated process")->capture_default_str();
  ce_cmd->add_option("--pairs", xa2.pairs)->capture_default_str();
  ce_cmd->add_option("--pasts", xa2.pasts)->capture_default_str();
  ce_cmd->add_option("--window", xa2.window, "past window W (0: coder length)")->capture_default_str();
  ce_cmd->add_option("--beta-target", xa2.beta_target)->capture_default_str();
  common(ce_cmd);

  ConditionsArgs co;
  auto* cond_cmd = app.add_subcommand("conditions", "exact condition exponents of a finite-memory source");
  cond_cmd->add_option("--source", co.source)->capture_default_str();
  cond_cmd->add_option("--m-max", co.m_max)->capture_default_str();
  common(cond_cmd);

  std::string manifest;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a manifest");
  replay_cmd->add_option("manifest", manifest)->required();
  replay_cmd->add_option("--out", out)->capture_default_str();

  std::vector<std::string> rev(argv_in.rbegin(), argv_in.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (replay_cmd->parsed()) return run_replay(manifest, out);

  CLI::App* sub = app.get_subcommands().front();
  ctx.command = sub->get_name();
  ctx.args.assign(argv_in.begin() + 2, argv_in.end());
  // --seed/--threads/--out are stored separately so replay can redirect the output
  for (std::size_t i = 0; i < ctx.args.size();) {
    const std::string& s = ctx.args[i];
    const bool flag = s == "--out" || s == "--seed" || s == "--threads";
    const bool joined = s.rfind("--out=", 0) == 0 || s.rfind("--seed=", 0) == 0 || s.rfind("--threads=", 0) == 0;
    if (flag && i + 1 < ctx.args.size())
      ctx.args.erase(ctx.args.begin() + static_cast<long>(i), ctx.args.begin() + static_cast<long>(i) + 2);
    else if (joined)
      ctx.args.erase(ctx.args.begin() + static_cast<long>(i));
    else
      ++i;
  }
  ctx.out = out;
  omp_set_num_threads(ctx.threads);

  if (sub == classify_cmd) return run_classify(ctx, ca);
  if (sub == expand_cmd) return run_expand(ctx, ea);
  if (sub == parry_cmd) return run_parry(ctx, pa);
  if (sub == orbit_cmd) return run_orbit(ctx, oa);
  if (sub == weyl_cmd) return run_weyl(ctx, wa);
  if (sub == decay_cmd) return run_decay(ctx, da);
  if (sub == exponent_cmd) return run_exponent(ctx, xa);
  if (sub == lemma_cmd) return run_lemma32(ctx, la);
  if (sub == inv_cmd) return run_invariance(ctx, ia);
  if (sub == ss_cmd) return run_selfsim(ctx, sa);
  if (sub == ce_cmd) return run_counterexample(ctx, xa2);
  return run_conditions(ctx, co);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(std::vector<std::string>(argv, argv + argc));
  } catch (const PrecisionExhausted& e) {
    std::cerr << "precision exhausted: " << e.what() << "\n";
    return kPrecision;
  } catch (const AmbiguousBranch& e) {
    std::cerr << "precision exhausted (ambiguous branch): " << e.what() << "\n";
    return kPrecision;
  } catch (const Undetermined& e) {
    std::cerr << "undetermined at this precision: " << e.what() << "\n";
    return kPrecision;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
