#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "betalab/parry.hpp"
#include "betalab/precision.hpp"
#include "betalab/source.hpp"

namespace betalab {

/// S_N(m) = (1/N) sum_{i<N} e_m(T_b^i x0) at several N and m, from one orbit pass.
struct WeylSeries {
  std::string base;        ///< descriptor of b ("" for sample clouds)
  std::string provenance;  ///< where x0 came from
  std::vector<long> checkpoints;
  std::vector<long> ms;
  /// values[c][j] = S_{checkpoints[c]}(ms[j])
  std::vector<std::vector<std::complex<double>>> values;
  /// x_0 .. x_N (midpoints of certified enclosures), N = last checkpoint
  std::vector<double> points;
  double orbit_width = 0.0;  ///< widest certified enclosure along the orbit
  long bits = 0;
  std::optional<double> log_ratio;  ///< log b / log a when a source base is known

  std::complex<double> at(std::size_t c, std::size_t j) const { return values[c][j]; }
};

struct WeylOptions {
  bool parallel = false;
  /// Digits certified per orbit point; default 8 + log10(max |m|).
  std::optional<int> digits;
};

WeylSeries weyl_sums(const BetaNumber& b, const Enclosure& x0, const std::vector<long>& checkpoints,
                     const std::vector<long>& ms, const WeylOptions& options = {});
/// Same averages for a given list of points (orbit or sample cloud); points.size() >= last checkpoint.
WeylSeries weyl_from_points(std::vector<double> points, const std::vector<long>& checkpoints,
                            const std::vector<long>& ms, bool parallel = false);

enum class Independence { Verified, Dependent, Asserted };
const char* to_string(Independence v);
/// log a / log b irrational? Decided exactly for integer a against rational b, and for
/// quadratic b whose small powers are rational; otherwise only asserted.
Independence multiplicative_independence(long a, const BetaNumber& b);

struct DecayProfile {
  std::vector<long> ms;
  std::vector<double> D;  ///< sample mean of max over tail checkpoints of |S_N(m)|
  std::vector<long> checkpoints;
  long sample_count = 0;
  double fitted_exponent = 0.0;  ///< least-squares slope of log D against log m over m >= 1
  std::optional<double> predicted_exponent;
  Independence independence = Independence::Asserted;
  long max_bits = 0;
  std::string proxy = "limsup_N |S_N(m)| ~ max over N in {N/4, N/2, N}";
};

struct DecayOptions {
  bool parallel = false;
};

DecayProfile mean_decay_profile(const MarkovSource& src, const BetaNumber& b, long a, const std::vector<long>& ms,
                                long n, long samples, std::uint64_t seed, const DecayOptions& options = {});

/// -alpha beta / (beta (1 + alpha) + 2 alpha + 1), 0 < alpha <= beta.
double predicted_exponent(double alpha, double beta);

struct ExponentOptimum {
  double gamma = 0.0;
  double delta = 0.0;
  double value = 0.0;
  long evaluations = 0;
};
/// The three-term objective minimized over (gamma, delta).
double exponent_objective(double alpha, double beta, double gamma, double delta);
/// Minimax of the objective on a resolution x resolution grid over (0, 10]^2, followed by
/// zoom levels that re-grid a window of half the previous size around the incumbent.
ExponentOptimum optimize_exponent_grid(double alpha, double beta, long resolution, int zoom_levels = 40,
                                       bool parallel = false);

/// Piecewise-constant probability density on [0,1) (uniform, Parry).
struct AnalyticMeasure {
  std::string name;
  std::vector<double> breaks;
  std::vector<double> density;
  static AnalyticMeasure uniform();
  static AnalyticMeasure parry(const ParryDensity& d);
  double mass(double c, double d) const;
};

struct Lemma32Input {
  /// Exactly one of cloud / analytic is used.
  std::vector<double> cloud;
  std::optional<AnalyticMeasure> analytic;
  double c = 0.0, d = 1.0;
  double m = 1.0;
  double r = 0.1;
  double b = 2.0;
  long quad_nodes = 2048;
  bool parallel = false;
};

struct Lemma32Result {
  double lhs = 0.0;
  double quad_error = 0.0;  ///< Richardson estimate
  double mc_error = 0.0;    ///< sampling scale for clouds, 0 for analytic measures
  double mass = 0.0;        ///< mu([c, d])
  double near_diag = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  long nodes = 0;
  bool holds() const { return slack >= -(quad_error + mc_error); }
};
Lemma32Result lemma32_check(const Lemma32Input& in);

/// Cesàro mean of |lambda(m)|^2 over |m| <= M from coefficients m = 0..M of a real measure.
double wiener_atom_estimate(const std::vector<std::complex<double>>& coeffs);

/// max over 1 <= |m| <= degree of |mean e_m(x_i) - mean e_m(x_{i+1})| over i < N,
/// N = last checkpoint. Bounded by 2/N by telescoping.
double invariance_defect(const WeylSeries& series, long degree);

/// sum over |m| <= M of |lambda_N(m) - parry(m)|^2 / (1 + m^2), lambda_N the empirical
/// measure of the first N points. Diagnostic only.
double parry_distance(const WeylSeries& series, const ParryDensity& d, long M);

}  // namespace betalab
