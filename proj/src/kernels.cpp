#include "betalab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace betalab::kernels {
namespace {

constexpr std::size_t kBlock = 32;

// one block of frequencies [j0, j1) for all checkpoints
void weyl_block(const std::vector<double>& x, const std::vector<long>& ms, const std::vector<long>& checkpoints,
                std::size_t j0, std::size_t j1, std::vector<std::complex<double>>& out) {
  const std::size_t nm = ms.size();
  bool consecutive = true;
  for (std::size_t j = j0 + 1; j < j1; ++j) consecutive = consecutive && ms[j] == ms[j - 1] + 1;
  std::vector<std::complex<double>> acc(j1 - j0, 0.0);
  std::size_t c = 0;
  for (std::size_t i = 0; c < checkpoints.size(); ++i) {
    while (c < checkpoints.size() && static_cast<long>(i) == checkpoints[c]) {
      const double inv = 1.0 / static_cast<double>(checkpoints[c]);
      for (std::size_t j = j0; j < j1; ++j) out[c * nm + j] = acc[j - j0] * inv;
      ++c;
    }
    if (c == checkpoints.size()) break;
    if (consecutive) {
      const std::complex<double> z = expi(x[i]);
      std::complex<double> w = expi(static_cast<double>(ms[j0]) * x[i]);
      for (std::size_t j = j0; j < j1; ++j) {
        acc[j - j0] += w;
        w *= z;
      }
    } else {
      for (std::size_t j = j0; j < j1; ++j) acc[j - j0] += expi(static_cast<double>(ms[j]) * x[i]);
    }
  }
}

double energy_at(const std::vector<double>& y, const std::vector<double>& w, double m, double log_b, double z) {
  const double lambda = m * std::exp(z * log_b);
  std::complex<double> s = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) s += w[j] * expi(lambda * y[j]);
  return std::norm(s);
}

double ssm_abs_one(double xi, double b, double p1, double tol) {
  const double p0 = 1.0 - p1;
  double prod = 1.0;
  double theta = xi / b;
  // |1 - (p0 + p1 e(theta))| <= 2 pi p1 |theta|; stop once the remaining product is within tol
  while (2 * std::numbers::pi * p1 * std::abs(theta) * b / (b - 1) > tol) {
    prod *= std::abs(p0 + p1 * expi(theta));
    theta /= b;
    if (prod == 0.0) break;
  }
  return prod;
}

}  // namespace

std::complex<double> expi(double t) {
  const double f = t - std::floor(t);
  return std::polar(1.0, 2 * std::numbers::pi * f);
}

void serial_weyl(const std::vector<double>& x, const std::vector<long>& ms, const std::vector<long>& checkpoints,
                 std::vector<std::complex<double>>& out) {
  out.assign(ms.size() * checkpoints.size(), 0.0);
  for (std::size_t j0 = 0; j0 < ms.size(); j0 += kBlock)
    weyl_block(x, ms, checkpoints, j0, std::min(ms.size(), j0 + kBlock), out);
}

void parallel_weyl(const std::vector<double>& x, const std::vector<long>& ms, const std::vector<long>& checkpoints,
                   std::vector<std::complex<double>>& out) {
  out.assign(ms.size() * checkpoints.size(), 0.0);
  const long blocks = static_cast<long>((ms.size() + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < blocks; ++b) {
    const std::size_t j0 = static_cast<std::size_t>(b) * kBlock;
    weyl_block(x, ms, checkpoints, j0, std::min(ms.size(), j0 + kBlock), out);
  }
}

double serial_scaled_energy(const std::vector<double>& y, const std::vector<double>& w, double m, double log_b,
                            long nodes) {
  double sum = 0.0;
  for (long k = 0; k < nodes; ++k) sum += energy_at(y, w, m, log_b, (static_cast<double>(k) + 0.5) / static_cast<double>(nodes));
  return sum / static_cast<double>(nodes);
}

double parallel_scaled_energy(const std::vector<double>& y, const std::vector<double>& w, double m, double log_b,
                              long nodes) {
  std::vector<double> g(static_cast<std::size_t>(nodes));
#pragma omp parallel for schedule(static)
  for (long k = 0; k < nodes; ++k)
    g[static_cast<std::size_t>(k)] = energy_at(y, w, m, log_b, (static_cast<double>(k) + 0.5) / static_cast<double>(nodes));
  double sum = 0.0;
  for (double v : g) sum += v;
  return sum / static_cast<double>(nodes);
}

void serial_ssm_abs(const std::vector<double>& xi, double b, double p1, double tol, std::vector<double>& out) {
  out.resize(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) out[i] = ssm_abs_one(xi[i], b, p1, tol);
}

void parallel_ssm_abs(const std::vector<double>& xi, double b, double p1, double tol, std::vector<double>& out) {
  out.resize(xi.size());
  const long n = static_cast<long>(xi.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = ssm_abs_one(xi[static_cast<std::size_t>(i)], b, p1, tol);
}

}  // namespace betalab::kernels
