#pragma once

// Data-parallel kernels, each as a serial reference and an OpenMP version that
// produce bit-identical results (same per-output summation order).

#include <complex>
#include <cstddef>
#include <vector>

namespace betalab::kernels {

/// e(t) = exp(2 pi i t) with t reduced mod 1 first.
std::complex<double> expi(double t);

/// out[c * ms.size() + j] = (1/N_c) sum_{i < N_c} e(ms[j] * x[i]) for every checkpoint N_c.
/// Consecutive frequencies inside a block of 32 use the recurrence e((m+1)x) = e(mx) e(x).
void serial_weyl(const std::vector<double>& x, const std::vector<long>& ms, const std::vector<long>& checkpoints,
                 std::vector<std::complex<double>>& out);
void parallel_weyl(const std::vector<double>& x, const std::vector<long>& ms, const std::vector<long>& checkpoints,
                   std::vector<std::complex<double>>& out);

/// Midpoint-rule values g(z_k) = |sum_j w_j e(m b^{z_k} y_j)|^2 at z_k = (k + 1/2)/nodes.
/// Returns the midpoint sum (1/nodes) sum_k g(z_k).
double serial_scaled_energy(const std::vector<double>& y, const std::vector<double>& w, double m, double log_b,
                            long nodes);
double parallel_scaled_energy(const std::vector<double>& y, const std::vector<double>& w, double m, double log_b,
                              long nodes);

/// |prod_{k=1}^{K} (p0 + p1 e(xi b^-k))| for each xi, K chosen per xi so the neglected
/// factors are within tol of 1.
void serial_ssm_abs(const std::vector<double>& xi, double b, double p1, double tol, std::vector<double>& out);
void parallel_ssm_abs(const std::vector<double>& xi, double b, double p1, double tol, std::vector<double>& out);

}  // namespace betalab::kernels
