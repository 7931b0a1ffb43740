#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace lipbarrier {

using ScalarFunction = std::function<double(double)>;

/// n log-spaced points in [lo, hi], endpoints included.
std::vector<double> logspace(double lo, double hi, int n);
std::vector<double> linspace(double lo, double hi, int n);

/// Solves g(s) = y for a strictly increasing g on [lo, inf).
/// Returns lo when y <= g(lo). The upper end of the bracket is found by
/// doubling from hi_hint. dg is optional; without it plain bisection is used.
/// Stops once |g(s) - y| <= tol or the bracket collapses to adjacent doubles.
double invert_increasing(const ScalarFunction& g, const ScalarFunction& dg, double y,
                         double lo, double hi_hint, double tol);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod quadrature on [a, b] aiming at the given absolute
/// tolerance.
QuadratureResult integrate(const ScalarFunction& f, double a, double b, double abs_tol);

/// Worker count for element-parallel loops: LIPBARRIER_THREADS if set, else
/// the hardware concurrency.
unsigned worker_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunks are disjoint;
/// callers write into per-index slots and reduce afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace lipbarrier
