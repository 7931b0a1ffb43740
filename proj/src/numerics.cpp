#include "lipbarrier/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "lipbarrier/error.hpp"

namespace lipbarrier {

std::vector<double> logspace(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) fail(ErrorKind::precondition, "logspace needs 0 < lo < hi and n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) fail(ErrorKind::precondition, "linspace needs n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

double invert_increasing(const ScalarFunction& g, const ScalarFunction& dg, double y, double lo,
                         double hi_hint, double tol) {
  const double g_lo = g(lo);
  if (!std::isfinite(g_lo)) fail(ErrorKind::range, "inverse: g(lo) is not finite");
  if (y <= g_lo) return lo;

  double a = lo;
  double b = std::max(hi_hint, lo + 1.0);
  double g_b = g(b);
  for (int i = 0; g_b < y; ++i) {
    if (i > 2000 || !std::isfinite(g_b)) fail(ErrorKind::range, "inverse: value not bracketable");
    a = b;
    b *= 2.0;
    g_b = g(b);
  }
  if (std::isnan(g_b)) fail(ErrorKind::range, "inverse: g(hi) is NaN");

  double s = 0.5 * (a + b);
  for (int it = 0; it < 400; ++it) {
    const double r = g(s) - y;
    if (std::abs(r) <= tol) return s;
    if (r < 0.0) a = s; else b = s;
    if (std::nextafter(a, b) >= b) break;

    double next = 0.5 * (a + b);
    if (dg) {
      const double slope = dg(s);
      if (slope > 0.0 && std::isfinite(slope)) {
        const double newton = s - r / slope;
        if (newton > a && newton < b) next = newton;
      }
    }
    s = next;
  }
  // Bracket exhausted at double resolution: return the closer endpoint.
  return std::abs(g(a) - y) <= std::abs(g(b) - y) ? a : b;
}

QuadratureResult integrate(const ScalarFunction& f, double a, double b, double abs_tol) {
  if (a == b) return {};
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  // The per-panel error estimate never drops below a few 1e-12 of the L1
  // norm; asking for less only inflates the reported error.
  constexpr double floor_rel = 4e-12;
  double error = 0.0;
  double l1 = 0.0;
  double value = GK::integrate(f, a, b, 0, 0.0, &error, &l1);
  if (!(error <= abs_tol || error <= floor_rel * l1)) {
    const double rel = std::max(floor_rel, 0.1 * abs_tol / std::max(l1, std::numeric_limits<double>::min()));
    value = GK::integrate(f, a, b, 20, rel, &error, &l1);
  }
  if (!std::isfinite(value)) fail(ErrorKind::evaluation_failure, "quadrature produced a non-finite value");
  if (error > abs_tol && error > 1e-10 * l1) {
    fail(ErrorKind::evaluation_failure,
         "quadrature tolerance not reached (estimate " + format_double(error) + " on [" + format_double(a) + ", " +
             format_double(b) + "])");
  }
  return {value, error};
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LIPBARRIER_THREADS")) {
    const long requested = std::strtol(env, nullptr, 10);
    if (requested >= 1) return std::min<unsigned>(static_cast<unsigned>(requested), hw);
  }
  return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(1, n / 512));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

}  // namespace lipbarrier
