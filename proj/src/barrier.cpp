#include "lipbarrier/barrier.hpp"

#include <algorithm>
#include <cmath>

#include "lipbarrier/error.hpp"
#include "lipbarrier/numerics.hpp"

namespace lipbarrier {

namespace {

constexpr double kSignTolerance = 1e-10;

// r0^{d-1} - q for q = (1-delta)^{d-1} r0^{d-1}, without cancellation.
double ring_gap(double delta, double r0, int d) {
  return std::pow(r0, d - 1) * -std::expm1((d - 1) * std::log1p(-delta));
}

// Integral of q / (r^{d-1} - q) between the radii where r^{d-1} - q equals
// u_lo and u_hi, in the variable t = ln(r^{d-1} - q).
double log_substituted_integral(double q, int d, double u_lo, double u_hi) {
  if (u_hi <= u_lo) return 0.0;
  const double e = 1.0 / (d - 1);
  auto integrand = [=](double t) { return q / ((d - 1) * std::pow(std::exp(t) + q, (d - 2) * e)); };
  return integrate(integrand, std::log(u_lo), std::log(u_hi), 1e-12).value;
}

}  // namespace

// Prototype barrier -------------------------------------------------------------

PrototypeBarrier::PrototypeBarrier(double q, double r0, int d) : q_(q), r0_(r0), d_(d) {
  if (!(r0 > 0.0) || d < 2) fail(ErrorKind::precondition, "barrier needs r0 > 0 and d >= 2");
  if (!(q >= 0.0 && q < std::pow(r0, d - 1))) fail(ErrorKind::precondition, "flux q must lie in [0, r0^{d-1})");
}

double PrototypeBarrier::b(double r) const {
  const double u = std::pow(r, d_ - 1) - q_;
  if (!(u > 0.0)) fail(ErrorKind::pole, "b evaluated at r = " + format_double(r) + " on or inside its pole");
  return q_ / u;
}

double PrototypeBarrier::db(double r) const {
  const double u = std::pow(r, d_ - 1) - q_;
  if (!(u > 0.0)) fail(ErrorKind::pole, "b' evaluated at r = " + format_double(r) + " on or inside its pole");
  return -q_ * (d_ - 1) * std::pow(r, d_ - 2) / (u * u);
}

double PrototypeBarrier::omega(double r) const {
  if (r < r0_ * (1.0 - 1e-12)) fail(ErrorKind::domain, "omega needs |x| >= r0, got " + format_double(r));
  r = std::max(r, r0_);
  if (q_ == 0.0 || r == r0_) return 0.0;
  if (d_ == 2) return q_ * std::log1p((r - r0_) / (r0_ - q_));
  return log_substituted_integral(q_, d_, std::pow(r0_, d_ - 1) - q_, std::pow(r, d_ - 1) - q_);
}

double PrototypeBarrier::omega_quadrature(double r) const {
  if (r < r0_ * (1.0 - 1e-12)) fail(ErrorKind::domain, "omega needs |x| >= r0, got " + format_double(r));
  r = std::max(r, r0_);
  if (q_ == 0.0 || r == r0_) return 0.0;
  return integrate([this](double t) { return b(t); }, r0_, r, 1e-11).value;
}

double PrototypeBarrier::laplacian(double r) const {
  const double u = std::pow(r, d_ - 1) - q_;
  return -(d_ - 1) * q_ * q_ / (r * u * u);
}

PrototypeCheck verify_prototype_pde(const PrototypeBarrier& proto, const std::vector<double>& radii, double flux_tol) {
  const GrowthFunction comparison = prototype_growth();
  PrototypeCheck out;
  for (double r : radii) {
    if (!(r > proto.r0())) fail(ErrorKind::precondition, "prototype samples must satisfy |x| > r0");
    const double flux = comparison.dF(proto.b(r)) * std::pow(r, proto.d() - 1);
    out.worst_flux_residual = std::max(out.worst_flux_residual, std::abs(flux - proto.q()));
    out.max_laplacian = std::max(out.max_laplacian, proto.laplacian(r));
    ++out.samples;
  }
  out.passed = out.worst_flux_residual <= flux_tol && (out.samples == 0 || proto.q() == 0.0 || out.max_laplacian < 0.0);
  return out;
}

// True barrier --------------------------------------------------------------------

double TrueBarrier::value(const Point& local) const {
  const double w = proto.omega(local);
  return (sign == BarrierSign::upper ? w : -w) + k.dot(local) + c;
}

Eigen::Vector2d TrueBarrier::gradient(const Point& local) const {
  const double r = local.norm();
  const double radial = proto.b(r) / r;
  return (sign == BarrierSign::upper ? radial : -radial) * local + k;
}

// Constants -------------------------------------------------------------------------

BarrierConstants compute_constants(double K, double lambda0, double delta_growth, double Mstar, double u0_norm_1inf,
                                   double r0, int d) {
  if (!(K >= 0.0) || !(lambda0 >= 0.0) || !(delta_growth > 0.0 && delta_growth <= 1.0) || !(Mstar > 0.0) ||
      !(u0_norm_1inf >= 0.0) || !(r0 > 0.0) || d < 2) {
    fail(ErrorKind::precondition, "barrier constants need K, lambda0 >= 0, delta in (0,1], Mstar, r0 > 0");
  }
  BarrierConstants bc;
  bc.K = K;
  bc.lambda0 = lambda0;
  bc.delta_growth = delta_growth;
  bc.Mstar = Mstar;
  bc.u0_norm_1inf = u0_norm_1inf;
  bc.r0 = r0;
  bc.d = d;
  bc.M1 = 2.0 * K;
  bc.M2 = std::max({2.0 * lambda0, bc.M1, std::pow(2.0, (1.0 - delta_growth) / delta_growth)});
  bc.M = std::max({bc.M1, bc.M2, 2.0 * K});

  // (1 - 2 delta_max)^{d-1} = X / (1 + X) with X = max(M, M* ||u0||_{1,inf}).
  const double X = std::max(bc.M, Mstar * u0_norm_1inf);
  bc.delta_max = d == 2 ? 0.5 / (1.0 + X) : -0.5 * std::expm1(-std::log1p(1.0 / X) / (d - 1));
  if (!(bc.delta_max > 0.0 && bc.delta_max < 0.5)) {
    fail(ErrorKind::internal_consistency, "delta_max left (0, 1/2)");
  }
  bc.r_max = r0 * (1.0 + bc.delta_max / (1.0 - 2.0 * bc.delta_max));
  return bc;
}

// Supersolution operator ------------------------------------------------------------

LCheck verify_supersolution_L(const RegularizedGrowth& rg, const TrueBarrier& tb, const Point& x, double M, double K) {
  const PrototypeBarrier& proto = tb.proto;
  const double r = x.norm();
  if (!(r > proto.r0())) fail(ErrorKind::precondition, "L is evaluated only outside the exterior ball");
  const double b = proto.b(r);
  if (b < M * (1.0 - 1e-12)) {
    fail(ErrorKind::precondition, "b(|x|) = " + format_double(b) + " is below M = " + format_double(M));
  }
  const double db = proto.db(r);
  const Eigen::Vector2d k = tb.sign == BarrierSign::upper ? tb.k : Eigen::Vector2d(-tb.k);
  const double s = (b / r * x + k).norm();
  const double a = rg.a(s);
  const double da = rg.da(s);
  const double kx = k.dot(x);
  const double tangential = k.squaredNorm() / r - kx * kx / (r * r * r);
  const double radial_factor = r - b / db;

  LCheck out;
  out.L1 = da / s * db * radial_factor * tangential;
  out.L2 = -db * (s * da + a * b / (1.0 + b));
  out.L = out.L1 + out.L2;
  out.scale = std::abs(out.L1) + std::abs(out.L2);
  out.holds = out.L >= -kSignTolerance * out.scale;
  out.nonpositive_da = da <= 0.0;
  if (out.nonpositive_da) {
    const double delta = rg.base().delta_growth();
    out.bracket = rg.curvature(s) - 1.0 / (1.0 + b);
    out.bracket_bound = (std::pow(2.0, delta - 1.0) * std::pow(b, delta) - 1.0) / b;
  } else {
    out.bracket = s * s - radial_factor * tangential;
    out.bracket_bound = b * b / 4.0 - 2.0 * K * K;
  }
  out.bracket_holds =
      out.bracket >= out.bracket_bound - kSignTolerance * (std::abs(out.bracket) + std::abs(out.bracket_bound));
  return out;
}

// Ring thinning ------------------------------------------------------------------------

double ring_integral(double delta, double r0, double eta, int d) {
  if (!(delta > 0.0 && delta < 1.0) || !(r0 > 0.0) || !(eta >= 0.0) || d < 2) {
    fail(ErrorKind::precondition, "ring integral needs delta in (0,1), r0 > 0, eta >= 0");
  }
  const double q = std::pow((1.0 - delta) * r0, d - 1);
  if (d == 2) return q * std::log1p(eta / (r0 * delta));
  return log_substituted_integral(q, d, ring_gap(delta, r0, d), std::pow(r0 + eta, d - 1) - q);
}

double choose_delta_ring(const BarrierConstants& bc, double r0, double eta, int d, double target) {
  if (!(eta > 0.0)) fail(ErrorKind::precondition, "standoff eta must be positive");
  if (!std::isfinite(target)) fail(ErrorKind::precondition, "ring target must be finite");
  if (target <= 0.0) return 0.5 * bc.delta_max;

  constexpr int kMaxIterations = 200;
  int iterations = 0;
  auto feasible = [&](double delta) { return ring_integral(delta, r0, eta, d) >= target; };

  double hi = bc.delta_max;
  double lo = 0.5 * bc.delta_max;
  while (!feasible(lo)) {
    hi = lo;
    lo = std::ldexp(lo, -8);
    if (++iterations > kMaxIterations || lo == 0.0) fail(ErrorKind::nontermination, "no feasible ring width found");
  }
  while (hi / lo > 1.0 + 1e-12) {
    const double mid = std::sqrt(lo * hi);
    if (feasible(mid)) lo = mid; else hi = mid;
    if (++iterations > kMaxIterations) fail(ErrorKind::nontermination, "ring width bisection did not converge");
  }
  // Round down to 24 significant bits; smaller delta keeps the integral feasible.
  int exponent = 0;
  const double mantissa = std::frexp(lo, &exponent);
  return std::ldexp(std::floor(std::ldexp(mantissa, 24)), exponent - 24);
}

// Barrier pair ----------------------------------------------------------------------------

bool BarrierPair::in_patch(const Point& x) const {
  return graph.in_omega_plus(graph.frame().to_local(x), L_star, L_star);
}

double BarrierPair::upper_value(const Point& x) const { return upper.value(graph.frame().to_local(x)); }

double BarrierPair::lower_value(const Point& x) const { return lower.value(graph.frame().to_local(x)); }

BarrierPair build_barrier_pair(const RegularizedGrowth& rg, const ExteriorBallDomain& dom, const BoundaryData& bd,
                               const Point& x0) {
  return build_barrier_pair(rg, dom, bd, estimate_norms(bd, dom), x0);
}

BarrierPair build_barrier_pair(const RegularizedGrowth& rg, const ExteriorBallDomain& dom, const BoundaryData& bd,
                               const BoundaryNorms& sampled, const Point& x0) {
  BarrierPair pair(local_graph(dom, x0));
  // The sampled norms must also dominate the data at the touching point.
  BoundaryNorms norms = sampled;
  norms.sup = std::max(norms.sup, std::abs(bd.value(pair.graph.ball().x0.x)));
  norms.grad_sup = std::max(norms.grad_sup, bd.gradient(pair.graph.ball().x0.x).norm());
  const LocalGraph& graph = pair.graph;
  const ExteriorBall& ball = graph.ball();
  const double r0 = ball.r0;

  const MstarResult mstar = compute_Mstar(dom, ball, std::sqrt(2.0) * graph.L());
  BarrierConstants bc = compute_constants(norms.grad_sup, rg.base().lambda0(), rg.base().delta_growth(), mstar.Mstar,
                                          norms.norm_1inf(), r0, 2);

  // Patch: square-ish region below the graph inside |x| < r_max.
  double ell = std::min({graph.L(), graph.L_d(), mstar.patch_radius / std::sqrt(2.0)});
  while (true) {
    double reach = 0.0;
    for (double xi : linspace(-ell, ell, 41)) {
      const double top = graph.f(xi);
      reach = std::max({reach, Point(xi, top).norm(), Point(xi, top - ell).norm()});
    }
    if (reach < bc.r_max) break;
    ell *= 0.5;
    if (ell < 1e-6 * r0) fail(ErrorKind::patch_too_small, "no patch fits inside the barrier radius");
  }
  pair.L_star = ell;

  // Rest of the patch boundary: bottom curve and the two sides.
  std::vector<Point> outer;
  for (double xi : linspace(-ell, ell, 201)) outer.emplace_back(xi, graph.f(xi) - ell);
  for (double side : {-ell, ell}) {
    const double top = graph.f(side);
    for (double t : linspace(0.0, ell, 101)) outer.emplace_back(side, top - t);
  }
  bc.eta = std::numeric_limits<double>::infinity();
  for (const Point& y : outer) bc.eta = std::min(bc.eta, y.norm() - r0);
  if (!(bc.eta > 0.0)) fail(ErrorKind::geometric_degeneracy, "patch boundary touches the exterior ball");

  bc.Cstar = dom.diameter() + 1.0;
  const double target = bc.Cstar * norms.norm_1inf() + norms.sup;
  bc.delta_ring = choose_delta_ring(bc, r0, bc.eta, 2, target);
  bc.q = (1.0 - bc.delta_ring) * r0;
  bc.u0_sup = norms.sup;
  pair.constants = bc;

  const PrototypeBarrier proto(bc.q, r0, 2);
  const Point x0_local = graph.frame().to_local(ball.x0.x);
  const Eigen::Vector2d k = graph.frame().vector_to_local(bd.gradient(ball.x0.x));
  const double c = bd.value(ball.x0.x) - k.dot(x0_local);
  pair.upper = TrueBarrier{proto, k, c, BarrierSign::upper};
  pair.lower = TrueBarrier{proto, k, c, BarrierSign::lower};
  pair.gradient_bound = proto.b(r0) + bc.K;

  auto fail_stage = [&pair](const std::string& stage) {
    if (pair.failed_stage.empty()) pair.failed_stage = stage;
  };

  // (i) supersolution / subsolution sign on the patch.
  pair.L_min_observed = std::numeric_limits<double>::infinity();
  try {
    for (double xi : linspace(-ell, ell, 43)) {
      if (std::abs(xi) >= ell) continue;
      const double top = graph.f(xi);
      for (int j = 0; j <= 20; ++j) {
        const double depth = j == 0 ? 1e-3 * ell : ell * j / 20.0;
        const Point y(xi, top - depth);
        if (!(y.norm() > r0)) continue;
        for (const TrueBarrier* tb : {&pair.upper, &pair.lower}) {
          const LCheck check = verify_supersolution_L(rg, *tb, y, bc.M, bc.K);
          pair.L_min_observed = std::min(pair.L_min_observed, check.L);
          if (!check.holds) fail_stage("supersolution");
        }
      }
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::precondition) throw;
    fail_stage("supersolution");
  }

  // (ii) boundary values on Gamma*.
  pair.gamma_margin = std::numeric_limits<double>::infinity();
  pair.taylor_margin = std::numeric_limits<double>::infinity();
  for (double xi : linspace(-ell, ell, 401)) {
    const Point y = graph.gamma(xi);
    const Point x = graph.frame().to_global(y);
    const double u0 = bd.value(x);
    const double tol = 1e-12 * (1.0 + std::abs(u0));
    const double margin = std::min(pair.upper.value(y) - u0, u0 - pair.lower.value(y));
    pair.gamma_margin = std::min(pair.gamma_margin, margin);
    pair.taylor_margin =
        std::min(pair.taylor_margin, proto.omega(std::max(y.norm(), r0)) - norms.norm_1inf() * (x - ball.x0.x).squaredNorm());
    if (margin < -tol) fail_stage("gamma");
  }

  // (iii) the rest of the patch boundary against ||u0||_inf.
  pair.outer_margin = std::numeric_limits<double>::infinity();
  for (const Point& y : outer) {
    const double margin = std::min(pair.upper.value(y) - norms.sup, -norms.sup - pair.lower.value(y));
    pair.outer_margin = std::min(pair.outer_margin, margin);
    if (margin < -1e-12 * (1.0 + norms.sup)) fail_stage("outer");
  }

  pair.verified = pair.failed_stage.empty();
  return pair;
}

double normal_derivative_bound(const BarrierPair& pair) {
  // Exact local position of x0; a rounded |x0| would be amplified by b'.
  const Point x0(0.0, -pair.ball().r0);
  return std::max(pair.upper.gradient(x0).norm(), pair.lower.gradient(x0).norm());
}

std::vector<ProfileRow> barrier_profile(const BarrierPair& pair, int n) {
  std::vector<ProfileRow> rows;
  const PrototypeBarrier& proto = pair.upper.proto;
  for (double r : linspace(proto.r0(), pair.constants.r_max, n)) {
    const Point y(0.0, -r);
    rows.push_back({r, proto.b(r), proto.omega(r), pair.upper.value(y)});
  }
  return rows;
}

}  // namespace lipbarrier
