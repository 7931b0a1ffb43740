// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lipbarrier/barrier.hpp"
#include "lipbarrier/error.hpp"
#include "lipbarrier/experiment.hpp"
#include "lipbarrier/solver.hpp"

using namespace lipbarrier;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Outcome barrier_identities() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_flux = 0.0, worst_lap = -INFINITY;
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int d = 2 + static_cast<int>(3.0 * U(rng)) % 3;
    const double r0 = 0.2 + 2.0 * U(rng);
    const double q = (0.01 + 0.98 * U(rng)) * std::pow(r0, d - 1);
    const PrototypeBarrier proto(q, r0, d);
    const double r = r0 * (1.0 + 1e-6 + 4.0 * U(rng));
    const double b = proto.b(r);
    const double flux = b / (1.0 + b) * std::pow(r, d - 1);
    worst_flux = std::max(worst_flux, std::abs(flux - q));
    worst_lap = std::max(worst_lap, proto.laplacian(r));
    bad += !(std::abs(flux - q) <= 1e-13 && proto.laplacian(r) < 0.0);
  }
  return {bad == 0, fmt("flux residual %.2e, max laplacian %.3e, %d bad", worst_flux, worst_lap, bad)};
}

Outcome closed_form_vs_quadrature() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double r0 = 0.1 + 2.0 * U(rng);
    const double q = 0.99 * r0 * U(rng);
    const double r = r0 * (1.0 + 3.0 * U(rng));
    const PrototypeBarrier p(q, r0, 2);
    worst = std::max(worst, std::abs(p.omega(r) - p.omega_quadrature(r)));
  }
  return {worst <= 1e-9, fmt("max |closed - quadrature| = %.2e", worst)};
}

Outcome supersolution_sign() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::ostringstream detail;
  bool ok = true;
  const std::vector<GrowthFunction> growths{with_scanned_lambda0(power_growth(2.0)),
                                             with_scanned_lambda0(power_growth(4.0)),
                                             with_scanned_lambda0(eta_log_growth(2.0))};
  for (const auto& base : growths) {
    const bool a2 = check_A2(base, base.delta_growth(), default_tail_grid(base)).holds;
    int failures = 0;
    double worst = INFINITY;
    for (int i = 0; i < 10000; ++i) {
      const double K = 3.0 * U(rng);
      const BarrierConstants bc = compute_constants(K, base.lambda0(), base.delta_growth(), 1.0, 1.0, 1.0, 2);
      const double lambda = base.lambda0() + 20.0 * U(rng);
      const auto rg = make_regularized(base, lambda, 0.0);
      const double delta = bc.delta_max * (1e-4 + (1.0 - 1e-4) * U(rng));
      const PrototypeBarrier proto(1.0 - delta, 1.0, 2);
      // b(r) >= M up to r = q (1 + 1/M).
      const double r_hi = std::min(proto.q() * (1.0 + 1.0 / bc.M), 3.0);
      const double r = 1.0 + (r_hi - 1.0) * U(rng);
      const double th = kTwoPi * U(rng);
      const double rk = K * std::sqrt(U(rng));
      const double tk = kTwoPi * U(rng);
      const Point x(r * std::cos(th), r * std::sin(th));
      const BarrierSign sign = i % 2 ? BarrierSign::lower : BarrierSign::upper;
      const TrueBarrier tb{proto, {rk * std::cos(tk), rk * std::sin(tk)}, 0.0, sign};
      const LCheck check = verify_supersolution_L(rg, tb, x, bc.M, K);
      failures += !check.holds;
      worst = std::min(worst, check.L / check.scale);
    }
    ok = ok && a2 && failures == 0;
    detail << base.name() << ": A2 " << (a2 ? "ok" : "FAILS") << ", " << failures << " failures, min L/scale "
           << fmt("%.3g", worst) << "; ";
  }
  return {ok, detail.str()};
}

Outcome constants_reproduction() {
  const double r0 = 0.8;
  const BarrierConstants bc = compute_constants(1.0, 2.0, 0.5, 1.0, 1.0, r0, 2);
  const bool ok = bc.M1 == 2.0 && bc.M2 == 4.0 && bc.M == 4.0 && bc.delta_max == 0.1 && bc.r_max == 1.125 * r0;
  return {ok, fmt("M1=%.17g M2=%.17g M=%.17g delta_max=%.17g r_max/r0=%.17g", bc.M1, bc.M2, bc.M, bc.delta_max,
                  bc.r_max / r0)};
}

Outcome radial_oracle_equivalence() {
  const auto dom = ExteriorBallDomain::annulus(1.0, 2.0);
  const BoundaryData bd = log_radial_data(1.0, 2.0, 0.0, 1.0);
  const auto rg = make_regularized(with_scanned_lambda0(power_growth(2.0)), 10.0, 1e-8);
  // Independent radial reference against the closed form.
  const RadialProfile oracle = radial_oracle(rg, 1.0, 2.0, 0.0, 1.0);
  double oracle_gap = 0.0;
  for (double r : linspace(1.0, 2.0, 101)) oracle_gap = std::max(oracle_gap, std::abs(oracle(r) - std::log2(r)));

  SolverOptions opt;
  opt.check_uniqueness = false;
  std::vector<double> hs, errs;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const Mesh mesh = triangulate(dom, h);
    const DiscreteSolution sol = minimize_energy(rg, mesh, bd, opt);
    double err = 0.0;
    for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
      err = std::max(err, std::abs(sol.u(i) - oracle(mesh.vertex(i).norm())));
    }
    hs.push_back(mesh.h);
    errs.push_back(err);
  }
  double min_rate = INFINITY;
  bool decreasing = true;
  std::ostringstream detail;
  for (std::size_t i = 1; i < hs.size(); ++i) {
    decreasing = decreasing && errs[i] < errs[i - 1];
    min_rate = std::min(min_rate, std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]));
  }
  detail << "errors";
  for (double e : errs) detail << fmt(" %.2e", e);
  detail << fmt(", min rate %.2f, oracle vs log2 %.1e", min_rate, oracle_gap);
  return {decreasing && min_rate >= 0.9 && errs.back() <= 5e-3 && oracle_gap <= 1e-9, detail.str()};
}

struct RandomCase {
  std::string label;
  ExteriorBallDomain dom;
  BoundaryData bd;
  GrowthFunction g;
};

std::vector<RandomCase> random_cases() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<RandomCase> out;
  for (int i = 0; i < 20; ++i) {
    const int shape = i % 4;
    ExteriorBallDomain dom = [&] {
      switch (shape) {
        case 0: return ExteriorBallDomain::disk(0.8 + 0.7 * U(rng));
        case 1: return ExteriorBallDomain::ellipse(1.2 + 0.8 * U(rng), 1.0);
        case 2: {
          const double r_in = 0.5 + 0.5 * U(rng);
          return ExteriorBallDomain::annulus(r_in, r_in + 0.8 + 0.7 * U(rng));
        }
        default: {
          const double w = 0.8 + 0.6 * U(rng);
          return ExteriorBallDomain::rounded_polygon({{-w, -0.7}, {w, -0.7}, {0.2 * U(rng), 0.9}}, 0.2 + 0.1 * U(rng));
        }
      }
    }();
    dom = dom.placed(kTwoPi * U(rng), {U(rng) - 0.5, U(rng) - 0.5});
    const double amp = 0.1 + 0.4 * U(rng);
    const double m = 1.0 + 2.0 * U(rng);
    const double phase = kTwoPi * U(rng);
    const double ell = 0.5 + U(rng);
    const double p = 2.0 + 2.0 * U(rng);
    out.push_back({dom.shape_name() + fmt(" p=%.2f", p), std::move(dom), trig_trace_data(amp, m, phase, ell),
                   with_scanned_lambda0(power_growth(p))});
  }
  return out;
}

struct PrincipleRuns {
  int max_failures = 0;
  int grad_failures = 0;
  double worst_max_excess = -INFINITY;
  double worst_grad_ratio = -INFINITY;
  std::string first_failure;
};

const PrincipleRuns& principle_runs() {
  static const PrincipleRuns runs = [] {
    PrincipleRuns r;
    for (const RandomCase& c : random_cases()) {
      const Mesh mesh = triangulate(c.dom, 0.1);
      const FixedPointResult fp = lambda_fixed_point(c.g, mesh, c.bd, 1e-3, 1.0, 5);
      const DiscreteSolution& sol = *fp.solution;
      double boundary_sup = 0.0;
      for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
        if (mesh.boundary[i]) boundary_sup = std::max(boundary_sup, std::abs(c.bd.value(mesh.vertex(i))));
      }
      const PrincipleCheck mp = verify_max_principle(sol, boundary_sup, 1.0);
      const PrincipleCheck gp = verify_gradient_principle(sol, 1.0);
      r.worst_max_excess = std::max(r.worst_max_excess, mp.excess / mp.slack);
      r.worst_grad_ratio = std::max(r.worst_grad_ratio, gp.excess / gp.slack);
      if (!mp.passed) ++r.max_failures;
      if (!gp.passed) ++r.grad_failures;
      if ((!mp.passed || !gp.passed) && r.first_failure.empty()) r.first_failure = c.label;
    }
    return r;
  }();
  return runs;
}

Outcome max_principle() {
  const PrincipleRuns& r = principle_runs();
  return {r.max_failures == 0,
          fmt("%d/20 failures, worst excess/slack %.3f%s", r.max_failures, r.worst_max_excess,
              r.first_failure.empty() ? "" : (", first: " + r.first_failure).c_str())};
}

Outcome gradient_principle() {
  const PrincipleRuns& r = principle_runs();
  return {r.grad_failures == 0, fmt("%d/20 failures, worst excess/slack %.3f", r.grad_failures, r.worst_grad_ratio)};
}

struct Flagship {
  ExperimentConfig config;
  ExteriorBallDomain dom;
  BoundaryData bd;
  BoundaryNorms norms;
  GrowthFunction g;
  Mesh mesh;
  FixedPointResult fp;
};

const Flagship& flagship() {
  static const Flagship f = [] {
    const ExperimentConfig c = load_config(std::string(LIPBARRIER_CONFIG_DIR) + "/flagship.json");
    ExteriorBallDomain dom = make_domain(c.domain);
    BoundaryData bd = make_boundary_data(c.boundary_data, c.domain);
    const BoundaryNorms norms = estimate_norms(bd, dom);
    GrowthFunction g = make_growth(c.growth.front());
    Mesh mesh = triangulate(dom, c.solver.h);
    SolverOptions opt;
    opt.tol = c.solver.tol;
    opt.seed = c.seed;
    FixedPointResult fp = lambda_fixed_point(g, mesh, bd, c.solver.mu.front(), c.solver.lambda_init,
                                             c.solver.max_rounds, opt);
    return Flagship{c, std::move(dom), std::move(bd), norms, std::move(g), std::move(mesh), std::move(fp)};
  }();
  return f;
}

Outcome sandwich_and_normal_bound() {
  const Flagship& f = flagship();
  if (!f.fp.solution) return {false, "no solution"};
  const DiscreteSolution& sol = *f.fp.solution;
  const auto rg = make_regularized(f.g, f.fp.lambda_star, f.config.solver.mu.front());
  bool ok = true;
  std::size_t nodes = 0;
  double worst_margin = INFINITY, worst_normal = -INFINITY;
  for (const Point& x0 : barrier_points(f.config, f.dom)) {
    const BarrierPair pair = build_barrier_pair(rg, f.dom, f.bd, f.norms, x0);
    const SandwichCheck s = verify_sandwich(sol, pair, f.bd, f.norms.norm_1inf(), 1.0);
    const double dn = measured_normal_derivative(sol, x0, pair.ball().x0.normal);
    const double bound = normal_derivative_bound(pair) + sol.mesh.h;
    ok = ok && pair.verified && s.passed && s.nodes > 0 && dn <= bound;
    nodes += s.nodes;
    worst_margin = std::min({worst_margin, s.upper_margin + s.slack, s.lower_margin + s.slack});
    worst_normal = std::max(worst_normal, dn / bound);
  }
  return {ok, fmt("%zu patch nodes, min margin incl. slack %.3e, max |du/dn|/bound %.2e", nodes, worst_margin,
                  worst_normal)};
}

Outcome lambda_closure() {
  const Flagship& f = flagship();
  const double tol = f.config.solver.tol;
  const bool ok = f.fp.closed && f.fp.rounds <= 5 && f.fp.resolve_change <= 10.0 * tol && f.fp.solution &&
                  f.fp.solution->sup_grad <= f.fp.lambda_star;
  return {ok, fmt("closed=%d after %d rounds, lambda*=%.4g, sup|grad u|=%.4g, re-solve change %.2e", f.fp.closed,
                  f.fp.rounds, f.fp.lambda_star, f.fp.solution ? f.fp.solution->sup_grad : NAN, f.fp.resolve_change)};
}

Outcome growth_table() {
  struct Row {
    GrowthFunction g;
    bool expected;
  };
  const std::vector<Row> rows{{power_growth(4.0), true},
                              {prototype_growth(), false},
                              {oscillating_growth(2.0, 4.0), true},
                              {eta_double_exp_growth(), true}};
  bool ok = true;
  std::ostringstream detail;
  for (const Row& row : rows) {
    const A2Result a2 = check_A2(row.g, row.g.delta_growth(), default_tail_grid(row.g));
    ok = ok && a2.holds == row.expected;
    detail << row.g.name() << (a2.holds ? " pass" : " fail") << fmt(" (%.3g); ", a2.liminf_estimate);
  }
  return {ok, detail.str()};
}

Outcome ring_width_divergence() {
  const double r0 = 1.0, eta = 0.5;
  const BarrierConstants bc = compute_constants(1.0, 2.0, 0.5, 1.0, 1.0, r0, 2);
  bool ok = true;
  double prev = INFINITY;
  std::ostringstream detail;
  for (double target : {1.0, 10.0, 100.0}) {
    const double delta = choose_delta_ring(bc, r0, eta, 2, target);
    const double integral = ring_integral(delta, r0, eta, 2);
    ok = ok && integral >= target && delta < prev;
    prev = delta;
    detail << fmt("target %g: delta %.3e integral %.4g; ", target, delta, integral);
  }
  return {ok, detail.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"C1", "barrier flux identity and superharmonicity", 1.0, barrier_identities},
      {"C2", "closed-form potential vs quadrature", 1.0, closed_form_vs_quadrature},
      {"C3", "supersolution sign on random samples", 10.0, supersolution_sign},
      {"C4", "threshold constants", 1.0, constants_reproduction},
      {"C5", "annulus convergence to the radial solution", 60.0, radial_oracle_equivalence},
      {"C6", "maximum principle on 20 random configs", 300.0, max_principle},
      {"C7", "interior gradient dominated by the boundary layer", 300.0, gradient_principle},
      {"C8", "sandwich and normal-derivative bound", 120.0, sandwich_and_normal_bound},
      {"C9", "lambda fixed point closure", 180.0, lambda_closure},
      {"C10", "growth hypothesis classification", 5.0, growth_table},
      {"C11", "ring width decreases with the target", 1.0, ring_width_divergence},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const Error& e) {
      out = {false, std::string("error [") + to_string(e.kind()) + "]: " + e.what()};
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = out.ok && in_time;
    failed += !pass;
    std::printf("%s %-4s %s: %s [%.2fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.title, out.detail.c_str(), secs,
                in_time ? "" : fmt(" over %.0fs budget", c.budget_s).c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
