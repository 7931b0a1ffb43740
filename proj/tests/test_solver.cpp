#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lipbarrier/error.hpp"
#include "lipbarrier/solver.hpp"

using namespace lipbarrier;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::internal_consistency;
}

GrowthFunction quartic() { return with_scanned_lambda0(power_growth(4.0)); }

}  // namespace

TEST_CASE("constant data") {
  const auto dom = ExteriorBallDomain::disk(1.0);
  const Mesh mesh = triangulate(dom, 0.2);
  const auto rg = make_regularized(quartic(), 2.0, 1e-3);
  const DiscreteSolution sol = minimize_energy(rg, mesh, constant_data(0.4));
  CHECK((sol.u.array() - 0.4).abs().maxCoeff() <= 1e-12);
  CHECK(sol.energy == doctest::Approx(check_mesh(mesh, dom).area * rg.F_mu(0.0)).scale(1.0));
  CHECK(sol.sup_grad <= 1e-12);
  const PrincipleCheck mp = verify_max_principle(sol, 0.4, 1.0);
  CHECK(mp.passed);
  CHECK(std::abs(mp.excess) <= 1e-12);
}

TEST_CASE("affine data is reproduced exactly") {
  const auto dom = ExteriorBallDomain::ellipse(2.0, 1.0);
  const Mesh mesh = triangulate(dom, 0.2);
  const Eigen::Vector2d k(0.7, -0.3);
  const BoundaryData bd = affine_data(k, 0.2);
  for (const auto& g : {quartic(), with_scanned_lambda0(power_growth(2.0))}) {
    INFO(g.name());
    const DiscreteSolution sol = minimize_energy(make_regularized(g, 2.0, 1e-3), mesh, bd);
    for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) CHECK(sol.u(i) == doctest::Approx(bd.value(mesh.vertex(i))).epsilon(1e-9));
    CHECK(sol.sup_grad == doctest::Approx(k.norm()).epsilon(1e-8));
    const PrincipleCheck gp = verify_gradient_principle(sol, 1.0);
    CHECK(gp.passed);
    CHECK(std::abs(gp.excess) <= 1e-8);
    CHECK(sol.boundary_trace_error == 0.0);
  }
}

TEST_CASE("energy descent and uniqueness") {
  const auto dom = ExteriorBallDomain::disk(1.0);
  const Mesh mesh = triangulate(dom, 0.1);
  SolverOptions opt;
  opt.seed = 42;
  const DiscreteSolution sol = minimize_energy(make_regularized(quartic(), 2.0, 1e-3), mesh, trig_trace_data(0.3), opt);
  REQUIRE(sol.energy_history.size() >= 2);
  for (std::size_t i = 1; i < sol.energy_history.size(); ++i) {
    CHECK(sol.energy_history[i] <= sol.energy_history[i - 1] + 1e-14 * std::abs(sol.energy_history[i - 1]));
  }
  CHECK(sol.energy_history[1] < sol.energy_history[0]);
  REQUIRE(sol.uniqueness_gap.has_value());
  CHECK(*sol.uniqueness_gap <= 10.0 * opt.tol);
  CHECK(discrete_energy(make_regularized(quartic(), 2.0, 1e-3), mesh, sol.u) == doctest::Approx(sol.energy).epsilon(1e-14));
  CHECK(sol.residual <= opt.tol * (1.0 + std::abs(sol.energy)));
}

TEST_CASE("solver preconditions") {
  const Mesh mesh = triangulate(ExteriorBallDomain::disk(1.0), 0.3);
  CHECK(kind_of([&] { minimize_energy(make_regularized(quartic(), 2.0, 0.0), mesh, zero_data()); }) ==
        ErrorKind::precondition);
  const auto eta = with_scanned_lambda0(eta_log_growth(2.0));
  CHECK(kind_of([&] { minimize_energy(make_regularized(eta, std::max(eta.lambda0(), 2.0), 1e-3), mesh, zero_data()); }) ==
        ErrorKind::config);
  SolverOptions tight;
  tight.max_iterations = 0;
  CHECK(kind_of([&] { minimize_energy(make_regularized(quartic(), 2.0, 1e-3), mesh, trig_trace_data(0.3), tight); }) ==
        ErrorKind::budget);
}

TEST_CASE("radial oracle, harmonic annulus") {
  const auto rg = make_regularized(with_scanned_lambda0(power_growth(2.0)), 10.0, 0.0);
  const RadialProfile p = radial_oracle(rg, 1.0, 2.0, 0.0, 1.0);
  // F = s^2: 2 r u' = q with u' = 1 / (r ln 2).
  CHECK(p.q == doctest::Approx(2.0 / std::numbers::ln2).epsilon(1e-10));
  CHECK(p.du.front() == doctest::Approx(1.442695040888963407359924681).epsilon(1e-10));
  CHECK(p.residual <= 1e-9);
  CHECK(p.end_error <= 1e-10);
  for (double r : linspace(1.0, 2.0, 37)) CHECK(std::abs(p(r) - std::log(r) / std::numbers::ln2) <= 1e-10);

  const RadialProfile flat = radial_oracle(rg, 1.0, 2.0, 0.3, 0.3);
  CHECK(flat.q == 0.0);
  CHECK(flat(1.5) == 0.3);
}

TEST_CASE("radial oracle recovers the barrier potential") {
  const PrototypeBarrier proto(0.5, 1.0, 2);
  const auto rg = make_regularized(prototype_growth(), 100.0, 0.0);
  const RadialProfile p = radial_oracle(rg, 1.0, 2.0, 0.0, proto.omega(2.0));
  CHECK(p.q == doctest::Approx(0.5).epsilon(1e-9));
  for (double r : linspace(1.0, 2.0, 21)) CHECK(std::abs(p(r) - proto.omega(r)) <= 1e-9);
}

TEST_CASE("annulus solve converges to the radial solution") {
  const auto dom = ExteriorBallDomain::annulus(1.0, 2.0);
  const BoundaryData bd = log_radial_data(1.0, 2.0, 0.0, 1.0);
  const auto rg = make_regularized(with_scanned_lambda0(power_growth(2.0)), 10.0, 1e-8);
  SolverOptions opt;
  opt.check_uniqueness = false;
  double prev = INFINITY;
  for (double h : {0.2, 0.1}) {
    const Mesh mesh = triangulate(dom, h);
    const DiscreteSolution sol = minimize_energy(rg, mesh, bd, opt);
    double err = 0.0;
    for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
      err = std::max(err, std::abs(sol.u(i) - std::log(mesh.vertex(i).norm()) / std::numbers::ln2));
    }
    CHECK(err < prev);
    CHECK(err <= 0.5 * mesh.h * mesh.h);
    prev = err;
    CHECK(sol.sup_u <= 1.0 + 1e-8);
    CHECK(sol.u.minCoeff() >= -1e-8);
    CHECK(verify_gradient_principle(sol, 1.0).passed);
  }
}

TEST_CASE("frame invariance") {
  const auto base = ExteriorBallDomain::ellipse(1.5, 1.0);
  const double angle = 0.7;
  const Point offset(0.4, -1.1);
  const auto moved = base.placed(angle, offset);
  const BoundaryData bd = trig_trace_data(0.3);
  const BoundaryData rotated(
      "rotated", [&](const Point& x) { return bd.value(moved.to_canonical(x)); },
      [&](const Point& x) { return Eigen::Rotation2Dd(angle) * bd.gradient(moved.to_canonical(x)); },
      [&](const Point& x) {
        const Eigen::Matrix2d R = Eigen::Rotation2Dd(angle).toRotationMatrix();
        return Eigen::Matrix2d(R * bd.hessian(moved.to_canonical(x)) * R.transpose());
      });
  const auto rg = make_regularized(quartic(), 2.0, 1e-3);
  const SolverOptions opt;
  const DiscreteSolution a = minimize_energy(rg, triangulate(base, 0.15), bd, opt);
  const DiscreteSolution b = minimize_energy(rg, triangulate(moved, 0.15), rotated, opt);
  REQUIRE(a.u.size() == b.u.size());
  CHECK((a.u - b.u).cwiseAbs().maxCoeff() <= 10.0 * opt.tol);
}

TEST_CASE("interpolation and distances") {
  const Mesh mesh = triangulate(ExteriorBallDomain::disk(1.0), 0.2);
  const DiscreteSolution sol = minimize_energy(make_regularized(quartic(), 2.0, 1e-3), mesh, affine_data({1.0, 2.0}, 0.5));
  CHECK(interpolate(sol, mesh.vertex(5)) == doctest::Approx(sol.u(5)).epsilon(1e-12));
  CHECK(interpolate(sol, Point(0.1, -0.2)) == doctest::Approx(0.1 - 0.4 + 0.5).epsilon(1e-8));
  CHECK(h1_distance(mesh, sol.u, sol.u) == 0.0);
  const Eigen::VectorXd shifted = sol.u.array() + 1.0;
  // Constant shift: only the mass part contributes, sqrt(area).
  CHECK(h1_distance(mesh, sol.u, shifted) == doctest::Approx(std::sqrt(check_mesh(mesh, ExteriorBallDomain::disk(1.0)).area)).epsilon(1e-12));
  CHECK(h1_distance(mesh, shifted, sol.u) == h1_distance(mesh, sol.u, shifted));
}

TEST_CASE("principles on a trigonometric trace") {
  const auto dom = ExteriorBallDomain::disk(1.0);
  const BoundaryData bd = trig_trace_data(0.3);
  const Mesh mesh = triangulate(dom, 0.1);
  const DiscreteSolution sol = minimize_energy(make_regularized(quartic(), 2.0, 1e-3), mesh, bd);
  CHECK(verify_max_principle(sol, estimate_norms(bd, dom).sup, 1.0).passed);
  CHECK(verify_gradient_principle(sol, 1.0).passed);
  // A negative slack constant demands strict interior dominance, which
  // fails once the interior carries any gradient at all.
  CHECK_FALSE(verify_gradient_principle(sol, -1.0).passed);
}

TEST_CASE("fixed point closure") {
  const auto dom = ExteriorBallDomain::disk(1.0);
  const Mesh mesh = triangulate(dom, 0.1);
  SolverOptions opt;
  const FixedPointResult fp = lambda_fixed_point(quartic(), mesh, trig_trace_data(0.3), 1e-3, 0.1, 5, opt);
  CHECK(fp.closed);
  CHECK(fp.rounds <= 5);
  CHECK(fp.lambdas.front() >= quartic().lambda0());
  REQUIRE(fp.solution.has_value());
  CHECK(fp.solution->sup_grad <= fp.lambda_star);
  CHECK(fp.resolve_consistent);
  CHECK(fp.resolve_change <= 10.0 * opt.tol);

  const FixedPointResult quad =
      lambda_fixed_point(with_scanned_lambda0(power_growth(2.0)), mesh, trig_trace_data(0.3), 1e-3, 1.0, 5, opt);
  CHECK(quad.closed);
  CHECK(quad.rounds == 1);

  const FixedPointResult affine = lambda_fixed_point(quartic(), mesh, affine_data({3.0, 0.0}, 0.0), 1e-3, 1.0, 5, opt);
  CHECK(affine.closed);
  CHECK(affine.lambda_star >= 3.0);
  CHECK(affine.rounds == 2);
}

TEST_CASE("vanishing convexity sweep") {
  const auto dom = ExteriorBallDomain::disk(1.0);
  const Mesh mesh = triangulate(dom, 0.15);
  const MuSweep sweep = mu_sweep(quartic(), mesh, trig_trace_data(0.3), 2.0, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5});
  CHECK(sweep.monotone);
  REQUIRE(sweep.distances.size() == 4);
  CHECK(sweep.distances.back() < sweep.distances.front());

  // Affine solutions do not depend on mu.
  const MuSweep flat = mu_sweep(quartic(), mesh, affine_data({0.5, 0.5}, 0.0), 2.0, {1e-1, 1e-3});
  CHECK(flat.distances.front() <= 1e-8);
  CHECK_THROWS_AS(mu_sweep(quartic(), mesh, zero_data(), 2.0, {1e-1, 0.0}), Error);
}

TEST_CASE("sandwich between the barriers") {
  const auto dom = ExteriorBallDomain::disk(1.0);
  const BoundaryData bd = trig_trace_data(0.3);
  const BoundaryNorms norms = estimate_norms(bd, dom);
  const auto g = quartic();
  const Mesh mesh = triangulate(dom, 0.05);
  const FixedPointResult fp = lambda_fixed_point(g, mesh, bd, 1e-3, 1.0, 5);
  REQUIRE(fp.closed);
  const auto rg = make_regularized(g, fp.lambda_star, 1e-3);
  for (const Point& x0 : {Point(1.0, 0.0), Point(0.0, -1.0)}) {
    const BarrierPair pair = build_barrier_pair(rg, dom, bd, norms, x0);
    REQUIRE(pair.verified);
    const SandwichCheck s = verify_sandwich(*fp.solution, pair, bd, norms.norm_1inf(), 1.0);
    CHECK(s.passed);
    CHECK(s.nodes > 0);
    CHECK(s.touching_gap == 0.0);
    const double dn = measured_normal_derivative(*fp.solution, x0, pair.ball().x0.normal);
    CHECK(dn <= normal_derivative_bound(pair) + mesh.h);
  }

  const BarrierPair zero = build_barrier_pair(rg, dom, zero_data(), Point(1.0, 0.0));
  const DiscreteSolution flat = minimize_energy(rg, mesh, zero_data());
  const SandwichCheck z = verify_sandwich(flat, zero, zero_data(), 0.0, 1.0);
  CHECK(z.passed);
  CHECK(z.upper_margin >= 0.0);
  CHECK(z.lower_margin >= 0.0);
}
