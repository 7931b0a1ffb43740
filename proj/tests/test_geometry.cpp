#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lipbarrier/error.hpp"
#include "lipbarrier/geometry.hpp"
#include "lipbarrier/numerics.hpp"

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

ExteriorBallDomain unit_square_rounded() {
  return ExteriorBallDomain::rounded_polygon({{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}, 0.25);
}

}  // namespace

TEST_CASE("shape measurements") {
  const auto disk = ExteriorBallDomain::disk(1.5);
  CHECK(disk.component_length(0) == doctest::Approx(3.0 * std::numbers::pi).epsilon(1e-14));
  CHECK(disk.area() == doctest::Approx(2.25 * std::numbers::pi).epsilon(1e-12));
  CHECK(disk.diameter() == doctest::Approx(3.0));

  const auto ell = ExteriorBallDomain::ellipse(2.0, 1.0);
  // 8 E(3/4), complete elliptic integral of the second kind.
  CHECK(ell.component_length(0) == doctest::Approx(9.68844822054767619842850319639).epsilon(1e-10));
  CHECK(ell.r0() == doctest::Approx(0.5));

  const auto ann = ExteriorBallDomain::annulus(1.0, 2.0);
  CHECK(ann.component_count() == 2);
  CHECK(ann.area() == doctest::Approx(3.0 * std::numbers::pi).epsilon(1e-12));

  const auto sq = unit_square_rounded();
  CHECK(sq.component_length(0) == doctest::Approx(8.0 + 2.0 * std::numbers::pi * 0.25).epsilon(1e-12));
  CHECK(sq.area() == doctest::Approx(4.0 + 4.0 * 2.0 * 0.25 + std::numbers::pi * 0.0625).epsilon(1e-9));
  CHECK(sq.r0() == doctest::Approx(0.25));
}

TEST_CASE("membership and projection") {
  const auto ell = ExteriorBallDomain::ellipse(2.0, 1.0).placed(0.4, {0.3, -0.2});
  CHECK(ell.contains(ell.to_global({0.0, 0.0})));
  CHECK(ell.contains(ell.to_global({1.9, 0.0})));
  CHECK_FALSE(ell.contains(ell.to_global({2.1, 0.0})));
  CHECK_FALSE(ell.contains(ell.to_global({0.0, 1.01})));

  for (const auto& p : ell.sample_boundary(64.0)) {
    const Point off = p.x + 0.05 * p.normal;
    const BoundaryPoint back = ell.project(off);
    CHECK((back.x - p.x).norm() < 1e-9);
    CHECK_FALSE(ell.contains(off));
    CHECK(ell.contains(p.x - 0.05 * p.normal));
  }

  const auto ann = ExteriorBallDomain::annulus(1.0, 2.0);
  CHECK_FALSE(ann.contains({0.5, 0.0}));
  CHECK(ann.contains({1.5, 0.0}));
  const BoundaryPoint inner = ann.project({0.8, 0.0});
  CHECK(inner.component == 1);
  CHECK(inner.x.x() == doctest::Approx(1.0));
  CHECK(inner.normal.x() == doctest::Approx(-1.0));
}

TEST_CASE("boundary samples are C1") {
  for (const auto& dom : {ExteriorBallDomain::ellipse(2.0, 1.0), unit_square_rounded(),
                          ExteriorBallDomain::annulus(1.0, 2.0)}) {
    INFO(dom.shape_name());
    const auto samples = dom.sample_boundary();
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (samples[i].component != samples[i - 1].component) continue;
      CHECK(samples[i].tangent.dot(samples[i - 1].tangent) > 0.99);
      CHECK(std::abs(samples[i].tangent.norm() - 1.0) < 1e-12);
      CHECK(std::abs(samples[i].tangent.dot(samples[i].normal)) < 1e-12);
    }
  }
}

TEST_CASE("exterior ball of a disk") {
  const double R = 1.3;
  const auto dom = ExteriorBallDomain::disk(R).with_r0(0.7);
  for (double th : {0.0, 0.9, 2.5, -1.2}) {
    const Point x0{R * std::cos(th), R * std::sin(th)};
    const ExteriorBall ball = exterior_ball_center(dom, x0);
    CHECK(ball.center.norm() == doctest::Approx(R + 0.7).epsilon(1e-14));
    CHECK((ball.center - x0).norm() == doctest::Approx(0.7).epsilon(1e-14));
    const Point local = ball.frame.to_local(x0);
    CHECK(std::abs(local.x()) < 1e-14);
    CHECK(local.y() == doctest::Approx(-0.7).epsilon(1e-14));
    CHECK(ball.frame.to_local(ball.center).norm() < 1e-15);
    CHECK(ball.frame.rotation.determinant() == doctest::Approx(1.0));
  }
}

TEST_CASE("convex shapes admit the ball everywhere") {
  for (const auto& dom : {ExteriorBallDomain::ellipse(2.0, 1.0), unit_square_rounded(),
                          ExteriorBallDomain::disk(1.0).with_r0(3.0)}) {
    INFO(dom.shape_name());
    for (const auto& p : dom.sample_boundary(8.0)) CHECK_NOTHROW(exterior_ball_center(dom, p.x));
  }
}

TEST_CASE("exterior ball violations") {
  const auto ann = ExteriorBallDomain::annulus(1.0, 2.0).with_r0(1.5);
  CHECK(kind_of([&] { exterior_ball_center(ann, {1.0, 0.0}); }) == ErrorKind::exterior_ball_violation);
  CHECK_NOTHROW(exterior_ball_center(ann, {2.0, 0.0}));
  const auto disk = ExteriorBallDomain::disk(1.0);
  CHECK(kind_of([&] { exterior_ball_center(disk, {0.5, 0.0}); }) == ErrorKind::precondition);
  CHECK(kind_of([] { ExteriorBallDomain::annulus(2.0, 1.0); }) == ErrorKind::geometric_degeneracy);
  CHECK(kind_of([] {
          ExteriorBallDomain::rounded_polygon({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}}, 0.1);
        }) == ErrorKind::geometric_degeneracy);
}

TEST_CASE("distance constant on a disk") {
  // For a disk of radius rho the ratio is rho (|x| + r0) / (r0 + rho),
  // increasing in |x|, with limit 2 r0 / (1 + r0 / rho) at x0.
  const double rho = 1.0, r0 = 0.5, patch = 0.3;
  const auto dom = ExteriorBallDomain::disk(rho).with_r0(r0);
  const ExteriorBall ball = exterior_ball_center(dom, {0.0, -1.0});
  const MstarResult m = compute_Mstar(dom, ball, patch);
  const double limit = 2.0 * r0 / (1.0 + r0 / rho);
  // |x| at the patch edge |x - x0| = patch.
  const double eps = patch * patch / (2.0 * rho * rho);
  const double edge = std::sqrt(r0 * r0 + 2.0 * rho * (r0 + rho) * eps);
  const double exact = rho * (edge + r0) / (r0 + rho);
  CHECK(m.raw_max > limit);
  CHECK(m.raw_max <= exact * (1.0 + 1e-12));
  CHECK(m.raw_max == doctest::Approx(exact).epsilon(2e-3));
  CHECK(m.Mstar == doctest::Approx(kMstarSafety * m.raw_max).epsilon(1e-15));

  const MstarResult tiny = compute_Mstar(dom, ball, 0.01);
  CHECK(tiny.raw_max == doctest::Approx(limit).epsilon(1e-3));
}

TEST_CASE("distance constant at a flat edge") {
  const auto dom = unit_square_rounded();
  const double r0 = dom.r0();
  const ExteriorBall ball = exterior_ball_center(dom, {0.0, -1.25});
  const MstarResult small = compute_Mstar(dom, ball, 0.4);
  const MstarResult big = compute_Mstar(dom, ball, 0.8);
  // Half-plane: ratio bounded by 2 |x| <= 2 (r0 + patch).
  CHECK(small.raw_max <= 2.0 * std::hypot(r0, 0.4) + 1e-9);
  CHECK(big.raw_max <= 2.0 * small.raw_max + 2.0 * 0.8);
  CHECK(big.raw_max >= small.raw_max);
}

TEST_CASE("local graph of a disk") {
  const double R = 1.0, r0 = 1.0;
  const auto dom = ExteriorBallDomain::disk(R).with_r0(r0);
  const LocalGraph g = local_graph(dom, {std::cos(0.7), std::sin(0.7)});
  CHECK(g.L() == doctest::Approx(R / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(g.L() <= R / std::sqrt(2.0));
  CHECK(g.L_d() > 0.0);
  for (double xi : linspace(-0.99 * g.L(), 0.99 * g.L(), 31)) {
    const double exact = -(r0 + R) + std::sqrt(R * R - xi * xi);
    CHECK(g.f(xi) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(g.df(xi) == doctest::Approx(-xi / std::sqrt(R * R - xi * xi)).epsilon(1e-9));
  }
  CHECK(g.f(0.0) == doctest::Approx(-r0).epsilon(1e-14));
  CHECK(std::abs(g.df(0.0)) < 1e-12);
}

TEST_CASE("local graph of a flat edge") {
  const auto dom = unit_square_rounded();
  const LocalGraph g = local_graph(dom, {0.3, -1.25});
  CHECK(g.L() == doctest::Approx(dom.r0()));
  CHECK(g.N() < 1e-12);
  for (double xi : linspace(-0.9 * g.L(), 0.9 * g.L(), 9)) CHECK(g.f(xi) == doctest::Approx(-dom.r0()));
}

TEST_CASE("local graph of an ellipse vertex") {
  const auto dom = ExteriorBallDomain::ellipse(2.0, 1.0);
  const LocalGraph g = local_graph(dom, {2.0, 0.0});
  CHECK(g.r0() == doctest::Approx(0.5));
  CHECK(g.f(0.0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::abs(g.df(0.0)) < 1e-9);
  for (double xi : linspace(-0.9 * g.L(), 0.9 * g.L(), 11)) {
    const Point x = g.frame().to_global(g.gamma(xi));
    CHECK(x.x() * x.x() / 4.0 + x.y() * x.y() == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(std::abs(g.df(xi)) <= 1.0);
  }
  // Points just below the graph lie in the domain, points above do not.
  for (double xi : linspace(-0.9 * g.L(), 0.9 * g.L(), 11)) {
    CHECK(dom.contains(g.frame().to_global({xi, g.f(xi) - 0.5 * g.L_d()})));
    CHECK_FALSE(dom.contains(g.frame().to_global({xi, g.f(xi) + 0.5 * g.L_d()})));
  }
}

TEST_CASE("placement commutes with the frame") {
  const auto base = ExteriorBallDomain::ellipse(2.0, 1.0);
  const auto moved = base.placed(1.1, {0.5, 2.0});
  const ExteriorBall b0 = exterior_ball_center(base, {2.0, 0.0});
  const ExteriorBall b1 = exterior_ball_center(moved, moved.to_global({2.0, 0.0}));
  CHECK((moved.to_global(b0.center) - b1.center).norm() < 1e-12);
  CHECK(compute_Mstar(base, b0, 0.3).raw_max == doctest::Approx(compute_Mstar(moved, b1, 0.3).raw_max).epsilon(1e-9));
}
