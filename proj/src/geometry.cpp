#include "lipbarrier/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "lipbarrier/error.hpp"
#include "lipbarrier/numerics.hpp"

namespace lipbarrier {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 5-point Gauss-Legendre rule on [-1, 1].
constexpr double kGaussNodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                   0.9061798459386640};
constexpr double kGaussWeights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                     0.2369268850561891, 0.2369268850561891};

double wrap(double s, double length) {
  double out = std::fmod(s, length);
  if (out < 0.0) out += length;
  return out;
}

Eigen::Matrix2d rotation(double angle) {
  Eigen::Matrix2d Q;
  Q << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return Q;
}

Point perp_right(const Point& t) { return {t.y(), -t.x()}; }

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

// Ellipse arc-length table ------------------------------------------------------

struct ExteriorBallDomain::EllipseTable {
  static constexpr int kIntervals = 4096;
  double a;
  double b;
  std::vector<double> cumulative;  // arc length at theta_i = i * 2pi / kIntervals
  double length;

  EllipseTable(double a_, double b_) : a(a_), b(b_), cumulative(kIntervals + 1, 0.0) {
    const double h = kTwoPi / kIntervals;
    for (int i = 0; i < kIntervals; ++i) cumulative[i + 1] = cumulative[i] + arc(i * h, (i + 1) * h);
    length = cumulative.back();
  }

  double speed(double theta) const {
    const double sx = a * std::sin(theta);
    const double cy = b * std::cos(theta);
    return std::sqrt(sx * sx + cy * cy);
  }

  double arc(double t0, double t1) const {
    const double mid = 0.5 * (t0 + t1);
    const double half = 0.5 * (t1 - t0);
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) acc += kGaussWeights[k] * speed(mid + half * kGaussNodes[k]);
    return acc * half;
  }

  double theta_of(double s) const {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    const int i = std::clamp(static_cast<int>(it - cumulative.begin()) - 1, 0, kIntervals - 1);
    const double h = kTwoPi / kIntervals;
    const double base = i * h;
    double theta = base + (s - cumulative[i]) / speed(base);
    for (int iter = 0; iter < 4; ++iter) {
      const double r = cumulative[i] + arc(base, theta) - s;
      theta -= r / speed(theta);
    }
    return theta;
  }
};

// Construction ------------------------------------------------------------------

ExteriorBallDomain ExteriorBallDomain::disk(double R) {
  if (!(R > 0.0) || !std::isfinite(R)) fail(ErrorKind::geometric_degeneracy, "disk radius must be positive");
  ExteriorBallDomain d;
  d.kind_ = ShapeKind::disk;
  d.params_ = {R};
  d.r0_ = d.default_r0();
  return d;
}

ExteriorBallDomain ExteriorBallDomain::annulus(double r_in, double r_out) {
  if (!(r_in > 0.0 && r_out > r_in) || !std::isfinite(r_out)) {
    fail(ErrorKind::geometric_degeneracy, "annulus needs 0 < r_in < r_out");
  }
  ExteriorBallDomain d;
  d.kind_ = ShapeKind::annulus;
  d.params_ = {r_in, r_out};
  d.r0_ = d.default_r0();
  return d;
}

ExteriorBallDomain ExteriorBallDomain::ellipse(double a, double b) {
  if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorKind::geometric_degeneracy, "ellipse semi-axes must be positive");
  }
  ExteriorBallDomain d;
  d.kind_ = ShapeKind::ellipse;
  d.params_ = {a, b};
  d.ellipse_ = std::make_shared<const EllipseTable>(a, b);
  d.r0_ = d.default_r0();
  return d;
}

ExteriorBallDomain ExteriorBallDomain::rounded_polygon(std::vector<Point> vertices, double radius) {
  const std::size_t n = vertices.size();
  if (n < 3) fail(ErrorKind::geometric_degeneracy, "rounded polygon needs at least 3 vertices");
  if (!(radius > 0.0)) fail(ErrorKind::geometric_degeneracy, "rounding radius must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices[i];
    const Point& b = vertices[(i + 1) % n];
    const Point& c = vertices[(i + 2) % n];
    if (!(cross(b - a, c - b) > 0.0)) {
      fail(ErrorKind::geometric_degeneracy, "polygon must be strictly convex and counterclockwise");
    }
  }
  ExteriorBallDomain d;
  d.kind_ = ShapeKind::rounded_polygon;
  d.params_ = {radius};
  d.polygon_ = std::move(vertices);
  d.r0_ = d.default_r0();
  return d;
}

ExteriorBallDomain ExteriorBallDomain::placed(double angle, const Point& offset) const {
  ExteriorBallDomain d = *this;
  d.angle_ = angle;
  d.offset_ = offset;
  return d;
}

ExteriorBallDomain ExteriorBallDomain::with_r0(double r0) const {
  if (!(r0 > 0.0) || !std::isfinite(r0)) fail(ErrorKind::geometric_degeneracy, "r0 must be positive");
  ExteriorBallDomain d = *this;
  d.r0_ = r0;
  return d;
}

double ExteriorBallDomain::default_r0() const {
  switch (kind_) {
    case ShapeKind::disk: return params_[0];
    case ShapeKind::annulus: return std::min(params_[1], 0.5 * params_[0]);
    case ShapeKind::ellipse: {
      const double lo = std::min(params_[0], params_[1]);
      const double hi = std::max(params_[0], params_[1]);
      return lo * lo / hi;
    }
    case ShapeKind::rounded_polygon: return params_[0];
  }
  return 0.0;
}

std::string ExteriorBallDomain::shape_name() const {
  switch (kind_) {
    case ShapeKind::disk: return "disk";
    case ShapeKind::annulus: return "annulus";
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::rounded_polygon: return "rounded_polygon";
  }
  return "unknown";
}

// Queries -------------------------------------------------------------------------

Point ExteriorBallDomain::to_global(const Point& canonical) const { return rotation(angle_) * canonical + offset_; }

Point ExteriorBallDomain::to_canonical(const Point& x) const {
  return rotation(angle_).transpose() * (x - offset_);
}

double ExteriorBallDomain::component_length(int component) const {
  switch (kind_) {
    case ShapeKind::disk: return kTwoPi * params_[0];
    case ShapeKind::annulus: return kTwoPi * (component == 0 ? params_[1] : params_[0]);
    case ShapeKind::ellipse: return ellipse_->length;
    case ShapeKind::rounded_polygon: {
      double perimeter = 0.0;
      for (std::size_t i = 0; i < polygon_.size(); ++i) {
        perimeter += (polygon_[(i + 1) % polygon_.size()] - polygon_[i]).norm();
      }
      return perimeter + kTwoPi * params_[0];
    }
  }
  return 0.0;
}

BoundaryPoint ExteriorBallDomain::canonical_point(int component, double s) const {
  BoundaryPoint p;
  p.component = component;
  p.s = wrap(s, component_length(component));
  switch (kind_) {
    case ShapeKind::disk:
    case ShapeKind::annulus: {
      const bool inner = kind_ == ShapeKind::annulus && component == 1;
      const double R = kind_ == ShapeKind::disk ? params_[0] : (inner ? params_[0] : params_[1]);
      const double theta = inner ? -p.s / R : p.s / R;
      const Point radial(std::cos(theta), std::sin(theta));
      p.x = R * radial;
      p.normal = inner ? Point(-radial) : radial;
      p.tangent = inner ? Point(radial.y(), -radial.x()) : Point(-radial.y(), radial.x());
      p.curvature = inner ? -1.0 / R : 1.0 / R;
      break;
    }
    case ShapeKind::ellipse: {
      const double a = params_[0];
      const double b = params_[1];
      const double theta = ellipse_->theta_of(p.s);
      const double v = ellipse_->speed(theta);
      p.x = Point(a * std::cos(theta), b * std::sin(theta));
      p.tangent = Point(-a * std::sin(theta), b * std::cos(theta)) / v;
      p.normal = perp_right(p.tangent);
      p.curvature = a * b / (v * v * v);
      break;
    }
    case ShapeKind::rounded_polygon: {
      const double rho = params_[0];
      const std::size_t n = polygon_.size();
      double remaining = p.s;
      for (std::size_t i = 0; i < n; ++i) {
        const Point& v0 = polygon_[i];
        const Point& v1 = polygon_[(i + 1) % n];
        const Point& v2 = polygon_[(i + 2) % n];
        const double len = (v1 - v0).norm();
        const Point dir = (v1 - v0) / len;
        const Point nrm = perp_right(dir);
        if (remaining <= len) {
          p.x = v0 + rho * nrm + remaining * dir;
          p.tangent = dir;
          p.normal = nrm;
          p.curvature = 0.0;
          return p;
        }
        remaining -= len;
        const Point next_dir = (v2 - v1).normalized();
        const Point next_nrm = perp_right(next_dir);
        const double a0 = std::atan2(nrm.y(), nrm.x());
        double sweep = std::atan2(next_nrm.y(), next_nrm.x()) - a0;
        if (sweep <= 0.0) sweep += kTwoPi;
        if (remaining <= rho * sweep || i + 1 == n) {
          const double ang = a0 + std::min(remaining / rho, sweep);
          const Point radial(std::cos(ang), std::sin(ang));
          p.x = v1 + rho * radial;
          p.normal = radial;
          p.tangent = Point(-radial.y(), radial.x());
          p.curvature = 1.0 / rho;
          return p;
        }
        remaining -= rho * sweep;
      }
      break;
    }
  }
  return p;
}

BoundaryPoint ExteriorBallDomain::boundary_point(int component, double s) const {
  BoundaryPoint p = canonical_point(component, s);
  const Eigen::Matrix2d Q = rotation(angle_);
  p.x = Q * p.x + offset_;
  p.tangent = Q * p.tangent;
  p.normal = Q * p.normal;
  return p;
}

std::vector<BoundaryPoint> ExteriorBallDomain::sample_boundary(double density) const {
  std::vector<BoundaryPoint> out;
  for (int c = 0; c < component_count(); ++c) {
    const double len = component_length(c);
    const int n = std::max(16, static_cast<int>(std::ceil(len * density)));
    for (int i = 0; i < n; ++i) out.push_back(boundary_point(c, len * i / n));
  }
  return out;
}

BoundaryPoint ExteriorBallDomain::project(const Point& x) const {
  const Point y = to_canonical(x);
  if (kind_ == ShapeKind::disk || kind_ == ShapeKind::annulus) {
    const double r = y.norm();
    const double theta = r > 0.0 ? std::atan2(y.y(), y.x()) : 0.0;
    if (kind_ == ShapeKind::disk) return boundary_point(0, theta * params_[0]);
    if (std::abs(r - params_[1]) <= std::abs(r - params_[0])) return boundary_point(0, theta * params_[1]);
    return boundary_point(1, -theta * params_[0]);
  }
  // Coarse scan, then refinement around the closest sample.
  const double len = component_length(0);
  const int n = std::max(1024, static_cast<int>(std::ceil(len * 256.0)));
  double best_s = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = len * i / n;
    const double d = (canonical_point(0, s).x - y).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  double lo = best_s - len / n;
  double hi = best_s + len / n;
  // The tangential component of x(s) - y vanishes at the foot point and
  // changes sign across it.
  auto slope = [&](double s) {
    const BoundaryPoint p = canonical_point(0, s);
    return (p.x - y).dot(p.tangent);
  };
  if (slope(lo) < 0.0 && slope(hi) > 0.0) {
    for (int it = 0; it < 100 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (slope(mid) < 0.0) lo = mid; else hi = mid;
    }
    return boundary_point(0, 0.5 * (lo + hi));
  }
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto dist = [&](double s) { return (canonical_point(0, s).x - y).squaredNorm(); };
  double c = hi - phi * (hi - lo);
  double d = lo + phi * (hi - lo);
  double fc = dist(c);
  double fd = dist(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - phi * (hi - lo);
      fc = dist(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + phi * (hi - lo);
      fd = dist(d);
    }
  }
  return boundary_point(0, 0.5 * (lo + hi));
}

bool ExteriorBallDomain::canonical_contains(const Point& y) const {
  switch (kind_) {
    case ShapeKind::disk: return y.norm() < params_[0];
    case ShapeKind::annulus: {
      const double r = y.norm();
      return r > params_[0] && r < params_[1];
    }
    case ShapeKind::ellipse: {
      const double u = y.x() / params_[0];
      const double v = y.y() / params_[1];
      return u * u + v * v < 1.0;
    }
    case ShapeKind::rounded_polygon: {
      const std::size_t n = polygon_.size();
      bool inside = true;
      double dist = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const Point& a = polygon_[i];
        const Point& b = polygon_[(i + 1) % n];
        if (cross(b - a, y - a) < 0.0) inside = false;
        dist = std::min(dist, segment_distance(y, a, b));
      }
      return inside || dist < params_[0];
    }
  }
  return false;
}

bool ExteriorBallDomain::contains(const Point& x) const { return canonical_contains(to_canonical(x)); }

double ExteriorBallDomain::admissible_radius(const BoundaryPoint& p) {
  if (p.curvature > 1e-12) return 1.0 / p.curvature;
  if (p.curvature < -1e-12) return 0.5 / -p.curvature;
  return std::numeric_limits<double>::infinity();
}

double ExteriorBallDomain::diameter() const {
  switch (kind_) {
    case ShapeKind::disk: return 2.0 * params_[0];
    case ShapeKind::annulus: return 2.0 * params_[1];
    case ShapeKind::ellipse: return 2.0 * std::max(params_[0], params_[1]);
    case ShapeKind::rounded_polygon: {
      double best = 0.0;
      for (const auto& a : polygon_)
        for (const auto& b : polygon_) best = std::max(best, (a - b).norm());
      return best + 2.0 * params_[0];
    }
  }
  return 0.0;
}

double ExteriorBallDomain::area() const {
  switch (kind_) {
    case ShapeKind::disk: return std::numbers::pi * params_[0] * params_[0];
    case ShapeKind::annulus:
      return std::numbers::pi * (params_[1] * params_[1] - params_[0] * params_[0]);
    case ShapeKind::ellipse: return std::numbers::pi * params_[0] * params_[1];
    case ShapeKind::rounded_polygon: {
      double twice = 0.0;
      double perimeter = 0.0;
      for (std::size_t i = 0; i < polygon_.size(); ++i) {
        const Point& a = polygon_[i];
        const Point& b = polygon_[(i + 1) % polygon_.size()];
        twice += cross(a, b);
        perimeter += (b - a).norm();
      }
      const double rho = params_[0];
      return 0.5 * twice + perimeter * rho + std::numbers::pi * rho * rho;
    }
  }
  return 0.0;
}

Point ExteriorBallDomain::star_center() const {
  Point c = Point::Zero();
  if (kind_ == ShapeKind::rounded_polygon) {
    for (const auto& v : polygon_) c += v;
    c /= static_cast<double>(polygon_.size());
  }
  return to_global(c);
}

// Exterior ball -------------------------------------------------------------------

ExteriorBall exterior_ball_center(const ExteriorBallDomain& dom, const Point& x0, double on_boundary_tol) {
  const BoundaryPoint bp = dom.project(x0);
  if ((bp.x - x0).norm() > on_boundary_tol * std::max(1.0, dom.diameter())) {
    fail(ErrorKind::precondition, "point (" + format_double(x0.x()) + ", " + format_double(x0.y()) +
                                      ") is not on the boundary");
  }
  ExteriorBall ball;
  ball.x0 = bp;
  ball.r0 = dom.r0();
  ball.center = bp.x + ball.r0 * bp.normal;
  ball.frame.center = ball.center;
  ball.frame.rotation.row(0) = -bp.tangent.transpose();
  ball.frame.rotation.row(1) = bp.normal.transpose();

  auto witness = [](const Point& w) {
    return "witness (" + format_double(w.x()) + ", " + format_double(w.y()) + ")";
  };
  if (dom.contains(ball.center)) fail(ErrorKind::exterior_ball_violation, "ball center inside domain, " + witness(ball.center));
  for (const BoundaryPoint& p : dom.sample_boundary()) {
    const double d = (p.x - ball.center).norm();
    const bool inside = d < ball.r0 * (1.0 - 1e-10);
    const bool extra_contact = d <= ball.r0 * (1.0 + 1e-9) && (p.x - bp.x).norm() > 1e-3 * ball.r0;
    if (inside || extra_contact) fail(ErrorKind::exterior_ball_violation, "ball meets the domain away from x0, " + witness(p.x));
  }
  return ball;
}

MstarResult compute_Mstar(const ExteriorBallDomain& dom, const ExteriorBall& ball, double patch_radius) {
  if (!(patch_radius > 0.0)) fail(ErrorKind::precondition, "patch radius must be positive");
  const double step = 1.0 / kBoundaryDensity;
  const double len = dom.component_length(ball.x0.component);

  auto attempt = [&](double patch) -> std::optional<double> {
    const double cap = 1e6 * (ball.r0 + patch);
    double best = 0.0;
    for (int dir : {1, -1}) {
      for (int k = 1; k * step < 0.5 * len; ++k) {
        const BoundaryPoint p = dom.boundary_point(ball.x0.component, ball.x0.s + dir * k * step);
        const double num = (p.x - ball.x0.x).squaredNorm();
        if (std::sqrt(num) > patch) break;
        const double gap = ball.frame.to_local(p.x).norm() - ball.r0;
        if (!(gap > 0.0) || num / gap > cap) return std::nullopt;
        best = std::max(best, num / gap);
      }
    }
    return best;
  };

  double patch = patch_radius;
  while (patch >= 1e-4 * ball.r0) {
    if (const auto best = attempt(patch); best && *best > 0.0) {
      return {kMstarSafety * *best, *best, patch};
    }
    patch *= 0.5;
  }
  fail(ErrorKind::geometric_degeneracy, "distance ratio diverges at every patch size");
}

// Local graph ---------------------------------------------------------------------

LocalGraph::LocalGraph(const ExteriorBallDomain& dom, ExteriorBall ball) : dom_(dom), ball_(std::move(ball)) {}

double LocalGraph::arc_param(double xi) const {
  // xi decreases along +s.
  double lo = -s_back_;
  double hi = s_fwd_;
  for (int it = 0; it < 90; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double x = ball_.frame.to_local(dom_.boundary_point(ball_.x0.component, ball_.x0.s + mid).x).x();
    if (x > xi) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double LocalGraph::f(double xi) const {
  const double sigma = arc_param(xi);
  return ball_.frame.to_local(dom_.boundary_point(ball_.x0.component, ball_.x0.s + sigma).x).y();
}

double LocalGraph::df(double xi) const {
  const double sigma = arc_param(xi);
  const Point t = ball_.frame.vector_to_local(dom_.boundary_point(ball_.x0.component, ball_.x0.s + sigma).tangent);
  return t.y() / t.x();
}

bool LocalGraph::in_omega_plus(const Point& local, double width, double depth) const {
  if (!(std::abs(local.x()) < width)) return false;
  const double top = f(local.x());
  return local.y() < top && local.y() > top - depth;
}

bool LocalGraph::in_omega_minus(const Point& local) const {
  if (!(std::abs(local.x()) < L_)) return false;
  const double bottom = f(local.x());
  return local.y() > bottom && local.y() < bottom + L_d_;
}

LocalGraph local_graph(const ExteriorBallDomain& dom, const Point& x0, double max_patch) {
  ExteriorBall ball = exterior_ball_center(dom, x0);
  if (!(max_patch > 0.0)) max_patch = ball.r0;
  LocalGraph g(dom, ball);

  const double step = 1.0 / kBoundaryDensity;
  const double len = dom.component_length(ball.x0.component);
  double reach[2] = {0.0, 0.0};  // |xi| reached forward / backward
  double arc[2] = {0.0, 0.0};
  for (int side = 0; side < 2; ++side) {
    const int dir = side == 0 ? 1 : -1;
    for (int k = 1; k * step < 0.45 * len; ++k) {
      const BoundaryPoint p = dom.boundary_point(ball.x0.component, ball.x0.s + dir * k * step);
      const Point y = ball.frame.to_local(p.x);
      const Point t = ball.frame.vector_to_local(p.tangent);
      const bool monotone = t.x() < 0.0 && std::abs(t.y()) <= std::abs(t.x());
      if (!monotone || std::abs(y.x()) > max_patch) break;
      reach[side] = std::abs(y.x());
      arc[side] = k * step;
    }
  }
  g.s_fwd_ = arc[0];
  g.s_back_ = arc[1];
  g.L_ = std::min({reach[0], reach[1], max_patch});
  if (!(g.L_ > 1e-6 * ball.r0)) fail(ErrorKind::patch_too_small, "boundary is not a graph on any usable patch");

  double sup_offset = 0.0;
  double sup_slope = 0.0;
  for (double xi : linspace(-g.L_, g.L_, 201)) {
    sup_offset = std::max(sup_offset, std::abs(g.f(xi) + ball.r0));
    sup_slope = std::max(sup_slope, std::abs(g.df(xi)));
  }
  g.N_ = sup_offset + sup_slope;

  double depth = g.L_;
  const auto xis = linspace(-g.L_ * (1.0 - 1e-9), g.L_ * (1.0 - 1e-9), 41);
  std::vector<double> tops;
  for (double xi : xis) tops.push_back(g.f(xi));
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i < xis.size() && ok; ++i) {
      for (int j = 1; j <= 20 && ok; ++j) {
        const double t = depth * j / 20.0;
        ok = dom.contains(ball.frame.to_global({xis[i], tops[i] - t})) &&
             !dom.contains(ball.frame.to_global({xis[i], tops[i] + t}));
      }
    }
    if (ok) break;
    depth *= 0.5;
    if (depth < 1e-6 * g.L_) fail(ErrorKind::patch_too_small, "no strip around the graph fits the domain");
  }
  g.L_d_ = depth;
  return g;
}

}  // namespace lipbarrier
