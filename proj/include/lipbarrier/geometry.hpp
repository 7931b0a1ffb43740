#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace lipbarrier {

using Point = Eigen::Vector2d;

/// Boundary samples per unit arc length used by every sampled verification.
inline constexpr double kBoundaryDensity = 2048.0;

struct BoundaryPoint {
  Point x;
  Point tangent;  ///< unit, domain on the left
  Point normal;   ///< unit, outward
  double curvature = 0.0;  ///< > 0 where the domain is locally convex
  int component = 0;
  double s = 0.0;  ///< arc-length parameter on the component
};

enum class ShapeKind { disk, annulus, ellipse, rounded_polygon };

/// Bounded planar domain with a uniform exterior ball radius r0.
/// Shapes are defined in a canonical frame and mapped to the plane by a
/// rigid placement.
class ExteriorBallDomain {
 public:
  static ExteriorBallDomain disk(double R);
  static ExteriorBallDomain annulus(double r_in, double r_out);
  static ExteriorBallDomain ellipse(double a, double b);
  /// Minkowski sum of a convex counterclockwise polygon with a disk.
  static ExteriorBallDomain rounded_polygon(std::vector<Point> vertices, double radius);

  /// Rotates by angle (radians) about the canonical origin, then translates.
  ExteriorBallDomain placed(double angle, const Point& offset) const;
  /// Overrides the curvature-derived exterior ball radius.
  ExteriorBallDomain with_r0(double r0) const;

  ShapeKind kind() const { return kind_; }
  std::string shape_name() const;
  const std::vector<double>& parameters() const { return params_; }
  const std::vector<Point>& polygon() const { return polygon_; }
  double placement_angle() const { return angle_; }
  const Point& placement_offset() const { return offset_; }

  int component_count() const { return kind_ == ShapeKind::annulus ? 2 : 1; }
  double component_length(int component) const;
  BoundaryPoint boundary_point(int component, double s) const;
  /// Equispaced arc-length samples of every component.
  std::vector<BoundaryPoint> sample_boundary(double density = kBoundaryDensity) const;
  /// Nearest boundary point.
  BoundaryPoint project(const Point& x) const;

  /// Membership in the open domain.
  bool contains(const Point& x) const;

  /// Largest exterior ball radius admissible at one boundary point, from
  /// curvature: 1/kappa on convex arcs, 1/(2|kappa|) on concave arcs.
  static double admissible_radius(const BoundaryPoint& p);
  double r0() const { return r0_; }
  double diameter() const;
  double area() const;

  /// Center for ring meshing of star-shaped domains (global frame).
  Point star_center() const;

  Point to_global(const Point& canonical) const;
  Point to_canonical(const Point& x) const;

 private:
  struct EllipseTable;

  ExteriorBallDomain() = default;
  BoundaryPoint canonical_point(int component, double s) const;
  bool canonical_contains(const Point& y) const;
  double default_r0() const;

  ShapeKind kind_ = ShapeKind::disk;
  std::vector<double> params_;
  std::vector<Point> polygon_;
  std::shared_ptr<const EllipseTable> ellipse_;
  double r0_ = 0.0;
  double angle_ = 0.0;
  Point offset_ = Point::Zero();
};

/// Rigid frame in which the exterior ball at x0 is B_{r0}(0) and x0 sits at
/// (0, -r0); the domain lies locally below the boundary graph.
struct LocalFrame {
  Point center = Point::Zero();
  Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();

  Point to_local(const Point& x) const { return rotation * (x - center); }
  Point to_global(const Point& y) const { return rotation.transpose() * y + center; }
  Eigen::Vector2d vector_to_local(const Eigen::Vector2d& v) const { return rotation * v; }
  Eigen::Vector2d vector_to_global(const Eigen::Vector2d& v) const { return rotation.transpose() * v; }
};

struct ExteriorBall {
  BoundaryPoint x0;
  Point center;
  double r0 = 0.0;
  LocalFrame frame;
};

/// Exterior ball at the boundary point nearest to x0, sample-verified
/// against every boundary component. Throws a precondition error when x0 is
/// farther than on_boundary_tol from the boundary and an
/// exterior-ball-violation error with a witness point otherwise.
ExteriorBall exterior_ball_center(const ExteriorBallDomain& dom, const Point& x0, double on_boundary_tol = 1e-8);

struct MstarResult {
  double Mstar = 0.0;      ///< inflated by kMstarSafety
  double raw_max = 0.0;    ///< sampled maximum of |x-x0|^2 / (|x| - r0)
  double patch_radius = 0.0;
};

inline constexpr double kMstarSafety = 1.1;

/// Distance constant over the boundary arc through x0 that stays within
/// patch_radius of x0 (local frame of the exterior ball).
MstarResult compute_Mstar(const ExteriorBallDomain& dom, const ExteriorBall& ball, double patch_radius);

/// Local graph representation x_2 = f(x_1) of the boundary near x0 in the
/// exterior-ball frame.
class LocalGraph {
 public:
  const ExteriorBall& ball() const { return ball_; }
  const LocalFrame& frame() const { return ball_.frame; }
  double r0() const { return ball_.r0; }
  double L() const { return L_; }
  double L_d() const { return L_d_; }
  double N() const { return N_; }

  double f(double xi) const;
  double df(double xi) const;
  /// Boundary point above xi, local coordinates.
  Point gamma(double xi) const { return {xi, f(xi)}; }

  bool in_omega_plus(const Point& local, double width, double depth) const;
  bool in_omega_plus(const Point& local) const { return in_omega_plus(local, L_, L_d_); }
  bool in_omega_minus(const Point& local) const;

  friend LocalGraph local_graph(const ExteriorBallDomain& dom, const Point& x0, double max_patch);

 private:
  LocalGraph(const ExteriorBallDomain& dom, ExteriorBall ball);
  double arc_param(double xi) const;

  ExteriorBallDomain dom_;
  ExteriorBall ball_;
  double s_fwd_ = 0.0;   ///< arc offset reached in the +s direction (xi < 0)
  double s_back_ = 0.0;  ///< arc offset reached in the -s direction (xi > 0)
  double L_ = 0.0;
  double L_d_ = 0.0;
  double N_ = 0.0;
};

/// Builds the local graph with |f'| <= 1 on (-L, L), L <= max_patch
/// (default r0), and the largest dyadic fraction L_d of L for which the
/// strips below/above the graph are sampled inside/outside the domain.
LocalGraph local_graph(const ExteriorBallDomain& dom, const Point& x0, double max_patch = 0.0);

}  // namespace lipbarrier
