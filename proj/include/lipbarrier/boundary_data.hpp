#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "lipbarrier/geometry.hpp"

namespace lipbarrier {

/// C^{1,1} boundary datum u0, defined on the closure of the domain.
class BoundaryData {
 public:
  using ValueFn = std::function<double(const Point&)>;
  using GradientFn = std::function<Eigen::Vector2d(const Point&)>;
  using HessianFn = std::function<Eigen::Matrix2d(const Point&)>;

  BoundaryData(std::string kind, ValueFn value, GradientFn gradient, HessianFn hessian);

  const std::string& kind() const { return kind_; }
  double value(const Point& x) const { return value_(x); }
  Eigen::Vector2d gradient(const Point& x) const { return gradient_(x); }
  Eigen::Matrix2d hessian(const Point& x) const { return hessian_(x); }

 private:
  std::string kind_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

BoundaryData zero_data();
BoundaryData constant_data(double c);
BoundaryData affine_data(const Eigen::Vector2d& k, double c);
/// A sin(m x1/ell + phase) cos(m x2/ell).
BoundaryData trig_trace_data(double amplitude, double m = 2.0, double phase = 0.3, double ell = 1.0);
/// Radial harmonic interpolation between u_in on |x - center| = r_in and
/// u_out on |x - center| = r_out.
BoundaryData log_radial_data(double r_in, double r_out, double u_in, double u_out,
                             const Point& center = Point::Zero());

/// Sampled norms over the closure of a domain.
struct BoundaryNorms {
  double sup = 0.0;       ///< ||u0||_inf
  double grad_sup = 0.0;  ///< K = ||grad u0||_inf
  double grad_lip = 0.0;  ///< Lipschitz constant of grad u0 (sup of the Hessian norm)

  /// ||u0||_{1,inf} = sup + grad_sup + grad_lip.
  double norm_1inf() const { return sup + grad_sup + grad_lip; }
};

/// Evaluates on a grid x grid lattice over the bounding box (points inside
/// the domain) together with the boundary samples.
BoundaryNorms estimate_norms(const BoundaryData& bd, const ExteriorBallDomain& dom, int grid = 256);

/// Points of the closure used by the norm estimate.
std::vector<Point> closure_samples(const ExteriorBallDomain& dom, int grid = 256);

/// Largest relative mismatch between central differences (step 1e-6) and
/// the analytic gradient over the samples.
double gradient_mismatch(const BoundaryData& bd, const std::vector<Point>& samples);

}  // namespace lipbarrier
