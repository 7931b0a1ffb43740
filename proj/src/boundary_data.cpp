#include "lipbarrier/boundary_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "lipbarrier/error.hpp"

namespace lipbarrier {

BoundaryData::BoundaryData(std::string kind, ValueFn value, GradientFn gradient, HessianFn hessian)
    : kind_(std::move(kind)), value_(std::move(value)), gradient_(std::move(gradient)), hessian_(std::move(hessian)) {}

BoundaryData zero_data() {
  return {"zero", [](const Point&) { return 0.0; }, [](const Point&) { return Eigen::Vector2d::Zero().eval(); },
          [](const Point&) { return Eigen::Matrix2d::Zero().eval(); }};
}

BoundaryData constant_data(double c) {
  return {"constant", [c](const Point&) { return c; }, [](const Point&) { return Eigen::Vector2d::Zero().eval(); },
          [](const Point&) { return Eigen::Matrix2d::Zero().eval(); }};
}

BoundaryData affine_data(const Eigen::Vector2d& k, double c) {
  return {"affine", [k, c](const Point& x) { return k.dot(x) + c; }, [k](const Point&) { return k; },
          [](const Point&) { return Eigen::Matrix2d::Zero().eval(); }};
}

BoundaryData trig_trace_data(double amplitude, double m, double phase, double ell) {
  if (!(ell > 0.0)) fail(ErrorKind::config, "trig_trace length scale must be positive");
  const double w = m / ell;
  return {"trig_trace",
          [=](const Point& x) { return amplitude * std::sin(w * x.x() + phase) * std::cos(w * x.y()); },
          [=](const Point& x) {
            const double a = w * x.x() + phase;
            const double b = w * x.y();
            return Eigen::Vector2d(amplitude * w * std::cos(a) * std::cos(b),
                                   -amplitude * w * std::sin(a) * std::sin(b));
          },
          [=](const Point& x) {
            const double a = w * x.x() + phase;
            const double b = w * x.y();
            const double diag = -amplitude * w * w * std::sin(a) * std::cos(b);
            const double off = -amplitude * w * w * std::cos(a) * std::sin(b);
            Eigen::Matrix2d H;
            H << diag, off, off, diag;
            return H;
          }};
}

BoundaryData log_radial_data(double r_in, double r_out, double u_in, double u_out, const Point& center) {
  if (!(r_in > 0.0 && r_out > r_in)) fail(ErrorKind::config, "log_radial needs 0 < r_in < r_out");
  const double alpha = (u_out - u_in) / std::log(r_out / r_in);
  return {"log_radial",
          [=](const Point& x) { return u_in + alpha * std::log((x - center).norm() / r_in); },
          [=](const Point& x) {
            const Point y = x - center;
            return Eigen::Vector2d(alpha * y / y.squaredNorm());
          },
          [=](const Point& x) {
            const Point y = x - center;
            const double r2 = y.squaredNorm();
            return Eigen::Matrix2d(alpha * (Eigen::Matrix2d::Identity() / r2 - 2.0 * y * y.transpose() / (r2 * r2)));
          }};
}

std::vector<Point> closure_samples(const ExteriorBallDomain& dom, int grid) {
  const auto boundary = dom.sample_boundary(std::max(16.0, grid / std::max(1.0, dom.diameter())));
  double lo_x = std::numeric_limits<double>::infinity();
  double lo_y = lo_x;
  double hi_x = -lo_x;
  double hi_y = -lo_x;
  std::vector<Point> out;
  for (const auto& p : boundary) {
    lo_x = std::min(lo_x, p.x.x());
    hi_x = std::max(hi_x, p.x.x());
    lo_y = std::min(lo_y, p.x.y());
    hi_y = std::max(hi_y, p.x.y());
    out.push_back(p.x);
  }
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Point x(lo_x + (hi_x - lo_x) * (i + 0.5) / grid, lo_y + (hi_y - lo_y) * (j + 0.5) / grid);
      if (dom.contains(x)) out.push_back(x);
    }
  }
  return out;
}

BoundaryNorms estimate_norms(const BoundaryData& bd, const ExteriorBallDomain& dom, int grid) {
  BoundaryNorms n;
  for (const Point& x : closure_samples(dom, grid)) {
    n.sup = std::max(n.sup, std::abs(bd.value(x)));
    n.grad_sup = std::max(n.grad_sup, bd.gradient(x).norm());
    // Spectral norm of the symmetric Hessian.
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(bd.hessian(x), Eigen::EigenvaluesOnly);
    n.grad_lip = std::max(n.grad_lip, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  return n;
}

double gradient_mismatch(const BoundaryData& bd, const std::vector<Point>& samples) {
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (const Point& x : samples) {
    const Eigen::Vector2d ex(h, 0.0);
    const Eigen::Vector2d ey(0.0, h);
    const Eigen::Vector2d fd((bd.value(x + ex) - bd.value(x - ex)) / (2 * h),
                             (bd.value(x + ey) - bd.value(x - ey)) / (2 * h));
    const Eigen::Vector2d g = bd.gradient(x);
    worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
  }
  return worst;
}

}  // namespace lipbarrier
