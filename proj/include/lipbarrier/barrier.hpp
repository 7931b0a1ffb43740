#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lipbarrier/boundary_data.hpp"
#include "lipbarrier/geometry.hpp"
#include "lipbarrier/growth.hpp"

namespace lipbarrier {

/// Radial barrier outside B_{r0}(0): b(r) = q / (r^{d-1} - q) and
/// omega(x) = integral of b from r0 to |x|. b solves the radial flux
/// equation of F'(s) = s/(1+s) with flux q.
class PrototypeBarrier {
 public:
  /// Requires r0 > 0, d >= 2 and 0 <= q < r0^{d-1}.
  PrototypeBarrier(double q, double r0, int d = 2);
  PrototypeBarrier() : PrototypeBarrier(0.0, 1.0, 2) {}

  double q() const { return q_; }
  double r0() const { return r0_; }
  int d() const { return d_; }

  double b(double r) const;
  double db(double r) const;
  /// Closed form for d = 2, log-substituted quadrature otherwise.
  double omega(double r) const;
  double omega(const Point& x) const { return omega(x.norm()); }
  /// Direct adaptive quadrature of b over [r0, r], any d.
  double omega_quadrature(double r) const;
  /// Delta omega = b' + (d-1) b / r, simplified to -(d-1) q^2 / (r (r^{d-1}-q)^2).
  double laplacian(double r) const;

 private:
  double q_;
  double r0_;
  int d_;
};

/// Single sample of the flux and superharmonicity checks.
struct PrototypeCheck {
  bool passed = true;
  double worst_flux_residual = 0.0;  ///< max |F'(b(r)) r^{d-1} - q|
  double max_laplacian = -std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
};

PrototypeCheck verify_prototype_pde(const PrototypeBarrier& proto, const std::vector<double>& radii,
                                    double flux_tol = 1e-12);

enum class BarrierSign { upper, lower };

/// v = +/- omega(x) + k.x + c in the exterior-ball frame.
struct TrueBarrier {
  PrototypeBarrier proto;
  Eigen::Vector2d k = Eigen::Vector2d::Zero();
  double c = 0.0;
  BarrierSign sign = BarrierSign::upper;

  double value(const Point& local) const;
  Eigen::Vector2d gradient(const Point& local) const;
};

struct BarrierConstants {
  double K = 0.0;
  double lambda0 = 0.0;
  double delta_growth = 0.5;
  double Mstar = 0.0;
  double u0_norm_1inf = 0.0;
  double u0_sup = 0.0;
  double r0 = 0.0;
  int d = 2;

  double M1 = 0.0;
  double M2 = 0.0;
  double M = 0.0;
  double delta_max = 0.0;
  double r_max = 0.0;

  // Filled by build_barrier_pair.
  double Cstar = 0.0;
  double eta = 0.0;
  double delta_ring = 0.0;
  double q = 0.0;
};

BarrierConstants compute_constants(double K, double lambda0, double delta_growth, double Mstar, double u0_norm_1inf,
                                   double r0, int d = 2);

struct LCheck {
  double L = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double scale = 0.0;
  bool nonpositive_da = false;  ///< a'_lambda(|grad v|) <= 0
  bool holds = false;
  /// Intermediate inequality of the active sign case.
  double bracket = 0.0;
  double bracket_bound = 0.0;
  bool bracket_holds = false;
};

/// Evaluates L(x) = -div(a_lambda(|grad v|) grad v) for an upper barrier.
/// Lower barriers are checked through the odd symmetry of the operator, by
/// the same formula with k replaced by -k. Throws a precondition error when
/// b(|x|) < M.
LCheck verify_supersolution_L(const RegularizedGrowth& rg, const TrueBarrier& tb, const Point& x, double M, double K);

/// Integral of b^q over [r0, r0 + eta] with q = (1-delta)^{d-1} r0^{d-1}.
double ring_integral(double delta, double r0, double eta, int d);

/// Largest dyadic delta in (0, delta_max) whose ring integral reaches target.
double choose_delta_ring(const BarrierConstants& bc, double r0, double eta, int d, double target);

/// Stage-tagged outcome of the barrier construction at one boundary point.
struct BarrierPair {
  explicit BarrierPair(LocalGraph g) : graph(std::move(g)) {}

  LocalGraph graph;
  BarrierConstants constants;
  TrueBarrier upper;
  TrueBarrier lower;
  double L_star = 0.0;  ///< half-width and depth of the verified patch
  double gradient_bound = 0.0;
  double L_min_observed = 0.0;
  double gamma_margin = 0.0;      ///< min of v - u0 over Gamma*
  double taylor_margin = 0.0;     ///< min of omega - ||u0||_{1,inf} |x - x0|^2 over Gamma*
  double outer_margin = 0.0;      ///< min of v - ||u0||_inf over the rest of the patch boundary
  bool verified = false;
  std::string failed_stage;

  const ExteriorBall& ball() const { return graph.ball(); }
  /// Membership in the patch (global coordinates).
  bool in_patch(const Point& x) const;
  double upper_value(const Point& x) const;
  double lower_value(const Point& x) const;
};

BarrierPair build_barrier_pair(const RegularizedGrowth& rg, const ExteriorBallDomain& dom, const BoundaryData& bd,
                               const BoundaryNorms& norms, const Point& x0);
BarrierPair build_barrier_pair(const RegularizedGrowth& rg, const ExteriorBallDomain& dom, const BoundaryData& bd,
                               const Point& x0);

/// max(|grad v_lower(x0)|, |grad v_upper(x0)|) = b(r0) + |k|.
double normal_derivative_bound(const BarrierPair& pair);

struct ProfileRow {
  double r = 0.0;
  double b = 0.0;
  double omega = 0.0;
  double v = 0.0;  ///< upper barrier along the ray through x0
};

/// Samples from r0 to r_max along the ray from the ball center through x0.
std::vector<ProfileRow> barrier_profile(const BarrierPair& pair, int n = 101);

}  // namespace lipbarrier
