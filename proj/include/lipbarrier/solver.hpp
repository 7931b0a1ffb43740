#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "lipbarrier/barrier.hpp"
#include "lipbarrier/boundary_data.hpp"
#include "lipbarrier/growth.hpp"
#include "lipbarrier/mesh.hpp"

namespace lipbarrier {

struct SolverOptions {
  double tol = 1e-9;
  int max_iterations = 200;
  /// Re-solve from a random interior start and compare.
  bool check_uniqueness = true;
  std::uint64_t seed = 0;
};

struct DiscreteSolution {
  Mesh mesh;
  Eigen::VectorXd u;
  Eigen::MatrixX2d gradients;  ///< one row per triangle
  Eigen::VectorXd gradient_norms;
  double energy = 0.0;
  double sup_u = 0.0;
  double sup_grad = 0.0;
  double boundary_trace_error = 0.0;
  double residual = 0.0;  ///< max interior energy-gradient entry
  int iterations = 0;
  std::vector<double> energy_history;
  /// Max-norm gap to the re-solve from a random start, when requested.
  std::optional<double> uniqueness_gap;
};

/// Damped Newton minimization of sum_T |T| F_{lambda,mu}(|grad u_T|) with
/// u = u0 at boundary vertices. Requires mu > 0 and F'(0+) = 0.
DiscreteSolution minimize_energy(const RegularizedGrowth& rg, const Mesh& mesh, const BoundaryData& bd,
                                 const SolverOptions& options = {});

/// Discrete energy of arbitrary nodal values.
double discrete_energy(const RegularizedGrowth& rg, const Mesh& mesh, const Eigen::VectorXd& u);

/// Value of the P1 interpolant at x (nearest triangle when x is outside).
double interpolate(const DiscreteSolution& sol, const Point& x);

struct RadialProfile {
  double q = 0.0;
  double sign = 1.0;
  int d = 2;
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  double residual = 0.0;  ///< max |r^{d-1} G(|u'|) - q| / max(1, q)
  double end_error = 0.0;

  /// Piecewise cubic Hermite evaluation.
  double operator()(double radius) const;
};

/// Radial minimizer on r_in < r < r_out with flux r^{d-1} G(u') = q,
/// G(s) = mu s + F'_lambda(s).
RadialProfile radial_oracle(const RegularizedGrowth& rg, double r_in, double r_out, double u_in, double u_out,
                            int d = 2, int grid = 2001);

struct PrincipleCheck {
  bool passed = false;
  double observed = 0.0;  ///< sup |u| or interior max gradient
  double reference = 0.0; ///< ||u0||_inf or boundary-adjacent max gradient
  double slack = 0.0;
  double excess = 0.0;    ///< observed - reference
};

/// ||u_h||_inf <= ||u0||_inf + 1e-8 + C h.
PrincipleCheck verify_max_principle(const DiscreteSolution& sol, double u0_sup, double C = 1.0);
/// Interior-element max |grad u| <= boundary-adjacent max + C h^{1/2} max(1, boundary max).
PrincipleCheck verify_gradient_principle(const DiscreteSolution& sol, double C = 1.0);

struct SandwichCheck {
  bool passed = false;
  std::size_t nodes = 0;
  double upper_margin = 0.0;  ///< min v - u_h
  double lower_margin = 0.0;  ///< min u_h - v_lower
  double slack = 0.0;
  Eigen::Index witness = -1;
  double touching_gap = 0.0;  ///< |u_h(x0) - u0(x0)| at the boundary vertex nearest x0
};

SandwichCheck verify_sandwich(const DiscreteSolution& sol, const BarrierPair& pair, const BoundaryData& bd,
                              double u0_norm_1inf, double C = 1.0);

/// Boundary vertex nearest to x.
Eigen::Index nearest_boundary_vertex(const Mesh& mesh, const Point& x);
/// max |grad u_T . n| over triangles incident to the boundary vertex nearest x0.
double measured_normal_derivative(const DiscreteSolution& sol, const Point& x0, const Eigen::Vector2d& normal);

struct FixedPointResult {
  bool closed = false;
  double lambda_star = 0.0;
  int rounds = 0;
  std::vector<double> lambdas;
  std::vector<double> sup_grads;
  double resolve_change = 0.0;  ///< max-norm change when re-solving at 2 lambda*
  bool resolve_consistent = false;
  std::optional<DiscreteSolution> solution;
};

/// lambda_{k+1} = max(2 ||grad u||_inf, lambda0, 1.5 lambda_k) until
/// ||grad u_lambda||_inf <= lambda.
FixedPointResult lambda_fixed_point(const GrowthFunction& g, const Mesh& mesh, const BoundaryData& bd, double mu,
                                    double lambda_init, int max_rounds, const SolverOptions& options = {});

struct MuSweep {
  std::vector<double> mus;
  std::vector<double> energies;
  std::vector<double> distances;  ///< W^{1,2} distance between consecutive solutions
  bool monotone = true;           ///< ratios <= 1.1 above the noise floor
};

MuSweep mu_sweep(const GrowthFunction& g, const Mesh& mesh, const BoundaryData& bd, double lambda,
                 const std::vector<double>& mus, const SolverOptions& options = {});

/// Discrete W^{1,2} distance (lumped mass for the L2 part).
double h1_distance(const Mesh& mesh, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace lipbarrier
