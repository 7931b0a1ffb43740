#include "lipbarrier/solver.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lipbarrier/error.hpp"
#include "lipbarrier/numerics.hpp"

namespace lipbarrier {

namespace {

using GradientOperator = Eigen::Matrix<double, 2, 3>;

struct Elements {
  std::vector<double> area;
  std::vector<GradientOperator> D;  // columns: gradients of the hat functions
};

Elements precompute(const Mesh& mesh) {
  Elements e;
  const auto m = static_cast<std::size_t>(mesh.triangle_count());
  e.area.resize(m);
  e.D.resize(m);
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Point p0 = mesh.vertex(mesh.F(t, 0));
    const Point p1 = mesh.vertex(mesh.F(t, 1));
    const Point p2 = mesh.vertex(mesh.F(t, 2));
    const double A = mesh.signed_area(t);
    if (!(A > 0.0)) fail(ErrorKind::meshing, "inverted or degenerate triangle " + std::to_string(t));
    GradientOperator D;
    D.col(0) = Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) / (2 * A);
    D.col(1) = Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) / (2 * A);
    D.col(2) = Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x()) / (2 * A);
    e.area[static_cast<std::size_t>(t)] = A;
    e.D[static_cast<std::size_t>(t)] = D;
  }
  return e;
}

Eigen::Vector3d local_values(const Mesh& mesh, Eigen::Index t, const Eigen::VectorXd& u) {
  return {u(mesh.F(t, 0)), u(mesh.F(t, 1)), u(mesh.F(t, 2))};
}

struct Assembly {
  double energy = 0.0;
  Eigen::VectorXd gradient;
  Eigen::SparseMatrix<double> hessian;  // interior block
};

// Element-parallel evaluation into per-element slots, then an ordered
// reduction so results do not depend on the worker count.
Assembly assemble(const RegularizedGrowth& rg, const Mesh& mesh, const Elements& el, const Eigen::VectorXd& u,
                  const std::vector<Eigen::Index>& interior_index, Eigen::Index interior_count, bool with_hessian) {
  const auto m = static_cast<std::size_t>(mesh.triangle_count());
  std::vector<double> energy(m);
  std::vector<Eigen::Vector3d> grad(m);
  std::vector<Eigen::Matrix3d> hess(with_hessian ? m : 0);

  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const GradientOperator& D = el.D[t];
      const double A = el.area[t];
      const Eigen::Vector2d g = D * local_values(mesh, static_cast<Eigen::Index>(t), u);
      const double s = g.norm();
      energy[t] = A * rg.F_mu(s);
      const double c1 = s > 0.0 ? rg.a(s) + rg.mu() : rg.ddF_mu(0.0);
      grad[t] = A * c1 * D.transpose() * g;
      if (with_hessian) {
        Eigen::Matrix2d H;
        if (s > 0.0) {
          const Eigen::Vector2d n = g / s;
          const Eigen::Matrix2d P = n * n.transpose();
          H = c1 * (Eigen::Matrix2d::Identity() - P) + rg.ddF_mu(s) * P;
        } else {
          H = c1 * Eigen::Matrix2d::Identity();
        }
        hess[t] = A * D.transpose() * H * D;
      }
    }
  });

  Assembly out;
  out.gradient = Eigen::VectorXd::Zero(mesh.vertex_count());
  std::vector<Eigen::Triplet<double>> triplets;
  if (with_hessian) triplets.reserve(9 * m);
  for (std::size_t t = 0; t < m; ++t) {
    out.energy += energy[t];
    for (int i = 0; i < 3; ++i) {
      const Eigen::Index vi = mesh.F(static_cast<Eigen::Index>(t), i);
      out.gradient(vi) += grad[t](i);
      if (!with_hessian || interior_index[vi] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const Eigen::Index vj = mesh.F(static_cast<Eigen::Index>(t), j);
        if (interior_index[vj] >= 0) triplets.emplace_back(interior_index[vi], interior_index[vj], hess[t](i, j));
      }
    }
  }
  if (with_hessian) {
    out.hessian.resize(interior_count, interior_count);
    out.hessian.setFromTriplets(triplets.begin(), triplets.end());
  }
  return out;
}

struct NewtonResult {
  Eigen::VectorXd u;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

NewtonResult newton(const RegularizedGrowth& rg, const Mesh& mesh, const Elements& el, Eigen::VectorXd u,
                    const SolverOptions& options) {
  std::vector<Eigen::Index> interior_index(static_cast<std::size_t>(mesh.vertex_count()), -1);
  std::vector<Eigen::Index> interior;
  for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
    if (!mesh.boundary[i]) {
      interior_index[i] = static_cast<Eigen::Index>(interior.size());
      interior.push_back(i);
    }
  }
  const auto n = static_cast<Eigen::Index>(interior.size());

  NewtonResult out;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    Assembly a = assemble(rg, mesh, el, u, interior_index, n, true);
    Eigen::VectorXd g(n);
    for (Eigen::Index k = 0; k < n; ++k) g(k) = a.gradient(interior[k]);
    out.energy = a.energy;
    out.residual = n > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
    out.history.push_back(a.energy);
    out.iterations = it;
    if (n == 0 || (last_step <= options.tol && out.residual <= options.tol * (1.0 + std::abs(a.energy)))) break;
    if (it >= options.max_iterations) {
      fail(ErrorKind::budget, "Newton did not converge in " + std::to_string(options.max_iterations) +
                                  " iterations (energy " + format_double(a.energy) + ", residual " +
                                  format_double(out.residual) + ")");
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a.hessian);
    Eigen::VectorXd d;
    bool newton_step = ldlt.info() == Eigen::Success;
    if (newton_step) {
      d = ldlt.solve(-g);
      newton_step = ldlt.info() == Eigen::Success && d.allFinite() && d.dot(g) < 0.0;
    }
    if (!newton_step) d = -g;

    auto trial = [&](double t) {
      Eigen::VectorXd v = u;
      for (Eigen::Index k = 0; k < n; ++k) v(interior[k]) += t * d(k);
      return v;
    };
    const double dmax = d.cwiseAbs().maxCoeff();
    if (newton_step && dmax <= options.tol) {
      // Below the tolerance the energy change is at roundoff level; take the full step.
      u = trial(1.0);
      last_step = dmax;
      continue;
    }
    const double slope = g.dot(d);
    double t = 1.0;
    Eigen::VectorXd next = trial(t);
    double e_next = discrete_energy(rg, mesh, next);
    while (!(e_next <= a.energy + 1e-4 * t * slope)) {
      t *= 0.5;
      if (t < 1e-14) {
        if (out.residual <= options.tol * (1.0 + std::abs(a.energy))) {
          out.u = std::move(u);
          return out;
        }
        fail(ErrorKind::solver_failure, "line search failed at iteration " + std::to_string(it) + " (energy " +
                                            format_double(a.energy) + ", residual " + format_double(out.residual) +
                                            ", direction " + (newton_step ? "newton" : "gradient") + ")");
      }
      next = trial(t);
      e_next = discrete_energy(rg, mesh, next);
    }
    u = std::move(next);
    last_step = t * dmax;
  }
  out.u = std::move(u);
  return out;
}

void fill_diagnostics(DiscreteSolution& sol, const Elements& el, const BoundaryData& bd) {
  const Mesh& mesh = sol.mesh;
  sol.gradients.resize(mesh.triangle_count(), 2);
  sol.gradient_norms.resize(mesh.triangle_count());
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Vector2d g = el.D[static_cast<std::size_t>(t)] * local_values(mesh, t, sol.u);
    sol.gradients.row(t) = g.transpose();
    sol.gradient_norms(t) = g.norm();
  }
  sol.sup_u = sol.u.cwiseAbs().maxCoeff();
  sol.sup_grad = sol.gradient_norms.size() > 0 ? sol.gradient_norms.maxCoeff() : 0.0;
  sol.boundary_trace_error = 0.0;
  for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
    if (mesh.boundary[i]) {
      sol.boundary_trace_error = std::max(sol.boundary_trace_error, std::abs(sol.u(i) - bd.value(mesh.vertex(i))));
    }
  }
}

}  // namespace

double discrete_energy(const RegularizedGrowth& rg, const Mesh& mesh, const Eigen::VectorXd& u) {
  const auto m = static_cast<std::size_t>(mesh.triangle_count());
  std::vector<double> energy(m);
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      const Point p0 = mesh.vertex(mesh.F(ti, 0));
      const Point p1 = mesh.vertex(mesh.F(ti, 1));
      const Point p2 = mesh.vertex(mesh.F(ti, 2));
      const double A = mesh.signed_area(ti);
      const Eigen::Vector3d v = local_values(mesh, ti, u);
      const Eigen::Vector2d g = (v(0) * Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) +
                                 v(1) * Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) +
                                 v(2) * Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x())) /
                                (2 * A);
      energy[t] = A * rg.F_mu(g.norm());
    }
  });
  double total = 0.0;
  for (double e : energy) total += e;
  return total;
}

DiscreteSolution minimize_energy(const RegularizedGrowth& rg, const Mesh& mesh, const BoundaryData& bd,
                                 const SolverOptions& options) {
  if (!(rg.mu() > 0.0)) fail(ErrorKind::precondition, "minimize_energy needs mu > 0");
  if (!rg.base().vanishing_slope_at_zero()) {
    fail(ErrorKind::config, "integrand '" + rg.base().name() + "' has F'(0+) != 0; a(s) = F'(s)/s is unbounded at 0");
  }
  const Elements el = precompute(mesh);

  Eigen::VectorXd start(mesh.vertex_count());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
    start(i) = bd.value(mesh.vertex(i));
    if (mesh.boundary[i]) {
      lo = std::min(lo, start(i));
      hi = std::max(hi, start(i));
    }
  }

  NewtonResult r = newton(rg, mesh, el, start, options);
  DiscreteSolution sol;
  sol.mesh = mesh;
  sol.u = std::move(r.u);
  sol.energy = r.energy;
  sol.residual = r.residual;
  sol.iterations = r.iterations;
  sol.energy_history = std::move(r.history);
  fill_diagnostics(sol, el, bd);

  if (options.check_uniqueness) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> dist(lo, hi > lo ? hi : lo + 1.0);
    Eigen::VectorXd other = start;
    for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
      if (!mesh.boundary[i]) other(i) = dist(rng);
    }
    const NewtonResult again = newton(rg, mesh, el, other, options);
    sol.uniqueness_gap = (again.u - sol.u).cwiseAbs().maxCoeff();
  }
  return sol;
}

double interpolate(const DiscreteSolution& sol, const Point& x) {
  const Mesh& mesh = sol.mesh;
  double best_min = -std::numeric_limits<double>::infinity();
  double best_value = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Point p0 = mesh.vertex(mesh.F(t, 0));
    const Point p1 = mesh.vertex(mesh.F(t, 1));
    const Point p2 = mesh.vertex(mesh.F(t, 2));
    const double A = mesh.signed_area(t);
    auto area = [](const Point& a, const Point& b, const Point& c) {
      return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    };
    const Eigen::Vector3d lam(area(x, p1, p2) / A, area(p0, x, p2) / A, area(p0, p1, x) / A);
    const double worst = lam.minCoeff();
    if (worst > best_min) {
      best_min = worst;
      best_value = lam.dot(local_values(mesh, t, sol.u));
      if (worst >= 0.0) break;
    }
  }
  return best_value;
}

// Radial oracle -------------------------------------------------------------------------

double RadialProfile::operator()(double radius) const {
  if (r.empty()) return 0.0;
  if (radius <= r.front()) return u.front();
  if (radius >= r.back()) return u.back();
  const auto it = std::upper_bound(r.begin(), r.end(), radius);
  const std::size_t i = static_cast<std::size_t>(it - r.begin()) - 1;
  const double h = r[i + 1] - r[i];
  const double t = (radius - r[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * u[i] + (t3 - 2 * t2 + t) * h * du[i] + (-2 * t3 + 3 * t2) * u[i + 1] +
         (t3 - t2) * h * du[i + 1];
}

RadialProfile radial_oracle(const RegularizedGrowth& rg, double r_in, double r_out, double u_in, double u_out, int d,
                            int grid) {
  if (!(r_in > 0.0 && r_out > r_in) || d < 2 || grid < 2) {
    fail(ErrorKind::precondition, "radial oracle needs 0 < r_in < r_out, d >= 2");
  }
  RadialProfile p;
  p.d = d;
  p.r = linspace(r_in, r_out, grid);
  const double gap = u_out - u_in;
  p.sign = gap >= 0.0 ? 1.0 : -1.0;
  if (gap == 0.0) {
    p.u.assign(p.r.size(), u_in);
    p.du.assign(p.r.size(), 0.0);
    return p;
  }

  auto slope = [&](double q, double r) { return inverse_dF(rg, q * std::pow(r, 1 - d)); };
  // Total rise for flux q; +inf when the flux exceeds the range of G.
  auto rise = [&](double q) {
    try {
      return integrate([&](double r) { return slope(q, r); }, r_in, r_out, 1e-11 * std::max(1.0, std::abs(gap))).value;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::range) throw;
      return std::numeric_limits<double>::infinity();
    }
  };
  const double target = std::abs(gap);
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; rise(hi) < target; ++i) {
    if (i > 2000) fail(ErrorKind::range, "radial oracle could not bracket the flux");
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rise(mid) < target) lo = mid; else hi = mid;
  }
  p.q = 0.5 * (lo + hi);

  p.u.resize(p.r.size());
  p.du.resize(p.r.size());
  p.u[0] = u_in;
  const double cell_tol = 1e-11 * std::max(1.0, std::abs(gap)) / static_cast<double>(grid - 1);
  for (std::size_t i = 0; i < p.r.size(); ++i) {
    p.du[i] = p.sign * slope(p.q, p.r[i]);
    if (i > 0) {
      p.u[i] = p.u[i - 1] +
               p.sign * integrate([&](double r) { return slope(p.q, r); }, p.r[i - 1], p.r[i], cell_tol).value;
    }
    const double flux = std::pow(p.r[i], d - 1) * rg.dF_mu(std::abs(p.du[i]));
    p.residual = std::max(p.residual, std::abs(flux - p.q) / std::max(1.0, p.q));
  }
  p.end_error = std::abs(p.u.back() - u_out);
  return p;
}

// Verifications -------------------------------------------------------------------------

PrincipleCheck verify_max_principle(const DiscreteSolution& sol, double u0_sup, double C) {
  PrincipleCheck out;
  out.observed = sol.sup_u;
  out.reference = u0_sup;
  out.slack = 1e-8 + C * sol.mesh.h;
  out.excess = out.observed - out.reference;
  out.passed = out.excess <= out.slack;
  return out;
}

PrincipleCheck verify_gradient_principle(const DiscreteSolution& sol, double C) {
  const Mesh& mesh = sol.mesh;
  double interior = 0.0;
  double boundary = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const bool touches = mesh.boundary[mesh.F(t, 0)] || mesh.boundary[mesh.F(t, 1)] || mesh.boundary[mesh.F(t, 2)];
    (touches ? boundary : interior) = std::max(touches ? boundary : interior, sol.gradient_norms(t));
  }
  PrincipleCheck out;
  out.observed = interior;
  out.reference = boundary;
  out.slack = C * std::sqrt(mesh.h) * std::max(1.0, boundary);
  out.excess = interior - boundary;
  out.passed = out.excess <= out.slack;
  return out;
}

Eigen::Index nearest_boundary_vertex(const Mesh& mesh, const Point& x) {
  Eigen::Index best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
    if (!mesh.boundary[i]) continue;
    const double d = (mesh.vertex(i) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best < 0) fail(ErrorKind::meshing, "mesh has no boundary vertices");
  return best;
}

SandwichCheck verify_sandwich(const DiscreteSolution& sol, const BarrierPair& pair, const BoundaryData& bd,
                              double u0_norm_1inf, double C) {
  const Mesh& mesh = sol.mesh;
  const LocalGraph& graph = pair.graph;
  const Point x0 = pair.ball().x0.x;
  const double ell = pair.L_star;

  SandwichCheck out;
  out.slack = C * mesh.h * u0_norm_1inf;
  out.upper_margin = std::numeric_limits<double>::infinity();
  out.lower_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
    const Point x = mesh.vertex(i);
    if ((x - x0).norm() > 3.0 * ell) continue;
    const Point y = graph.frame().to_local(x);
    bool inside = pair.in_patch(x);
    if (!inside && mesh.boundary[i] && std::abs(y.x()) < ell) inside = std::abs(y.y() - graph.f(y.x())) <= 1e-9;
    if (!inside) continue;
    ++out.nodes;
    const double up = pair.upper_value(x) - sol.u(i);
    const double low = sol.u(i) - pair.lower_value(x);
    if (std::min(up, low) < std::min(out.upper_margin, out.lower_margin)) out.witness = i;
    out.upper_margin = std::min(out.upper_margin, up);
    out.lower_margin = std::min(out.lower_margin, low);
  }
  const Eigen::Index touch = nearest_boundary_vertex(mesh, x0);
  out.touching_gap = std::abs(sol.u(touch) - bd.value(mesh.vertex(touch)));
  out.passed = out.nodes > 0 && out.upper_margin >= -out.slack && out.lower_margin >= -out.slack;
  return out;
}

double measured_normal_derivative(const DiscreteSolution& sol, const Point& x0, const Eigen::Vector2d& normal) {
  const Mesh& mesh = sol.mesh;
  const Eigen::Index v = nearest_boundary_vertex(mesh, x0);
  double best = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    if (mesh.F(t, 0) == v || mesh.F(t, 1) == v || mesh.F(t, 2) == v) {
      best = std::max(best, std::abs(sol.gradients.row(t).dot(normal.transpose())));
    }
  }
  return best;
}

// Closure and sweeps ---------------------------------------------------------------------

FixedPointResult lambda_fixed_point(const GrowthFunction& g, const Mesh& mesh, const BoundaryData& bd, double mu,
                                    double lambda_init, int max_rounds, const SolverOptions& options) {
  if (!(mu > 0.0)) fail(ErrorKind::precondition, "lambda fixed point needs mu > 0");
  FixedPointResult out;
  double lambda = std::max(lambda_init, g.lambda0());
  for (int round = 1; round <= max_rounds; ++round) {
    DiscreteSolution sol = minimize_energy(make_regularized(g, lambda, mu), mesh, bd, options);
    out.rounds = round;
    out.lambdas.push_back(lambda);
    out.sup_grads.push_back(sol.sup_grad);
    if (sol.sup_grad <= lambda) {
      out.closed = true;
      out.lambda_star = lambda;
      SolverOptions quick = options;
      quick.check_uniqueness = false;
      const DiscreteSolution again = minimize_energy(make_regularized(g, 2.0 * lambda, mu), mesh, bd, quick);
      out.resolve_change = (again.u - sol.u).cwiseAbs().maxCoeff();
      out.resolve_consistent = out.resolve_change <= 10.0 * options.tol;
      out.solution = std::move(sol);
      return out;
    }
    lambda = std::max({2.0 * sol.sup_grad, g.lambda0(), 1.5 * lambda});
    out.solution = std::move(sol);
  }
  return out;
}

double h1_distance(const Mesh& mesh, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Elements el = precompute(mesh);
  const Eigen::VectorXd e = a - b;
  double total = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Vector3d v = local_values(mesh, t, e);
    const auto ts = static_cast<std::size_t>(t);
    total += el.area[ts] * ((el.D[ts] * v).squaredNorm() + v.squaredNorm() / 3.0);
  }
  return std::sqrt(total);
}

MuSweep mu_sweep(const GrowthFunction& g, const Mesh& mesh, const BoundaryData& bd, double lambda,
                 const std::vector<double>& mus, const SolverOptions& options) {
  MuSweep out;
  out.mus = mus;
  SolverOptions quick = options;
  quick.check_uniqueness = false;
  std::optional<Eigen::VectorXd> previous;
  double area = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) area += mesh.signed_area(t);
  const double floor = 10.0 * options.tol * std::sqrt(area);
  for (double mu : mus) {
    if (!(mu > 0.0)) fail(ErrorKind::precondition, "mu sweep values must be positive");
    const DiscreteSolution sol = minimize_energy(make_regularized(g, lambda, mu), mesh, bd, quick);
    out.energies.push_back(sol.energy);
    if (previous) {
      out.distances.push_back(h1_distance(mesh, sol.u, *previous));
      const std::size_t k = out.distances.size();
      if (k >= 2 && out.distances[k - 1] > floor && out.distances[k - 1] > 1.1 * out.distances[k - 2]) {
        out.monotone = false;
      }
    }
    previous = sol.u;
  }
  return out;
}

}  // namespace lipbarrier
