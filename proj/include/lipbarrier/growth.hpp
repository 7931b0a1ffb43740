#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lipbarrier/numerics.hpp"

namespace lipbarrier {

/// Evaluators for a radial integrand F(|grad u|). Derivatives left empty are
/// synthesized by central differences with step max(1e-6, 1e-6 s).
struct GrowthEvaluators {
  ScalarFunction F;
  ScalarFunction dF;
  ScalarFunction ddF;
  /// Optional s F''(s) / F'(s), for integrands whose F' overflows long
  /// before the ratio does.
  ScalarFunction curvature;
};

/// Convex growth function F with the metadata the hypotheses refer to.
class GrowthFunction {
 public:
  GrowthFunction(std::string name, GrowthEvaluators evaluators, double delta_growth = 0.5);

  const std::string& name() const { return name_; }

  double F(double s) const;
  double dF(double s) const;
  double ddF(double s) const;
  /// s F''(s) / F'(s).
  double curvature(double s) const;

  /// a(s) = F'(s)/s.
  double a(double s) const;

  double delta_growth() const { return delta_growth_; }
  double lambda0() const { return lambda0_; }
  /// Scale at which the asymptotic regime starts; default grids are built
  /// relative to it.
  double tail_origin() const { return tail_origin_; }
  /// Largest s at which F itself is representable.
  double finite_limit() const { return finite_limit_; }
  /// True when F'(0+) = 0.
  bool vanishing_slope_at_zero() const;

  GrowthFunction with_lambda0(double lambda0) const;
  GrowthFunction with_delta(double delta) const;
  GrowthFunction with_tail_origin(double origin) const;
  GrowthFunction with_finite_limit(double limit) const;

 private:
  std::string name_;
  GrowthEvaluators eval_;
  double delta_growth_;
  double lambda0_ = 0.0;
  double tail_origin_ = 1.0;
  double finite_limit_ = std::numeric_limits<double>::infinity();
};

// Catalogue -----------------------------------------------------------------

GrowthFunction power_growth(double p, double delta_growth = 0.5);
/// t^p below t0 and t^{(p+q)/2 + (p-q)/2 sin log log log t} above, with
/// t0 = exp(exp(exp(pi/2))).
GrowthFunction oscillating_growth(double p, double q, double delta_growth = 0.5);
double oscillating_t0();
/// F(s) = s ln^alpha(e + s).
GrowthFunction eta_log_growth(double alpha, double delta_growth = 0.5);
/// F(s) = s e^s.
GrowthFunction eta_exp_growth(double delta_growth = 0.5);
/// F(s) = s exp(exp(s)).
GrowthFunction eta_double_exp_growth(double delta_growth = 0.5);
/// F(s) = s - ln(1 + s), so F'(s) = s / (1 + s).
GrowthFunction prototype_growth(double delta_growth = 0.5);

/// Representative entries of every family, with lambda0 already scanned.
std::vector<GrowthFunction> catalogue();

/// Builds a catalogue entry by kind name ("power", "oscillating", "eta_log",
/// "eta_exp", "eta_double_exp", "prototype"); parameters missing from the list take
/// their defaults. Throws a config error for unknown kinds.
struct GrowthParams {
  double p = 2.0;
  double q = 4.0;
  double alpha = 2.0;
  double delta_growth = 0.5;
};
GrowthFunction make_growth(const std::string& kind, const GrowthParams& params);

// Hypothesis checks ------------------------------------------------------------

struct A1Result {
  bool holds = false;
  double C1 = 0.0;
  double C2 = 0.0;
};

struct A2Result {
  double liminf_estimate = 0.0;
  bool holds = false;
  /// Smallest grid point after which s^{2-delta}F''/F' >= 1; empty when the
  /// ratio ends below 1.
  std::optional<double> lambda0_suggested;
};

/// Default tail grid: 512 log-spaced points on [1e-3, 1e8] * tail_origin.
std::vector<double> default_tail_grid(const GrowthFunction& g);
/// Default grid for the linear minorant: [0.1, 100] * tail_origin, clipped
/// to the representable range of F.
std::vector<double> default_a1_grid(const GrowthFunction& g);

inline constexpr double kHypothesisTolerance = 1e-3;

A1Result check_A1(const GrowthFunction& g, const std::vector<double>& grid);
A2Result check_A2(const GrowthFunction& g, double delta, const std::vector<double>& tail_grid);
A2Result check_A2_relaxed(const GrowthFunction& g, double delta, const std::vector<double>& tail_grid);

/// Returns g with lambda0 set from the (A2b) scan on its default tail grid
/// (0 when the ratio never settles above 1).
GrowthFunction with_scanned_lambda0(const GrowthFunction& g);

// Regularization -------------------------------------------------------------

/// F_lambda (quadratic continuation above lambda) and the uniformly convex
/// lift F_{lambda,mu}(s) = mu/2 s^2 + F_lambda(s).
class RegularizedGrowth {
 public:
  const GrowthFunction& base() const { return base_; }
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }

  double F(double s) const;
  double dF(double s) const;
  double ddF(double s) const;

  double F_mu(double s) const { return 0.5 * mu_ * s * s + F(s); }
  double dF_mu(double s) const { return mu_ * s + dF(s); }
  double ddF_mu(double s) const { return mu_ + ddF(s); }

  /// a_lambda(s) = F'_lambda(s)/s, continuously extended at 0.
  double a(double s) const;
  /// a'_lambda(s) = (F''_lambda(s) - F'_lambda(s)/s) / s.
  double da(double s) const;
  /// s F''_lambda(s) / F'_lambda(s).
  double curvature(double s) const;

  RegularizedGrowth with_mu(double mu) const;

  friend RegularizedGrowth make_regularized(const GrowthFunction& g, double lambda, double mu);

 private:
  RegularizedGrowth(GrowthFunction base, double lambda, double mu);

  GrowthFunction base_;
  double lambda_;
  double mu_;
  double F_at_lambda_;
  double dF_at_lambda_;
  double ddF_at_lambda_;
};

RegularizedGrowth make_regularized(const GrowthFunction& g, double lambda, double mu);

/// Solves mu s + F'_lambda(s) = y for s >= 0. Returns 0 when y is below
/// the range at 0+.
double inverse_dF(const RegularizedGrowth& rg, double y);

}  // namespace lipbarrier
