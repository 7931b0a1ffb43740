#include "lipbarrier/growth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "lipbarrier/error.hpp"

namespace lipbarrier {

namespace {

double fd_step(double s) { return std::max(1e-6, 1e-6 * std::abs(s)); }

double central_difference(const ScalarFunction& f, double s) {
  const double h = fd_step(s);
  const double lo = std::max(0.0, s - h);
  const double hi = s + h;
  return (f(hi) - f(lo)) / (hi - lo);
}

void require_grid(const std::vector<double>& grid) {
  if (grid.empty()) fail(ErrorKind::precondition, "grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) fail(ErrorKind::precondition, "grid points must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) fail(ErrorKind::precondition, "grid must be strictly increasing");
  }
}

}  // namespace

// GrowthFunction ---------------------------------------------------------------

GrowthFunction::GrowthFunction(std::string name, GrowthEvaluators evaluators, double delta_growth)
    : name_(std::move(name)), eval_(std::move(evaluators)), delta_growth_(delta_growth) {
  if (!eval_.F) fail(ErrorKind::precondition, "growth function '" + name_ + "' needs an F evaluator");
  if (!(delta_growth_ > 0.0 && delta_growth_ <= 1.0)) {
    fail(ErrorKind::precondition, "delta_growth must lie in (0, 1]");
  }
}

double GrowthFunction::F(double s) const { return eval_.F(s); }

double GrowthFunction::dF(double s) const {
  if (eval_.dF) return eval_.dF(s);
  return central_difference(eval_.F, s);
}

double GrowthFunction::ddF(double s) const {
  if (eval_.ddF) return eval_.ddF(s);
  return central_difference([this](double t) { return dF(t); }, s);
}

double GrowthFunction::curvature(double s) const {
  if (eval_.curvature) return eval_.curvature(s);
  return s * ddF(s) / dF(s);
}

double GrowthFunction::a(double s) const {
  if (s > 0.0) return dF(s) / s;
  return vanishing_slope_at_zero() ? ddF(0.0) : std::numeric_limits<double>::infinity();
}

bool GrowthFunction::vanishing_slope_at_zero() const { return std::abs(dF(0.0)) < 1e-12; }

GrowthFunction GrowthFunction::with_lambda0(double lambda0) const {
  GrowthFunction out = *this;
  out.lambda0_ = lambda0;
  return out;
}

GrowthFunction GrowthFunction::with_delta(double delta) const {
  GrowthFunction out(name_, eval_, delta);
  out.lambda0_ = lambda0_;
  out.tail_origin_ = tail_origin_;
  out.finite_limit_ = finite_limit_;
  return out;
}

GrowthFunction GrowthFunction::with_tail_origin(double origin) const {
  GrowthFunction out = *this;
  out.tail_origin_ = origin;
  return out;
}

GrowthFunction GrowthFunction::with_finite_limit(double limit) const {
  GrowthFunction out = *this;
  out.finite_limit_ = limit;
  return out;
}

// Catalogue -----------------------------------------------------------------

GrowthFunction power_growth(double p, double delta_growth) {
  if (!(p > 1.0)) fail(ErrorKind::config, "power growth needs p > 1");
  GrowthEvaluators ev;
  ev.F = [p](double s) { return std::pow(s, p); };
  ev.dF = [p](double s) { return p * std::pow(s, p - 1.0); };
  ev.ddF = [p](double s) { return p * (p - 1.0) * std::pow(s, p - 2.0); };
  ev.curvature = [p](double) { return p - 1.0; };
  return GrowthFunction("power(p=" + format_double(p) + ")", std::move(ev), delta_growth);
}

double oscillating_t0() { return std::exp(std::exp(std::exp(std::numbers::pi / 2.0))); }

GrowthFunction oscillating_growth(double p, double q, double delta_growth) {
  if (!(p > 1.0 && q >= p)) fail(ErrorKind::config, "oscillating growth needs 1 < p <= q");
  const double t0 = oscillating_t0();
  const double A = 0.5 * (p - q);
  const double mid = 0.5 * (p + q);

  // Above t0, F = exp(e(t) ln t) with F' = F h / t and
  // F'' = F (t h' - h + h^2) / t^2, h = A cos(L3)/L2 + e.
  struct Tail {
    double L1, L2, e, h, th;
  };
  auto tail = [A, mid](double t) {
    const double L1 = std::log(t);
    const double L2 = std::log(L1);
    const double L3 = std::log(L2);
    const double e = mid + A * std::sin(L3);
    const double h = A * std::cos(L3) / L2 + e;
    const double th = -A * (std::sin(L3) + std::cos(L3)) / (L2 * L2 * L1) + A * std::cos(L3) / (L2 * L1);
    return Tail{L1, L2, e, h, th};
  };

  GrowthEvaluators ev;
  ev.F = [=](double t) {
    if (t <= t0) return std::pow(t, p);
    const Tail tl = tail(t);
    return std::exp(tl.e * tl.L1);
  };
  ev.dF = [=](double t) {
    if (t <= t0) return p * std::pow(t, p - 1.0);
    const Tail tl = tail(t);
    return std::exp((tl.e - 1.0) * tl.L1) * tl.h;
  };
  ev.ddF = [=](double t) {
    if (t <= t0) return p * (p - 1.0) * std::pow(t, p - 2.0);
    const Tail tl = tail(t);
    return std::exp((tl.e - 2.0) * tl.L1) * (tl.th - tl.h + tl.h * tl.h);
  };
  ev.curvature = [=](double t) {
    if (t <= t0) return p - 1.0;
    const Tail tl = tail(t);
    return (tl.th - tl.h + tl.h * tl.h) / tl.h;
  };
  return GrowthFunction("oscillating(p=" + format_double(p) + ",q=" + format_double(q) + ")", std::move(ev),
                        delta_growth)
      .with_tail_origin(t0);
}

GrowthFunction eta_log_growth(double alpha, double delta_growth) {
  if (!(alpha > 0.0)) fail(ErrorKind::config, "eta_log growth needs alpha > 0");
  auto eta = [alpha](double s) { return std::pow(std::log(std::numbers::e + s), alpha); };
  auto deta = [alpha](double s) {
    const double l = std::log(std::numbers::e + s);
    return alpha * std::pow(l, alpha - 1.0) / (std::numbers::e + s);
  };
  auto ddeta = [alpha](double s) {
    const double l = std::log(std::numbers::e + s);
    const double x = std::numbers::e + s;
    return alpha * ((alpha - 1.0) * std::pow(l, alpha - 2.0) - std::pow(l, alpha - 1.0)) / (x * x);
  };
  GrowthEvaluators ev;
  ev.F = [eta](double s) { return s * eta(s); };
  ev.dF = [eta, deta](double s) { return eta(s) + s * deta(s); };
  ev.ddF = [deta, ddeta](double s) { return 2.0 * deta(s) + s * ddeta(s); };
  return GrowthFunction("eta_log(alpha=" + format_double(alpha) + ")", std::move(ev), delta_growth);
}

GrowthFunction eta_exp_growth(double delta_growth) {
  GrowthEvaluators ev;
  ev.F = [](double s) { return s * std::exp(s); };
  ev.dF = [](double s) { return (1.0 + s) * std::exp(s); };
  ev.ddF = [](double s) { return (2.0 + s) * std::exp(s); };
  ev.curvature = [](double s) { return s * (2.0 + s) / (1.0 + s); };
  return GrowthFunction("eta_exp", std::move(ev), delta_growth).with_finite_limit(700.0);
}

GrowthFunction eta_double_exp_growth(double delta_growth) {
  GrowthEvaluators ev;
  ev.F = [](double s) { return s * std::exp(std::exp(s)); };
  ev.dF = [](double s) {
    const double es = std::exp(s);
    return std::exp(es) * (1.0 + s * es);
  };
  ev.ddF = [](double s) {
    const double es = std::exp(s);
    return std::exp(es) * es * (2.0 + s + s * es);
  };
  // eta cancels: s F''/F' = s (2 + s + s e^s) / (e^{-s} + s).
  ev.curvature = [](double s) { return s * (2.0 + s + s * std::exp(s)) / (std::exp(-s) + s); };
  return GrowthFunction("eta_double_exp", std::move(ev), delta_growth).with_finite_limit(6.5);
}

GrowthFunction prototype_growth(double delta_growth) {
  GrowthEvaluators ev;
  ev.F = [](double s) { return s - std::log1p(s); };
  ev.dF = [](double s) { return s / (1.0 + s); };
  ev.ddF = [](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); };
  ev.curvature = [](double s) { return 1.0 / (1.0 + s); };
  return GrowthFunction("prototype", std::move(ev), delta_growth);
}

std::vector<GrowthFunction> catalogue() {
  std::vector<GrowthFunction> out;
  for (double p : {2.0, 3.0, 4.0}) out.push_back(power_growth(p));
  out.push_back(oscillating_growth(2.0, 4.0));
  out.push_back(eta_log_growth(2.0));
  out.push_back(eta_log_growth(0.5));
  out.push_back(eta_exp_growth());
  out.push_back(eta_double_exp_growth());
  out.push_back(prototype_growth());
  for (auto& g : out) g = with_scanned_lambda0(g);
  return out;
}

GrowthFunction make_growth(const std::string& kind, const GrowthParams& params) {
  GrowthFunction g = [&] {
    if (kind == "power") return power_growth(params.p, params.delta_growth);
    if (kind == "oscillating") return oscillating_growth(params.p, params.q, params.delta_growth);
    if (kind == "eta_log") return eta_log_growth(params.alpha, params.delta_growth);
    if (kind == "eta_exp") return eta_exp_growth(params.delta_growth);
    if (kind == "eta_double_exp") return eta_double_exp_growth(params.delta_growth);
    if (kind == "prototype") return prototype_growth(params.delta_growth);
    fail(ErrorKind::config, "unknown growth kind '" + kind + "'");
  }();
  return with_scanned_lambda0(g);
}

// Hypothesis checks ------------------------------------------------------------

std::vector<double> default_tail_grid(const GrowthFunction& g) {
  return logspace(1e-3 * g.tail_origin(), 1e8 * g.tail_origin(), 512);
}

std::vector<double> default_a1_grid(const GrowthFunction& g) {
  const double lo = 0.1 * g.tail_origin();
  const double hi = std::min(100.0 * g.tail_origin(), g.finite_limit());
  return logspace(lo, std::max(hi, 2.0 * lo), 256);
}

A1Result check_A1(const GrowthFunction& g, const std::vector<double>& grid) {
  require_grid(grid);
  std::vector<double> ratio(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = g.F(grid[i]);
    if (!std::isfinite(f)) fail(ErrorKind::evaluation_failure, "F(" + format_double(grid[i]) + ") is not finite");
    ratio[i] = f / grid[i];
  }
  const std::size_t tail = grid.size() / 2;
  A1Result out;
  out.C1 = *std::min_element(ratio.begin() + tail, ratio.end());
  double c2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) c2 = std::max(c2, out.C1 * grid[i] - ratio[i] * grid[i]);
  out.C2 = c2;
  // A slope that keeps decaying along the tail means no positive minorant
  // survives as s grows.
  const bool no_decay = ratio.back() >= 0.5 * ratio[tail];
  out.holds = out.C1 > 0.0 && no_decay;
  return out;
}

namespace {

void require_tail_grid(const std::vector<double>& grid, double delta) {
  require_grid(grid);
  if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorKind::precondition, "delta must lie in (0, 1]");
  if (grid.back() / grid.front() < 1e4 * (1.0 - 1e-12)) {
    fail(ErrorKind::precondition, "tail grid must extend over at least 4 decades");
  }
}

double checked_ratio(const GrowthFunction& g, double s, double weight) {
  const double d = g.dF(s);
  if (d == 0.0) fail(ErrorKind::degenerate_derivative, "F'(" + format_double(s) + ") = 0");
  const double c = g.curvature(s);
  if (std::isnan(c)) fail(ErrorKind::evaluation_failure, "curvature at " + format_double(s) + " is NaN");
  return weight * c;
}

A2Result summarize(const std::vector<double>& grid, const std::vector<double>& ratio, bool with_lambda0) {
  A2Result out;
  const std::size_t tail = ratio.size() / 2;
  out.liminf_estimate = *std::min_element(ratio.begin() + tail, ratio.end());
  out.holds = out.liminf_estimate >= 2.0 - kHypothesisTolerance;
  if (with_lambda0 && ratio.back() >= 1.0) {
    std::size_t i = ratio.size() - 1;
    while (i > 0 && ratio[i - 1] >= 1.0) --i;
    out.lambda0_suggested = grid[i];
  }
  return out;
}

}  // namespace

A2Result check_A2(const GrowthFunction& g, double delta, const std::vector<double>& tail_grid) {
  require_tail_grid(tail_grid, delta);
  std::vector<double> ratio(tail_grid.size());
  for (std::size_t i = 0; i < tail_grid.size(); ++i) {
    const double s = tail_grid[i];
    ratio[i] = checked_ratio(g, s, std::pow(s, 1.0 - delta));
  }
  return summarize(tail_grid, ratio, true);
}

A2Result check_A2_relaxed(const GrowthFunction& g, double delta, const std::vector<double>& tail_grid) {
  require_tail_grid(tail_grid, delta);
  std::vector<double> grid;
  std::vector<double> ratio;
  for (double s : tail_grid) {
    if (s <= 1.0) continue;
    grid.push_back(s);
    ratio.push_back(checked_ratio(g, s, s / std::pow(std::log(s), 1.0 + delta)));
  }
  if (ratio.empty()) fail(ErrorKind::precondition, "relaxed check needs grid points above 1");
  return summarize(grid, ratio, false);
}

GrowthFunction with_scanned_lambda0(const GrowthFunction& g) {
  const A2Result r = check_A2(g, g.delta_growth(), default_tail_grid(g));
  return g.with_lambda0(r.lambda0_suggested.value_or(0.0));
}

// Regularization -------------------------------------------------------------

RegularizedGrowth::RegularizedGrowth(GrowthFunction base, double lambda, double mu)
    : base_(std::move(base)), lambda_(lambda), mu_(mu) {
  F_at_lambda_ = base_.F(lambda_);
  dF_at_lambda_ = base_.dF(lambda_);
  ddF_at_lambda_ = base_.ddF(lambda_);
}

RegularizedGrowth make_regularized(const GrowthFunction& g, double lambda, double mu) {
  if (!(lambda >= g.lambda0())) {
    fail(ErrorKind::precondition, "lambda " + format_double(lambda) + " below lambda0 " + format_double(g.lambda0()));
  }
  if (!(mu >= 0.0)) fail(ErrorKind::precondition, "mu must be non-negative");
  RegularizedGrowth out(g, lambda, mu);
  if (!(out.ddF_at_lambda_ > 0.0) || !std::isfinite(out.ddF_at_lambda_) || !std::isfinite(out.F_at_lambda_) ||
      !std::isfinite(out.dF_at_lambda_)) {
    fail(ErrorKind::invalid_threshold, "F''(" + format_double(lambda) + ") must be positive and finite");
  }
  return out;
}

RegularizedGrowth RegularizedGrowth::with_mu(double mu) const { return make_regularized(base_, lambda_, mu); }

double RegularizedGrowth::F(double s) const {
  if (s <= lambda_) return base_.F(s);
  const double t = s - lambda_;
  return F_at_lambda_ + dF_at_lambda_ * t + 0.5 * ddF_at_lambda_ * t * t;
}

double RegularizedGrowth::dF(double s) const {
  if (s <= lambda_) return base_.dF(s);
  return dF_at_lambda_ + ddF_at_lambda_ * (s - lambda_);
}

double RegularizedGrowth::ddF(double s) const {
  if (s <= lambda_) return base_.ddF(s);
  return ddF_at_lambda_;
}

double RegularizedGrowth::a(double s) const {
  if (s > 0.0) return dF(s) / s;
  return base_.a(0.0);
}

double RegularizedGrowth::da(double s) const {
  if (!(s > 0.0)) return 0.0;
  return (ddF(s) - dF(s) / s) / s;
}

double RegularizedGrowth::curvature(double s) const {
  if (s <= lambda_) return base_.curvature(s);
  return s * ddF_at_lambda_ / dF(s);
}

double inverse_dF(const RegularizedGrowth& rg, double y) {
  if (!(y >= 0.0)) return 0.0;
  auto G = [&rg](double s) { return rg.dF_mu(s); };
  auto dG = [&rg](double s) { return rg.ddF_mu(s); };
  return invert_increasing(G, dG, y, 0.0, std::max(1.0, rg.lambda()), 1e-15 * y);
}

}  // namespace lipbarrier
