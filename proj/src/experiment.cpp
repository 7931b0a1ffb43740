#include "lipbarrier/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "lipbarrier/barrier.hpp"
#include "lipbarrier/error.hpp"
#include "lipbarrier/mesh.hpp"
#include "lipbarrier/numerics.hpp"
#include "lipbarrier/solver.hpp"

namespace lipbarrier {

using json = nlohmann::json;

namespace {

// Config reading -------------------------------------------------------------------

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorKind::config, where_ + " must be an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorKind::config, where_ + "." + key + ": " + e.what());
    }
  }

  void get_optional(const std::string& key, std::optional<double>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    double v = 0.0;
    get(key, v);
    out = v;
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(ErrorKind::config, "unknown key '" + where_ + "." + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const std::set<std::string> kGrowthKinds{"power", "oscillating", "eta_log", "eta_exp", "eta_double_exp", "prototype"};
const std::set<std::string> kHypotheses{"A1", "A2", "A2_relaxed"};

GrowthSpec read_growth(const json& j, const std::string& where) {
  GrowthSpec s;
  Reader r(j, where);
  r.get("kind", s.kind);
  if (!kGrowthKinds.count(s.kind)) fail(ErrorKind::config, "unknown growth kind '" + s.kind + "'");
  if (s.kind == "power" || s.kind == "oscillating") r.get("p", s.params.p);
  if (s.kind == "oscillating") r.get("q", s.params.q);
  if (s.kind == "eta_log") r.get("alpha", s.params.alpha);
  r.get("delta_growth", s.params.delta_growth);
  r.get("require", s.require);
  for (const auto& h : s.require) {
    if (!kHypotheses.count(h)) fail(ErrorKind::config, "unknown hypothesis '" + h + "'");
  }
  r.finish();
  return s;
}

DomainSpec read_domain(const json& j) {
  DomainSpec s;
  Reader r(j, "domain");
  r.get("shape", s.shape);
  if (s.shape == "disk") {
    r.get("R", s.R);
  } else if (s.shape == "annulus") {
    r.get("r_in", s.r_in);
    r.get("r_out", s.r_out);
  } else if (s.shape == "ellipse") {
    r.get("a", s.a);
    r.get("b", s.b);
  } else if (s.shape == "rounded_polygon") {
    r.get("vertices", s.vertices);
    r.get("radius", s.radius);
  } else {
    fail(ErrorKind::config, "unknown domain shape '" + s.shape + "'");
  }
  r.get_optional("r0", s.r0);
  r.get("angle", s.angle);
  r.get("offset", s.offset);
  r.finish();
  return s;
}

DataSpec read_data(const json& j) {
  DataSpec s;
  Reader r(j, "boundary_data");
  r.get("kind", s.kind);
  if (s.kind == "constant") {
    r.get("value", s.value);
  } else if (s.kind == "affine") {
    r.get("slope", s.slope);
    r.get("value", s.value);
  } else if (s.kind == "trig_trace") {
    r.get("amplitude", s.amplitude);
    r.get("m", s.m);
    r.get("phase", s.phase);
    r.get("ell", s.ell);
  } else if (s.kind == "log_radial") {
    r.get("u_in", s.u_in);
    r.get("u_out", s.u_out);
  } else if (s.kind != "zero") {
    fail(ErrorKind::config, "unknown boundary data kind '" + s.kind + "'");
  }
  r.finish();
  return s;
}

SolverSpec read_solver(const json& j) {
  SolverSpec s;
  Reader r(j, "solver");
  r.get("h", s.h);
  r.get("tol", s.tol);
  r.get("mu", s.mu);
  r.get("lambda_init", s.lambda_init);
  r.get("max_rounds", s.max_rounds);
  r.get("max_iterations", s.max_iterations);
  r.get("check_uniqueness", s.check_uniqueness);
  r.finish();
  if (!(s.h > 0.0) || !(s.tol > 0.0) || s.max_rounds < 1 || s.max_iterations < 1) {
    fail(ErrorKind::config, "solver needs h > 0, tol > 0 and positive iteration limits");
  }
  if (s.mu.empty()) fail(ErrorKind::config, "solver.mu needs at least one value");
  for (double mu : s.mu) {
    if (!(mu > 0.0)) fail(ErrorKind::config, "solver.mu values must be positive");
  }
  return s;
}

BarrierSpec read_barrier(const json& j) {
  BarrierSpec s;
  Reader r(j, "barrier");
  r.get("x0", s.x0);
  r.get("samples", s.samples);
  r.finish();
  if (s.samples < 1) fail(ErrorKind::config, "barrier.samples must be positive");
  return s;
}

VerificationSpec read_verification(const json& j) {
  VerificationSpec s;
  Reader r(j, "verification");
  r.get("max_principle", s.max_principle);
  r.get("gradient_principle", s.gradient_principle);
  r.get("sandwich", s.sandwich);
  r.get("fixed_point", s.fixed_point);
  r.get("mu_sweep", s.mu_sweep);
  r.get("c_max_principle", s.c_max_principle);
  r.get("c_gradient", s.c_gradient);
  r.get("c_sandwich", s.c_sandwich);
  r.get("c_normal", s.c_normal);
  r.finish();
  return s;
}

json growth_json(const GrowthSpec& s) {
  json j{{"kind", s.kind}, {"delta_growth", s.params.delta_growth}, {"require", s.require}};
  if (s.kind == "power" || s.kind == "oscillating") j["p"] = s.params.p;
  if (s.kind == "oscillating") j["q"] = s.params.q;
  if (s.kind == "eta_log") j["alpha"] = s.params.alpha;
  return j;
}

json domain_json(const DomainSpec& s) {
  json j{{"shape", s.shape}, {"angle", s.angle}, {"offset", s.offset}};
  j["r0"] = s.r0 ? json(*s.r0) : json(nullptr);
  if (s.shape == "disk") j["R"] = s.R;
  if (s.shape == "annulus") {
    j["r_in"] = s.r_in;
    j["r_out"] = s.r_out;
  }
  if (s.shape == "ellipse") {
    j["a"] = s.a;
    j["b"] = s.b;
  }
  if (s.shape == "rounded_polygon") {
    j["vertices"] = s.vertices;
    j["radius"] = s.radius;
  }
  return j;
}

json data_json(const DataSpec& s) {
  json j{{"kind", s.kind}};
  if (s.kind == "constant") j["value"] = s.value;
  if (s.kind == "affine") {
    j["slope"] = s.slope;
    j["value"] = s.value;
  }
  if (s.kind == "trig_trace") {
    j["amplitude"] = s.amplitude;
    j["m"] = s.m;
    j["phase"] = s.phase;
    j["ell"] = s.ell;
  }
  if (s.kind == "log_radial") {
    j["u_in"] = s.u_in;
    j["u_out"] = s.u_out;
  }
  return j;
}

json config_json(const ExperimentConfig& c) {
  json growth = json::array();
  for (const auto& g : c.growth) growth.push_back(growth_json(g));
  const SolverSpec& s = c.solver;
  const VerificationSpec& v = c.verification;
  return json{
      {"growth", growth},
      {"domain", domain_json(c.domain)},
      {"boundary_data", data_json(c.boundary_data)},
      {"solver",
       {{"h", s.h},
        {"tol", s.tol},
        {"mu", s.mu},
        {"lambda_init", s.lambda_init},
        {"max_rounds", s.max_rounds},
        {"max_iterations", s.max_iterations},
        {"check_uniqueness", s.check_uniqueness}}},
      {"barrier", {{"x0", c.barrier.x0}, {"samples", c.barrier.samples}}},
      {"verification",
       {{"max_principle", v.max_principle},
        {"gradient_principle", v.gradient_principle},
        {"sandwich", v.sandwich},
        {"fixed_point", v.fixed_point},
        {"mu_sweep", v.mu_sweep},
        {"c_max_principle", v.c_max_principle},
        {"c_gradient", v.c_gradient},
        {"c_sandwich", v.c_sandwich},
        {"c_normal", v.c_normal}}},
      {"seed", c.seed},
  };
}

// Reports ------------------------------------------------------------------------------

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::config, "cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row_strings(header); }

  void row(std::initializer_list<std::string> cells) { row_strings(cells); }
  const std::string& text() const { return text_; }

 private:
  template <class C>
  void row_strings(const C& cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) text_ += ',';
      text_ += c;
      first = false;
    }
    text_ += '\n';
  }
  std::string text_;
};

std::string num(double v) { return format_double(v); }
std::string flag(bool v) { return v ? "true" : "false"; }

struct Setup {
  ExteriorBallDomain dom;
  BoundaryData bd;
  BoundaryNorms norms;
};

Setup make_setup(const ExperimentConfig& c) {
  ExteriorBallDomain dom = make_domain(c.domain);
  BoundaryData bd = make_boundary_data(c.boundary_data, c.domain);
  const BoundaryNorms norms = estimate_norms(bd, dom);
  return {std::move(dom), std::move(bd), norms};
}

GrowthFunction primary_growth(const ExperimentConfig& c) {
  if (c.growth.empty()) fail(ErrorKind::config, "this command needs at least one growth entry");
  return make_growth(c.growth.front());
}

struct Stage {
  int code = kPass;
  json report;
};

// Growth check ----------------------------------------------------------------------------

Stage growth_stage(const ExperimentConfig& c, const std::filesystem::path& out) {
  Stage st;
  st.report = json::array();
  Csv csv({"name", "delta", "liminf_estimate", "relaxed_liminf_estimate", "lambda0", "holds_A1", "holds_A2",
           "holds_A2_relaxed", "vanishing_slope", "pass"});
  for (const GrowthSpec& spec : c.growth) {
    const GrowthFunction g = make_growth(spec);
    const double delta = g.delta_growth();
    const A1Result a1 = check_A1(g, default_a1_grid(g));
    auto guarded = [&](auto check) {
      try {
        return check(g, delta, default_tail_grid(g));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_derivative) throw;
        return A2Result{};
      }
    };
    const A2Result a2 = guarded(check_A2);
    const A2Result rel = guarded(check_A2_relaxed);
    const std::map<std::string, bool> holds{{"A1", a1.holds}, {"A2", a2.holds}, {"A2_relaxed", rel.holds}};
    bool pass = true;
    for (const auto& h : spec.require) pass = pass && holds.at(h);
    if (!pass) st.code = kVerificationFailure;
    st.report.push_back({{"name", g.name()},
                         {"delta", delta},
                         {"liminf_estimate", a2.liminf_estimate},
                         {"relaxed_liminf_estimate", rel.liminf_estimate},
                         {"lambda0", g.lambda0()},
                         {"C1", a1.C1},
                         {"C2", a1.C2},
                         {"holds", holds},
                         {"require", spec.require},
                         {"vanishing_slope", g.vanishing_slope_at_zero()},
                         {"pass", pass}});
    csv.row({g.name(), num(delta), num(a2.liminf_estimate), num(rel.liminf_estimate), num(g.lambda0()),
             flag(a1.holds), flag(a2.holds), flag(rel.holds), flag(g.vanishing_slope_at_zero()), flag(pass)});
  }
  write_text(out / "growth_check.csv", csv.text());
  write_json(out / "growth_check.json", {{"entries", st.report}, {"pass", st.code == kPass}});
  return st;
}

// Barrier -----------------------------------------------------------------------------------

RegularizedGrowth barrier_growth(const ExperimentConfig& c, const GrowthFunction& g, double lambda) {
  return make_regularized(g, std::max(lambda, g.lambda0()), c.solver.mu.back());
}

Stage barrier_stage(const ExperimentConfig& c, const Setup& setup, const RegularizedGrowth& rg,
                    const std::filesystem::path& out, std::vector<BarrierPair>& pairs) {
  Stage st;
  json points = json::array();
  Csv csv({"x0_x", "x0_y", "q", "r0", "K", "M1", "M2", "M", "Mstar", "delta_max", "delta_ring", "r_max", "eta",
           "gradient_bound", "L_min_observed", "verified", "failed_stage"});
  const auto xs = barrier_points(c, setup.dom);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Point& x0 = xs[i];
    BarrierPair pair = build_barrier_pair(rg, setup.dom, setup.bd, setup.norms, x0);
    const BarrierConstants& bc = pair.constants;
    const PrototypeCheck proto = verify_prototype_pde(pair.upper.proto, linspace(bc.r0 * (1 + 1e-6), bc.r_max, 64));
    const bool ok = pair.verified && proto.passed;
    if (!ok) st.code = kVerificationFailure;
    const std::string stage = !pair.verified ? pair.failed_stage : (proto.passed ? "" : "prototype_pde");
    points.push_back({{"x0", {x0.x(), x0.y()}},
                      {"q", bc.q},
                      {"r0", bc.r0},
                      {"K", bc.K},
                      {"M1", bc.M1},
                      {"M2", bc.M2},
                      {"M", bc.M},
                      {"Mstar", bc.Mstar},
                      {"delta_max", bc.delta_max},
                      {"delta_ring", bc.delta_ring},
                      {"r_max", bc.r_max},
                      {"eta", bc.eta},
                      {"Cstar", bc.Cstar},
                      {"L", pair.graph.L()},
                      {"L_d", pair.graph.L_d()},
                      {"N", pair.graph.N()},
                      {"patch", pair.L_star},
                      {"gradient_bound", pair.gradient_bound},
                      {"normal_derivative_bound", normal_derivative_bound(pair)},
                      {"L_min_observed", pair.L_min_observed},
                      {"gamma_margin", pair.gamma_margin},
                      {"taylor_margin", pair.taylor_margin},
                      {"outer_margin", pair.outer_margin},
                      {"flux_residual", proto.worst_flux_residual},
                      {"max_laplacian", proto.max_laplacian},
                      {"verified", ok},
                      {"failed_stage", stage}});
    csv.row({num(x0.x()), num(x0.y()), num(bc.q), num(bc.r0), num(bc.K), num(bc.M1), num(bc.M2), num(bc.M),
             num(bc.Mstar), num(bc.delta_max), num(bc.delta_ring), num(bc.r_max), num(bc.eta), num(pair.gradient_bound),
             num(pair.L_min_observed), flag(ok), stage});
    Csv profile({"r", "b", "omega", "v_along_ray"});
    for (const ProfileRow& row : barrier_profile(pair)) profile.row({num(row.r), num(row.b), num(row.omega), num(row.v)});
    write_text(out / ("barrier_profile_" + std::to_string(i) + ".csv"), profile.text());
    pairs.push_back(std::move(pair));
  }
  write_text(out / "barrier.csv", csv.text());
  st.report = {{"points", points}, {"verified", st.code == kPass}};
  write_json(out / "barrier.json", st.report);
  return st;
}

// Solve ----------------------------------------------------------------------------------------

struct SolveOutcome {
  Stage stage;
  std::optional<DiscreteSolution> solution;
  double lambda_star = 0.0;
};

SolveOutcome solve_stage(const ExperimentConfig& c, const Setup& setup, const GrowthFunction& g,
                         const std::filesystem::path& out, std::vector<BarrierPair>* pairs) {
  SolveOutcome res;
  const SolverSpec& s = c.solver;
  const VerificationSpec& v = c.verification;
  const Mesh mesh = triangulate(setup.dom, s.h);
  SolverOptions options;
  options.tol = s.tol;
  options.max_iterations = s.max_iterations;
  options.check_uniqueness = s.check_uniqueness;
  options.seed = c.seed;

  json rounds = json::array();
  FixedPointResult fp;
  for (double mu : s.mu) {
    fp = lambda_fixed_point(g, mesh, setup.bd, mu, s.lambda_init, s.max_rounds, options);
    rounds.push_back({{"mu", mu},
                      {"closed", fp.closed},
                      {"lambda_star", fp.lambda_star},
                      {"rounds", fp.rounds},
                      {"lambdas", fp.lambdas},
                      {"sup_grads", fp.sup_grads},
                      {"resolve_change", fp.resolve_change}});
  }
  const DiscreteSolution& sol = *fp.solution;
  const double mu = s.mu.back();
  res.lambda_star = fp.closed ? fp.lambda_star : fp.lambdas.back();

  json checks = json::object();
  json details = json::object();
  bool ok = true;
  auto record = [&](const std::string& name, bool passed, json detail) {
    checks[name] = passed;
    details[name] = std::move(detail);
    ok = ok && passed;
  };
  if (v.max_principle) {
    const PrincipleCheck mp = verify_max_principle(sol, setup.norms.sup, v.c_max_principle);
    record("max_principle", mp.passed,
           {{"sup_u", mp.observed}, {"u0_sup", mp.reference}, {"slack", mp.slack}, {"excess", mp.excess}});
  }
  if (v.gradient_principle) {
    const PrincipleCheck gp = verify_gradient_principle(sol, v.c_gradient);
    record("gradient_principle", gp.passed,
           {{"interior_max", gp.observed}, {"boundary_max", gp.reference}, {"slack", gp.slack}});
  }
  if (v.fixed_point) {
    record("fixed_point", fp.closed && fp.resolve_consistent,
           {{"closed", fp.closed}, {"resolve_change", fp.resolve_change}, {"rounds", fp.rounds}});
  }
  if (s.check_uniqueness && sol.uniqueness_gap) {
    record("uniqueness", *sol.uniqueness_gap <= 10.0 * s.tol, {{"gap", *sol.uniqueness_gap}});
  }
  if (v.sandwich) {
    std::vector<BarrierPair> own;
    if (!pairs) {
      const RegularizedGrowth rg = barrier_growth(c, g, res.lambda_star);
      for (const Point& x0 : barrier_points(c, setup.dom)) {
        own.push_back(build_barrier_pair(rg, setup.dom, setup.bd, setup.norms, x0));
      }
      pairs = &own;
    }
    bool all = true;
    json items = json::array();
    for (const BarrierPair& pair : *pairs) {
      const SandwichCheck sw = verify_sandwich(sol, pair, setup.bd, setup.norms.norm_1inf(), v.c_sandwich);
      all = all && pair.verified && sw.passed;
      items.push_back({{"x0", {pair.ball().x0.x.x(), pair.ball().x0.x.y()}},
                       {"barrier_verified", pair.verified},
                       {"nodes", sw.nodes},
                       {"upper_margin", sw.upper_margin},
                       {"lower_margin", sw.lower_margin},
                       {"slack", sw.slack},
                       {"touching_gap", sw.touching_gap},
                       {"passed", sw.passed}});
    }
    record("sandwich", all, items);
  }
  if (v.mu_sweep && s.mu.size() >= 2) {
    const MuSweep sweep = mu_sweep(g, mesh, setup.bd, res.lambda_star, s.mu, options);
    // Non-monotone distances are reported as a warning only.
    details["mu_sweep"] = {{"mus", sweep.mus}, {"distances", sweep.distances}, {"monotone", sweep.monotone}};
  }

  Csv nodes({"id", "x", "y", "u"});
  for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
    nodes.row({std::to_string(i), num(mesh.V(i, 0)), num(mesh.V(i, 1)), num(sol.u(i))});
  }
  Csv elements({"id", "grad_norm"});
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    elements.row({std::to_string(t), num(sol.gradient_norms(t))});
  }
  write_text(out / "solution_nodes.csv", nodes.text());
  write_text(out / "solution_elements.csv", elements.text());

  res.stage.code = ok ? kPass : kVerificationFailure;
  res.stage.report = {{"lambda_star", res.lambda_star},
                      {"mu", mu},
                      {"energy", sol.energy},
                      {"sup_u", sol.sup_u},
                      {"sup_grad", sol.sup_grad},
                      {"h", mesh.h},
                      {"vertices", mesh.vertex_count()},
                      {"triangles", mesh.triangle_count()},
                      {"newton_iterations", sol.iterations},
                      {"rounds", rounds},
                      {"checks", checks},
                      {"details", details},
                      {"pass", ok}};
  res.solution = sol;
  return res;
}

int error_code(const Error& e) { return e.kind() == ErrorKind::config ? kConfigError : kNumericalFailure; }

json error_json(const Error& e) { return {{"error", e.what()}, {"kind", to_string(e.kind())}}; }

int verify_all(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log) {
  json report{{"config", config_json(c)}};
  int code = kPass;
  auto finish = [&](int result) {
    report["pass"] = result == kPass;
    report["exit_code"] = result;
    write_json(out / "verify_all.json", report);
    return result;
  };
  auto skip = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) report["stages"][n] = "skipped";
  };

  try {
    const Stage growth = growth_stage(c, out);
    report["stages"]["growth"] = growth.report;
    log << "growth-check: " << (growth.code == kPass ? "pass" : "FAIL") << '\n';
    if (growth.code != kPass) {
      skip({"barrier", "solve", "cross_check"});
      return finish(growth.code);
    }
  } catch (const Error& e) {
    report["stages"]["growth"] = error_json(e);
    skip({"barrier", "solve", "cross_check"});
    return finish(error_code(e));
  }

  std::optional<Setup> setup;
  std::optional<GrowthFunction> g;
  std::vector<BarrierPair> pairs;
  try {
    setup = make_setup(c);
    g = primary_growth(c);
    // Barriers are built at lambda_init; the supersolution property holds for every lambda >= lambda0.
    const Stage barrier = barrier_stage(c, *setup, barrier_growth(c, *g, c.solver.lambda_init), out, pairs);
    report["stages"]["barrier"] = barrier.report;
    log << "barrier: " << (barrier.code == kPass ? "verified" : "FAIL") << '\n';
    code = std::max(code, barrier.code);
  } catch (const Error& e) {
    report["stages"]["barrier"] = error_json(e);
    skip({"solve", "cross_check"});
    return finish(error_code(e));
  }

  std::optional<SolveOutcome> solved;
  try {
    solved = solve_stage(c, *setup, *g, out, &pairs);
    report["stages"]["solve"] = solved->stage.report;
    log << "solve: " << (solved->stage.code == kPass ? "pass" : "FAIL") << '\n';
    code = std::max(code, solved->stage.code);
  } catch (const Error& e) {
    report["stages"]["solve"] = error_json(e);
    skip({"cross_check"});
    return finish(error_code(e));
  }

  const DiscreteSolution& sol = *solved->solution;
  const double h = sol.mesh.h;
  bool cross_ok = true;
  json items = json::array();
  double worst_bound = 0.0;
  for (const BarrierPair& pair : pairs) {
    const double bound = normal_derivative_bound(pair);
    worst_bound = std::max(worst_bound, bound);
    const double measured = measured_normal_derivative(sol, pair.ball().x0.x, pair.ball().x0.normal);
    const bool passed = measured <= bound + c.verification.c_normal * h;
    cross_ok = cross_ok && passed;
    items.push_back({{"x0", {pair.ball().x0.x.x(), pair.ball().x0.x.y()}},
                     {"measured_normal_derivative", measured},
                     {"normal_derivative_bound", bound},
                     {"passed", passed}});
  }
  const double lipschitz_bound = worst_bound + setup->norms.grad_sup + c.verification.c_normal * h;
  const bool lipschitz_ok = sol.sup_grad <= lipschitz_bound;
  cross_ok = cross_ok && lipschitz_ok;
  report["stages"]["cross_check"] = {{"normal_derivative", items},
                                     {"sup_grad", sol.sup_grad},
                                     {"lipschitz_bound", lipschitz_bound},
                                     {"lipschitz_passed", lipschitz_ok},
                                     {"pass", cross_ok}};
  log << "cross-check: " << (cross_ok ? "pass" : "FAIL") << '\n';
  if (!cross_ok) code = std::max(code, static_cast<int>(kVerificationFailure));
  return finish(code);
}

}  // namespace

// Public API -----------------------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("malformed config: ") + e.what());
  }
  ExperimentConfig c;
  Reader r(j, "config");
  if (const json* g = r.child("growth")) {
    if (!g->is_array()) fail(ErrorKind::config, "growth must be a list");
    for (std::size_t i = 0; i < g->size(); ++i) c.growth.push_back(read_growth((*g)[i], "growth[" + std::to_string(i) + "]"));
  }
  if (const json* d = r.child("domain")) c.domain = read_domain(*d);
  if (const json* d = r.child("boundary_data")) c.boundary_data = read_data(*d);
  if (const json* d = r.child("solver")) c.solver = read_solver(*d);
  if (const json* d = r.child("barrier")) c.barrier = read_barrier(*d);
  if (const json* d = r.child("verification")) c.verification = read_verification(*d);
  r.get("seed", c.seed);
  r.finish();
  if (c.boundary_data.kind == "log_radial" && c.domain.shape != "annulus") {
    fail(ErrorKind::config, "log_radial boundary data needs an annulus domain");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

ExteriorBallDomain make_domain(const DomainSpec& s) {
  ExteriorBallDomain dom = [&] {
    try {
      if (s.shape == "disk") return ExteriorBallDomain::disk(s.R);
      if (s.shape == "annulus") return ExteriorBallDomain::annulus(s.r_in, s.r_out);
      if (s.shape == "ellipse") return ExteriorBallDomain::ellipse(s.a, s.b);
      if (s.shape == "rounded_polygon") {
        std::vector<Point> vs;
        for (const Vec2& v : s.vertices) vs.emplace_back(v[0], v[1]);
        return ExteriorBallDomain::rounded_polygon(std::move(vs), s.radius);
      }
    } catch (const Error& e) {
      fail(ErrorKind::config, std::string("invalid domain: ") + e.what());
    }
    fail(ErrorKind::config, "unknown domain shape '" + s.shape + "'");
  }();
  dom = dom.placed(s.angle, Point(s.offset[0], s.offset[1]));
  if (s.r0) {
    if (!(*s.r0 > 0.0)) fail(ErrorKind::config, "domain.r0 must be positive");
    dom = dom.with_r0(*s.r0);
  }
  return dom;
}

BoundaryData make_boundary_data(const DataSpec& s, const DomainSpec& domain) {
  if (s.kind == "zero") return zero_data();
  if (s.kind == "constant") return constant_data(s.value);
  if (s.kind == "affine") return affine_data(Eigen::Vector2d(s.slope[0], s.slope[1]), s.value);
  if (s.kind == "trig_trace") return trig_trace_data(s.amplitude, s.m, s.phase, s.ell);
  if (s.kind == "log_radial") {
    if (domain.shape != "annulus") fail(ErrorKind::config, "log_radial boundary data needs an annulus domain");
    return log_radial_data(domain.r_in, domain.r_out, s.u_in, s.u_out, Point(domain.offset[0], domain.offset[1]));
  }
  fail(ErrorKind::config, "unknown boundary data kind '" + s.kind + "'");
}

GrowthFunction make_growth(const GrowthSpec& spec) {
  try {
    return make_growth(spec.kind, spec.params);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    fail(ErrorKind::config, "growth '" + spec.kind + "': " + e.what());
  }
}

std::vector<Point> barrier_points(const ExperimentConfig& config, const ExteriorBallDomain& dom) {
  std::vector<Point> out;
  for (const Vec2& v : config.barrier.x0) {
    const Point x(v[0], v[1]);
    if ((dom.project(x).x - x).norm() > 1e-8 * std::max(1.0, dom.diameter())) {
      fail(ErrorKind::config, "barrier point (" + num(x.x()) + ", " + num(x.y()) + ") is not on the boundary");
    }
    out.push_back(x);
  }
  if (out.empty()) {
    const double len = dom.component_length(0);
    for (int i = 0; i < config.barrier.samples; ++i) out.push_back(dom.boundary_point(0, len * i / config.barrier.samples).x);
  }
  return out;
}

int run_command(const std::string& command, const ExperimentConfig& config, const std::filesystem::path& out_dir,
                std::ostream& log) {
  try {
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "config.json", serialize_config(config));
    if (command == "growth-check") {
      const Stage st = growth_stage(config, out_dir);
      log << "growth-check: " << config.growth.size() << " entries, " << (st.code == kPass ? "pass" : "FAIL") << '\n';
      return st.code;
    }
    if (command == "barrier") {
      const Setup setup = make_setup(config);
      const GrowthFunction g = primary_growth(config);
      std::vector<BarrierPair> pairs;
      const Stage st = barrier_stage(config, setup, barrier_growth(config, g, config.solver.lambda_init), out_dir, pairs);
      log << "barrier: " << pairs.size() << " points, " << (st.code == kPass ? "verified" : "FAIL") << '\n';
      return st.code;
    }
    if (command == "solve") {
      const Setup setup = make_setup(config);
      const GrowthFunction g = primary_growth(config);
      SolveOutcome res = solve_stage(config, setup, g, out_dir, nullptr);
      res.stage.report["config"] = config_json(config);
      write_json(out_dir / "solve_report.json", res.stage.report);
      log << "solve: lambda* = " << num(res.lambda_star) << ", " << (res.stage.code == kPass ? "pass" : "FAIL") << '\n';
      return res.stage.code;
    }
    if (command == "verify-all") return verify_all(config, out_dir, log);
    fail(ErrorKind::config, "unknown command '" + command + "'");
  } catch (const Error& e) {
    log << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return error_code(e);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace lipbarrier
