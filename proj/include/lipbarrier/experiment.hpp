#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lipbarrier/boundary_data.hpp"
#include "lipbarrier/geometry.hpp"
#include "lipbarrier/growth.hpp"

namespace lipbarrier {

using Vec2 = std::array<double, 2>;

struct GrowthSpec {
  std::string kind = "power";
  GrowthParams params;
  /// Hypotheses that must hold: any of "A1", "A2", "A2_relaxed".
  std::vector<std::string> require{"A1", "A2"};

  bool operator==(const GrowthSpec& o) const {
    return kind == o.kind && params.p == o.params.p && params.q == o.params.q && params.alpha == o.params.alpha &&
           params.delta_growth == o.params.delta_growth && require == o.require;
  }
};

struct DomainSpec {
  std::string shape = "disk";
  double R = 1.0;
  double r_in = 1.0;
  double r_out = 2.0;
  double a = 2.0;
  double b = 1.0;
  std::vector<Vec2> vertices{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}};
  double radius = 0.25;
  std::optional<double> r0;
  double angle = 0.0;
  Vec2 offset{0.0, 0.0};

  bool operator==(const DomainSpec&) const = default;
};

struct DataSpec {
  std::string kind = "zero";
  double value = 0.0;
  Vec2 slope{0.0, 0.0};
  double amplitude = 0.3;
  double m = 2.0;
  double phase = 0.3;
  double ell = 1.0;
  double u_in = 0.0;
  double u_out = 1.0;

  bool operator==(const DataSpec&) const = default;
};

struct SolverSpec {
  double h = 0.1;
  double tol = 1e-9;
  std::vector<double> mu{1e-3};
  double lambda_init = 1.0;
  int max_rounds = 5;
  int max_iterations = 200;
  bool check_uniqueness = true;

  bool operator==(const SolverSpec&) const = default;
};

struct BarrierSpec {
  /// Touching points; when empty, `samples` points equispaced in arc length
  /// on the first boundary component are used.
  std::vector<Vec2> x0;
  int samples = 1;

  bool operator==(const BarrierSpec&) const = default;
};

struct VerificationSpec {
  bool max_principle = true;
  bool gradient_principle = true;
  bool sandwich = true;
  bool fixed_point = true;
  bool mu_sweep = false;
  /// Slack constants C of the discrete checks.
  double c_max_principle = 1.0;
  double c_gradient = 1.0;
  double c_sandwich = 1.0;
  double c_normal = 1.0;

  bool operator==(const VerificationSpec&) const = default;
};

struct ExperimentConfig {
  std::vector<GrowthSpec> growth;
  DomainSpec domain;
  DataSpec boundary_data;
  SolverSpec solver;
  BarrierSpec barrier;
  VerificationSpec verification;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses a JSON config; missing keys take their defaults, unknown keys and
/// unknown names are config errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Pretty-printed JSON with every default materialized and sorted keys.
std::string serialize_config(const ExperimentConfig& config);

ExteriorBallDomain make_domain(const DomainSpec& spec);
BoundaryData make_boundary_data(const DataSpec& spec, const DomainSpec& domain);
GrowthFunction make_growth(const GrowthSpec& spec);
std::vector<Point> barrier_points(const ExperimentConfig& config, const ExteriorBallDomain& dom);

/// Exit codes of the command runner.
enum ExitCode : int { kPass = 0, kVerificationFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

/// Runs "growth-check", "barrier", "solve" or "verify-all", writing reports
/// into out_dir and a short summary to log. Returns an ExitCode.
int run_command(const std::string& command, const ExperimentConfig& config, const std::filesystem::path& out_dir,
                std::ostream& log);

}  // namespace lipbarrier
