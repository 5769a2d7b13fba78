#ifndef MANP_SCENARIOS_HPP
#define MANP_SCENARIOS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "manp/stepper.hpp"

namespace manp {

struct ScenarioConfig {
  std::string scenario = "electro2d";  // analytic2d | electro2d | robin1d
  std::string theta = "network";
  int nx = 50;
  int ny = 50;
  double dt = 5e-4;
  double T = 0.5;
  long steps = 0;  // 0: round(T / dt)
  std::uint64_t seed = 0;
  std::string out;
  std::vector<long> snapshot_steps{10, 100, 500, 1000};

  LossWeights weights;
  TrainConfig train;
  std::vector<int> hidden{32, 32, 32};

  std::string relaxation = "auto";  // auto | local | vectorized
  double relax_tol = 1e-5;
  int max_sweeps = -1;
  double damping = 0.5;

  // robin1d only
  double eps0 = 0.25;
  RobinBc robin;

  long num_steps() const;
};

/// Scenario defaults with every key materialized.
ScenarioConfig default_config(const std::string& scenario);

/// Applies one key = value setting. Unknown keys and bad values throw
/// ConfigError. The scenario key itself is not accepted here.
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Ordered key/value pairs of a resolved config, as printed by --print-config.
std::vector<std::pair<std::string, std::string>> config_items(const ScenarioConfig& cfg);

void print_config(const ScenarioConfig& cfg, std::ostream& out);

/// Parses a flat "key = value" file ('#' comments allowed). `scenario` picks
/// the defaults when given, else the file must name one.
ScenarioConfig parse_config(std::istream& in, const std::string& scenario = "");
ScenarioConfig parse_config_file(const std::string& path, const std::string& scenario = "");

/// Range and consistency checks; throws ConfigError.
void validate(const ScenarioConfig& cfg);

/// Closed-form manufactured solution on [-1,1]²: φ = ½|x|² e^{-t},
/// c¹ = e^{-φ}, c² = e^{φ}, D = -∇φ.
struct ExactSolution {
  static double phi(double x, double y, double t);
  static double concentration(int species, double x, double y, double t);
  static std::array<double, 2> displacement(double x, double y, double t);
  /// Transport source f_l = -q c ∂φ/∂t (the exact flux vanishes).
  static double source(int species, double x, double y, double t);
  /// Displacement source h = (x - y, y - x) e^{-t}.
  static std::array<double, 2> h(double x, double y, double t);
  static int valence(int species) { return species == 0 ? 1 : -1; }

  static CellField sample_concentration(const StaggeredGrid& g, int species, double t);
  static FaceField sample_displacement(const StaggeredGrid& g, double t);
  static FaceField sample_h(const StaggeredGrid& g, double t);
  static Eigen::VectorXd sample_source(const StaggeredGrid& g, int species, double t);
  static GhostCells ghosts(const StaggeredGrid& g, int species, double t);
  /// Outward ∂φ/∂n per boundary face.
  static Eigen::VectorXd neumann(const StaggeredGrid& g, double t);
};

/// A ready-to-run scenario.
struct Scenario {
  ScenarioConfig config;
  SimulationState state;
  bool has_external = false;
  ExternalData external;
  StepperConfig stepper;
  ThetaStrategy strategy;

  const ExternalData* ext() const { return has_external ? &external : nullptr; }
};

std::pair<SimulationState, ExactSolution> build_analytic2d(const ScenarioConfig& cfg);
SimulationState build_electro2d(const ScenarioConfig& cfg);
SimulationState build_robin1d(const ScenarioConfig& cfg);

/// Fixed charge of the two-disk configuration at a point.
double disk_charge(double x, double y);

Scenario build_scenario(const ScenarioConfig& cfg);
StepperConfig make_stepper_config(const ScenarioConfig& cfg);

struct SteadyState1d {
  CellField phi;
  std::vector<CellField> concentrations;
  Eigen::VectorXd dphidx;
  int newton_iterations = 0;
  double residual = 0.0;
};

/// Mass-constrained Poisson-Boltzmann steady state of robin1d, with masses
/// taken from `initial` (or from the config defaults). Damped Newton on the
/// same discrete Gauss/Robin equations the scheme uses.
SteadyState1d pb_steady_state_1d(const ScenarioConfig& cfg,
                                 const SimulationState* initial = nullptr);

}  // namespace manp

#endif  // MANP_SCENARIOS_HPP
