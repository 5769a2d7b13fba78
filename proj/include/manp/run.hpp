#ifndef MANP_RUN_HPP
#define MANP_RUN_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "manp/diagnostics.hpp"
#include "manp/scenarios.hpp"

namespace manp {

inline constexpr const char* kVersion = "manp 0.1.0";

struct StepRecord {
  long step = 0;
  double time = 0.0;
  int train_iterations = 0;
  double train_loss = 0.0;
  bool train_converged = false;
  int relax_sweeps = 0;
  double theta_1d = 0.0;
};

struct RunResult {
  ScenarioConfig config;
  TimeSeriesLog log;
  std::vector<StepRecord> records;
  SimulationState final_state;
  std::vector<std::string> files;
  double wall_seconds = 0.0;
};

/// Writes `# field=<name> t=<time> nx=<nx> ny=<ny>` and one CSV row per
/// grid line (row-major, %.17g).
void write_snapshot(std::ostream& out, const std::string& name, double t,
                    const Eigen::VectorXd& values, int nx, int ny);
void write_snapshot(const std::string& path, const std::string& name, double t,
                    const Eigen::VectorXd& values, int nx, int ny);

/// Hook invoked after each step (and once for the initial state with report == nullptr).
using StepObserver = std::function<void(const Scenario&, const StepReport*)>;

/// Runs a scenario to its horizon. When out_dir is non-empty writes
/// timeseries.csv, snapshots, phi_timeseries.csv (1D) and manifest.json there.
RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                       std::ostream* progress = nullptr, const StepObserver& observer = {});

/// Output directory for a run: cfg.out if set, else
/// $MANP_OUTPUT_ROOT (default "runs") / <scenario>-<theta>.
std::string resolve_output_dir(const ScenarioConfig& cfg);

struct ChannelDiff {
  std::string name;
  double max_abs_diff = 0.0;
  double final_a = 0.0;
  double final_b = 0.0;
};

struct CompareReport {
  std::string scenario;
  std::vector<ChannelDiff> channels;
  /// -1 when A ends with the smaller E_D, +1 when B does, 0 on ties or
  /// when the runs carry no E_D channel.
  int final_error_order = 0;
};

/// Compares two run directories. Throws MetadataMismatch when scenario,
/// resolution or dt differ and ParseError on unreadable artifacts.
CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b);
void print_compare(const CompareReport& r, std::ostream& out);

}  // namespace manp

#endif  // MANP_RUN_HPP
