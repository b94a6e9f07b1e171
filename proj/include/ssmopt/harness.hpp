#pragma once

// Experiment configuration, comparison runs and report emission.
//
// Config schema (JSON, unknown keys rejected):
// {
//   "objective": {"kind": "quadratic" | "rosenbrock" | "logistic",
//                 "dim": 2, "condition_number": 100,      // quadratic
//                 "n_samples": 200, "seed": 1,            // logistic
//                 "x0": [..]},                            // optional
//   "optimizers": [{"name": "..", "kind": "adamssm", "b1": .., "b2": .., "b3": ..,
//                   "delta": .., "epsilon": .., "eta": .., "c": ..,
//                   "bias_mode": "paper" | "beta" | "flow", "momentum": ..}],
//   "iterations": 1000, "record_stride": 1,
//   "schedule": {"milestones": [[iteration, multiplier], ..]},
//   "threshold": 1e-4, "output_dir": "ssmopt_out", "nu0": 1.0
// }
// Every optimizer field except "kind" is optional; missing preset values take
// the PresetParams defaults, except b3, which defaults to kDefaultSsmB3 for the
// SSM kinds (they require b3 > 0). "nu0" is the initial second moment used by the
// `flow` subcommand (flows need nu > 0); discrete runs start from nu = 0.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssmopt/discrete.hpp"
#include "ssmopt/objectives.hpp"

namespace ssmopt {

/// 3e-3 / delta at the default delta = 0.15.
inline constexpr Real kDefaultSsmB3 = 0.02;

struct ObjectiveSpec {
  std::string kind = "quadratic";
  std::size_t dim = 2;
  Real condition_number = 100;
  std::size_t n_samples = 200;
  std::uint64_t seed = 1;
  std::optional<Vec> x0;
};

struct OptimizerSpec {
  std::string name;
  StepperKind kind = StepperKind::kAdamSSM;
  PresetParams preset;
  BiasMode bias = BiasMode::kPaper;
  Real momentum = 0.9;
};

struct ExperimentConfig {
  ObjectiveSpec objective;
  std::vector<OptimizerSpec> optimizers;
  std::uint64_t iterations = 1000;
  std::size_t record_stride = 1;
  std::vector<LrSchedule::Milestone> milestones;
  Real threshold = 1e-4;
  std::string output_dir = "ssmopt_out";
  Real nu0 = 1.0;
};

/// Parses and validates a config. Throws ParseError (malformed JSON, unknown
/// or mistyped keys; the message carries a line number when one can be
/// located) or ValidationError aggregating every optimizer's failed
/// conditions.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

Objective build_objective(const ObjectiveSpec& spec);
/// Configured x0, or the default start: ones (quadratic), (-1.2, 1, -1.2, ..)
/// (rosenbrock), zeros (logistic).
Vec initial_point(const ObjectiveSpec& spec);
StepperConfig stepper_config(const OptimizerSpec& spec);
LrSchedule schedule_for(const ExperimentConfig& config, const OptimizerSpec& spec);

/// Runs every optimizer from the same x0. A run that throws is recorded with
/// `report.error` set and an empty trajectory; the others continue.
std::vector<DiscreteRun> execute(const ExperimentConfig& config);

/// Trajectory file name for the i-th declared optimizer.
std::string trajectory_file_name(std::size_t index, const std::string& name);

/// Writes one trajectory CSV per successful run into `out_dir`.
void write_trajectories(const std::filesystem::path& out_dir, const std::vector<DiscreteRun>& runs);

/// Reports ordered for the summary table: successful runs by best_f ascending
/// (ties keep declaration order), failed runs dropped.
std::vector<RunReport> summary_order(const std::vector<RunReport>& reports);

/// Summary CSV: optimizer,best_f,epoch_of_best,final_grad_norm,iters_to_threshold.
/// Rows follow summary_order; an unreached threshold prints "unreached".
void emit_summary(const std::vector<RunReport>& reports, std::ostream& os);

/// All reports (failures included) in declaration order, as a JSON document.
std::string reports_json(const std::vector<RunReport>& reports);

/// execute + trajectories + reports.json.
std::vector<RunReport> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// run_experiment plus summary.csv and summary.json (summary_order).
std::vector<RunReport> run_compare(const ExperimentConfig& config, const std::filesystem::path& out_dir);

enum class FlowMethod { kReference, kEuler };

/// Integrates the flow of every optimizer that has one (SGD momentum is
/// skipped) with nu(0) = config.nu0, writing flow_<i>_<name>.csv and
/// flow_reports.json. G-AdaGrad reports carry the max |energy residual|.
std::vector<RunReport> run_flows(const ExperimentConfig& config, Real dt, Real t_end, FlowMethod method,
                                 const std::filesystem::path& out_dir);

/// SSMOPT_OUT_DIR if set and non-empty, else config.output_dir.
std::filesystem::path output_dir_for(const ExperimentConfig& config);

}  // namespace ssmopt
