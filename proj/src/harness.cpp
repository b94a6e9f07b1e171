#include "ssmopt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "ssmopt/flow.hpp"

namespace ssmopt {

using nlohmann::json;

namespace {

// Maps keys back to source lines for error messages. nlohmann does not keep
// positions for parsed values, so the first textual occurrence is used.
class Locator {
 public:
  Locator(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  std::size_t line_at(std::size_t byte) const {
    const std::size_t end = std::min(byte, text_.size());
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
  }

  [[noreturn]] void fail(const std::string& key, const std::string& where, const std::string& what) const {
    std::ostringstream os;
    os << source_;
    const auto pos = text_.find("\"" + key + "\"");
    if (pos != std::string_view::npos) os << ":" << line_at(pos);
    os << ": " << where << (where.empty() ? "" : ": ") << what << " '" << key << "'";
    throw ParseError(os.str());
  }

  [[noreturn]] void fail_at(std::size_t byte, const std::string& what) const {
    throw ParseError(source_ + ":" + std::to_string(line_at(byte)) + ": " + what);
  }

 private:
  std::string_view text_;
  std::string source_;
};

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where,
                const Locator& loc) {
  if (!obj.is_object()) loc.fail(where, "", "expected an object for");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      loc.fail(item.key(), where, "unknown key");
    }
  }
}

Real get_real(const json& obj, const std::string& key, Real fallback, const std::string& where, const Locator& loc) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) loc.fail(key, where, "expected a number for");
  return v.get<Real>();
}

std::uint64_t get_count(const json& obj, const std::string& key, std::uint64_t fallback, const std::string& where,
                        const Locator& loc) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) loc.fail(key, where, "expected a non-negative integer for");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback,
                       const std::string& where, const Locator& loc) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) loc.fail(key, where, "expected a string for");
  return v.get<std::string>();
}

ObjectiveSpec parse_objective(const json& j, const Locator& loc) {
  const std::string where = "objective";
  check_keys(j, {"kind", "dim", "condition_number", "n_samples", "seed", "x0"}, where, loc);
  ObjectiveSpec spec;
  spec.kind = get_string(j, "kind", spec.kind, where, loc);
  if (spec.kind != "quadratic" && spec.kind != "rosenbrock" && spec.kind != "logistic") {
    loc.fail("kind", where, "unsupported objective kind '" + spec.kind + "' for");
  }
  auto only_for = [&](const char* key, const char* kind) {
    if (j.contains(key) && spec.kind != kind) loc.fail(key, where, std::string("only valid for ") + kind + ":");
  };
  only_for("condition_number", "quadratic");
  only_for("n_samples", "logistic");
  only_for("seed", "logistic");
  spec.dim = get_count(j, "dim", spec.dim, where, loc);
  spec.condition_number = get_real(j, "condition_number", spec.condition_number, where, loc);
  spec.n_samples = get_count(j, "n_samples", spec.n_samples, where, loc);
  spec.seed = get_count(j, "seed", spec.seed, where, loc);
  if (j.contains("x0")) {
    const json& x0 = j.at("x0");
    if (!x0.is_array()) loc.fail("x0", where, "expected an array for");
    Vec v;
    for (const json& e : x0) {
      if (!e.is_number()) loc.fail("x0", where, "expected numbers in");
      v.push_back(e.get<Real>());
    }
    spec.x0 = std::move(v);
  }
  return spec;
}

OptimizerSpec parse_optimizer(const json& j, std::size_t index, const Locator& loc) {
  const std::string where = "optimizers[" + std::to_string(index) + "]";
  check_keys(j, {"name", "kind", "b1", "b2", "b3", "delta", "epsilon", "eta", "c", "bias_mode", "momentum"}, where,
             loc);
  if (!j.contains("kind")) loc.fail("kind", where, "missing required key");
  OptimizerSpec spec;
  const std::string kind = get_string(j, "kind", "", where, loc);
  try {
    spec.kind = stepper_kind_from_string(kind);
  } catch (const std::invalid_argument&) {
    loc.fail("kind", where, "unknown optimizer kind '" + kind + "' for");
  }
  spec.name = get_string(j, "name", kind, where, loc);
  if (spec.name.empty()) loc.fail("name", where, "empty");
  PresetParams& p = spec.preset;
  p.b1 = get_real(j, "b1", p.b1, where, loc);
  p.b2 = get_real(j, "b2", p.b2, where, loc);
  const bool ssm = spec.kind == StepperKind::kAdamSSM || spec.kind == StepperKind::kAdaBeliefSSM;
  p.b3 = get_real(j, "b3", ssm ? kDefaultSsmB3 : p.b3, where, loc);
  p.delta = get_real(j, "delta", p.delta, where, loc);
  p.epsilon = get_real(j, "epsilon", p.epsilon, where, loc);
  p.eta = get_real(j, "eta", p.eta, where, loc);
  p.c = get_real(j, "c", p.c, where, loc);
  spec.momentum = get_real(j, "momentum", spec.momentum, where, loc);
  const std::string bias = get_string(j, "bias_mode", "paper", where, loc);
  try {
    spec.bias = bias_mode_from_string(bias);
  } catch (const std::invalid_argument&) {
    loc.fail("bias_mode", where, "unknown bias mode '" + bias + "' for");
  }
  return spec;
}

std::vector<std::string> objective_failures(const ObjectiveSpec& s) {
  std::vector<std::string> out;
  if (s.dim < 1) out.emplace_back("dim >= 1");
  if (s.kind == "rosenbrock" && s.dim < 2) out.emplace_back("dim >= 2 (rosenbrock)");
  if (s.kind == "quadratic" && !(s.condition_number >= 1)) out.emplace_back("condition_number >= 1");
  if (s.kind == "logistic" && s.n_samples < 1) out.emplace_back("n_samples >= 1");
  if (s.x0) {
    if (s.x0->size() != s.dim) out.emplace_back("x0 length == dim");
    if (!std::all_of(s.x0->begin(), s.x0->end(), [](Real v) { return std::isfinite(v); })) {
      out.emplace_back("x0 finite");
    }
  }
  return out;
}

std::vector<std::string> optimizer_failures(const OptimizerSpec& spec) {
  std::vector<std::string> out;
  if (const auto fk = flow_kind(spec.kind)) {
    try {
      validate_preset(spec.preset, *fk);
    } catch (const ValidationError& e) {
      out = e.failed();
    }
  } else {
    if (!(spec.preset.eta > 0)) out.emplace_back("eta > 0");
    if (!(spec.momentum >= 0 && spec.momentum < 1)) out.emplace_back("0 <= momentum < 1");
  }
  if (out.empty()) {
    try {
      Stepper s(stepper_config(spec));
    } catch (const InstabilityError&) {
      out.emplace_back("1 - delta*(b2 + b3) >= 0");
    }
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  const Locator loc(text, source);
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    loc.fail_at(e.byte == 0 ? 0 : e.byte - 1, std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, {"objective", "optimizers", "iterations", "record_stride", "schedule", "threshold",
                    "output_dir", "nu0"},
             "", loc);

  ExperimentConfig cfg;
  if (!root.contains("objective")) loc.fail("objective", "", "missing required key");
  cfg.objective = parse_objective(root.at("objective"), loc);

  if (!root.contains("optimizers")) loc.fail("optimizers", "", "missing required key");
  const json& opts = root.at("optimizers");
  if (!opts.is_array()) loc.fail("optimizers", "", "expected an array for");
  for (std::size_t i = 0; i < opts.size(); ++i) cfg.optimizers.push_back(parse_optimizer(opts[i], i, loc));

  cfg.iterations = get_count(root, "iterations", cfg.iterations, "", loc);
  cfg.record_stride = get_count(root, "record_stride", cfg.record_stride, "", loc);
  cfg.threshold = get_real(root, "threshold", cfg.threshold, "", loc);
  cfg.output_dir = get_string(root, "output_dir", cfg.output_dir, "", loc);
  cfg.nu0 = get_real(root, "nu0", cfg.nu0, "", loc);
  if (root.contains("schedule")) {
    const json& sch = root.at("schedule");
    check_keys(sch, {"milestones"}, "schedule", loc);
    if (sch.contains("milestones")) {
      const json& ms = sch.at("milestones");
      if (!ms.is_array()) loc.fail("milestones", "schedule", "expected an array for");
      for (const json& m : ms) {
        if (!m.is_array() || m.size() != 2 || !m[0].is_number_unsigned() || !m[1].is_number()) {
          loc.fail("milestones", "schedule", "expected [iteration, multiplier] pairs in");
        }
        cfg.milestones.push_back({m[0].get<std::uint64_t>(), m[1].get<Real>()});
      }
    }
  }

  // Everything below is semantic; collect all failures before throwing.
  std::vector<std::string> failed;
  std::string context;
  auto add = [&](const std::string& who, const std::vector<std::string>& names) {
    if (names.empty()) return;
    failed.insert(failed.end(), names.begin(), names.end());
    if (!context.empty()) context += "; ";
    context += who + ":";
    for (const auto& n : names) context += " [" + n + "]";
  };
  std::vector<std::string> general;
  if (cfg.optimizers.empty()) general.emplace_back("at least one optimizer");
  if (cfg.iterations < 1) general.emplace_back("iterations >= 1");
  if (cfg.record_stride < 1) general.emplace_back("record_stride >= 1");
  if (!(cfg.threshold > 0)) general.emplace_back("threshold > 0");
  if (!(cfg.nu0 > 0)) general.emplace_back("nu0 > 0");
  for (std::size_t i = 0; i < cfg.milestones.size(); ++i) {
    if (!(cfg.milestones[i].multiplier > 0)) general.emplace_back("milestone multiplier > 0");
    if (i > 0 && cfg.milestones[i].iteration <= cfg.milestones[i - 1].iteration) {
      general.emplace_back("milestones strictly increasing");
    }
  }
  add("config", general);
  add("objective", objective_failures(cfg.objective));
  for (const auto& o : cfg.optimizers) add("optimizer '" + o.name + "'", optimizer_failures(o));
  if (!failed.empty()) throw ValidationError(failed, source + ": " + context);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

Objective build_objective(const ObjectiveSpec& spec) {
  if (spec.kind == "quadratic") return make_quadratic(spec.dim, spec.condition_number);
  if (spec.kind == "rosenbrock") return make_rosenbrock(spec.dim);
  if (spec.kind == "logistic") return make_logistic(spec.dim, spec.n_samples, spec.seed);
  throw std::invalid_argument("unknown objective kind: " + spec.kind);
}

Vec initial_point(const ObjectiveSpec& spec) {
  if (spec.x0) return *spec.x0;
  if (spec.kind == "rosenbrock") {
    Vec x(spec.dim);
    for (std::size_t i = 0; i < spec.dim; ++i) x[i] = i % 2 == 0 ? -1.2 : 1.0;
    return x;
  }
  if (spec.kind == "logistic") return Vec(spec.dim, 0.0);
  return Vec(spec.dim, 1.0);
}

StepperConfig stepper_config(const OptimizerSpec& spec) {
  StepperConfig c;
  c.kind = spec.kind;
  c.preset = spec.preset;
  c.bias = spec.bias;
  c.momentum = spec.momentum;
  return c;
}

LrSchedule schedule_for(const ExperimentConfig& config, const OptimizerSpec& spec) {
  return LrSchedule(spec.preset.eta, config.milestones);
}

std::vector<DiscreteRun> execute(const ExperimentConfig& config) {
  const Objective objective = build_objective(config.objective);
  const Vec x0 = initial_point(config.objective);
  RunOptions options;
  options.stride = config.record_stride;
  options.threshold = config.threshold;

  std::vector<DiscreteRun> runs;
  runs.reserve(config.optimizers.size());
  for (const auto& spec : config.optimizers) {
    const auto start = std::chrono::steady_clock::now();
    DiscreteRun run;
    try {
      const Stepper stepper(stepper_config(spec));
      run = run_discrete(stepper, objective, x0, config.iterations, schedule_for(config, spec), options);
    } catch (const std::exception& e) {
      run = DiscreteRun{};
      run.report.threshold = config.threshold;
      run.report.total_iters = config.iterations;
      run.report.error = e.what();
    }
    run.report.name = spec.name;
    run.report.wall_time_s = std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
    runs.push_back(std::move(run));
  }
  return runs;
}

std::string trajectory_file_name(std::size_t index, const std::string& name) {
  std::string safe;
  for (char ch : name) safe += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%02zu_", index);
  return prefix + safe + ".csv";
}

void write_trajectories(const std::filesystem::path& out_dir, const std::vector<DiscreteRun>& runs) {
  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].report.error) continue;
    write_trajectory_csv((out_dir / trajectory_file_name(i, runs[i].report.name)).string(), runs[i].trajectory,
                         NuBound::kNonNegative);
  }
}

std::vector<RunReport> summary_order(const std::vector<RunReport>& reports) {
  std::vector<RunReport> out;
  for (const auto& r : reports) {
    if (!r.error) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const RunReport& a, const RunReport& b) { return a.best_f < b.best_f; });
  return out;
}

void emit_summary(const std::vector<RunReport>& reports, std::ostream& os) {
  os << "optimizer,best_f,epoch_of_best,final_grad_norm,iters_to_threshold\n";
  for (const auto& r : summary_order(reports)) {
    os << r.name << ',' << format_real(r.best_f) << ',' << r.best_iter << ',' << format_real(r.final_grad_norm) << ','
       << (r.iters_to_threshold ? std::to_string(*r.iters_to_threshold) : std::string("unreached")) << '\n';
  }
}

namespace {

json report_to_json(const RunReport& r) {
  json j;
  j["optimizer"] = r.name;
  if (r.error) {
    j["error"] = *r.error;
  } else {
    j["error"] = nullptr;
    j["best_f"] = r.best_f;
    j["epoch_of_best"] = r.best_iter;
    j["final_grad_norm"] = r.final_grad_norm;
    if (r.iters_to_threshold) {
      j["iters_to_threshold"] = *r.iters_to_threshold;
    } else {
      j["iters_to_threshold"] = "unreached";
    }
    j["nu_nonnegative"] = r.nu_nonnegative;
    j["stayed_in_box"] = r.stayed_in_box;
  }
  j["threshold"] = r.threshold;
  j["total_iters"] = r.total_iters;
  j["energy_residual"] = r.energy_residual ? json(*r.energy_residual) : json(nullptr);
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Wall time stays out of the files so repeated runs are byte-identical.
void log_wall_times(const std::vector<RunReport>& reports) {
  for (const auto& r : reports) {
    std::fprintf(stderr, "%s: %.3f s%s\n", r.name.c_str(), r.wall_time_s, r.error ? " (failed)" : "");
  }
}

}  // namespace

std::string reports_json(const std::vector<RunReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  return arr.dump(2) + "\n";
}

std::vector<RunReport> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  const auto runs = execute(config);
  write_trajectories(out_dir, runs);
  std::vector<RunReport> reports;
  for (const auto& r : runs) reports.push_back(r.report);
  write_text(out_dir / "reports.json", reports_json(reports));
  log_wall_times(reports);
  return reports;
}

std::vector<RunReport> run_compare(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  auto reports = run_experiment(config, out_dir);
  std::ostringstream csv;
  emit_summary(reports, csv);
  write_text(out_dir / "summary.csv", csv.str());
  write_text(out_dir / "summary.json", reports_json(summary_order(reports)));
  return reports;
}

std::vector<RunReport> run_flows(const ExperimentConfig& config, Real dt, Real t_end, FlowMethod method,
                                 const std::filesystem::path& out_dir) {
  const Objective objective = build_objective(config.objective);
  const Vec x0 = initial_point(config.objective);
  const Vec nu0(objective.dim(), config.nu0);
  std::filesystem::create_directories(out_dir);

  std::vector<RunReport> reports;
  for (std::size_t i = 0; i < config.optimizers.size(); ++i) {
    const auto& spec = config.optimizers[i];
    const auto fk = flow_kind(spec.kind);
    if (!fk) continue;
    PresetParams preset = spec.preset;
    if (*fk == PresetKind::kAdam || *fk == PresetKind::kAdaBelief) preset.b3 = 0;

    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.name = spec.name;
    rep.threshold = config.threshold;
    try {
      const FlowProblem problem = preset_flow(*fk, preset, objective, x0, nu0);
      const Trajectory traj = method == FlowMethod::kEuler
                                  ? integrate_euler(problem, dt, t_end, config.record_stride)
                                  : integrate_reference(problem, dt, t_end, config.record_stride);
      rep.total_iters = static_cast<std::uint64_t>(std::llround(t_end / dt));
      for (std::size_t k = 0; k < traj.size(); ++k) {
        if (k == 0 || traj.f_values[k] < rep.best_f) {
          rep.best_f = traj.f_values[k];
          rep.best_iter = static_cast<std::uint64_t>(std::llround(traj.times[k] / dt));
        }
        if (!rep.iters_to_threshold && traj.grad_norms[k] < config.threshold) {
          rep.iters_to_threshold = static_cast<std::uint64_t>(std::llround(traj.times[k] / dt));
        }
        rep.stayed_in_box = rep.stayed_in_box && objective.in_box(traj.states[k].x);
      }
      rep.final_grad_norm = traj.grad_norms.back();
      rep.nu_nonnegative = traj.min_nu() > 0;
      if (is_gadagrad_mapping(problem.params())) {
        Real worst = 0;
        for (Real r : gadagrad_energy_residual(traj, problem)) worst = std::max(worst, std::abs(r));
        rep.energy_residual = worst;
      }
      const std::string file = "flow_" + trajectory_file_name(i, spec.name);
      write_trajectory_csv((out_dir / file).string(), traj, NuBound::kPositive);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      rep.error = e.what();
    }
    rep.wall_time_s = std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
    reports.push_back(std::move(rep));
  }
  write_text(out_dir / "flow_reports.json", reports_json(reports));
  log_wall_times(reports);
  return reports;
}

std::filesystem::path output_dir_for(const ExperimentConfig& config) {
  if (const char* env = std::getenv("SSMOPT_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.output_dir;
}

}  // namespace ssmopt
