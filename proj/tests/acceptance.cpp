// Acceptance suite: one PASS/FAIL line per criterion.
//
// usage: acceptance <ssmopt-cli> <compare-config.json>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ssmopt/analysis.hpp"
#include "ssmopt/discrete.hpp"
#include "ssmopt/flow.hpp"
#include "ssmopt/objectives.hpp"
#include "validator_cases.hpp"

using namespace ssmopt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Least-squares slope of log(err) against log(h).
double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double state_distance(const FlowState& a, const FlowState& b) {
  double s = 0;
  auto add = [&](const Vec& u, const Vec& v) {
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
  };
  add(a.x, b.x);
  add(a.mu, b.mu);
  add(a.zeta, b.zeta);
  add(a.nu, b.nu);
  return std::sqrt(s);
}

double x_distance(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

PresetParams random_valid_preset(std::mt19937_64& rng, bool need_b3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PresetParams p;
  p.b1 = 0.02 + 0.97 * u(rng);
  p.b2 = p.b1 * (0.01 + 0.98 * u(rng));
  p.b3 = need_b3 ? (4 * p.b1 - p.b2) * (0.001 + 0.998 * u(rng)) : 0.0;
  p.delta = 0.01 + 0.2 * u(rng);
  return p;
}

// 1. b3 = 0 reduction, discrete and continuous.
Outcome reduction_identity() {
  std::mt19937_64 rng(101);
  int mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    PresetParams p = random_valid_preset(rng, false);
    p.epsilon = 1e-8;
    const LrSchedule lr(1e-3);
    StepperState s;
    s.x = oracle::uniform_vec(rng, 6, -2, 2);
    s.mu = oracle::uniform_vec(rng, 6, -1, 1);
    s.zeta = oracle::uniform_vec(rng, 6, 0, 1);
    s.nu = oracle::uniform_vec(rng, 6, 0, 1);
    s.iter = static_cast<std::uint64_t>(k);
    const Vec g = oracle::uniform_vec(rng, 6, -3, 3);
    if (!(step_adamssm(s, g, p, lr) == step_adam(s, g, p, lr))) ++mismatches;

    const auto obj = make_quadratic(6, 30);
    const FlowProblem ssm(obj, map_preset_to_general(p, PresetKind::kAdamSSM), s.x, Vec(6, 1.0));
    const FlowProblem adam(obj, map_preset_to_general(p, PresetKind::kAdam), s.x, Vec(6, 1.0));
    FlowState fs{s.x, s.mu, s.zeta, oracle::uniform_vec(rng, 6, 1e-3, 1), 0.3 * k};
    const FlowRates a = rhs_general(fs, fs.t, ssm);
    const FlowRates b = rhs_general(fs, fs.t, adam);
    if (a.dx != b.dx || a.dmu != b.dmu || a.dzeta != b.dzeta || a.dnu != b.dnu) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 100 states x 2 checks"};
}

// 2. Energy identity for the G-AdaGrad flow.
Outcome energy_identity() {
  PresetParams p;
  p.c = 0.5;
  const auto prob = preset_flow(PresetKind::kGAdaGrad, p, make_quadratic(1, 1), Vec{1.0}, Vec{1.0});
  const auto traj = integrate_reference(prob, 1e-4, 5.0, 1);
  double worst = 0;
  for (double r : gadagrad_energy_residual(traj, prob)) worst = std::max(worst, std::abs(r));
  return {worst < 1e-6, "max |residual| = " + fmt("%.3e", worst)};
}

// 3. Hurwitz poles and the reference pole pair.
Outcome hurwitz_poles() {
  std::mt19937_64 rng(103);
  int bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const PresetParams p = random_valid_preset(rng, true);
    validate_preset(p, PresetKind::kAdamSSM);
    for (const auto& z : poles_zeros(adamssm_tf(p.b2, p.b3)).poles) {
      if (!(z.real() < 0)) ++bad;
    }
  }
  // Quadratic formula for s^2 + (2 b2 + b3) s + b2^2 in long double.
  const long double b = 2 * 0.0067L + 0.02L, c = 0.0067L * 0.0067L;
  const long double disc = std::sqrt(b * b - 4 * c);
  const double fast = static_cast<double>((-b - disc) / 2), slow = static_cast<double>((-b + disc) / 2);
  const auto pz = poles_zeros(adamssm_tf(0.0067, 0.02));
  const double err = std::max(std::abs(pz.poles[0].real() - fast), std::abs(pz.poles[1].real() - slow));
  // The pair as printed in the source differs from the quadratic formula.
  const double printed_gap =
      std::max(std::abs(pz.poles[0].real() + 0.0319945), std::abs(pz.poles[1].real() + 0.0014055));
  const bool ok = bad == 0 && err < 1e-6;
  return {ok, std::to_string(bad) + " non-Hurwitz of 10000; poles {" + fmt("%.10f", pz.poles[0].real()) + ", " +
                  fmt("%.10f", pz.poles[1].real()) + "}, |err| vs quadratic formula " + fmt("%.1e", err) +
                  ", vs printed {-0.0319945, -0.0014055} " + fmt("%.1e", printed_gap)};
}

// 4. Closed-form state transition against a matrix-exponential oracle.
Outcome transition_oracle() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.001, 1.0), ut(0.01, 100.0);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    SecondMomentLTI l;
    l.lambda3 = u(rng);
    l.lambda5 = u(rng);
    l.lambda4 = l.lambda5 * u(rng);
    const double t = ut(rng);
    const auto e = state_transition_entries(l, t);
    const auto m = oracle::expm({-l.lambda3, l.lambda3, l.lambda4, -l.lambda5}, t);
    worst = std::max({worst, oracle::rel_err(e.phi12, static_cast<double>(m[1])),
                      oracle::rel_err(e.phi22, static_cast<double>(m[3]))});
  }
  return {worst < 1e-10, "max relative error " + fmt("%.2e", worst)};
}

// 5. Euler is first order, RK4 fourth order, on the Adam flow.
Outcome discretization_order() {
  const auto prob = preset_flow(PresetKind::kAdam, PresetParams{}, make_quadratic(2, 10), Vec{1.0, 1.0}, Vec{1.0, 1.0});
  const double t_end = 5.0;
  const std::vector<double> dts{0.1, 0.05, 0.025, 0.0125};
  const FlowState truth = integrate_reference(prob, 0.0125 / 16, t_end, 1u << 30).states.back();
  std::vector<double> euler_err, rk_err;
  for (double dt : dts) {
    euler_err.push_back(state_distance(integrate_euler(prob, dt, t_end, 1u << 30).states.back(), truth));
    rk_err.push_back(state_distance(integrate_reference(prob, dt, t_end, 1u << 30).states.back(), truth));
  }
  const double s1 = loglog_slope(dts, euler_err), s4 = loglog_slope(dts, rk_err);
  return {std::abs(s1 - 1) <= 0.3 && std::abs(s4 - 4) <= 0.5,
          "Euler slope " + fmt("%.3f", s1) + ", reference slope " + fmt("%.3f", s4)};
}

// 6. Discrete/continuous consistency.
Outcome discrete_consistency() {
  const auto obj = make_quadratic(2, 10);
  const Vec x0{1.0, -0.5}, nu0{0.5, 0.5};
  PresetParams p;
  p.b3 = 0.02;
  p.epsilon = 0;
  const OptimizerParams flow_params = map_preset_to_general(p, PresetKind::kAdamSSM);
  const FlowProblem prob(obj, flow_params, x0, nu0);
  RunOptions opt;
  opt.nu0 = nu0;
  opt.stride = 1;

  // (a) explicit-Euler step form with eta = delta: identical to the Euler flow.
  bool identical = true;
  for (double delta : {0.15, 0.05}) {
    PresetParams q = p;
    q.delta = delta;
    q.eta = delta;
    const std::uint64_t n = 400;
    const Stepper st(StepperConfig{StepperKind::kAdamSSM, q, BiasMode::kFlow, StepForm::kExplicitEuler});
    const auto run = run_discrete(st, obj, x0, n, LrSchedule(delta), opt);
    const auto flow = integrate_euler(prob, delta, static_cast<double>(n) * delta, 1);
    identical = identical && run.trajectory.size() == flow.size();
    for (std::size_t k = 0; identical && k < flow.size(); ++k) {
      const auto& a = run.trajectory.states[k];
      const auto& b = flow.states[k];
      identical = a.x == b.x && a.mu == b.mu && a.zeta == b.zeta && a.nu == b.nu;
    }
  }

  // (b) printed update order (moments first), flow-time bias, eta = delta:
  // distance to the reference flow at T shrinks linearly in delta.
  const double t_end = 6.0;
  const Vec truth = integrate_reference(prob, 1e-3, t_end, 1u << 30).states.back().x;
  const std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errs;
  for (double delta : deltas) {
    PresetParams q = p;
    q.delta = delta;
    const Stepper st(StepperConfig{StepperKind::kAdamSSM, q, BiasMode::kFlow, StepForm::kAlgorithm});
    const auto n = static_cast<std::uint64_t>(std::llround(t_end / delta));
    const auto run = run_discrete(st, obj, x0, n, LrSchedule(delta), RunOptions{1u << 30, 1e-4, nu0});
    errs.push_back(x_distance(run.trajectory.states.back().x, truth));
  }
  const double slope = loglog_slope(deltas, errs);
  const bool shrinking = errs[3] < errs[2] && errs[2] < errs[1] && errs[1] < errs[0];
  return {identical && shrinking && std::abs(slope - 1) <= 0.3,
          std::string("explicit-Euler form ") + (identical ? "bit-identical" : "DIFFERS") +
              "; algorithm-form error slope " + fmt("%.3f", slope) + " (errors " + fmt("%.2e", errs[0]) + " .. " +
              fmt("%.2e", errs[3]) + ")"};
}

// 7. Criticality within per-problem time budgets.
Outcome criticality() {
  struct Problem {
    Objective obj;
    Vec x0;
    double budget;  // flow time, fixed from a prior oracle run
  };
  // Oracle (dt = 0.01, nu0 = 1) first-hit times: quadratic <= 32,
  // Rosenbrock <= 611, logistic <= 261.
  std::vector<Problem> problems{{make_quadratic(2, 100), {1.0, 1.0}, 60.0},
                                {make_rosenbrock(2), {-1.2, 1.0}, 1000.0},
                                {make_logistic(5, 200, 1), Vec(5, 0.0), 400.0}};
  const PresetKind kinds[] = {PresetKind::kGAdaGrad, PresetKind::kAdam, PresetKind::kAdaBelief, PresetKind::kAdamSSM,
                              PresetKind::kAdaBeliefSSM};
  int failures = 0;
  std::string worst;
  double worst_frac = 0;
  for (const auto& pr : problems) {
    for (PresetKind k : kinds) {
      PresetParams p;
      if (k == PresetKind::kAdamSSM || k == PresetKind::kAdaBeliefSSM) p.b3 = 0.02;
      const auto prob = preset_flow(k, p, pr.obj, pr.x0, Vec(pr.obj.dim(), 1.0));
      const auto traj = integrate_reference(prob, 0.01, pr.budget, 10);
      double hit = -1;
      bool in_box = true;
      for (std::size_t i = 0; i < traj.size(); ++i) {
        in_box = in_box && pr.obj.in_box(traj.states[i].x);
        if (hit < 0 && traj.grad_norms[i] < 1e-4) hit = traj.times[i];
      }
      const bool ok = hit >= 0 && traj.min_nu() > 0 && in_box;
      if (!ok) {
        ++failures;
        std::fprintf(stderr, "  criticality: %s/%s hit=%g min_nu=%g in_box=%d\n", pr.obj.name().c_str(),
                     std::string(to_string(k)).c_str(), hit, traj.min_nu(), in_box);
      } else if (hit / pr.budget > worst_frac) {
        worst_frac = hit / pr.budget;
        worst = pr.obj.name() + "/" + std::string(to_string(k)) + " at t=" + fmt("%.2f", hit);
      }
    }
  }
  return {failures == 0, std::to_string(15 - failures) + "/15 reached 1e-4; closest to budget: " + worst};
}

// 8. Validator completeness.
Outcome validator_completeness() {
  int wrong = 0;
  const auto table = cases::single_violations();
  for (const auto& c : table) {
    try {
      validate_params(c.params);
      ++wrong;
    } catch (const ValidationError& e) {
      if (e.failed() != std::vector<std::string>{c.violated}) {
        ++wrong;
        std::fprintf(stderr, "  validator: %s -> %s\n", c.label, e.what());
      }
    }
  }
  PresetParams p;
  p.b3 = 0.02;
  int rejected = 0;
  for (PresetKind k : {PresetKind::kGAdaGrad, PresetKind::kAdam, PresetKind::kAdaBelief, PresetKind::kAdamSSM,
                       PresetKind::kAdaBeliefSSM}) {
    try {
      validate_preset(p, k);
      validate_params(map_preset_to_general(p, k));
    } catch (const ValidationError&) {
      ++rejected;
    }
  }
  return {table.size() == 20 && wrong == 0 && rejected == 0,
          std::to_string(table.size() - static_cast<std::size_t>(wrong)) + "/" + std::to_string(table.size()) +
              " violations named exactly; " + std::to_string(5 - rejected) + "/5 preset mappings accepted"};
}

// 9. Finite-difference gradient checks.
Outcome gradient_oracle() {
  std::mt19937_64 rng(109);
  const std::vector<Objective> objs{make_quadratic(5, 100), make_rosenbrock(2), make_rosenbrock(6),
                                    make_logistic(5, 200, 1)};
  double worst = 0;
  for (const auto& obj : objs) {
    for (int k = 0; k < 100; ++k) {
      const Vec x = oracle::uniform_vec(rng, obj.dim(), -obj.box_half_width(), obj.box_half_width());
      const Vec g = obj.gradient(x);
      const Vec fd = finite_diff_grad(obj, x, 1e-5);
      worst = std::max(worst, x_distance(fd, g) / std::max(l2_norm(g), 1e-8));
    }
  }
  return {worst < 1e-5, "max relative error " + fmt("%.2e", worst) + " over 400 points"};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Byte-identical artifacts from two compare invocations.
Outcome end_to_end_determinism(const std::string& cli, const std::string& config) {
  if (cli.empty() || config.empty()) return {false, "CLI or config path not given"};
  const fs::path root = fs::temp_directory_path() / "ssmopt_acceptance";
  fs::remove_all(root);
  std::vector<fs::path> dirs{root / "a", root / "b"};
  for (const auto& d : dirs) {
    const std::string cmd = "SSMOPT_OUT_DIR='" + d.string() + "' '" + cli + "' compare '" + config + "' >/dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "compare exited non-zero"};
  }
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    ++files;
    const fs::path other = dirs[1] / entry.path().filename();
    if (!fs::exists(other) || read_file(entry.path()) != read_file(other)) ++differing;
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dirs[1])) ++files_b;
  fs::remove_all(root);
  return {files > 0 && differing == 0 && files == files_b,
          std::to_string(files) + " files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::string config = argc > 2 ? argv[2] : "";

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"reduction identity (b3 = 0)", 1, reduction_identity},
      {"G-AdaGrad energy identity", 10, energy_identity},
      {"Hurwitz poles", 1, hurwitz_poles},
      {"state-transition oracle", 5, transition_oracle},
      {"discretization order", 30, discretization_order},
      {"discrete/continuous consistency", 30, discrete_consistency},
      {"criticality within budgets", 120, criticality},
      {"validator completeness", 1, validator_completeness},
      {"gradient oracle", 5, gradient_oracle},
      {"end-to-end determinism", 60, [&] { return end_to_end_determinism(cli, config); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("AC%-2zu %s  %s: %s [%.2fs of %.0fs%s]\n", i + 1, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
