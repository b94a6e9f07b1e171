#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ssmopt/discrete.hpp"
#include "ssmopt/flow.hpp"
#include "ssmopt/kernels.hpp"

using namespace ssmopt;

namespace {

PresetParams ssm_preset(Real b3 = 0.02) {
  PresetParams p;
  p.b3 = b3;
  return p;
}

StepperState random_state(std::mt19937_64& rng, std::size_t d, std::uint64_t iter) {
  StepperState s;
  s.x = oracle::uniform_vec(rng, d, -2, 2);
  s.mu = oracle::uniform_vec(rng, d, -1, 1);
  s.zeta = oracle::uniform_vec(rng, d, 0, 1);
  s.nu = oracle::uniform_vec(rng, d, 0, 1);
  s.iter = iter;
  return s;
}

Objective flat(std::size_t d) {
  return Objective(
      "flat", d, [](std::span<const Real>) { return 0.0; },
      [](std::span<const Real>, std::span<Real> g) { std::fill(g.begin(), g.end(), 0.0); });
}

}  // namespace

TEST_CASE("one AdamSSM step from rest") {
  const PresetParams p = ssm_preset();
  const LrSchedule lr(p.eta);
  const StepperState s = step_adamssm(StepperState::start({1.0}), Vec{1.0}, p, lr);
  CHECK(s.mu[0] == doctest::Approx(0.1005).epsilon(1e-15));
  CHECK(s.nu[0] == doctest::Approx(0.001005).epsilon(1e-15));
  CHECK(s.zeta[0] == 0.0);
  // 1 - 1e-3 * 0.15 / (sqrt(0.15) + 1e-8), evaluated independently.
  CHECK(s.x[0] == doctest::Approx(0.9996127016753793).epsilon(1e-15));
  CHECK(s.iter == 1);
}

TEST_CASE("zero gradient from rest does not move x") {
  const PresetParams p = ssm_preset();
  const LrSchedule lr(p.eta);
  StepperState s = StepperState::start({0.5, -0.25});
  for (int k = 0; k < 50; ++k) {
    s = step_adamssm(s, Vec{0, 0}, p, lr);
    s = step_adabelief(s, Vec{0, 0}, p, lr);
    s = step_adam(s, Vec{0, 0}, p, lr);
  }
  CHECK(s.x == Vec{0.5, -0.25});
}

TEST_CASE("AdamSSM with b3 = 0 is Adam, elementwise exactly") {
  std::mt19937_64 rng(1);
  const PresetParams p = ssm_preset(0.0);
  const LrSchedule lr(p.eta, {{3, 0.5}});
  for (int k = 0; k < 100; ++k) {
    const StepperState s = random_state(rng, 7, static_cast<std::uint64_t>(k % 10));
    const Vec g = oracle::uniform_vec(rng, 7, -3, 3);
    for (BiasMode b : {BiasMode::kPaper, BiasMode::kBeta, BiasMode::kFlow}) {
      CHECK(step_adamssm(s, g, p, lr, b) == step_adam(s, g, p, lr, b));
    }
  }
}

TEST_CASE("step_adam matches textbook Adam in beta form") {
  const PresetParams p;
  const LrSchedule lr(p.eta);
  std::mt19937_64 rng(2);
  StepperState s = StepperState::start({0.7});
  oracle::AdamState o{0.7, 0, 0};
  for (std::uint64_t k = 0; k < 200; ++k) {
    const Real g = std::uniform_real_distribution<Real>(-1, 1)(rng);
    const BiasFactors bf = bias_factors(p, BiasMode::kBeta, k);
    o = oracle::adam_textbook_step(o, g, p.beta1(), p.beta2(), bf.mu, bf.nu, p.eta, p.epsilon);
    s = step_adam(s, Vec{g}, p, lr, BiasMode::kBeta);
  }
  CHECK(s.x[0] == doctest::Approx(o.x).epsilon(1e-12));
  CHECK(s.mu[0] == doctest::Approx(o.m).epsilon(1e-12));
  CHECK(s.nu[0] == doctest::Approx(o.v).epsilon(1e-12));
}

TEST_CASE("bias factors") {
  const PresetParams p;
  const auto paper = bias_factors(p, BiasMode::kPaper, 0);
  CHECK(paper.mu == doctest::Approx(0.67));
  CHECK(paper.nu == doctest::Approx(0.0067));
  const auto beta = bias_factors(p, BiasMode::kBeta, 0);
  CHECK(beta.mu == doctest::Approx(1 - p.beta1()));
  const auto flow = bias_factors(p, BiasMode::kFlow, 10);
  CHECK(flow.mu == doctest::Approx(1 - std::pow(0.33, 2.5)));
  CHECK(bias_mode_from_string("beta") == BiasMode::kBeta);
  CHECK_THROWS_AS(bias_mode_from_string("none"), std::invalid_argument);
}

TEST_CASE("AdaBelief first step uses the updated first moment") {
  const PresetParams p;
  const LrSchedule lr(p.eta);
  const Real g = 1.7;
  const StepperState s = step_adabelief(StepperState::start({0.0}), Vec{g}, p, lr);
  const Real keep = 1 - p.delta * p.b1;
  CHECK(s.nu[0] == doctest::Approx(p.delta * p.b2 * keep * keep * g * g).epsilon(1e-14));
}

TEST_CASE("AdaBelief second moment dies out under a constant gradient") {
  const PresetParams p;
  const LrSchedule lr(p.eta);
  StepperState s = StepperState::start({0.0});
  for (int k = 0; k < 10000; ++k) s = step_adabelief(s, Vec{1.0}, p, lr);
  const BiasFactors bf = bias_factors(p, BiasMode::kPaper, s.iter - 1);
  CHECK(s.nu[0] / bf.nu < 1e-6);
  CHECK(s.mu[0] == doctest::Approx(1.0));
}

TEST_CASE("G-AdaGrad two steps on a 1-D quadratic") {
  StepperState s = StepperState::start({1.0}, {1.0});
  s = step_gadagrad(s, Vec{s.x[0]}, 0.5, 1.0, 0.0, 1.0);
  CHECK(s.nu[0] == 2.0);
  CHECK(s.x[0] == doctest::Approx(0.29289321881345254).epsilon(1e-15));
  const Real nu1 = s.nu[0];
  s = step_gadagrad(s, Vec{s.x[0]}, 0.5, 1.0, 0.0, 1.0);
  CHECK(s.nu[0] >= nu1);
}

TEST_CASE("G-AdaGrad with c = 0.5 is AdaGrad") {
  std::mt19937_64 rng(3);
  StepperState s = StepperState::start({0.3, -0.2});
  Vec acc(2, 0.0), x = s.x;
  for (int k = 0; k < 30; ++k) {
    const Vec g = oracle::uniform_vec(rng, 2, -1, 1);
    s = step_gadagrad(s, g, 0.5, 0.1, 1e-8, 1.0);
    for (std::size_t i = 0; i < 2; ++i) {
      acc[i] += g[i] * g[i];
      x[i] -= 0.1 * g[i] / (std::sqrt(acc[i]) + 1e-8);
    }
  }
  CHECK(s.x[0] == doctest::Approx(x[0]).epsilon(1e-13));
  CHECK(s.x[1] == doctest::Approx(x[1]).epsilon(1e-13));
}

TEST_CASE("property: G-AdaGrad accumulator never decreases") {
  std::mt19937_64 rng(4);
  StepperState s = StepperState::start(Vec(3, 0.0));
  for (int k = 0; k < 200; ++k) {
    const Vec before = s.nu;
    s = step_gadagrad(s, oracle::uniform_vec(rng, 3, -10, 10), 0.3, 0.01, 1e-8, 0.5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(s.nu[i] >= before[i]);
  }
}

TEST_CASE("SGD with momentum") {
  StepperState s = StepperState::start({1.0});
  CHECK(step_sgd_momentum(s, Vec{1.0}, 0.0, 0.1).x[0] == doctest::Approx(0.9));
  CHECK(step_sgd_momentum(s, Vec{1.0}, 0.9, 0.1).x[0] == doctest::Approx(0.9));

  s.mu = {2.0};
  for (int k = 1; k <= 5; ++k) {
    s = step_sgd_momentum(s, Vec{0.0}, 0.5, 0.1);
    CHECK(s.mu[0] == doctest::Approx(2.0 * std::pow(0.5, k)));
  }
}

TEST_CASE("learning-rate schedule") {
  const LrSchedule lr(0.1, {{10, 0.5}, {20, 0.1}});
  CHECK(lr.eta(0) == 0.1);
  CHECK(lr.eta(9) == 0.1);
  CHECK(lr.eta(10) == 0.05);
  CHECK(lr.eta(25) == doctest::Approx(0.005));
  CHECK_THROWS_AS(LrSchedule(0.1, {{10, 0.5}, {10, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(LrSchedule(0.0), std::invalid_argument);
}

TEST_CASE("unstable second-moment retention is refused") {
  PresetParams p = ssm_preset(5.0);
  p.delta = 0.5;
  const LrSchedule lr(p.eta);
  CHECK_THROWS_AS(step_adamssm(StepperState::start({1.0}), Vec{1.0}, p, lr), InstabilityError);
  CHECK_THROWS_AS(Stepper(StepperConfig{StepperKind::kAdamSSM, p}), InstabilityError);
}

TEST_CASE("property: nu stays non-negative from rest") {
  std::mt19937_64 rng(5);
  const PresetParams p = ssm_preset(0.04);
  const LrSchedule lr(p.eta);
  StepperState a = StepperState::start(Vec(4, 0.0)), b = a;
  for (int k = 0; k < 500; ++k) {
    const Vec g = oracle::uniform_vec(rng, 4, -5, 5);
    a = step_adamssm(a, g, p, lr);
    b = step_adabelief(b, g, p, lr);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(a.nu[i] >= 0);
      CHECK(b.nu[i] >= 0);
    }
  }
}

TEST_CASE("first Adam update is invariant to gradient scale") {
  PresetParams p;
  p.epsilon = 0;
  const LrSchedule lr(p.eta);
  const StepperState s = StepperState::start({0.0, 0.0});
  const StepperState one = step_adam(s, Vec{0.3, -2.0}, p, lr);
  for (Real k : {1e-3, 7.0, 1e4}) {
    const StepperState scaled = step_adam(s, Vec{0.3 * k, -2.0 * k}, p, lr);
    CHECK(scaled.x[0] == doctest::Approx(one.x[0]).epsilon(1e-13));
    CHECK(scaled.x[1] == doctest::Approx(one.x[1]).epsilon(1e-13));
    const StepperState ssm = step_adamssm(s, Vec{0.3 * k, -2.0 * k}, ssm_preset(), lr);
    CHECK(std::signbit(ssm.x[0]) != std::signbit(0.3));
    CHECK(std::signbit(ssm.x[1]) != std::signbit(-2.0));
  }
}

TEST_CASE("AdamSSM is Lipschitz in b3 at zero") {
  std::mt19937_64 rng(6);
  const LrSchedule lr(1e-3);
  const StepperState s = random_state(rng, 5, 4);
  const Vec g = oracle::uniform_vec(rng, 5, -1, 1);
  const StepperState base = step_adamssm(s, g, ssm_preset(0.0), lr);
  Real prev_ratio = -1;
  for (Real h : {1e-4, 1e-5, 1e-6}) {
    const StepperState moved = step_adamssm(s, g, ssm_preset(h), lr);
    Real diff = 0;
    for (std::size_t i = 0; i < 5; ++i) diff = std::max(diff, std::abs(moved.x[i] - base.x[i]));
    const Real ratio = diff / h;
    CHECK(ratio < 10);
    if (prev_ratio > 0) CHECK(ratio == doctest::Approx(prev_ratio).epsilon(0.05));
    prev_ratio = ratio;
  }
}

TEST_CASE("explicit-Euler form reproduces the Euler flow bit for bit") {
  PresetParams p = ssm_preset();
  p.epsilon = 0;
  p.eta = p.delta;
  const auto obj = make_quadratic(3, 20);
  const Vec x0{1.0, -0.5, 0.25}, nu0(3, 0.5);
  const Stepper stepper(StepperConfig{StepperKind::kAdamSSM, p, BiasMode::kFlow, StepForm::kExplicitEuler});
  RunOptions opt;
  opt.nu0 = nu0;
  const auto run = run_discrete(stepper, obj, x0, 200, LrSchedule(p.eta), opt);
  const FlowProblem prob(obj, map_preset_to_general(p, PresetKind::kAdamSSM), x0, nu0);
  const auto flow = integrate_euler(prob, p.delta, 200 * p.delta);
  REQUIRE(flow.size() == run.trajectory.size());
  for (std::size_t k = 0; k < flow.size(); ++k) {
    CHECK(run.trajectory.states[k].x == flow.states[k].x);
    CHECK(run.trajectory.states[k].nu == flow.states[k].nu);
    CHECK(run.trajectory.alpha_values[k] == flow.alpha_values[k]);
  }
}

TEST_CASE("explicit-Euler form preconditions") {
  PresetParams p = ssm_preset();
  CHECK_THROWS_AS(Stepper(StepperConfig{StepperKind::kAdamSSM, p, BiasMode::kFlow, StepForm::kExplicitEuler}),
                  std::invalid_argument);
  p.epsilon = 0;
  CHECK_THROWS_AS(Stepper(StepperConfig{StepperKind::kAdamSSM, p, BiasMode::kPaper, StepForm::kExplicitEuler}),
                  std::invalid_argument);
  const Stepper ok(StepperConfig{StepperKind::kAdamSSM, p, BiasMode::kFlow, StepForm::kExplicitEuler});
  StepperState s = StepperState::start({1.0});
  CHECK_THROWS_AS(ok.step(s, Vec{1.0}, LrSchedule(p.eta)), DomainError);
}

TEST_CASE("run report basics") {
  const auto obj = make_quadratic(2, 100);
  const Vec x0{1.0, 1.0};
  const Stepper st(StepperConfig{StepperKind::kAdamSSM, ssm_preset()});

  const auto zero = run_discrete(st, obj, x0, 0, LrSchedule(1e-3));
  CHECK(zero.report.best_f == obj.value(x0));
  CHECK(zero.report.best_iter == 0);
  CHECK(zero.report.final_grad_norm == l2_norm(obj.gradient(x0)));
  CHECK(zero.trajectory.size() == 1);
  CHECK_FALSE(zero.report.iters_to_threshold);

  const auto run = run_discrete(st, obj, x0, 300, LrSchedule(1e-3), RunOptions{10, 1e-4, {}});
  CHECK(run.report.best_f <= obj.value(x0));
  CHECK(run.trajectory.size() == 31);
  CHECK(run.report.nu_nonnegative);
  CHECK(run.report.stayed_in_box);
}

TEST_CASE("AdamSSM defaults converge on the ill-conditioned quadratic") {
  const auto obj = make_quadratic(2, 100);
  const Stepper st(StepperConfig{StepperKind::kAdamSSM, ssm_preset()});
  const auto run = run_discrete(st, obj, Vec{1.0, 1.0}, 5000, LrSchedule(1e-3), RunOptions{100, 1e-4, {}});
  CHECK(run.report.final_grad_norm < 1e-4);
  REQUIRE(run.report.iters_to_threshold);
  CHECK(*run.report.iters_to_threshold <= 5000);
}

TEST_CASE("zero-gradient objective keeps every stepper still") {
  for (StepperKind k : {StepperKind::kGAdaGrad, StepperKind::kAdam, StepperKind::kAdaBelief, StepperKind::kAdamSSM,
                        StepperKind::kAdaBeliefSSM, StepperKind::kSgdMomentum}) {
    const Stepper st(StepperConfig{k, ssm_preset()});
    const auto run = run_discrete(st, flat(2), Vec{0.1, 0.2}, 20, LrSchedule(0.01));
    CHECK(run.trajectory.states.back().x == Vec{0.1, 0.2});
  }
}

TEST_CASE("trajectories do not depend on the kernel variant") {
  if (!kernels::isa_supported(kernels::Isa::kAvx2)) return;
  const auto obj = make_rosenbrock(9);
  const Vec x0(9, -0.5);
  const kernels::Isa before = kernels::active_isa();
  for (StepperKind k : {StepperKind::kAdam, StepperKind::kAdaBelief, StepperKind::kAdamSSM,
                        StepperKind::kAdaBeliefSSM}) {
    const Stepper st(StepperConfig{k, ssm_preset()});
    kernels::set_active_isa(kernels::Isa::kScalar);
    const auto a = run_discrete(st, obj, x0, 500, LrSchedule(1e-3), RunOptions{50, 1e-4, {}});
    kernels::set_active_isa(kernels::Isa::kAvx2);
    const auto b = run_discrete(st, obj, x0, 500, LrSchedule(1e-3), RunOptions{50, 1e-4, {}});
    CHECK(a.trajectory.states == b.trajectory.states);
  }
  kernels::set_active_isa(before);
}

TEST_CASE("stepper kind names round-trip") {
  for (StepperKind k : {StepperKind::kGAdaGrad, StepperKind::kAdam, StepperKind::kAdaBelief, StepperKind::kAdamSSM,
                        StepperKind::kAdaBeliefSSM, StepperKind::kSgdMomentum}) {
    CHECK(stepper_kind_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(flow_kind(StepperKind::kSgdMomentum));
  CHECK(flow_kind(StepperKind::kAdamSSM) == PresetKind::kAdamSSM);
}
