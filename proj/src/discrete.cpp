#include "ssmopt/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssmopt/flow.hpp"
#include "ssmopt/kernels.hpp"

namespace ssmopt {

StepperState StepperState::start(Vec x0, Vec nu0) {
  const std::size_t d = x0.size();
  StepperState s{std::move(x0), Vec(d, 0.0), Vec(d, 0.0), Vec(d, 0.0), 0};
  if (!nu0.empty()) {
    if (nu0.size() != d) throw std::invalid_argument("nu0 dimension does not match x0");
    s.nu = std::move(nu0);
  }
  return s;
}

LrSchedule::LrSchedule(Real base_eta, std::vector<Milestone> milestones)
    : base_eta_(base_eta), milestones_(std::move(milestones)) {
  if (!(base_eta_ > 0)) throw std::invalid_argument("schedule: base eta must be positive");
  for (std::size_t i = 0; i < milestones_.size(); ++i) {
    if (!(milestones_[i].multiplier > 0)) {
      throw std::invalid_argument("schedule: milestone multipliers must be positive");
    }
    if (i > 0 && milestones_[i].iteration <= milestones_[i - 1].iteration) {
      throw std::invalid_argument("schedule: milestones must be strictly increasing");
    }
  }
}

Real LrSchedule::eta(std::uint64_t iter) const noexcept {
  Real eta = base_eta_;
  for (const auto& m : milestones_) {
    if (m.iteration > iter) break;
    eta *= m.multiplier;
  }
  return eta;
}

std::string_view to_string(BiasMode mode) noexcept {
  switch (mode) {
    case BiasMode::kPaper:
      return "paper";
    case BiasMode::kBeta:
      return "beta";
    case BiasMode::kFlow:
      return "flow";
  }
  return "unknown";
}

BiasMode bias_mode_from_string(std::string_view name) {
  for (auto m : {BiasMode::kPaper, BiasMode::kBeta, BiasMode::kFlow}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown bias mode '" + std::string(name) + "'");
}

BiasFactors bias_factors(const PresetParams& p, BiasMode mode, std::uint64_t iter) {
  const Real t = static_cast<Real>(iter);
  switch (mode) {
    case BiasMode::kPaper:
      return {1 - std::pow(1 - p.b1, t + 1), 1 - std::pow(1 - p.b2, t + 1)};
    case BiasMode::kBeta:
      return {1 - std::pow(p.beta1(), t + 1), 1 - std::pow(p.beta2(), t + 1)};
    case BiasMode::kFlow:
      return {1 - std::pow(1 - p.b1, t * p.delta + 1), 1 - std::pow(1 - p.b2, t * p.delta + 1)};
  }
  return {1, 1};
}

namespace {

void check_grad(const StepperState& s, std::span<const Real> grad) {
  if (grad.size() != s.dim() || s.mu.size() != s.dim() || s.zeta.size() != s.dim() ||
      s.nu.size() != s.dim()) {
    throw std::invalid_argument("stepper: state/gradient dimension mismatch");
  }
}

void check_retention(const PresetParams& p, Real b3) {
  if (1 - p.delta * p.b2 - p.delta * b3 < 0) {
    throw InstabilityError("1 - delta*b2 - delta*b3 = " + format_real(1 - p.delta * p.b2 - p.delta * b3) +
                           " < 0; second-moment recursion would not be stable");
  }
}

kernels::StepArrays arrays(StepperState& s) { return {s.x, s.mu, s.zeta, s.nu}; }

void ssm_inplace(StepperState& s, std::span<const Real> grad, const PresetParams& p, Real b3,
                 PsiKind psi, Real eta, BiasMode bias) {
  check_grad(s, grad);
  check_retention(p, b3);
  const Real d = p.delta;
  const BiasFactors bf = bias_factors(p, bias, s.iter);
  const kernels::SsmStepCoeffs k{1 - d * p.b1, d * p.b1,        1 - d * p.b2, d * p.b2,
                                 d * b3,       1 - d * p.b2 - d * b3, d * p.b2,
                                 bf.mu,        bf.nu,            eta,          p.epsilon,
                                 psi};
  kernels::ssm_step(k, arrays(s), grad);
  ++s.iter;
}

void adam_inplace(StepperState& s, std::span<const Real> grad, const PresetParams& p, Real eta,
                  BiasMode bias) {
  check_grad(s, grad);
  check_retention(p, 0);
  const Real d = p.delta;
  const BiasFactors bf = bias_factors(p, bias, s.iter);
  const kernels::AdamStepCoeffs k{1 - d * p.b1, d * p.b1, 1 - d * p.b2, d * p.b2, bf.mu, bf.nu,
                                  eta,          p.epsilon, PsiKind::kSquaredGradient};
  kernels::adam_step(k, arrays(s), grad);
  ++s.iter;
}

void gadagrad_inplace(StepperState& s, std::span<const Real> grad, Real c, Real eta, Real epsilon,
                      Real delta) {
  check_grad(s, grad);
  if (!(c > 0 && c < 1)) throw std::invalid_argument("G-AdaGrad: c must lie in (0, 1)");
  const Real step = delta * eta;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const Real g = grad[i];
    const Real acc = s.nu[i] + delta * (g * g);
    s.nu[i] = acc;
    if (g == 0) continue;
    const Real den = std::pow(acc, c) + epsilon;
    if (!(den > 0)) throw DomainError("G-AdaGrad: zero accumulator with nonzero gradient");
    s.x[i] = s.x[i] - step * g / den;
  }
  ++s.iter;
}

void sgd_inplace(StepperState& s, std::span<const Real> grad, Real beta, Real eta) {
  check_grad(s, grad);
  if (!(beta >= 0 && beta < 1)) throw std::invalid_argument("SGD momentum: beta must lie in [0, 1)");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    s.mu[i] = beta * s.mu[i] + grad[i];
    s.x[i] = s.x[i] - eta * s.mu[i];
  }
  ++s.iter;
}

}  // namespace

StepperState step_adamssm(const StepperState& state, std::span<const Real> grad,
                          const PresetParams& preset, const LrSchedule& schedule, BiasMode bias) {
  StepperState s = state;
  ssm_inplace(s, grad, preset, preset.b3, PsiKind::kSquaredGradient, schedule.eta(state.iter), bias);
  return s;
}

StepperState step_adam(const StepperState& state, std::span<const Real> grad,
                       const PresetParams& preset, const LrSchedule& schedule, BiasMode bias) {
  StepperState s = state;
  adam_inplace(s, grad, preset, schedule.eta(state.iter), bias);
  return s;
}

StepperState step_adabelief(const StepperState& state, std::span<const Real> grad,
                            const PresetParams& preset, const LrSchedule& schedule, BiasMode bias) {
  StepperState s = state;
  ssm_inplace(s, grad, preset, preset.b3, PsiKind::kBelief, schedule.eta(state.iter), bias);
  return s;
}

StepperState step_gadagrad(const StepperState& state, std::span<const Real> grad, Real c, Real eta,
                           Real epsilon, Real delta) {
  StepperState s = state;
  gadagrad_inplace(s, grad, c, eta, epsilon, delta);
  return s;
}

StepperState step_sgd_momentum(const StepperState& state, std::span<const Real> grad, Real beta,
                               Real eta) {
  StepperState s = state;
  sgd_inplace(s, grad, beta, eta);
  return s;
}

std::string_view to_string(StepperKind kind) noexcept {
  switch (kind) {
    case StepperKind::kGAdaGrad:
      return "gadagrad";
    case StepperKind::kAdam:
      return "adam";
    case StepperKind::kAdaBelief:
      return "adabelief";
    case StepperKind::kAdamSSM:
      return "adamssm";
    case StepperKind::kAdaBeliefSSM:
      return "adabelief_ssm";
    case StepperKind::kSgdMomentum:
      return "sgd_momentum";
  }
  return "unknown";
}

StepperKind stepper_kind_from_string(std::string_view name) {
  for (auto k : {StepperKind::kGAdaGrad, StepperKind::kAdam, StepperKind::kAdaBelief,
                 StepperKind::kAdamSSM, StepperKind::kAdaBeliefSSM, StepperKind::kSgdMomentum}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown optimizer kind '" + std::string(name) + "'");
}

std::optional<PresetKind> flow_kind(StepperKind kind) noexcept {
  switch (kind) {
    case StepperKind::kGAdaGrad:
      return PresetKind::kGAdaGrad;
    case StepperKind::kAdam:
      return PresetKind::kAdam;
    case StepperKind::kAdaBelief:
      return PresetKind::kAdaBelief;
    case StepperKind::kAdamSSM:
      return PresetKind::kAdamSSM;
    case StepperKind::kAdaBeliefSSM:
      return PresetKind::kAdaBeliefSSM;
    case StepperKind::kSgdMomentum:
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

bool adam_family(StepperKind k) {
  return k == StepperKind::kAdam || k == StepperKind::kAdaBelief || k == StepperKind::kAdamSSM ||
         k == StepperKind::kAdaBeliefSSM;
}

Real effective_b3(const StepperConfig& c) {
  return (c.kind == StepperKind::kAdamSSM || c.kind == StepperKind::kAdaBeliefSSM) ? c.preset.b3 : 0;
}

}  // namespace

Stepper::Stepper(StepperConfig config) : config_(std::move(config)) {
  if (adam_family(config_.kind)) check_retention(config_.preset, effective_b3(config_));
  if (config_.kind == StepperKind::kSgdMomentum &&
      !(config_.momentum >= 0 && config_.momentum < 1)) {
    throw std::invalid_argument("SGD momentum: beta must lie in [0, 1)");
  }
  if (config_.form == StepForm::kExplicitEuler) {
    const auto fk = flow_kind(config_.kind);
    if (!fk) throw std::invalid_argument("explicit Euler form has no flow for SGD momentum");
    if (adam_family(config_.kind) && config_.bias != BiasMode::kFlow) {
      throw std::invalid_argument("explicit Euler form requires bias_mode = flow");
    }
    if (config_.preset.epsilon != 0) {
      throw std::invalid_argument("explicit Euler form requires epsilon = 0 (use nu0 > 0 instead)");
    }
    PresetParams p = config_.preset;
    if (!adam_family(config_.kind) || effective_b3(config_) == 0) p.b3 = 0;
    flow_params_ = map_preset_to_general(p, *fk);
  }
}

Real Stepper::alpha(std::uint64_t iter) const {
  if (!adam_family(config_.kind)) return 1;
  if (config_.form == StepForm::kExplicitEuler) {
    return alpha_g(static_cast<Real>(iter) * config_.preset.delta, flow_params_);
  }
  const BiasFactors bf = bias_factors(config_.preset, config_.bias, iter);
  return bf.mu / std::sqrt(bf.nu);
}

void Stepper::explicit_euler_step(StepperState& s, std::span<const Real> grad, Real eta) const {
  check_grad(s, grad);
  for (Real v : s.nu) {
    if (!(v > 0)) throw DomainError("explicit Euler step needs nu > 0");
  }
  const std::size_t d = s.dim();
  const Real delta = config_.preset.delta;
  const Real t = static_cast<Real>(s.iter) * delta;
  FlowRates r = FlowRates::zeros(d);
  kernels::flow_rhs({flow_params_, alpha_g(t, flow_params_)}, {s.mu, s.zeta, s.nu, grad},
                    {r.dx, r.dmu, r.dzeta, r.dnu});
  for (std::size_t i = 0; i < d; ++i) {
    s.x[i] = s.x[i] + eta * r.dx[i];
    s.mu[i] = s.mu[i] + delta * r.dmu[i];
    s.zeta[i] = s.zeta[i] + delta * r.dzeta[i];
    s.nu[i] = s.nu[i] + delta * r.dnu[i];
  }
  ++s.iter;
}

void Stepper::step(StepperState& state, std::span<const Real> grad, const LrSchedule& schedule) const {
  const Real eta = schedule.eta(state.iter);
  const PresetParams& p = config_.preset;
  if (config_.form == StepForm::kExplicitEuler) {
    explicit_euler_step(state, grad, eta);
    return;
  }
  switch (config_.kind) {
    case StepperKind::kAdamSSM:
      ssm_inplace(state, grad, p, p.b3, PsiKind::kSquaredGradient, eta, config_.bias);
      return;
    case StepperKind::kAdam:
      adam_inplace(state, grad, p, eta, config_.bias);
      return;
    case StepperKind::kAdaBelief:
      ssm_inplace(state, grad, p, 0, PsiKind::kBelief, eta, config_.bias);
      return;
    case StepperKind::kAdaBeliefSSM:
      ssm_inplace(state, grad, p, p.b3, PsiKind::kBelief, eta, config_.bias);
      return;
    case StepperKind::kGAdaGrad:
      gadagrad_inplace(state, grad, p.c, eta, p.epsilon, p.delta);
      return;
    case StepperKind::kSgdMomentum:
      sgd_inplace(state, grad, config_.momentum, eta);
      return;
  }
}

DiscreteRun run_discrete(const Stepper& stepper, const Objective& objective, const Vec& x0,
                         std::uint64_t num_iters, const LrSchedule& schedule,
                         const RunOptions& options) {
  if (x0.size() != objective.dim()) throw std::invalid_argument("x0 dimension does not match objective");
  const std::size_t stride = options.stride == 0 ? 1 : options.stride;

  DiscreteRun run;
  RunReport& rep = run.report;
  rep.name = std::string(to_string(stepper.config().kind));
  rep.threshold = options.threshold;
  rep.total_iters = num_iters;

  StepperState s = StepperState::start(x0, options.nu0);
  Vec grad = objective.gradient(s.x);
  for (std::uint64_t k = 0;; ++k) {
    const Real f = objective.value(s.x);
    if (!std::isfinite(f)) {
      throw DomainError("non-finite objective value at iteration " + std::to_string(k));
    }
    const Real gn = l2_norm(grad);
    if (k == 0 || f < rep.best_f) {
      rep.best_f = f;
      rep.best_iter = k;
    }
    if (!rep.iters_to_threshold && gn < options.threshold) rep.iters_to_threshold = k;
    for (Real v : s.nu) rep.nu_nonnegative = rep.nu_nonnegative && v >= 0;
    rep.stayed_in_box = rep.stayed_in_box && objective.in_box(s.x);
    if (k % stride == 0 || k == num_iters) {
      run.trajectory.append(FlowState{s.x, s.mu, s.zeta, s.nu, static_cast<Real>(k)}, f, gn,
                            stepper.alpha(k));
    }
    if (k == num_iters) {
      rep.final_grad_norm = gn;
      break;
    }
    stepper.step(s, grad, schedule);
    objective.gradient(s.x, grad);
  }
  return run;
}

}  // namespace ssmopt
