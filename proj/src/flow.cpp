#include "ssmopt/flow.hpp"

#include <cmath>

#include "ssmopt/kernels.hpp"

namespace ssmopt {

FlowProblem::FlowProblem(Objective objective, OptimizerParams params, Vec x0, Vec nu0)
    : objective_(std::move(objective)),
      params_(validate_params(params)),
      x0_(std::move(x0)),
      nu0_(std::move(nu0)) {
  if (x0_.size() != objective_.dim() || nu0_.size() != objective_.dim()) {
    throw std::invalid_argument("flow problem: x0/nu0 dimension does not match objective");
  }
  for (Real v : nu0_) {
    if (!(v > 0)) throw DomainError("flow problem: nu0 must be componentwise positive");
  }
}

FlowState FlowProblem::initial_state() const {
  FlowState s = FlowState::zeros(dim());
  s.x = x0_;
  s.nu = nu0_;
  return s;
}

FlowRates FlowRates::zeros(std::size_t dim) {
  return FlowRates{Vec(dim, 0.0), Vec(dim, 0.0), Vec(dim, 0.0), Vec(dim, 0.0)};
}

StepFailure::StepFailure(Real t, FlowState state, const std::string& reason)
    : std::runtime_error("integration failed at t=" + format_real(t) + ": " + reason),
      t_(t),
      state_(std::move(state)) {}

Real l2_norm(std::span<const Real> v) noexcept {
  Real s = 0;
  for (Real e : v) s += e * e;
  return std::sqrt(s);
}

void rhs_general(const FlowState& state, Real t, const FlowProblem& problem, Vec& grad,
                 FlowRates& out) {
  for (Real v : state.nu) {
    if (!(v > 0)) throw DomainError("rhs_general: nu must be positive (got " + format_real(v) + ")");
  }
  problem.objective().gradient(state.x, grad);
  const kernels::RhsCoeffs coeffs{problem.params(), alpha_g(t, problem.params())};
  kernels::flow_rhs(coeffs, {state.mu, state.zeta, state.nu, grad},
                    {out.dx, out.dmu, out.dzeta, out.dnu});
}

FlowRates rhs_general(const FlowState& state, Real t, const FlowProblem& problem) {
  FlowRates out = FlowRates::zeros(state.dim());
  Vec grad(state.dim());
  rhs_general(state, t, problem, grad, out);
  return out;
}

namespace {

// y <- base + h * k, blockwise
void axpy_state(const FlowState& base, const FlowRates& k, Real h, FlowState& y) {
  const std::size_t d = base.dim();
  for (std::size_t i = 0; i < d; ++i) {
    y.x[i] = base.x[i] + h * k.dx[i];
    y.mu[i] = base.mu[i] + h * k.dmu[i];
    y.zeta[i] = base.zeta[i] + h * k.dzeta[i];
    y.nu[i] = base.nu[i] + h * k.dnu[i];
  }
}

std::size_t step_count(Real dt, Real t_end) {
  if (!(dt > 0)) throw std::invalid_argument("integrator: dt must be positive");
  if (!(t_end >= dt)) throw std::invalid_argument("integrator: t_end must be >= dt");
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

class Recorder {
 public:
  Recorder(const FlowProblem& problem, std::size_t stride, std::size_t steps)
      : problem_(problem), stride_(stride == 0 ? 1 : stride), steps_(steps), grad_(problem.dim()) {
    traj_.times.reserve(steps / stride_ + 2);
  }

  void maybe_record(std::size_t k, const FlowState& s) {
    if (k % stride_ != 0 && k != steps_) return;
    problem_.objective().gradient(s.x, grad_);
    traj_.append(s, problem_.objective().value(s.x), l2_norm(grad_), alpha_g(s.t, problem_.params()));
  }

  Trajectory take() { return std::move(traj_); }

 private:
  const FlowProblem& problem_;
  std::size_t stride_;
  std::size_t steps_;
  Vec grad_;
  Trajectory traj_;
};

void check_positive(const FlowState& s, Real t) {
  for (Real v : s.nu) {
    if (!(v > 0)) throw StepFailure(t, s, "nu left the positive orthant");
  }
}

}  // namespace

Trajectory integrate_euler(const FlowProblem& problem, Real dt, Real t_end, std::size_t stride) {
  const std::size_t steps = step_count(dt, t_end);
  const std::size_t d = problem.dim();
  Recorder rec(problem, stride, steps);

  FlowState s = problem.initial_state();
  FlowState next = s;
  FlowRates k = FlowRates::zeros(d);
  Vec grad(d);
  rec.maybe_record(0, s);
  for (std::size_t n = 0; n < steps; ++n) {
    const Real t = static_cast<Real>(n) * dt;
    rhs_general(s, t, problem, grad, k);
    axpy_state(s, k, dt, next);
    next.t = static_cast<Real>(n + 1) * dt;
    check_positive(next, next.t);
    std::swap(s, next);
    rec.maybe_record(n + 1, s);
  }
  return rec.take();
}

Trajectory integrate_reference(const FlowProblem& problem, Real dt, Real t_end, std::size_t stride) {
  const std::size_t steps = step_count(dt, t_end);
  const std::size_t d = problem.dim();
  Recorder rec(problem, stride, steps);

  FlowState s = problem.initial_state();
  FlowState stage = s;
  FlowRates k1 = FlowRates::zeros(d), k2 = k1, k3 = k1, k4 = k1;
  Vec grad(d);
  rec.maybe_record(0, s);
  for (std::size_t n = 0; n < steps; ++n) {
    const Real t = static_cast<Real>(n) * dt;
    try {
      rhs_general(s, t, problem, grad, k1);
      axpy_state(s, k1, 0.5 * dt, stage);
      rhs_general(stage, t + 0.5 * dt, problem, grad, k2);
      axpy_state(s, k2, 0.5 * dt, stage);
      rhs_general(stage, t + 0.5 * dt, problem, grad, k3);
      axpy_state(s, k3, dt, stage);
      rhs_general(stage, t + dt, problem, grad, k4);
    } catch (const DomainError& e) {
      throw StepFailure(t, stage, e.what());
    }
    const Real w = dt / 6;
    for (std::size_t i = 0; i < d; ++i) {
      s.x[i] += w * (k1.dx[i] + 2 * k2.dx[i] + 2 * k3.dx[i] + k4.dx[i]);
      s.mu[i] += w * (k1.dmu[i] + 2 * k2.dmu[i] + 2 * k3.dmu[i] + k4.dmu[i]);
      s.zeta[i] += w * (k1.dzeta[i] + 2 * k2.dzeta[i] + 2 * k3.dzeta[i] + k4.dzeta[i]);
      s.nu[i] += w * (k1.dnu[i] + 2 * k2.dnu[i] + 2 * k3.dnu[i] + k4.dnu[i]);
    }
    s.t = static_cast<Real>(n + 1) * dt;
    check_positive(s, s.t);
    rec.maybe_record(n + 1, s);
  }
  return rec.take();
}

bool is_gadagrad_mapping(const OptimizerParams& p) noexcept {
  return p.zeta_coupling == 0 && p.nu_decay == 0 && p.nu_gain == 1 && p.momentum_weight == 0 &&
         p.gradient_weight == 1 && p.psi == PsiKind::kSquaredGradient;
}

Vec gadagrad_energy_residual(const Trajectory& traj, const FlowProblem& problem) {
  if (!is_gadagrad_mapping(problem.params())) {
    throw PresetMismatch("energy identity only holds for the G-AdaGrad embedding");
  }
  Vec out;
  if (traj.empty()) return out;
  out.reserve(traj.size());

  const Real c = problem.params().exponent;
  const Real one_minus_c = 1 - c;
  const std::size_t d = problem.dim();
  const Objective& obj = problem.objective();
  const Vec& acc0 = traj.states.front().nu;
  const Real f0 = obj.value(traj.states.front().x);

  Vec integral(d, 0.0);
  Vec g_prev = obj.gradient(traj.states.front().x);
  Vec g(d);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (k > 0) {
      obj.gradient(traj.states[k].x, g);
      const Real h = traj.times[k] - traj.times[k - 1];
      for (std::size_t i = 0; i < d; ++i) {
        integral[i] += 0.5 * h * (g_prev[i] * g_prev[i] + g[i] * g[i]);
      }
      std::swap(g_prev, g);
    }
    Real predicted = f0;
    for (std::size_t i = 0; i < d; ++i) {
      predicted += (std::pow(acc0[i], one_minus_c) - std::pow(acc0[i] + integral[i], one_minus_c)) /
                   one_minus_c;
    }
    out.push_back(obj.value(traj.states[k].x) - predicted);
  }
  return out;
}

FlowProblem preset_flow(PresetKind kind, const PresetParams& preset, Objective objective, Vec x0,
                        Vec nu0) {
  validate_preset(preset, kind);
  return FlowProblem(std::move(objective), map_preset_to_general(preset, kind), std::move(x0),
                     std::move(nu0));
}

}  // namespace ssmopt
