#pragma once

// Continuous-time optimizer flows: the generic right-hand side, fixed-step
// integrators, and the G-AdaGrad energy-identity diagnostic.

#include <cstddef>
#include <stdexcept>

#include "ssmopt/core.hpp"
#include "ssmopt/objectives.hpp"
#include "ssmopt/trajectory.hpp"

namespace ssmopt {

/// Objective, validated parameters and initial conditions. mu(0) = zeta(0) = 0.
class FlowProblem {
 public:
  /// Validates `params` and checks x0/nu0 against the objective dimension and
  /// nu0 > 0 componentwise.
  FlowProblem(Objective objective, OptimizerParams params, Vec x0, Vec nu0);

  const Objective& objective() const noexcept { return objective_; }
  const OptimizerParams& params() const noexcept { return params_; }
  PsiFunction psi() const noexcept { return PsiFunction{params_.psi}; }
  const Vec& x0() const noexcept { return x0_; }
  const Vec& nu0() const noexcept { return nu0_; }
  std::size_t dim() const noexcept { return x0_.size(); }

  FlowState initial_state() const;

 private:
  Objective objective_;
  OptimizerParams params_;
  Vec x0_;
  Vec nu0_;
};

/// Time derivative of every state block.
struct FlowRates {
  Vec dx, dmu, dzeta, dnu;

  static FlowRates zeros(std::size_t dim);
};

/// Integration aborted because nu left the positive orthant.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(Real t, FlowState state, const std::string& reason);

  Real t() const noexcept { return t_; }
  const FlowState& state() const noexcept { return state_; }

 private:
  Real t_;
  FlowState state_;
};

/// Generic flow derivative at (state, t). Throws DomainError if any nu_i <= 0.
FlowRates rhs_general(const FlowState& state, Real t, const FlowProblem& problem);
/// Allocation-free variant; `grad` is scratch of length dim.
void rhs_general(const FlowState& state, Real t, const FlowProblem& problem, Vec& grad,
                 FlowRates& out);

/// Forward Euler with fixed step dt; records every `stride`-th step and the
/// last one. t_end is rounded to a whole number of steps.
Trajectory integrate_euler(const FlowProblem& problem, Real dt, Real t_end, std::size_t stride = 1);

/// Classical fourth-order Runge-Kutta with fixed step; same recording rules.
Trajectory integrate_reference(const FlowProblem& problem, Real dt, Real t_end,
                               std::size_t stride = 1);

/// True when params are the G-AdaGrad embedding (no momentum, nu accumulates
/// squared gradients without decay).
bool is_gadagrad_mapping(const OptimizerParams& params) noexcept;

/// For each record: f(x(t)) minus the closed-form value
///   f(x(0)) + sum_i (nu_i(0)^(1-c) - (nu_i(0) + int_0^t g_i^2 ds)^(1-c)) / (1-c)
/// with the integral accumulated by the trapezoid rule over the recorded grid.
/// Throws PresetMismatch for non-G-AdaGrad parameters.
Vec gadagrad_energy_residual(const Trajectory& traj, const FlowProblem& problem);

/// Builds a problem for a named preset after validating it.
FlowProblem preset_flow(PresetKind kind, const PresetParams& preset, Objective objective, Vec x0,
                        Vec nu0);

Real l2_norm(std::span<const Real> v) noexcept;

}  // namespace ssmopt
