#pragma once

// Discrete-time optimizers: AdamSSM (second-order second-moment recursion),
// Adam, AdaBelief(-SSM), G-AdaGrad, and a heavy-ball SGD baseline.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssmopt/core.hpp"
#include "ssmopt/objectives.hpp"
#include "ssmopt/trajectory.hpp"

namespace ssmopt {

struct StepperState {
  Vec x, mu, zeta, nu;
  std::uint64_t iter = 0;

  /// x = x0, moments zero. `nu0` (if non-empty) replaces the zero nu.
  static StepperState start(Vec x0, Vec nu0 = {});
  std::size_t dim() const noexcept { return x.size(); }

  friend bool operator==(const StepperState&, const StepperState&) = default;
};

/// Step-decay learning rate: eta(t) = base_eta times the product of every
/// milestone multiplier whose iteration is <= t.
class LrSchedule {
 public:
  struct Milestone {
    std::uint64_t iteration;
    Real multiplier;
  };

  explicit LrSchedule(Real base_eta, std::vector<Milestone> milestones = {});

  Real eta(std::uint64_t iter) const noexcept;
  Real base_eta() const noexcept { return base_eta_; }
  const std::vector<Milestone>& milestones() const noexcept { return milestones_; }

 private:
  Real base_eta_;
  std::vector<Milestone> milestones_;
};

/// How the bias-correction denominators are formed at iteration t:
///   kPaper: 1 - (1 - b)^(t+1)          (as printed in the AdamSSM algorithm)
///   kBeta:  1 - (1 - delta*b)^(t+1)    (standard Adam, beta = 1 - delta*b)
///   kFlow:  1 - (1 - b)^(t*delta + 1)  (alpha_g of the flow at time t*delta)
enum class BiasMode { kPaper, kBeta, kFlow };

std::string_view to_string(BiasMode mode) noexcept;
BiasMode bias_mode_from_string(std::string_view name);

struct BiasFactors {
  Real mu;
  Real nu;
};

BiasFactors bias_factors(const PresetParams& preset, BiasMode mode, std::uint64_t iter);

/// AdamSSM update. Throws InstabilityError if 1 - delta*b2 - delta*b3 < 0.
StepperState step_adamssm(const StepperState& state, std::span<const Real> grad,
                          const PresetParams& preset, const LrSchedule& schedule,
                          BiasMode bias = BiasMode::kPaper);

/// Adam written directly from its first-order recursion; b3 is ignored.
/// zeta follows its own recursion but never feeds back into nu.
StepperState step_adam(const StepperState& state, std::span<const Real> grad,
                       const PresetParams& preset, const LrSchedule& schedule,
                       BiasMode bias = BiasMode::kPaper);

/// AdaBelief (b3 = 0) or AdaBelief-SSM (b3 > 0). psi uses the updated first
/// moment: (g - mu_new)^2.
StepperState step_adabelief(const StepperState& state, std::span<const Real> grad,
                            const PresetParams& preset, const LrSchedule& schedule,
                            BiasMode bias = BiasMode::kPaper);

/// nu <- nu + delta*g^2;  x <- x - delta*eta*g / (nu^c + epsilon).
StepperState step_gadagrad(const StepperState& state, std::span<const Real> grad, Real c, Real eta,
                           Real epsilon, Real delta = 1);

/// Heavy ball: v <- beta*v + g; x <- x - eta*v. The velocity lives in `mu`.
StepperState step_sgd_momentum(const StepperState& state, std::span<const Real> grad, Real beta,
                               Real eta);

enum class StepperKind { kGAdaGrad, kAdam, kAdaBelief, kAdamSSM, kAdaBeliefSSM, kSgdMomentum };

std::string_view to_string(StepperKind kind) noexcept;
StepperKind stepper_kind_from_string(std::string_view name);
/// Flow preset with the same dynamics; nullopt for SGD momentum.
std::optional<PresetKind> flow_kind(StepperKind kind) noexcept;

/// kAlgorithm: moments first, then x from the updated moments (the printed
/// AdamSSM algorithm). kExplicitEuler: one forward-Euler step of the flow at
/// time t*delta, moments advanced by delta and x by eta(t); requires
/// BiasMode::kFlow, epsilon = 0 and nu > 0.
enum class StepForm { kAlgorithm, kExplicitEuler };

struct StepperConfig {
  StepperKind kind = StepperKind::kAdamSSM;
  PresetParams preset;
  BiasMode bias = BiasMode::kPaper;
  StepForm form = StepForm::kAlgorithm;
  Real momentum = 0.9;  // SGD only
};

class Stepper {
 public:
  /// Throws InstabilityError / std::invalid_argument for unusable configs.
  explicit Stepper(StepperConfig config);

  void step(StepperState& state, std::span<const Real> grad, const LrSchedule& schedule) const;
  /// Bias factor mu_bias / nu_bias^c applied at `iter` (1 when uncorrected).
  Real alpha(std::uint64_t iter) const;
  const StepperConfig& config() const noexcept { return config_; }

 private:
  void explicit_euler_step(StepperState& state, std::span<const Real> grad, Real eta) const;

  StepperConfig config_;
  OptimizerParams flow_params_;
};

struct RunOptions {
  std::size_t stride = 1;
  Real threshold = 1e-4;  // gradient-norm target for iters_to_threshold
  Vec nu0;                // empty: nu(0) = 0
};

/// Summary of one run. "Epoch" means one optimizer iteration on the full
/// deterministic gradient.
struct RunReport {
  std::string name;
  Real best_f = 0;
  std::uint64_t best_iter = 0;
  Real final_grad_norm = 0;
  std::optional<std::uint64_t> iters_to_threshold;
  Real threshold = 1e-4;
  std::uint64_t total_iters = 0;
  bool nu_nonnegative = true;
  bool stayed_in_box = true;
  std::optional<Real> energy_residual;
  std::optional<std::string> error;
  Real wall_time_s = 0;
};

struct DiscreteRun {
  Trajectory trajectory;
  RunReport report;
};

DiscreteRun run_discrete(const Stepper& stepper, const Objective& objective, const Vec& x0,
                         std::uint64_t num_iters, const LrSchedule& schedule,
                         const RunOptions& options = {});

}  // namespace ssmopt
