#pragma once

// Parameterization of the generic state-space adaptive gradient flow.
//
// Per coordinate i the flow evolves
//   mu'   = -mu_decay * mu + mu_gain * g
//   zeta' = -zeta_rate * zeta + zeta_rate * nu
//   nu'   = zeta_coupling * zeta - nu_decay * nu + nu_gain * psi(g, mu)
//   x'    = -(momentum_weight * mu + gradient_weight * g) / (alpha_g(t) * nu^c)
// where g is the i-th gradient entry. The named presets (G-AdaGrad, Adam,
// AdaBelief, AdamSSM, AdaBelief-SSM) are points in this nine-scalar family.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ssmopt/errors.hpp"

namespace ssmopt {

using Real = double;
using Vec = std::vector<Real>;

enum class PsiKind : std::uint8_t {
  kSquaredGradient,  // psi(g, mu) = g^2
  kBelief,           // psi(g, mu) = (g - mu)^2
};

/// Input to the second-moment dynamic. Nonnegative, differentiable, and zero
/// only when the gradient (or, for kBelief, the gradient surprise) vanishes.
struct PsiFunction {
  PsiKind kind = PsiKind::kSquaredGradient;

  Real operator()(Real g, Real mu) const noexcept {
    if (kind == PsiKind::kBelief) {
      const Real r = g - mu;
      return r * r;
    }
    return g * g;
  }
};

std::string_view to_string(PsiKind kind) noexcept;

/// The nine scalars of the generic flow, in role-named form. The comment after
/// each field gives the conventional lambda index used in error messages.
struct OptimizerParams {
  Real mu_decay = 0;         // lambda1
  Real mu_gain = 0;          // lambda2
  Real zeta_rate = 0;        // lambda3
  Real zeta_coupling = 0;    // lambda4
  Real nu_decay = 0;         // lambda5
  Real nu_gain = 0;          // lambda6
  Real momentum_weight = 0;  // lambda7
  Real gradient_weight = 0;  // lambda8
  Real exponent = 0.5;       // c
  PsiKind psi = PsiKind::kSquaredGradient;

  bool bias_correction() const noexcept { return momentum_weight > 0; }

  friend bool operator==(const OptimizerParams&, const OptimizerParams&) = default;
};

enum class PresetKind : std::uint8_t {
  kGAdaGrad,
  kAdam,
  kAdaBelief,
  kAdamSSM,
  kAdaBeliefSSM,
};

std::string_view to_string(PresetKind kind) noexcept;
/// Accepts "gadagrad", "adam", "adabelief", "adamssm", "adabelief_ssm".
PresetKind preset_kind_from_string(std::string_view name);

/// Continuous rates b1..b3 plus the discretization-level knobs.
/// With sampling time delta the discrete Adam betas are
/// beta1 = 1 - delta*b1 and beta2 = 1 - delta*b2.
struct PresetParams {
  Real b1 = 0.67;
  Real b2 = 0.0067;
  Real b3 = 0.0;
  Real delta = 0.15;
  Real epsilon = 1e-8;
  Real eta = 1e-3;
  Real c = 0.5;  // only read by G-AdaGrad

  Real beta1() const noexcept { return 1 - delta * b1; }
  Real beta2() const noexcept { return 1 - delta * b2; }

  friend bool operator==(const PresetParams&, const PresetParams&) = default;
};

/// Bias-correction factor of the x-dynamic:
///   (1 - (1 - mu_gain)^(t+1)) / (1 - (1 - nu_gain)^(t+1))^c   if momentum_weight > 0
///   1                                                          otherwise.
Real alpha_g(Real t, const OptimizerParams& params);

/// Checks the convergence conditions of the generic flow. Throws
/// ValidationError naming every violated condition. Comparisons are exact;
/// a value sitting on the boundary of a strict inequality is rejected.
OptimizerParams validate_params(const OptimizerParams& raw);

/// Checks the preset-level conditions for `kind`; the AdaBelief-SSM variant
/// uses the AdamSSM conditions.
PresetParams validate_preset(const PresetParams& preset, PresetKind kind);

/// Embeds a preset in the generic family. Does not validate.
OptimizerParams map_preset_to_general(const PresetParams& preset, PresetKind kind);

}  // namespace ssmopt
