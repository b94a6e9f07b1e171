#pragma once

// Elementwise inner loops of the flow right-hand side and the discrete
// Adam-family updates. Every kernel has a scalar reference implementation and,
// on x86-64, an AVX2 variant chosen at runtime. Variants are bit-identical:
// they perform the same IEEE operations in the same order (no FMA), and the
// AVX2 path only vectorizes exponent == 0.5, where nu^c is a correctly
// rounded square root.

#include <span>
#include <string_view>

#include "ssmopt/core.hpp"

namespace ssmopt::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;

/// Best supported ISA, unless SSMOPT_ISA=scalar|avx2 was set in the environment
/// or set_active_isa() was called.
Isa active_isa() noexcept;
/// Throws std::invalid_argument if `isa` is not supported on this machine.
void set_active_isa(Isa isa);

struct RhsCoeffs {
  OptimizerParams params;
  Real alpha = 1;  // alpha_g(t) at the evaluation time
};

struct RhsInputs {
  std::span<const Real> mu, zeta, nu, grad;
};

struct RhsOutputs {
  std::span<Real> dx, dmu, dzeta, dnu;
};

/// One step of the discrete second-order moment recursion:
///   mu   <- mu_keep * mu + mu_in * g
///   zeta <- zeta_keep * zeta + zeta_in * nu
///   nu   <- nu_cross * zeta + nu_keep * nu + nu_in * psi(g, mu_new)
///   x    <- x - eta * (mu_new / mu_bias) / (sqrt(nu_new / nu_bias) + epsilon)
/// with zeta and nu on the right-hand side taken before the update.
struct SsmStepCoeffs {
  Real mu_keep, mu_in;
  Real zeta_keep, zeta_in;
  Real nu_cross, nu_keep, nu_in;
  Real mu_bias, nu_bias;
  Real eta, epsilon;
  PsiKind psi;
};

/// First-order second-moment recursion (classic Adam / AdaBelief). zeta is
/// carried with the nu recursion's coefficients but never feeds back:
///   zeta <- nu_keep * zeta + nu_in * nu
///   nu   <- nu_keep * nu + nu_in * psi(g, mu_new)
struct AdamStepCoeffs {
  Real mu_keep, mu_in;
  Real nu_keep, nu_in;
  Real mu_bias, nu_bias;
  Real eta, epsilon;
  PsiKind psi;
};

struct StepArrays {
  std::span<Real> x, mu, zeta, nu;
};

struct KernelTable {
  Isa isa;
  void (*flow_rhs)(const RhsCoeffs&, const RhsInputs&, const RhsOutputs&);
  void (*ssm_step)(const SsmStepCoeffs&, const StepArrays&, std::span<const Real> grad);
  void (*adam_step)(const AdamStepCoeffs&, const StepArrays&, std::span<const Real> grad);
};

/// Kernel table for a specific ISA. Throws if unsupported.
const KernelTable& table(Isa isa);
const KernelTable& active_table() noexcept;

// Dispatching entry points. Callers guarantee equal span lengths.
void flow_rhs(const RhsCoeffs& coeffs, const RhsInputs& in, const RhsOutputs& out);
void ssm_step(const SsmStepCoeffs& coeffs, const StepArrays& state, std::span<const Real> grad);
void adam_step(const AdamStepCoeffs& coeffs, const StepArrays& state, std::span<const Real> grad);

}  // namespace ssmopt::kernels
