#pragma once

// Per-element bodies shared by the scalar kernels and the SIMD tails. Any
// change here must be mirrored in kernels_avx2.cpp operation for operation.

#include <cmath>
#include <cstddef>

#include "ssmopt/kernels.hpp"

namespace ssmopt::kernels::detail {

inline Real nu_power(Real nu, Real c) { return c == 0.5 ? std::sqrt(nu) : std::pow(nu, c); }

inline Real psi_of(PsiKind kind, Real g, Real mu) {
  if (kind == PsiKind::kBelief) {
    const Real r = g - mu;
    return r * r;
  }
  return g * g;
}

inline void flow_rhs_element(const RhsCoeffs& k, const RhsInputs& in, const RhsOutputs& out,
                             std::size_t i) {
  const OptimizerParams& p = k.params;
  const Real mu = in.mu[i];
  const Real zeta = in.zeta[i];
  const Real nu = in.nu[i];
  const Real g = in.grad[i];
  out.dmu[i] = -p.mu_decay * mu + p.mu_gain * g;
  out.dzeta[i] = -p.zeta_rate * zeta + p.zeta_rate * nu;
  out.dnu[i] = p.zeta_coupling * zeta - p.nu_decay * nu + p.nu_gain * psi_of(p.psi, g, mu);
  out.dx[i] = -(p.momentum_weight * mu + p.gradient_weight * g) / (k.alpha * nu_power(nu, p.exponent));
}

inline void ssm_step_element(const SsmStepCoeffs& k, const StepArrays& s, Real g, std::size_t i) {
  const Real zeta = s.zeta[i];
  const Real nu = s.nu[i];
  const Real m = k.mu_keep * s.mu[i] + k.mu_in * g;
  const Real z = k.zeta_keep * zeta + k.zeta_in * nu;
  const Real n = k.nu_cross * zeta + k.nu_keep * nu + k.nu_in * psi_of(k.psi, g, m);
  const Real mhat = m / k.mu_bias;
  const Real nhat = n / k.nu_bias;
  s.x[i] = s.x[i] - k.eta * (mhat / (std::sqrt(nhat) + k.epsilon));
  s.mu[i] = m;
  s.zeta[i] = z;
  s.nu[i] = n;
}

inline void adam_step_element(const AdamStepCoeffs& k, const StepArrays& s, Real g, std::size_t i) {
  const Real nu = s.nu[i];
  const Real m = k.mu_keep * s.mu[i] + k.mu_in * g;
  const Real z = k.nu_keep * s.zeta[i] + k.nu_in * nu;
  const Real n = k.nu_keep * nu + k.nu_in * psi_of(k.psi, g, m);
  const Real mhat = m / k.mu_bias;
  const Real nhat = n / k.nu_bias;
  s.x[i] = s.x[i] - k.eta * (mhat / (std::sqrt(nhat) + k.epsilon));
  s.mu[i] = m;
  s.zeta[i] = z;
  s.nu[i] = n;
}

}  // namespace ssmopt::kernels::detail
