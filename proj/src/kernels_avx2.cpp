// Compiled with -mavx2 only (never -mfma): each lane must round exactly like
// the scalar reference in kernels_element.hpp.

#include <immintrin.h>

#include "kernels_element.hpp"

namespace ssmopt::kernels {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d neg(__m256d v) { return _mm256_xor_pd(v, _mm256_set1_pd(-0.0)); }

inline __m256d psi_avx2(PsiKind kind, __m256d g, __m256d mu) {
  if (kind == PsiKind::kBelief) {
    const __m256d r = _mm256_sub_pd(g, mu);
    return _mm256_mul_pd(r, r);
  }
  return _mm256_mul_pd(g, g);
}

void flow_rhs_avx2(const RhsCoeffs& k, const RhsInputs& in, const RhsOutputs& out) {
  const std::size_t n = in.mu.size();
  const OptimizerParams& p = k.params;
  std::size_t i = 0;
  if (p.exponent == 0.5) {
    const __m256d neg_mu_decay = _mm256_set1_pd(-p.mu_decay);
    const __m256d mu_gain = _mm256_set1_pd(p.mu_gain);
    const __m256d neg_zeta_rate = _mm256_set1_pd(-p.zeta_rate);
    const __m256d zeta_rate = _mm256_set1_pd(p.zeta_rate);
    const __m256d coupling = _mm256_set1_pd(p.zeta_coupling);
    const __m256d nu_decay = _mm256_set1_pd(p.nu_decay);
    const __m256d nu_gain = _mm256_set1_pd(p.nu_gain);
    const __m256d w_mom = _mm256_set1_pd(p.momentum_weight);
    const __m256d w_grad = _mm256_set1_pd(p.gradient_weight);
    const __m256d alpha = _mm256_set1_pd(k.alpha);
    for (; i + kLanes <= n; i += kLanes) {
      const __m256d mu = _mm256_loadu_pd(in.mu.data() + i);
      const __m256d zeta = _mm256_loadu_pd(in.zeta.data() + i);
      const __m256d nu = _mm256_loadu_pd(in.nu.data() + i);
      const __m256d g = _mm256_loadu_pd(in.grad.data() + i);

      const __m256d dmu = _mm256_add_pd(_mm256_mul_pd(neg_mu_decay, mu), _mm256_mul_pd(mu_gain, g));
      const __m256d dzeta =
          _mm256_add_pd(_mm256_mul_pd(neg_zeta_rate, zeta), _mm256_mul_pd(zeta_rate, nu));
      const __m256d dnu = _mm256_add_pd(
          _mm256_sub_pd(_mm256_mul_pd(coupling, zeta), _mm256_mul_pd(nu_decay, nu)),
          _mm256_mul_pd(nu_gain, psi_avx2(p.psi, g, mu)));
      const __m256d drive = _mm256_add_pd(_mm256_mul_pd(w_mom, mu), _mm256_mul_pd(w_grad, g));
      const __m256d dx = _mm256_div_pd(neg(drive), _mm256_mul_pd(alpha, _mm256_sqrt_pd(nu)));

      _mm256_storeu_pd(out.dmu.data() + i, dmu);
      _mm256_storeu_pd(out.dzeta.data() + i, dzeta);
      _mm256_storeu_pd(out.dnu.data() + i, dnu);
      _mm256_storeu_pd(out.dx.data() + i, dx);
    }
  }
  for (; i < n; ++i) detail::flow_rhs_element(k, in, out, i);
}

// Shared tail of both step kernels: bias correction and the x update.
inline __m256d x_update(__m256d x, __m256d m, __m256d n, __m256d mu_bias, __m256d nu_bias,
                        __m256d eta, __m256d eps) {
  const __m256d mhat = _mm256_div_pd(m, mu_bias);
  const __m256d nhat = _mm256_div_pd(n, nu_bias);
  const __m256d ratio = _mm256_div_pd(mhat, _mm256_add_pd(_mm256_sqrt_pd(nhat), eps));
  return _mm256_sub_pd(x, _mm256_mul_pd(eta, ratio));
}

void ssm_step_avx2(const SsmStepCoeffs& k, const StepArrays& s, std::span<const Real> grad) {
  const std::size_t n = grad.size();
  const __m256d mu_keep = _mm256_set1_pd(k.mu_keep);
  const __m256d mu_in = _mm256_set1_pd(k.mu_in);
  const __m256d zeta_keep = _mm256_set1_pd(k.zeta_keep);
  const __m256d zeta_in = _mm256_set1_pd(k.zeta_in);
  const __m256d nu_cross = _mm256_set1_pd(k.nu_cross);
  const __m256d nu_keep = _mm256_set1_pd(k.nu_keep);
  const __m256d nu_in = _mm256_set1_pd(k.nu_in);
  const __m256d mu_bias = _mm256_set1_pd(k.mu_bias);
  const __m256d nu_bias = _mm256_set1_pd(k.nu_bias);
  const __m256d eta = _mm256_set1_pd(k.eta);
  const __m256d eps = _mm256_set1_pd(k.epsilon);

  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d g = _mm256_loadu_pd(grad.data() + i);
    const __m256d mu = _mm256_loadu_pd(s.mu.data() + i);
    const __m256d zeta = _mm256_loadu_pd(s.zeta.data() + i);
    const __m256d nu = _mm256_loadu_pd(s.nu.data() + i);
    const __m256d x = _mm256_loadu_pd(s.x.data() + i);

    const __m256d m = _mm256_add_pd(_mm256_mul_pd(mu_keep, mu), _mm256_mul_pd(mu_in, g));
    const __m256d z = _mm256_add_pd(_mm256_mul_pd(zeta_keep, zeta), _mm256_mul_pd(zeta_in, nu));
    const __m256d v = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(nu_cross, zeta), _mm256_mul_pd(nu_keep, nu)),
        _mm256_mul_pd(nu_in, psi_avx2(k.psi, g, m)));

    _mm256_storeu_pd(s.x.data() + i, x_update(x, m, v, mu_bias, nu_bias, eta, eps));
    _mm256_storeu_pd(s.mu.data() + i, m);
    _mm256_storeu_pd(s.zeta.data() + i, z);
    _mm256_storeu_pd(s.nu.data() + i, v);
  }
  for (; i < n; ++i) detail::ssm_step_element(k, s, grad[i], i);
}

void adam_step_avx2(const AdamStepCoeffs& k, const StepArrays& s, std::span<const Real> grad) {
  const std::size_t n = grad.size();
  const __m256d mu_keep = _mm256_set1_pd(k.mu_keep);
  const __m256d mu_in = _mm256_set1_pd(k.mu_in);
  const __m256d nu_keep = _mm256_set1_pd(k.nu_keep);
  const __m256d nu_in = _mm256_set1_pd(k.nu_in);
  const __m256d mu_bias = _mm256_set1_pd(k.mu_bias);
  const __m256d nu_bias = _mm256_set1_pd(k.nu_bias);
  const __m256d eta = _mm256_set1_pd(k.eta);
  const __m256d eps = _mm256_set1_pd(k.epsilon);

  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d g = _mm256_loadu_pd(grad.data() + i);
    const __m256d mu = _mm256_loadu_pd(s.mu.data() + i);
    const __m256d zeta = _mm256_loadu_pd(s.zeta.data() + i);
    const __m256d nu = _mm256_loadu_pd(s.nu.data() + i);
    const __m256d x = _mm256_loadu_pd(s.x.data() + i);

    const __m256d m = _mm256_add_pd(_mm256_mul_pd(mu_keep, mu), _mm256_mul_pd(mu_in, g));
    const __m256d z = _mm256_add_pd(_mm256_mul_pd(nu_keep, zeta), _mm256_mul_pd(nu_in, nu));
    const __m256d v =
        _mm256_add_pd(_mm256_mul_pd(nu_keep, nu), _mm256_mul_pd(nu_in, psi_avx2(k.psi, g, m)));

    _mm256_storeu_pd(s.x.data() + i, x_update(x, m, v, mu_bias, nu_bias, eta, eps));
    _mm256_storeu_pd(s.mu.data() + i, m);
    _mm256_storeu_pd(s.zeta.data() + i, z);
    _mm256_storeu_pd(s.nu.data() + i, v);
  }
  for (; i < n; ++i) detail::adam_step_element(k, s, grad[i], i);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Isa::kAvx2, &flow_rhs_avx2, &ssm_step_avx2, &adam_step_avx2};
  return t;
}

}  // namespace ssmopt::kernels
