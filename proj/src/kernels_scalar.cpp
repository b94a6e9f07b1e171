#include "kernels_element.hpp"

namespace ssmopt::kernels {
namespace {

void flow_rhs_scalar(const RhsCoeffs& k, const RhsInputs& in, const RhsOutputs& out) {
  const std::size_t n = in.mu.size();
  for (std::size_t i = 0; i < n; ++i) detail::flow_rhs_element(k, in, out, i);
}

void ssm_step_scalar(const SsmStepCoeffs& k, const StepArrays& s, std::span<const Real> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) detail::ssm_step_element(k, s, grad[i], i);
}

void adam_step_scalar(const AdamStepCoeffs& k, const StepArrays& s, std::span<const Real> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) detail::adam_step_element(k, s, grad[i], i);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::kScalar, &flow_rhs_scalar, &ssm_step_scalar, &adam_step_scalar};
  return t;
}

}  // namespace ssmopt::kernels
