#include "ssmopt/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ssmopt::kernels {

const KernelTable& scalar_table();
#ifdef SSMOPT_HAVE_AVX2_TU
const KernelTable& avx2_table();
#endif

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#ifdef SSMOPT_HAVE_AVX2_TU
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("kernel ISA '" + std::string(to_string(isa)) +
                                "' is not supported on this machine");
  }
#ifdef SSMOPT_HAVE_AVX2_TU
  if (isa == Isa::kAvx2) return avx2_table();
#endif
  return scalar_table();
}

namespace {

const KernelTable* initial_table() {
  if (const char* forced = std::getenv("SSMOPT_ISA")) {
    const std::string_view name(forced);
    if (name == "scalar") return &scalar_table();
    if (name == "avx2" && isa_supported(Isa::kAvx2)) return &table(Isa::kAvx2);
  }
  if (isa_supported(Isa::kAvx2)) return &table(Isa::kAvx2);
  return &scalar_table();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

const KernelTable& active_table() noexcept { return *active_slot().load(std::memory_order_acquire); }

Isa active_isa() noexcept { return active_table().isa; }

void set_active_isa(Isa isa) { active_slot().store(&table(isa), std::memory_order_release); }

void flow_rhs(const RhsCoeffs& coeffs, const RhsInputs& in, const RhsOutputs& out) {
  active_table().flow_rhs(coeffs, in, out);
}

void ssm_step(const SsmStepCoeffs& coeffs, const StepArrays& state, std::span<const Real> grad) {
  active_table().ssm_step(coeffs, state, grad);
}

void adam_step(const AdamStepCoeffs& coeffs, const StepArrays& state, std::span<const Real> grad) {
  active_table().adam_step(coeffs, state, grad);
}

}  // namespace ssmopt::kernels
