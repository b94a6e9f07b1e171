#include "ssmopt/core.hpp"

#include <cmath>
#include <sstream>

namespace ssmopt {

ValidationError::ValidationError(std::vector<std::string> failed, const std::string& context)
    : std::runtime_error([&] {
        std::ostringstream os;
        if (!context.empty()) os << context << ": ";
        os << "validation failed:";
        for (const auto& f : failed) os << " [" << f << "]";
        return os.str();
      }()),
      failed_(std::move(failed)) {}

bool ValidationError::names(const std::string& condition) const {
  for (const auto& f : failed_) {
    if (f == condition) return true;
  }
  return false;
}

std::string_view to_string(PsiKind kind) noexcept {
  switch (kind) {
    case PsiKind::kSquaredGradient:
      return "squared_gradient";
    case PsiKind::kBelief:
      return "belief";
  }
  return "unknown";
}

std::string_view to_string(PresetKind kind) noexcept {
  switch (kind) {
    case PresetKind::kGAdaGrad:
      return "gadagrad";
    case PresetKind::kAdam:
      return "adam";
    case PresetKind::kAdaBelief:
      return "adabelief";
    case PresetKind::kAdamSSM:
      return "adamssm";
    case PresetKind::kAdaBeliefSSM:
      return "adabelief_ssm";
  }
  return "unknown";
}

PresetKind preset_kind_from_string(std::string_view name) {
  for (auto kind : {PresetKind::kGAdaGrad, PresetKind::kAdam, PresetKind::kAdaBelief,
                    PresetKind::kAdamSSM, PresetKind::kAdaBeliefSSM}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown preset kind '" + std::string(name) + "'");
}

Real alpha_g(Real t, const OptimizerParams& params) {
  if (params.momentum_weight == 0) return 1;
  const Real num = 1 - std::pow(1 - params.mu_gain, t + 1);
  const Real den = 1 - std::pow(1 - params.nu_gain, t + 1);
  return num / std::pow(den, params.exponent);
}

namespace {

class Checklist {
 public:
  void require(bool ok, const char* name) {
    if (!ok) failed_.emplace_back(name);
  }
  bool clean() const { return failed_.empty(); }
  std::vector<std::string> take() { return std::move(failed_); }

 private:
  std::vector<std::string> failed_;
};

bool all_finite(std::initializer_list<Real> values) {
  for (Real v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

OptimizerParams validate_params(const OptimizerParams& raw) {
  const auto& p = raw;
  Checklist check;
  if (!all_finite({p.mu_decay, p.mu_gain, p.zeta_rate, p.zeta_coupling, p.nu_decay, p.nu_gain,
                   p.momentum_weight, p.gradient_weight, p.exponent})) {
    check.require(false, "parameters finite");
    throw ValidationError(check.take(), "optimizer parameters");
  }

  check.require(p.exponent > 0, "0 < c");
  check.require(p.exponent < 1, "c < 1");
  check.require(p.mu_decay >= 0, "lambda1 >= 0");
  check.require(p.mu_gain > 0, "lambda2 > 0");
  check.require(p.zeta_rate > 0, "lambda3 > 0");
  check.require(p.zeta_coupling >= 0, "lambda4 >= 0");
  check.require(p.zeta_coupling <= p.nu_decay, "lambda4 <= lambda5");
  // The upper bound is meaningless for c <= 0, which is already reported.
  if (p.exponent > 0) {
    check.require(p.nu_decay < 2 * p.mu_decay / p.exponent, "lambda5 < 2*lambda1/c");
  }
  check.require(p.nu_gain > 0, "lambda6 > 0");
  check.require(p.momentum_weight >= 0, "lambda7 >= 0");
  check.require(p.gradient_weight >= 0, "lambda8 >= 0");
  check.require(p.momentum_weight + p.gradient_weight > 0, "lambda7 + lambda8 > 0");
  if (p.momentum_weight > 0) {
    check.require(p.nu_gain < p.mu_gain, "lambda6 < lambda2 (lambda7 > 0)");
    check.require(p.mu_gain < 1, "lambda2 < 1 (lambda7 > 0)");
  }

  if (!check.clean()) throw ValidationError(check.take(), "optimizer parameters");
  return raw;
}

PresetParams validate_preset(const PresetParams& preset, PresetKind kind) {
  const auto& p = preset;
  Checklist check;
  if (!all_finite({p.b1, p.b2, p.b3, p.delta, p.epsilon, p.eta, p.c})) {
    check.require(false, "parameters finite");
    throw ValidationError(check.take(), std::string(to_string(kind)) + " preset");
  }

  check.require(p.delta > 0, "delta > 0");
  check.require(p.epsilon > 0, "epsilon > 0");
  check.require(p.eta > 0, "eta > 0");

  switch (kind) {
    case PresetKind::kGAdaGrad:
      check.require(p.c > 0, "0 < c");
      check.require(p.c < 1, "c < 1");
      break;
    case PresetKind::kAdamSSM:
    case PresetKind::kAdaBeliefSSM:
      check.require(p.b3 > 0, "b3 > 0");
      check.require(p.b2 + p.b3 < 4 * p.b1, "b2 + b3 < 4*b1");
      [[fallthrough]];
    case PresetKind::kAdam:
    case PresetKind::kAdaBelief:
      check.require(p.b2 > 0, "0 < b2");
      check.require(p.b2 < p.b1, "b2 < b1");
      check.require(p.b1 < 1, "b1 < 1");
      break;
  }

  if (!check.clean()) {
    throw ValidationError(check.take(), std::string(to_string(kind)) + " preset");
  }
  return preset;
}

OptimizerParams map_preset_to_general(const PresetParams& preset, PresetKind kind) {
  OptimizerParams out;
  switch (kind) {
    case PresetKind::kGAdaGrad:
      // mu and zeta are decoupled from x here; unit rates keep them valid.
      out.mu_decay = 1;
      out.mu_gain = 1;
      out.zeta_rate = 1;
      out.zeta_coupling = 0;
      out.nu_decay = 0;
      out.nu_gain = 1;
      out.momentum_weight = 0;
      out.gradient_weight = 1;
      out.exponent = preset.c;
      out.psi = PsiKind::kSquaredGradient;
      return out;
    case PresetKind::kAdam:
    case PresetKind::kAdaBelief:
      out.mu_decay = preset.b1;
      out.mu_gain = preset.b1;
      out.zeta_rate = preset.b2;  // inert: zeta_coupling = 0
      out.zeta_coupling = 0;
      out.nu_decay = preset.b2;
      out.nu_gain = preset.b2;
      break;
    case PresetKind::kAdamSSM:
    case PresetKind::kAdaBeliefSSM:
      out.mu_decay = preset.b1;
      out.mu_gain = preset.b1;
      out.zeta_rate = preset.b2;
      out.zeta_coupling = preset.b3;
      out.nu_decay = preset.b2 + preset.b3;
      out.nu_gain = preset.b2;
      break;
  }
  out.momentum_weight = 1;
  out.gradient_weight = 0;
  out.exponent = 0.5;
  out.psi = (kind == PresetKind::kAdaBelief || kind == PresetKind::kAdaBeliefSSM)
                ? PsiKind::kBelief
                : PsiKind::kSquaredGradient;
  return out;
}

}  // namespace ssmopt
