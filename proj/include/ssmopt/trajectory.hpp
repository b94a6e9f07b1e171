#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ssmopt/core.hpp"

namespace ssmopt {

/// Full optimizer state (x, mu, zeta, nu) at time t. For discrete runs t is
/// the iteration count.
struct FlowState {
  Vec x, mu, zeta, nu;
  Real t = 0;

  std::size_t dim() const noexcept { return x.size(); }
  static FlowState zeros(std::size_t dim, Real t = 0);

  friend bool operator==(const FlowState&, const FlowState&) = default;
};

/// Time-ordered records with aligned scalar series.
struct Trajectory {
  std::vector<Real> times;
  std::vector<FlowState> states;
  Vec f_values;
  Vec grad_norms;
  Vec alpha_values;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  void append(const FlowState& state, Real f, Real grad_norm, Real alpha);
  /// Smallest nu entry over all records; +inf when empty.
  Real min_nu() const;
};

enum class NuBound {
  kPositive,     // continuous flows: nu_i > 0
  kNonNegative,  // discrete steppers start from nu = 0
};

/// Throws DomainError if times are not strictly increasing, series lengths
/// disagree, or a nu entry violates `bound`.
void check_trajectory(const Trajectory& traj, NuBound bound);

/// CSV with header t,f,grad_norm,alpha,x_0..x_{d-1},mu_*,zeta_*,nu_*.
/// Values use %.17g so they round-trip. The trajectory is re-checked first.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, NuBound bound);
void write_trajectory_csv(const std::string& path, const Trajectory& traj, NuBound bound);

/// Formats a double with %.17g (shortest form that round-trips is not
/// guaranteed, but the output is deterministic).
std::string format_real(Real v);

}  // namespace ssmopt
