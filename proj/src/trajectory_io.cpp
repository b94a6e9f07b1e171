#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "ssmopt/trajectory.hpp"

namespace ssmopt {

FlowState FlowState::zeros(std::size_t dim, Real t) {
  return FlowState{Vec(dim, 0.0), Vec(dim, 0.0), Vec(dim, 0.0), Vec(dim, 0.0), t};
}

void Trajectory::append(const FlowState& state, Real f, Real grad_norm, Real alpha) {
  times.push_back(state.t);
  states.push_back(state);
  f_values.push_back(f);
  grad_norms.push_back(grad_norm);
  alpha_values.push_back(alpha);
}

Real Trajectory::min_nu() const {
  Real m = std::numeric_limits<Real>::infinity();
  for (const auto& s : states) {
    for (Real v : s.nu) m = std::min(m, v);
  }
  return m;
}

void check_trajectory(const Trajectory& traj, NuBound bound) {
  const std::size_t n = traj.times.size();
  if (traj.states.size() != n || traj.f_values.size() != n || traj.grad_norms.size() != n ||
      traj.alpha_values.size() != n) {
    throw DomainError("trajectory series have mismatched lengths");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (!(traj.times[k] > traj.times[k - 1])) {
      throw DomainError("trajectory times not strictly increasing at record " + std::to_string(k));
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (Real v : traj.states[k].nu) {
      const bool ok = bound == NuBound::kPositive ? v > 0 : v >= 0;
      if (!ok) {
        throw DomainError("nu bound violated at t=" + format_real(traj.times[k]) +
                          " (nu=" + format_real(v) + ")");
      }
    }
  }
}

std::string format_real(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, NuBound bound) {
  check_trajectory(traj, bound);
  const std::size_t d = traj.empty() ? 0 : traj.states.front().dim();

  os << "t,f,grad_norm,alpha";
  for (const char* prefix : {"x_", "mu_", "zeta_", "nu_"}) {
    for (std::size_t i = 0; i < d; ++i) os << ',' << prefix << i;
  }
  os << '\n';

  for (std::size_t k = 0; k < traj.size(); ++k) {
    const FlowState& s = traj.states[k];
    os << format_real(traj.times[k]) << ',' << format_real(traj.f_values[k]) << ','
       << format_real(traj.grad_norms[k]) << ',' << format_real(traj.alpha_values[k]);
    for (const Vec* v : {&s.x, &s.mu, &s.zeta, &s.nu}) {
      for (Real e : *v) os << ',' << format_real(e);
    }
    os << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, NuBound bound) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_trajectory_csv(os, traj, bound);
  if (!os) throw std::runtime_error("failed writing " + path);
}

}  // namespace ssmopt
