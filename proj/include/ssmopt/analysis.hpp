#pragma once

// Linear-systems view of the second-moment dynamic: the (zeta, nu) subsystem
//   d/dt [zeta; nu] = A [zeta; nu] + [0; nu_gain] psi,
//   A = [[-lambda3, lambda3], [lambda4, -lambda5]],
// its transfer function from psi to nu, and closed-form state transitions.

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "ssmopt/core.hpp"

namespace ssmopt {

using Complex = std::complex<Real>;

/// Proper rational transfer function, coefficients in descending degree.
/// The denominator is normalized to be monic on construction.
class RationalTF {
 public:
  RationalTF(Vec num, Vec den);

  const Vec& num() const noexcept { return num_; }
  const Vec& den() const noexcept { return den_; }
  std::size_t order() const noexcept { return den_.size() - 1; }

  Complex evaluate(Complex s) const;
  /// num(0) / den(0), computed from the constant coefficients.
  Real dc_gain() const;

 private:
  Vec num_;
  Vec den_;
};

struct PolesZeros {
  std::vector<Complex> poles;  // ascending real part, then imaginary part
  std::vector<Complex> zeros;  // same ordering
};

/// psi -> nu transfer function of AdamSSM:
///   b2 (s + b2) / (s^2 + (2 b2 + b3) s + b2^2).
RationalTF adamssm_tf(Real b2, Real b3);

/// Closed-form roots for degree <= 2. Throws DegreeError otherwise.
PolesZeros poles_zeros(const RationalTF& tf);

/// Roots of a polynomial of degree <= 2, descending coefficients.
std::vector<Complex> quadratic_roots(std::span<const Real> coeffs);

/// Removes pole/zero pairs that coincide to within `rel_tol * max(1, |pole|)`
/// and rebuilds the coefficients from the remaining roots.
RationalTF cancel_common_roots(const RationalTF& tf, Real rel_tol = 1e-12);

/// Impulse and unit-step responses via partial fractions (degree <= 2,
/// strictly proper for the impulse). Repeated poles use the confluent form.
Vec impulse_response(const RationalTF& tf, std::span<const Real> times);
Vec step_response(const RationalTF& tf, std::span<const Real> times);

/// The (zeta, nu) subsystem with rates lambda3, lambda4, lambda5.
struct SecondMomentLTI {
  Real lambda3 = 0;
  Real lambda4 = 0;
  Real lambda5 = 0;

  /// Row-major [[-lambda3, lambda3], [lambda4, -lambda5]].
  std::array<Real, 4> state_matrix() const noexcept {
    return {-lambda3, lambda3, lambda4, -lambda5};
  }
  static SecondMomentLTI from(const OptimizerParams& p) noexcept {
    return {p.zeta_rate, p.zeta_coupling, p.nu_decay};
  }
};

/// p = sqrt((lambda3 - lambda5)^2 + 4 lambda3 lambda4), the gap between the
/// two eigenvalues of A.
Real stability_quantity_p(const SecondMomentLTI& lti);

struct TransitionEntries {
  Real phi12;
  Real phi22;
};

/// phi12(t), phi22(t) of exp(A t) from the distinct-eigenvalue closed forms.
/// Throws DomainError when p = 0.
TransitionEntries state_transition_entries(const SecondMomentLTI& lti, Real t);

/// Full exp(A t), row-major. Handles p = 0 with the confluent limit.
std::array<Real, 4> state_transition_matrix(const SecondMomentLTI& lti, Real t);

/// Sample grid t_k = start + k * dt.
struct UniformGrid {
  Real start = 0;
  Real dt = 1;
};

/// nu on the grid from the variation-of-constants solution started at
/// `grid.start` with state (zeta0, nu0):
///   nu(t) = phi21(t - t0) zeta0 + phi22(t - t0) nu0
///           + input_gain * int_{t0}^{t} phi22(t - s) u(s) ds,
/// where u is `input` sampled on the grid and the convolution integral uses
/// the trapezoid rule. Output has the same length as `input`.
Vec second_moment_response(const SecondMomentLTI& lti, Real input_gain, std::span<const Real> input,
                           UniformGrid grid, Real zeta0, Real nu0);

/// Same, with the grid given explicitly. Throws GridError if `times` is not
/// uniform (to 1e-9 relative) or its length differs from `input`.
Vec second_moment_response(const SecondMomentLTI& lti, Real input_gain, std::span<const Real> input,
                           std::span<const Real> times, Real zeta0, Real nu0);

}  // namespace ssmopt
