#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "ssmopt/core.hpp"

namespace ssmopt {

struct KnownMinimum {
  Vec x;
  Real f = 0;
};

/// Smooth test objective with an analytic gradient. Immutable; evaluation is
/// reentrant so one instance can back many concurrent runs.
class Objective {
 public:
  using ValueFn = std::function<Real(std::span<const Real>)>;
  using GradientFn = std::function<void(std::span<const Real>, std::span<Real>)>;

  Objective(std::string name, std::size_t dim, ValueFn value, GradientFn gradient,
            std::optional<KnownMinimum> known_min = std::nullopt, bool hessian_bounded = true,
            Real box_half_width = 5.0);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::optional<KnownMinimum>& known_min() const noexcept { return known_min_; }
  /// True when the Hessian is bounded on all of R^d, not only inside the box.
  bool hessian_bounded() const noexcept { return hessian_bounded_; }
  /// Half-width of the test box [-w, w]^d on which assumptions are checked.
  Real box_half_width() const noexcept { return box_half_width_; }
  bool in_box(std::span<const Real> x) const;

  Real value(std::span<const Real> x) const;
  void gradient(std::span<const Real> x, std::span<Real> out) const;
  Vec gradient(std::span<const Real> x) const;

 private:
  void check_dim(std::size_t n) const;

  std::string name_;
  std::size_t dim_;
  ValueFn value_;
  GradientFn gradient_;
  std::optional<KnownMinimum> known_min_;
  bool hessian_bounded_;
  Real box_half_width_;
};

/// f(x) = 1/2 x^T Q x, Q diagonal with eigenvalues spaced geometrically from 1
/// to `condition_number`.
Objective make_quadratic(std::size_t dim, Real condition_number);

/// Chained Rosenbrock: sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
Objective make_rosenbrock(std::size_t dim);

inline constexpr Real kLogisticL2 = 5e-4;

/// Mean logistic loss over a seeded synthetic data set plus kLogisticL2/2 |w|^2.
/// Data comes from Lcg64 (see below): features uniform in [-1, 1), a hidden
/// weight vector uniform in [-2, 2), labels sign(a.w*) flipped with
/// probability 0.1.
Objective make_logistic(std::size_t dim, std::size_t n_samples, std::uint64_t seed);

/// Central differences, one coordinate at a time.
Vec finite_diff_grad(const Objective& obj, std::span<const Real> x, Real h);

/// Knuth's MMIX linear congruential generator:
///   state <- state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
/// `uniform()` takes the top 53 bits, giving a double in [0, 1).
class Lcg64 {
 public:
  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }
  Real uniform() { return static_cast<Real>(next() >> 11) * 0x1.0p-53; }
  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace ssmopt
