#include "ssmopt/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace ssmopt {

namespace {

Vec strip_leading_zeros(Vec c) {
  auto it = std::find_if(c.begin(), c.end(), [](Real v) { return v != 0; });
  if (it == c.end()) return Vec{0.0};
  return Vec(it, c.end());
}

Complex horner(const Vec& c, Complex s) {
  Complex acc = 0;
  for (Real v : c) acc = acc * s + v;
  return acc;
}

// Derivative coefficients, descending.
Vec derivative(const Vec& c) {
  const std::size_t n = c.size();
  if (n <= 1) return Vec{0.0};
  Vec out(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = c[i] * static_cast<Real>(n - 1 - i);
  return out;
}

void sort_roots(std::vector<Complex>& roots) {
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
}

// Real polynomial with leading coefficient `lead` and the given roots
// (complex roots must come in conjugate pairs).
Vec poly_from_roots(Real lead, const std::vector<Complex>& roots) {
  std::vector<Complex> c{Complex(lead)};
  for (const Complex& r : roots) {
    std::vector<Complex> next(c.size() + 1, Complex(0));
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  Vec out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

}  // namespace

RationalTF::RationalTF(Vec num, Vec den) : num_(strip_leading_zeros(std::move(num))), den_(strip_leading_zeros(std::move(den))) {
  if (den_.size() == 1 && den_[0] == 0) throw std::invalid_argument("transfer function: zero denominator");
  if (num_.size() > den_.size()) throw std::invalid_argument("transfer function must be proper");
  const Real lead = den_[0];
  if (lead != 1) {
    for (auto& v : den_) v /= lead;
    for (auto& v : num_) v /= lead;
  }
}

Complex RationalTF::evaluate(Complex s) const { return horner(num_, s) / horner(den_, s); }

Real RationalTF::dc_gain() const {
  if (den_.back() == 0) throw DomainError("transfer function has a pole at s = 0");
  return num_.back() / den_.back();
}

RationalTF adamssm_tf(Real b2, Real b3) {
  if (!(b2 > 0) || !(b3 >= 0)) throw std::invalid_argument("adamssm_tf: need b2 > 0, b3 >= 0");
  return RationalTF({b2, b2 * b2}, {1.0, 2 * b2 + b3, b2 * b2});
}

std::vector<Complex> quadratic_roots(std::span<const Real> coeffs) {
  const Vec c = strip_leading_zeros(Vec(coeffs.begin(), coeffs.end()));
  std::vector<Complex> roots;
  if (c.size() > 3) throw DegreeError("closed-form roots only for degree <= 2");
  if (c.size() == 2) {
    roots.emplace_back(-c[1] / c[0]);
  } else if (c.size() == 3) {
    const Real a = c[0], b = c[1], k = c[2];
    const Real disc = b * b - 4 * a * k;
    if (disc == 0) {
      const Real r = -b / (2 * a);
      roots = {Complex(r), Complex(r)};
    } else if (disc > 0) {
      // Avoid cancellation: compute the larger-magnitude root first.
      const Real q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      roots = {Complex(q / a), Complex(k / q)};
    } else {
      const Real re = -b / (2 * a);
      const Real im = std::sqrt(-disc) / (2 * std::abs(a));
      roots = {Complex(re, -im), Complex(re, im)};
    }
  }
  sort_roots(roots);
  return roots;
}

PolesZeros poles_zeros(const RationalTF& tf) {
  if (tf.den().size() > 3) throw DegreeError("poles_zeros: denominator degree > 2");
  return {quadratic_roots(tf.den()), quadratic_roots(tf.num())};
}

RationalTF cancel_common_roots(const RationalTF& tf, Real rel_tol) {
  PolesZeros pz = poles_zeros(tf);
  std::vector<Complex> poles, zeros = pz.zeros;
  for (const Complex& p : pz.poles) {
    auto match = std::find_if(zeros.begin(), zeros.end(), [&](const Complex& z) {
      return std::abs(p - z) <= rel_tol * std::max<Real>(1, std::abs(p));
    });
    if (match != zeros.end()) {
      zeros.erase(match);
    } else {
      poles.push_back(p);
    }
  }
  return RationalTF(poly_from_roots(tf.num().front(), zeros), poly_from_roots(1.0, poles));
}

namespace {

struct Decomposition {
  Real feedthrough = 0;
  Vec num;  // strictly proper remainder
  std::vector<Complex> poles;
  bool repeated = false;
};

Decomposition decompose(const RationalTF& tf) {
  if (tf.order() > 2) throw DegreeError("responses only for order <= 2");
  Decomposition d;
  d.num = tf.num();
  if (d.num.size() == tf.den().size()) {
    d.feedthrough = d.num.front();
    Vec rem(d.num.size() - 1);
    for (std::size_t i = 1; i < d.num.size(); ++i) rem[i - 1] = d.num[i] - d.feedthrough * tf.den()[i];
    d.num = rem.empty() ? Vec{0.0} : rem;
  }
  d.poles = quadratic_roots(tf.den());
  d.repeated = d.poles.size() == 2 && d.poles[0] == d.poles[1];
  return d;
}

}  // namespace

Vec impulse_response(const RationalTF& tf, std::span<const Real> times) {
  const Decomposition d = decompose(tf);
  if (d.feedthrough != 0) throw DomainError("impulse response of a biproper system contains a delta");
  const Vec dden = derivative(tf.den());
  Vec out;
  out.reserve(times.size());
  for (Real t : times) {
    Complex h = 0;
    if (d.repeated) {
      const Complex p = d.poles[0];
      h = (horner(derivative(d.num), p) + horner(d.num, p) * t) * std::exp(p * t);
    } else {
      for (const Complex& p : d.poles) h += horner(d.num, p) / horner(dden, p) * std::exp(p * t);
    }
    out.push_back(h.real());
  }
  return out;
}

Vec step_response(const RationalTF& tf, std::span<const Real> times) {
  const Decomposition d = decompose(tf);
  const Vec dden = derivative(tf.den());
  // int_0^t e^{p s} ds and int_0^t s e^{p s} ds
  auto i0 = [](Complex p, Real t) -> Complex { return p == Complex(0) ? Complex(t) : (std::exp(p * t) - 1.0) / p; };
  auto i1 = [](Complex p, Real t) -> Complex {
    return p == Complex(0) ? Complex(0.5 * t * t) : (std::exp(p * t) * (p * t - 1.0) + 1.0) / (p * p);
  };
  Vec out;
  out.reserve(times.size());
  for (Real t : times) {
    Complex y = d.feedthrough;
    if (d.repeated) {
      const Complex p = d.poles[0];
      y += horner(derivative(d.num), p) * i0(p, t) + horner(d.num, p) * i1(p, t);
    } else {
      for (const Complex& p : d.poles) y += horner(d.num, p) / horner(dden, p) * i0(p, t);
    }
    out.push_back(y.real());
  }
  return out;
}

Real stability_quantity_p(const SecondMomentLTI& lti) {
  const Real diff = lti.lambda3 - lti.lambda5;
  return std::sqrt(diff * diff + 4 * lti.lambda3 * lti.lambda4);
}

namespace {

// Modal pieces of exp(A t) for p > 0. With
//   a = p + (lambda3 - lambda5),  b = p - (lambda3 - lambda5),  a*b = 4 lambda3 lambda4,
//   slow = e^{r_slow t},  fast_ratio = e^{-p t},
// the entries are
//   phi11 = slow (b + fast_ratio a) / (2p)     phi12 = lambda3 slow (1 - fast_ratio) / p
//   phi21 = lambda4 slow (1 - fast_ratio) / p  phi22 = slow (a + fast_ratio b) / (2p).
struct Modes {
  Real p, a, b, slow, one_minus_ratio, ratio;
};

Modes modes(const SecondMomentLTI& lti, Real t) {
  const Real l3 = lti.lambda3, l4 = lti.lambda4, l5 = lti.lambda5;
  Modes m{};
  m.p = stability_quantity_p(lti);
  const Real cross = 4 * l3 * l4;
  // One of a, b is a sum of nonnegatives; recover the other from a*b = cross.
  if (l3 >= l5) {
    m.a = m.p + (l3 - l5);
    m.b = m.a > 0 ? cross / m.a : 0;
  } else {
    m.b = m.p - (l3 - l5);
    m.a = m.b > 0 ? cross / m.b : 0;
  }
  // r_slow = (-(l3 + l5) + p) / 2 rewritten without cancellation.
  const Real r_slow = -2 * l3 * (l5 - l4) / (l3 + l5 + m.p);
  m.slow = std::exp(r_slow * t);
  m.one_minus_ratio = -std::expm1(-m.p * t);
  m.ratio = std::exp(-m.p * t);
  return m;
}

}  // namespace

TransitionEntries state_transition_entries(const SecondMomentLTI& lti, Real t) {
  const Modes m = modes(lti, t);
  if (m.p == 0) throw DomainError("state_transition_entries: p = 0 (repeated eigenvalue)");
  return {lti.lambda3 * m.slow * m.one_minus_ratio / m.p, m.slow * (m.a + m.ratio * m.b) / (2 * m.p)};
}

std::array<Real, 4> state_transition_matrix(const SecondMomentLTI& lti, Real t) {
  const Real p = stability_quantity_p(lti);
  if (p == 0) {
    // Repeated eigenvalue sigma: exp(A t) = e^{sigma t} (I + (A - sigma I) t).
    const Real sigma = -0.5 * (lti.lambda3 + lti.lambda5);
    const Real e = std::exp(sigma * t);
    const auto a = lti.state_matrix();
    return {e * (1 + (a[0] - sigma) * t), e * a[1] * t, e * a[2] * t, e * (1 + (a[3] - sigma) * t)};
  }
  const Modes m = modes(lti, t);
  return {m.slow * (m.b + m.ratio * m.a) / (2 * p), lti.lambda3 * m.slow * m.one_minus_ratio / p,
          lti.lambda4 * m.slow * m.one_minus_ratio / p, m.slow * (m.a + m.ratio * m.b) / (2 * p)};
}

Vec second_moment_response(const SecondMomentLTI& lti, Real input_gain, std::span<const Real> input,
                           UniformGrid grid, Real zeta0, Real nu0) {
  if (input.empty()) throw GridError("second_moment_response: empty input series");
  if (!(grid.dt > 0)) throw GridError("second_moment_response: grid spacing must be positive");
  const std::size_t n = input.size();

  Vec phi21(n), phi22(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto phi = state_transition_matrix(lti, static_cast<Real>(k) * grid.dt);
    phi21[k] = phi[2];
    phi22[k] = phi[3];
  }

  Vec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Real conv = 0;
    if (k > 0) {
      conv = 0.5 * (phi22[k] * input[0] + phi22[0] * input[k]);
      for (std::size_t j = 1; j < k; ++j) conv += phi22[k - j] * input[j];
      conv *= grid.dt;
    }
    out[k] = phi21[k] * zeta0 + phi22[k] * nu0 + input_gain * conv;
  }
  return out;
}

Vec second_moment_response(const SecondMomentLTI& lti, Real input_gain, std::span<const Real> input,
                           std::span<const Real> times, Real zeta0, Real nu0) {
  if (times.size() != input.size()) throw GridError("second_moment_response: times/input length mismatch");
  if (times.empty()) throw GridError("second_moment_response: empty grid");
  if (times.size() == 1) return second_moment_response(lti, input_gain, input, UniformGrid{times[0], 1}, zeta0, nu0);
  const Real dt = times[1] - times[0];
  for (std::size_t k = 1; k < times.size(); ++k) {
    const Real expect = times[0] + static_cast<Real>(k) * dt;
    if (std::abs(times[k] - expect) > 1e-9 * std::max<Real>(1, std::abs(expect))) {
      throw GridError("second_moment_response: grid is not uniform at index " + std::to_string(k));
    }
  }
  return second_moment_response(lti, input_gain, input, UniformGrid{times[0], dt}, zeta0, nu0);
}

}  // namespace ssmopt
