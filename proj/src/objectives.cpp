#include "ssmopt/objectives.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace ssmopt {

Objective::Objective(std::string name, std::size_t dim, ValueFn value, GradientFn gradient,
                     std::optional<KnownMinimum> known_min, bool hessian_bounded,
                     Real box_half_width)
    : name_(std::move(name)),
      dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      known_min_(std::move(known_min)),
      hessian_bounded_(hessian_bounded),
      box_half_width_(box_half_width) {
  if (dim_ == 0) throw std::invalid_argument("objective dimension must be positive");
  if (known_min_ && known_min_->x.size() != dim_) {
    throw std::invalid_argument("known minimizer has wrong dimension");
  }
}

void Objective::check_dim(std::size_t n) const {
  if (n != dim_) {
    throw std::invalid_argument(name_ + ": expected dimension " + std::to_string(dim_) + ", got " +
                                std::to_string(n));
  }
}

bool Objective::in_box(std::span<const Real> x) const {
  for (Real v : x) {
    if (!(std::abs(v) <= box_half_width_)) return false;
  }
  return true;
}

Real Objective::value(std::span<const Real> x) const {
  check_dim(x.size());
  return value_(x);
}

void Objective::gradient(std::span<const Real> x, std::span<Real> out) const {
  check_dim(x.size());
  check_dim(out.size());
  gradient_(x, out);
}

Vec Objective::gradient(std::span<const Real> x) const {
  Vec g(dim_);
  gradient(x, g);
  return g;
}

Objective make_quadratic(std::size_t dim, Real condition_number) {
  if (dim == 0) throw std::invalid_argument("quadratic: dim must be >= 1");
  if (!(condition_number >= 1)) throw std::invalid_argument("quadratic: condition_number must be >= 1");

  auto eig = std::make_shared<Vec>(dim, 1.0);
  for (std::size_t i = 1; i < dim; ++i) {
    (*eig)[i] = std::pow(condition_number, static_cast<Real>(i) / static_cast<Real>(dim - 1));
  }
  // Pin the top eigenvalue so cond = max/min holds exactly.
  if (dim > 1) eig->back() = condition_number;

  auto value = [eig](std::span<const Real> x) {
    Real f = 0;
    for (std::size_t i = 0; i < x.size(); ++i) f += (*eig)[i] * x[i] * x[i];
    return 0.5 * f;
  };
  auto grad = [eig](std::span<const Real> x, std::span<Real> g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = (*eig)[i] * x[i];
  };
  return Objective("quadratic", dim, value, grad, KnownMinimum{Vec(dim, 0.0), 0.0}, true, 5.0);
}

Objective make_rosenbrock(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("rosenbrock: dim must be >= 2");

  auto value = [](std::span<const Real> x) {
    Real f = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const Real a = x[i + 1] - x[i] * x[i];
      const Real b = 1 - x[i];
      f += 100 * a * a + b * b;
    }
    return f;
  };
  auto grad = [](std::span<const Real> x, std::span<Real> g) {
    for (auto& v : g) v = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const Real a = x[i + 1] - x[i] * x[i];
      g[i] += -400 * x[i] * a - 2 * (1 - x[i]);
      g[i + 1] += 200 * a;
    }
  };
  // Hessian is unbounded globally; bounded only on the box.
  return Objective("rosenbrock", dim, value, grad, KnownMinimum{Vec(dim, 1.0), 0.0}, false, 2.0);
}

namespace {

struct LogisticData {
  std::size_t dim;
  std::size_t n;
  Vec features;  // row-major n x dim
  Vec labels;    // +-1
};

// log(1 + exp(u)) without overflow
Real softplus(Real u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

Real sigmoid(Real u) {
  if (u >= 0) return 1 / (1 + std::exp(-u));
  const Real e = std::exp(u);
  return e / (1 + e);
}

}  // namespace

Objective make_logistic(std::size_t dim, std::size_t n_samples, std::uint64_t seed) {
  if (dim == 0 || n_samples == 0) throw std::invalid_argument("logistic: dim and n_samples must be >= 1");

  auto data = std::make_shared<LogisticData>();
  data->dim = dim;
  data->n = n_samples;
  data->features.resize(dim * n_samples);
  data->labels.resize(n_samples);

  Lcg64 rng(seed);
  Vec hidden(dim);
  for (auto& w : hidden) w = rng.uniform(-2.0, 2.0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Real z = 0;
    for (std::size_t j = 0; j < dim; ++j) {
      const Real a = rng.uniform(-1.0, 1.0);
      data->features[s * dim + j] = a;
      z += a * hidden[j];
    }
    Real y = z >= 0 ? 1.0 : -1.0;
    if (rng.uniform() < 0.1) y = -y;
    data->labels[s] = y;
  }

  auto value = [data](std::span<const Real> w) {
    Real loss = 0;
    for (std::size_t s = 0; s < data->n; ++s) {
      Real z = 0;
      for (std::size_t j = 0; j < data->dim; ++j) z += data->features[s * data->dim + j] * w[j];
      loss += softplus(-data->labels[s] * z);
    }
    Real reg = 0;
    for (Real v : w) reg += v * v;
    return loss / static_cast<Real>(data->n) + 0.5 * kLogisticL2 * reg;
  };
  auto grad = [data](std::span<const Real> w, std::span<Real> g) {
    for (auto& v : g) v = 0;
    for (std::size_t s = 0; s < data->n; ++s) {
      const Real* a = &data->features[s * data->dim];
      Real z = 0;
      for (std::size_t j = 0; j < data->dim; ++j) z += a[j] * w[j];
      const Real y = data->labels[s];
      const Real coef = -y * sigmoid(-y * z);
      for (std::size_t j = 0; j < data->dim; ++j) g[j] += coef * a[j];
    }
    const Real inv_n = 1 / static_cast<Real>(data->n);
    for (std::size_t j = 0; j < data->dim; ++j) g[j] = g[j] * inv_n + kLogisticL2 * w[j];
  };
  return Objective("logistic", dim, value, grad, std::nullopt, true, 5.0);
}

Vec finite_diff_grad(const Objective& obj, std::span<const Real> x, Real h) {
  if (!(h > 0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
  Vec probe(x.begin(), x.end());
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real xi = probe[i];
    probe[i] = xi + h;
    const Real fp = obj.value(probe);
    probe[i] = xi - h;
    const Real fm = obj.value(probe);
    probe[i] = xi;
    out[i] = (fp - fm) / (2 * h);
  }
  return out;
}

}  // namespace ssmopt
