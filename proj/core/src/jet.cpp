#include "twistprod/jet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace twistprod {

namespace {

void require_dim(std::size_t n) {
  if (n > kMaxJetDim) {
    throw std::invalid_argument("jet dimension " + std::to_string(n) +
                                " exceeds maximum " +
                                std::to_string(kMaxJetDim));
  }
}

void require_same_dim(const Jet2& a, const Jet2& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("jet dimension mismatch: " +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
}

bool is_integer(double c) { return std::isfinite(c) && std::floor(c) == c; }

}  // namespace

Jet2 Jet2::constant(double c, std::size_t n) {
  require_dim(n);
  Jet2 j;
  j.value_ = c;
  j.dim_ = static_cast<std::uint8_t>(n);
  return j;
}

Jet2 Jet2::variable(double v, std::size_t i, std::size_t n) {
  if (i >= n) throw std::out_of_range("jet seed index out of range");
  Jet2 j = constant(v, n);
  j.grad_[i] = 1.0;
  return j;
}

Eigen::VectorXd Jet2::gradient() const {
  Eigen::VectorXd g(dim_);
  for (std::size_t i = 0; i < dim_; ++i) g[i] = grad_[i];
  return g;
}

Eigen::MatrixXd Jet2::hessian() const {
  Eigen::MatrixXd h(dim_, dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) h(i, j) = hess(i, j);
  return h;
}

Jet2 Jet2::operator-() const {
  Jet2 r = *this;
  r.value_ = -value_;
  for (std::size_t i = 0; i < dim_; ++i) r.grad_[i] = -grad_[i];
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j)
      r.hess_[packed(i, j)] = -hess_[packed(i, j)];
  return r;
}

Jet2& Jet2::operator+=(const Jet2& rhs) {
  require_same_dim(*this, rhs);
  value_ += rhs.value_;
  for (std::size_t i = 0; i < dim_; ++i) grad_[i] += rhs.grad_[i];
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j)
      hess_[packed(i, j)] += rhs.hess_[packed(i, j)];
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& rhs) {
  require_same_dim(*this, rhs);
  value_ -= rhs.value_;
  for (std::size_t i = 0; i < dim_; ++i) grad_[i] -= rhs.grad_[i];
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j)
      hess_[packed(i, j)] -= rhs.hess_[packed(i, j)];
  return *this;
}

Jet2& Jet2::operator*=(const Jet2& rhs) {
  require_same_dim(*this, rhs);
  const Jet2 a = *this;
  value_ = a.value_ * rhs.value_;
  for (std::size_t i = 0; i < dim_; ++i)
    grad_[i] = a.grad_[i] * rhs.value_ + a.value_ * rhs.grad_[i];
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i; j < dim_; ++j) {
      const std::size_t k = packed(i, j);
      hess_[k] = a.hess_[k] * rhs.value_ + a.value_ * rhs.hess_[k] +
                 (a.grad_[i] * rhs.grad_[j] + a.grad_[j] * rhs.grad_[i]);
    }
  }
  return *this;
}

Jet2& Jet2::operator/=(const Jet2& rhs) {
  require_same_dim(*this, rhs);
  if (rhs.value_ == 0.0) throw std::domain_error("division by zero");
  // a / b = a * (1/b)
  const double inv = 1.0 / rhs.value_;
  return *this *= rhs.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
}

Jet2& Jet2::operator+=(double rhs) {
  value_ += rhs;
  return *this;
}

Jet2& Jet2::operator-=(double rhs) {
  value_ -= rhs;
  return *this;
}

Jet2& Jet2::operator*=(double rhs) {
  value_ *= rhs;
  for (std::size_t i = 0; i < dim_; ++i) grad_[i] *= rhs;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j) hess_[packed(i, j)] *= rhs;
  return *this;
}

Jet2& Jet2::operator/=(double rhs) {
  if (rhs == 0.0) throw std::domain_error("division by zero");
  value_ /= rhs;
  for (std::size_t i = 0; i < dim_; ++i) grad_[i] /= rhs;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j) hess_[packed(i, j)] /= rhs;
  return *this;
}

Jet2 Jet2::chain(double f, double df, double d2f) const {
  Jet2 r;
  r.dim_ = dim_;
  r.value_ = f;
  for (std::size_t i = 0; i < dim_; ++i) r.grad_[i] = df * grad_[i];
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i; j < dim_; ++j) {
      const std::size_t k = packed(i, j);
      r.hess_[k] = df * hess_[k] + d2f * (grad_[i] * grad_[j]);
    }
  }
  return r;
}

Jet2 operator/(double a, const Jet2& b) {
  if (b.value() == 0.0) throw std::domain_error("division by zero");
  const double inv = 1.0 / b.value();
  return b.chain(a * inv, -a * inv * inv, 2.0 * a * inv * inv * inv);
}

Jet2 exp(const Jet2& x) {
  const double e = std::exp(x.value());
  return x.chain(e, e, e);
}

Jet2 log(const Jet2& x) {
  const double v = x.value();
  if (!(v > 0.0)) throw std::domain_error("ln of non-positive value");
  return x.chain(std::log(v), 1.0 / v, -1.0 / (v * v));
}

Jet2 sin(const Jet2& x) {
  const double s = std::sin(x.value());
  return x.chain(s, std::cos(x.value()), -s);
}

Jet2 cos(const Jet2& x) {
  const double c = std::cos(x.value());
  return x.chain(c, -std::sin(x.value()), -c);
}

Jet2 tan(const Jet2& x) {
  const double c = std::cos(x.value());
  if (c == 0.0) throw std::domain_error("tan at a pole");
  const double t = std::tan(x.value());
  const double sec2 = 1.0 / (c * c);
  return x.chain(t, sec2, 2.0 * t * sec2);
}

Jet2 sinh(const Jet2& x) {
  const double s = std::sinh(x.value());
  return x.chain(s, std::cosh(x.value()), s);
}

Jet2 cosh(const Jet2& x) {
  const double c = std::cosh(x.value());
  return x.chain(c, std::sinh(x.value()), c);
}

Jet2 tanh(const Jet2& x) {
  const double t = std::tanh(x.value());
  const double sech2 = 1.0 - t * t;
  return x.chain(t, sech2, -2.0 * t * sech2);
}

Jet2 sqrt(const Jet2& x) {
  const double v = x.value();
  if (!(v > 0.0)) throw std::domain_error("sqrt of non-positive value");
  const double s = std::sqrt(v);
  return x.chain(s, 0.5 / s, -0.25 / (s * v));
}

Jet2 pow(const Jet2& x, double c) {
  const double v = x.value();
  if (c == 0.0) return Jet2::constant(1.0, x.dim());
  if (c == 1.0) return x;
  if (is_integer(c)) {
    if (v == 0.0 && c < 0.0) throw std::domain_error("division by zero");
    const double d1 = c * std::pow(v, c - 1.0);
    const double d2 = (c == 1.0) ? 0.0 : c * (c - 1.0) * std::pow(v, c - 2.0);
    return x.chain(std::pow(v, c), d1, d2);
  }
  if (!(v > 0.0)) {
    throw std::domain_error("non-integer power of non-positive value");
  }
  const double p = std::pow(v, c);
  return x.chain(p, c * p / v, c * (c - 1.0) * p / (v * v));
}

Jet2 pow(const Jet2& x, const Jet2& y) {
  if (!(x.value() > 0.0)) {
    throw std::domain_error("pow with variable exponent needs a positive base");
  }
  return exp(y * log(x));
}

std::vector<Jet2> seed_variables(std::span<const double> point) {
  std::vector<Jet2> out;
  out.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i)
    out.push_back(Jet2::variable(point[i], i, point.size()));
  return out;
}

std::ostream& operator<<(std::ostream& os, const Jet2& jet) {
  os << "Jet2{" << jet.value() << ", [";
  for (std::size_t i = 0; i < jet.dim(); ++i) os << (i ? ", " : "") << jet.grad(i);
  os << "], [";
  for (std::size_t i = 0; i < jet.dim(); ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < jet.dim(); ++j)
      os << (j ? ", " : "") << jet.hess(i, j);
    os << "]";
  }
  return os << "]}";
}

}  // namespace twistprod
