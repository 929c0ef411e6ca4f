#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace twistprod {

/// Largest chart dimension a jet can carry. Every suite uses charts of
/// dimension <= 8, so storage is fixed and allocation free.
inline constexpr std::size_t kMaxJetDim = 8;

/// Second-order jet: value, gradient and Hessian of a scalar with respect to
/// the n coordinates of a chart.
///
/// The Hessian is stored packed (upper triangle), so hess(i, j) and
/// hess(j, i) read the same slot and are bit-equal by construction.
///
/// Arithmetic follows the exact first- and second-order chain, product and
/// quotient rules. Domain violations (division by zero, ln or sqrt of a
/// non-positive value, ...) throw std::domain_error; the expression evaluator
/// rewraps them with the offending sub-expression.
class Jet2 {
 public:
  Jet2() = default;

  /// Constant c in n variables.
  static Jet2 constant(double c, std::size_t n);
  /// Seed for coordinate i of n at value v: grad = e_i, hess = 0.
  static Jet2 variable(double v, std::size_t i, std::size_t n);

  std::size_t dim() const noexcept { return dim_; }
  double value() const noexcept { return value_; }
  double grad(std::size_t i) const noexcept { return grad_[i]; }
  double hess(std::size_t i, std::size_t j) const noexcept {
    return hess_[packed(i, j)];
  }

  Eigen::VectorXd gradient() const;
  Eigen::MatrixXd hessian() const;

  Jet2 operator-() const;
  Jet2& operator+=(const Jet2& rhs);
  Jet2& operator-=(const Jet2& rhs);
  Jet2& operator*=(const Jet2& rhs);
  Jet2& operator/=(const Jet2& rhs);
  Jet2& operator+=(double rhs);
  Jet2& operator-=(double rhs);
  Jet2& operator*=(double rhs);
  Jet2& operator/=(double rhs);

  /// Applies a scalar function given its value f, first derivative df and
  /// second derivative d2f at value(): grad' = df grad,
  /// hess' = df hess + d2f grad grad^T.
  Jet2 chain(double f, double df, double d2f) const;

  friend bool operator==(const Jet2&, const Jet2&) = default;

 private:
  static constexpr std::size_t packed(std::size_t i, std::size_t j) noexcept {
    if (i > j) {
      std::size_t t = i;
      i = j;
      j = t;
    }
    return i * (2 * kMaxJetDim - i - 1) / 2 + j;
  }

  double value_ = 0.0;
  std::array<double, kMaxJetDim> grad_{};
  std::array<double, kMaxJetDim*(kMaxJetDim + 1) / 2> hess_{};
  std::uint8_t dim_ = 0;
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
inline Jet2 operator/(Jet2 a, const Jet2& b) { return a /= b; }
inline Jet2 operator+(Jet2 a, double b) { return a += b; }
inline Jet2 operator-(Jet2 a, double b) { return a -= b; }
inline Jet2 operator*(Jet2 a, double b) { return a *= b; }
inline Jet2 operator/(Jet2 a, double b) { return a /= b; }
inline Jet2 operator+(double a, Jet2 b) { return b += a; }
inline Jet2 operator-(double a, const Jet2& b) { return -b + a; }
inline Jet2 operator*(double a, Jet2 b) { return b *= a; }
Jet2 operator/(double a, const Jet2& b);

Jet2 exp(const Jet2& x);
Jet2 log(const Jet2& x);
Jet2 sin(const Jet2& x);
Jet2 cos(const Jet2& x);
Jet2 tan(const Jet2& x);
Jet2 sinh(const Jet2& x);
Jet2 cosh(const Jet2& x);
Jet2 tanh(const Jet2& x);
Jet2 sqrt(const Jet2& x);
/// x^c for a constant exponent. Integer c admits negative x.
Jet2 pow(const Jet2& x, double c);
/// x^y = exp(y ln x); requires x > 0.
Jet2 pow(const Jet2& x, const Jet2& y);

/// i-th jet has value point[i], gradient e_i and zero Hessian.
std::vector<Jet2> seed_variables(std::span<const double> point);

std::ostream& operator<<(std::ostream& os, const Jet2& jet);

}  // namespace twistprod
