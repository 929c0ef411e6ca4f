#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twistprod/expr.hpp"
#include "twistprod/jet.hpp"

namespace twistprod {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultPivotTolerance = 1e-12;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// A coordinate chart: named coordinates plus an open box used for sampling.
class ChartDomain {
 public:
  ChartDomain() = default;
  ChartDomain(std::string name, std::vector<std::string> coordinates,
              std::vector<Interval> box);

  /// Chart on the Cartesian product; coordinates of a then b.
  static ChartDomain product(std::string name, const ChartDomain& a, const ChartDomain& b);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& coordinates() const { return coordinates_; }
  const std::vector<Interval>& box() const { return box_; }
  std::size_t dimension() const { return coordinates_.size(); }
  bool contains(std::span<const double> point) const;

 private:
  std::string name_;
  std::vector<std::string> coordinates_;
  std::vector<Interval> box_;
};

class ScalarField {
 public:
  ScalarField() = default;
  /// expr must be over exactly the chart's coordinates.
  ScalarField(ChartDomain chart, Expression expr);
  /// Parses source over the chart's coordinates.
  static ScalarField parse(ChartDomain chart, std::string_view source);

  const ChartDomain& chart() const { return chart_; }
  const Expression& expression() const { return expr_; }
  double value(std::span<const double> x) const { return expr_.evaluate(x); }
  Jet2 jet(std::span<const double> x) const { return expr_.eval_jet2(x); }

 private:
  ChartDomain chart_;
  Expression expr_ = Expression::literal(0.0, {"_"});
};

/// Tangent vector at a base point, in chart components.
struct TangentVector {
  Vector base;
  Vector components;
};

class VectorField {
 public:
  VectorField() = default;
  VectorField(ChartDomain chart, std::vector<Expression> components);
  static VectorField parse(ChartDomain chart, const std::vector<std::string>& sources);
  /// The coordinate field d/dx_i.
  static VectorField coordinate(const ChartDomain& chart, std::size_t i);
  static VectorField constant(const ChartDomain& chart, std::span<const double> components);

  const ChartDomain& chart() const { return chart_; }
  const std::vector<Expression>& components() const { return components_; }
  Vector at(std::span<const double> x) const;
  std::vector<Jet2> jets(std::span<const double> x) const;

 private:
  ChartDomain chart_;
  std::vector<Expression> components_;
};

/// Riemannian metric on one chart, stored as the upper triangle of
/// component expressions so g(x) is symmetric by construction.
class MetricField {
 public:
  MetricField() = default;
  /// components is a full n x n array; the lower triangle must be
  /// structurally equal to the upper one.
  MetricField(ChartDomain chart, const std::vector<std::vector<Expression>>& components);
  static MetricField diagonal(ChartDomain chart, std::vector<Expression> diagonal);
  static MetricField parse(ChartDomain chart, const std::vector<std::vector<std::string>>& rows);
  static MetricField parse_diagonal(ChartDomain chart, const std::vector<std::string>& diagonal);

  const ChartDomain& chart() const { return chart_; }
  std::size_t dimension() const { return chart_.dimension(); }
  const Expression& component(std::size_t i, std::size_t j) const;

  double pivot_tolerance() const { return pivot_tolerance_; }
  void set_pivot_tolerance(double tol) { pivot_tolerance_ = tol; }

  /// Raw symmetric matrix, no definiteness check.
  Matrix evaluate(std::span<const double> x) const;
  /// Entry jets in packed upper order: (0,0), (0,1), ..., (1,1), ...
  std::vector<Jet2> jets(std::span<const double> x) const;

 private:
  std::size_t packed(std::size_t i, std::size_t j) const;

  ChartDomain chart_;
  std::vector<Expression> upper_;
  double pivot_tolerance_ = kDefaultPivotTolerance;
};

/// Throws Error(kNotPositiveDefinite) if the smallest LDL^T pivot of g is
/// below pivot_tolerance.
void require_positive_definite(const Matrix& g, double pivot_tolerance,
                               const std::string& what);

/// g(x), checked symmetric positive definite.
Matrix metric_at(const MetricField& g, std::span<const double> x);

/// Christoffel symbols of the second kind, Gamma^k_{ij}, symmetric in (i, j)
/// by construction.
class Christoffel {
 public:
  Christoffel() = default;
  explicit Christoffel(std::size_t n) : n_(n), data_(n * n * n, 0.0) {}

  std::size_t dimension() const { return n_; }
  double operator()(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[(k * n_ + i) * n_ + j];
  }
  double& operator()(std::size_t k, std::size_t i, std::size_t j) {
    return data_[(k * n_ + i) * n_ + j];
  }
  /// Gamma^k_{ij} u^i v^j.
  Vector contract(const Vector& u, const Vector& v) const;
  double max_abs() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Metric, inverse and first derivatives at one point.
struct MetricSample {
  Matrix g;
  Matrix g_inv;
  std::vector<Matrix> dg;  // dg[k](i, j) = d_k g_ij
  Christoffel gamma;
};

MetricSample sample_metric(const MetricField& g, std::span<const double> x);

Christoffel christoffel(const MetricField& g, std::span<const double> x);

/// Metric gradient g^{ij} d_j f.
TangentVector gradient(const ScalarField& f, const MetricField& g, std::span<const double> x);

/// (nabla_X Y)^k = X^i d_i Y^k + Gamma^k_ij X^i Y^j.
TangentVector covariant_derivative(const MetricField& g, const VectorField& X,
                                   const VectorField& Y, std::span<const double> x);

/// Gram-Schmidt of the coordinate basis in index order under g(x). Columns
/// of the result are the frame vectors.
Matrix orthonormal_frame_matrix(const Matrix& g);

std::vector<TangentVector> orthonormal_frame(const MetricField& g, std::span<const double> x);

/// Metric-compatibility defect X g(Y,Z) - g(nabla_X Y, Z) - g(Y, nabla_X Z).
double metric_compatibility_defect(const MetricField& g, const VectorField& X,
                                   const VectorField& Y, const VectorField& Z,
                                   std::span<const double> x);

}  // namespace twistprod
