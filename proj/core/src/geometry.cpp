#include "twistprod/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "twistprod/error.hpp"

namespace twistprod {

namespace {

void require_point(const ChartDomain& chart, std::span<const double> x) {
  if (x.size() != chart.dimension()) {
    throw Error(ErrorCode::kDimension, "chart '" + chart.name() + "' has dimension " +
                                           std::to_string(chart.dimension()) +
                                           ", point has " + std::to_string(x.size()));
  }
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// ChartDomain
// ---------------------------------------------------------------------------

ChartDomain::ChartDomain(std::string name, std::vector<std::string> coordinates,
                         std::vector<Interval> box)
    : name_(std::move(name)), coordinates_(std::move(coordinates)), box_(std::move(box)) {
  if (coordinates_.empty()) throw Error(ErrorCode::kDimension, "chart '" + name_ + "' has no coordinates");
  if (box_.size() != coordinates_.size()) {
    throw Error(ErrorCode::kDimension, "chart '" + name_ + "': box has " +
                                           std::to_string(box_.size()) + " intervals for " +
                                           std::to_string(coordinates_.size()) + " coordinates");
  }
  for (std::size_t i = 0; i < box_.size(); ++i) {
    if (!(box_[i].lo < box_[i].hi)) {
      throw Error(ErrorCode::kDimension,
                  "chart '" + name_ + "': empty interval for '" + coordinates_[i] + "'");
    }
  }
}

ChartDomain ChartDomain::product(std::string name, const ChartDomain& a, const ChartDomain& b) {
  std::vector<std::string> coords = a.coordinates();
  coords.insert(coords.end(), b.coordinates().begin(), b.coordinates().end());
  std::vector<Interval> box = a.box();
  box.insert(box.end(), b.box().begin(), b.box().end());
  return ChartDomain(std::move(name), std::move(coords), std::move(box));
}

bool ChartDomain::contains(std::span<const double> point) const {
  if (point.size() != dimension()) return false;
  for (std::size_t i = 0; i < point.size(); ++i)
    if (!(point[i] > box_[i].lo && point[i] < box_[i].hi)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

ScalarField::ScalarField(ChartDomain chart, Expression expr)
    : chart_(std::move(chart)), expr_(std::move(expr)) {
  if (expr_.variables() != chart_.coordinates()) {
    throw Error(ErrorCode::kDimension,
                "scalar field '" + expr_.to_string() + "' is not over the coordinates of chart '" +
                    chart_.name() + "'");
  }
}

ScalarField ScalarField::parse(ChartDomain chart, std::string_view source) {
  Expression e = Expression::parse(source, chart.coordinates());
  return ScalarField(std::move(chart), std::move(e));
}

VectorField::VectorField(ChartDomain chart, std::vector<Expression> components)
    : chart_(std::move(chart)), components_(std::move(components)) {
  if (components_.size() != chart_.dimension()) {
    throw Error(ErrorCode::kDimension, "vector field has " + std::to_string(components_.size()) +
                                           " components on chart '" + chart_.name() +
                                           "' of dimension " +
                                           std::to_string(chart_.dimension()));
  }
  for (const auto& c : components_) {
    if (c.variables() != chart_.coordinates()) {
      throw Error(ErrorCode::kDimension, "vector field component '" + c.to_string() +
                                             "' is not over chart '" + chart_.name() + "'");
    }
  }
}

VectorField VectorField::parse(ChartDomain chart, const std::vector<std::string>& sources) {
  std::vector<Expression> comps;
  for (const auto& s : sources) comps.push_back(Expression::parse(s, chart.coordinates()));
  return VectorField(std::move(chart), std::move(comps));
}

VectorField VectorField::coordinate(const ChartDomain& chart, std::size_t i) {
  std::vector<Expression> comps;
  for (std::size_t k = 0; k < chart.dimension(); ++k)
    comps.push_back(Expression::literal(k == i ? 1.0 : 0.0, chart.coordinates()));
  return VectorField(chart, std::move(comps));
}

VectorField VectorField::constant(const ChartDomain& chart, std::span<const double> components) {
  std::vector<Expression> comps;
  for (double c : components) comps.push_back(Expression::literal(c, chart.coordinates()));
  return VectorField(chart, std::move(comps));
}

Vector VectorField::at(std::span<const double> x) const {
  Vector v(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) v[i] = components_[i].evaluate(x);
  return v;
}

std::vector<Jet2> VectorField::jets(std::span<const double> x) const {
  std::vector<Jet2> out;
  out.reserve(components_.size());
  for (const auto& c : components_) out.push_back(c.eval_jet2(x));
  return out;
}

// ---------------------------------------------------------------------------
// MetricField
// ---------------------------------------------------------------------------

MetricField::MetricField(ChartDomain chart,
                         const std::vector<std::vector<Expression>>& components)
    : chart_(std::move(chart)) {
  const std::size_t n = chart_.dimension();
  if (components.size() != n) {
    throw Error(ErrorCode::kDimension, "metric on chart '" + chart_.name() + "' needs " +
                                           std::to_string(n) + " rows");
  }
  for (const auto& row : components) {
    if (row.size() != n) {
      throw Error(ErrorCode::kDimension, "metric on chart '" + chart_.name() + "' needs " +
                                             std::to_string(n) + " columns");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Expression& e = components[i][j];
      if (e.variables() != chart_.coordinates()) {
        throw Error(ErrorCode::kDimension, "metric component '" + e.to_string() +
                                               "' is not over chart '" + chart_.name() + "'");
      }
      if (!(components[j][i] == e)) {
        throw Error(ErrorCode::kDimension,
                    "metric on chart '" + chart_.name() + "' is not symmetric at (" +
                        std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      upper_.push_back(e);
    }
  }
}

MetricField MetricField::diagonal(ChartDomain chart, std::vector<Expression> diagonal) {
  const std::size_t n = chart.dimension();
  if (diagonal.size() != n) {
    throw Error(ErrorCode::kDimension, "diagonal metric on chart '" + chart.name() + "' needs " +
                                           std::to_string(n) + " entries");
  }
  std::vector<std::vector<Expression>> rows(
      n, std::vector<Expression>(n, Expression::literal(0.0, chart.coordinates())));
  for (std::size_t i = 0; i < n; ++i) rows[i][i] = diagonal[i];
  return MetricField(std::move(chart), rows);
}

MetricField MetricField::parse(ChartDomain chart,
                               const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::vector<Expression>> comps;
  for (const auto& row : rows) {
    std::vector<Expression> r;
    for (const auto& s : row) r.push_back(Expression::parse(s, chart.coordinates()));
    comps.push_back(std::move(r));
  }
  return MetricField(std::move(chart), comps);
}

MetricField MetricField::parse_diagonal(ChartDomain chart,
                                        const std::vector<std::string>& diagonal) {
  std::vector<Expression> d;
  for (const auto& s : diagonal) d.push_back(Expression::parse(s, chart.coordinates()));
  return MetricField::diagonal(std::move(chart), std::move(d));
}

std::size_t MetricField::packed(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  const std::size_t n = dimension();
  return i * (2 * n - i - 1) / 2 + j;
}

const Expression& MetricField::component(std::size_t i, std::size_t j) const {
  return upper_.at(packed(i, j));
}

Matrix MetricField::evaluate(std::span<const double> x) const {
  require_point(chart_, x);
  const std::size_t n = dimension();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      g(i, j) = upper_[packed(i, j)].evaluate(x);
      g(j, i) = g(i, j);
    }
  }
  return g;
}

std::vector<Jet2> MetricField::jets(std::span<const double> x) const {
  require_point(chart_, x);
  std::vector<Jet2> out;
  out.reserve(upper_.size());
  for (const auto& e : upper_) out.push_back(e.eval_jet2(x));
  return out;
}

// ---------------------------------------------------------------------------
// Point-wise geometry
// ---------------------------------------------------------------------------

void require_positive_definite(const Matrix& g, double pivot_tolerance, const std::string& what) {
  Eigen::LDLT<Matrix> ldlt(g);
  const double min_pivot = g.rows() ? ldlt.vectorD().minCoeff() : 1.0;
  if (ldlt.info() != Eigen::Success || !(min_pivot >= pivot_tolerance)) {
    std::ostringstream os;
    os.precision(6);
    os << what << " is not positive definite (smallest pivot " << min_pivot << ")";
    throw Error(ErrorCode::kNotPositiveDefinite, os.str());
  }
}

Matrix metric_at(const MetricField& g, std::span<const double> x) {
  Matrix m = g.evaluate(x);
  require_positive_definite(m, g.pivot_tolerance(),
                            "metric on chart '" + g.chart().name() + "' at " + format_point(x));
  return m;
}

Vector Christoffel::contract(const Vector& u, const Vector& v) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n_));
  for (std::size_t k = 0; k < n_; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) s += (*this)(k, i, j) * u[i] * v[j];
    out[k] = s;
  }
  return out;
}

double Christoffel::max_abs() const {
  double m = 0.0;
  for (double d : data_) m = std::max(m, std::abs(d));
  return m;
}

MetricSample sample_metric(const MetricField& metric, std::span<const double> x) {
  const std::size_t n = metric.dimension();
  const std::vector<Jet2> jets = metric.jets(x);
  MetricSample s;
  s.g = Matrix(n, n);
  s.dg.assign(n, Matrix(n, n));
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++p) {
      s.g(i, j) = s.g(j, i) = jets[p].value();
      for (std::size_t k = 0; k < n; ++k) s.dg[k](i, j) = s.dg[k](j, i) = jets[p].grad(k);
    }
  }
  require_positive_definite(s.g, metric.pivot_tolerance(),
                            "metric on chart '" + metric.chart().name() + "' at " +
                                format_point(x));
  s.g_inv = s.g.ldlt().solve(Matrix::Identity(n, n));
  s.g_inv = 0.5 * (s.g_inv + s.g_inv.transpose()).eval();

  s.gamma = Christoffel(n);
  // Lowered symbols [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij), raised
  // with g^{kl}. Only i <= j is computed; the mirror is copied.
  std::vector<double> lowered(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      for (std::size_t l = 0; l < n; ++l)
        lowered[l] = 0.5 * (s.dg[i](j, l) + s.dg[j](i, l) - s.dg[l](i, j));
      for (std::size_t k = 0; k < n; ++k) {
        double v = 0.0;
        for (std::size_t l = 0; l < n; ++l) v += s.g_inv(k, l) * lowered[l];
        s.gamma(k, i, j) = v;
        s.gamma(k, j, i) = v;
      }
    }
  }
  return s;
}

Christoffel christoffel(const MetricField& g, std::span<const double> x) {
  return sample_metric(g, x).gamma;
}

TangentVector gradient(const ScalarField& f, const MetricField& g, std::span<const double> x) {
  const Matrix gm = metric_at(g, x);
  const Jet2 fj = f.jet(x);
  TangentVector v;
  v.base = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  v.components = gm.ldlt().solve(fj.gradient());
  return v;
}

TangentVector covariant_derivative(const MetricField& g, const VectorField& X,
                                   const VectorField& Y, std::span<const double> x) {
  const MetricSample s = sample_metric(g, x);
  const Vector xv = X.at(x);
  const std::vector<Jet2> yj = Y.jets(x);
  const std::size_t n = g.dimension();
  Vector yv(n);
  for (std::size_t k = 0; k < n; ++k) yv[k] = yj[k].value();

  TangentVector out;
  out.base = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  out.components = s.gamma.contract(xv, yv);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) out.components[k] += xv[i] * yj[k].grad(i);
  return out;
}

Matrix orthonormal_frame_matrix(const Matrix& g) {
  const Eigen::Index n = g.rows();
  Matrix e = Matrix::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    Vector v = e.col(a);
    // Two passes of modified Gram-Schmidt keep g(e_a, e_b) within rounding
    // of the identity.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index b = 0; b < a; ++b) {
        const double c = e.col(b).dot(g * v);
        v -= c * e.col(b);
      }
    }
    const double norm2 = v.dot(g * v);
    if (!(norm2 > 0.0)) {
      throw Error(ErrorCode::kNotPositiveDefinite, "Gram-Schmidt met a null vector");
    }
    e.col(a) = v / std::sqrt(norm2);
  }
  return e;
}

std::vector<TangentVector> orthonormal_frame(const MetricField& g, std::span<const double> x) {
  const Matrix e = orthonormal_frame_matrix(metric_at(g, x));
  std::vector<TangentVector> out;
  const Vector base = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (Eigen::Index a = 0; a < e.cols(); ++a) out.push_back({base, e.col(a)});
  return out;
}

double metric_compatibility_defect(const MetricField& g, const VectorField& X,
                                   const VectorField& Y, const VectorField& Z,
                                   std::span<const double> x) {
  const std::size_t n = g.dimension();
  const std::vector<Jet2> gj = g.jets(x);
  const std::vector<Jet2> yj = Y.jets(x);
  const std::vector<Jet2> zj = Z.jets(x);

  // g(Y, Z) as a jet, then differentiated along X.
  Jet2 gyz = Jet2::constant(0.0, n);
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++p) {
      gyz += gj[p] * yj[i] * zj[j];
      if (i != j) gyz += gj[p] * yj[j] * zj[i];
    }
  }
  const Vector xv = X.at(x);
  const double x_gyz = xv.dot(gyz.gradient());

  const Matrix gm = metric_at(g, x);
  const Vector nxy = covariant_derivative(g, X, Y, x).components;
  const Vector nxz = covariant_derivative(g, X, Z, x).components;
  return x_gyz - nxy.dot(gm * Z.at(x)) - Y.at(x).dot(gm * nxz);
}

}  // namespace twistprod
