#include "twistprod/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twistprod/error.hpp"
#include "twistprod/sampling.hpp"

namespace twistprod {

namespace {

// |H|^2 below this is treated as H = 0 when fitting lambda.
constexpr double kNegligibleNorm2 = 1e-24;

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

SmoothMap::SmoothMap(ChartDomain source, ChartDomain target, std::vector<Expression> components)
    : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
  if (components_.size() != target_.dimension()) {
    throw Error(ErrorCode::kDimension, "map into chart '" + target_.name() + "' needs " +
                                           std::to_string(target_.dimension()) +
                                           " components, got " +
                                           std::to_string(components_.size()));
  }
  if (target_.dimension() < source_.dimension()) {
    throw Error(ErrorCode::kDimension, "map from chart '" + source_.name() + "' into chart '" +
                                           target_.name() + "' lowers dimension");
  }
  for (const auto& c : components_) {
    if (c.variables() != source_.coordinates()) {
      throw Error(ErrorCode::kDimension, "map component '" + c.to_string() +
                                             "' is not over the coordinates of chart '" +
                                             source_.name() + "'");
    }
  }
}

SmoothMap SmoothMap::parse(ChartDomain source, ChartDomain target,
                           const std::vector<std::string>& sources) {
  std::vector<Expression> comps;
  comps.reserve(sources.size());
  for (const auto& s : sources) comps.push_back(Expression::parse(s, source.coordinates()));
  return SmoothMap(std::move(source), std::move(target), std::move(comps));
}

SmoothMap SmoothMap::identity(const ChartDomain& chart) {
  std::vector<Expression> comps;
  for (std::size_t i = 0; i < chart.dimension(); ++i)
    comps.push_back(Expression::variable(i, chart.coordinates()));
  return SmoothMap(chart, chart, std::move(comps));
}

Vector SmoothMap::value(std::span<const double> x) const {
  Vector y(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t a = 0; a < components_.size(); ++a) y[a] = components_[a].evaluate(x);
  return y;
}

Matrix SmoothMap::jacobian(std::span<const double> x) const { return local(x).J; }

SmoothMap::Local SmoothMap::local(std::span<const double> x) const {
  if (x.size() != source_.dimension()) {
    throw Error(ErrorCode::kDimension, "map from chart '" + source_.name() + "' expects " +
                                           std::to_string(source_.dimension()) +
                                           " coordinates");
  }
  const auto m = static_cast<Eigen::Index>(components_.size());
  const auto n = static_cast<Eigen::Index>(x.size());
  Local out;
  out.y = Vector(m);
  out.J = Matrix(m, n);
  out.second.reserve(components_.size());
  for (Eigen::Index a = 0; a < m; ++a) {
    const Jet2 j = components_[a].eval_jet2(x);
    out.y[a] = j.value();
    out.J.row(a) = j.gradient().transpose();
    out.second.push_back(j.hessian());
  }
  return out;
}

void ImmersionSetup::validate() const {
  const std::size_t n = map.source().dimension();
  const std::size_t m = map.target().dimension();
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kDimension, "immersion '" + name + "': " + what);
  };
  if (gN.dimension() != n) fail("source metric dimension differs from the map source");
  if (gM.dimension() != m) fail("target metric dimension differs from the map target");
  if (gN.chart().coordinates() != map.source().coordinates())
    fail("source metric and map use different source coordinates");
  if (gM.chart().coordinates() != map.target().coordinates())
    fail("target metric and map use different target coordinates");
  if (split.total() != n) fail("split does not add up to the source dimension");
  if (split.n1 == 0) fail("split needs at least one factor-1 coordinate");
  if (target_split && target_split->total() != m)
    fail("target split does not add up to the target dimension");
}

Vector ImmersionPoint::h_of(const Vector& X, const Vector& Y) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(m()));
  const std::size_t nn = n();
  for (std::size_t i = 0; i < nn; ++i) {
    if (X[i] == 0.0) continue;
    for (std::size_t j = 0; j < nn; ++j) {
      if (Y[j] == 0.0) continue;
      out += X[i] * Y[j] * h_coord(i, j);
    }
  }
  return out;
}

ImmersionPoint evaluate_immersion(const ImmersionSetup& setup, std::span<const double> x) {
  ImmersionPoint p;
  p.x = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  p.local = setup.map.local(x);
  const Matrix& J = p.local.J;
  const std::size_t n = p.n();
  const std::size_t m = p.m();

  Eigen::JacobiSVD<Matrix> svd(J);
  const double smin = svd.singularValues().minCoeff();
  if (!(smin >= kRankTolerance)) {
    std::ostringstream os;
    os << "map of immersion '" << setup.name << "' has Jacobian singular value " << smin
       << " below " << kRankTolerance;
    throw Error(ErrorCode::kRankDeficient, os.str());
  }

  p.source = sample_metric(setup.gN, x);
  const std::vector<double> y(p.local.y.data(), p.local.y.data() + m);
  p.target = sample_metric(setup.gM, y);

  const Matrix GJ = p.target.g * J;
  const Matrix pulled = J.transpose() * GJ;
  p.P_T = J * pulled.ldlt().solve(GJ.transpose());
  p.P_N = Matrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) - p.P_T;
  p.frame = orthonormal_frame_matrix(p.source.g);

  p.ambient.resize(n * n);
  p.h.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Vector a(static_cast<Eigen::Index>(m));
      for (std::size_t c = 0; c < m; ++c) a[c] = p.local.second[c](i, j);
      a += p.target.gamma.contract(J.col(i), J.col(j));
      const Vector hv = p.P_N * a;
      p.ambient[i * n + j] = p.ambient[j * n + i] = a;
      p.h[i * n + j] = p.h[j * n + i] = hv;
    }
  }
  return p;
}

TangentVector pushforward(const ImmersionSetup& setup, const TangentVector& v) {
  const std::vector<double> x(v.base.data(), v.base.data() + v.base.size());
  const SmoothMap::Local l = setup.map.local(x);
  return {l.y, l.J * v.components};
}

double isometry_residual_at(const ImmersionPoint& p) {
  return max_abs(p.local.J.transpose() * p.target.g * p.local.J - p.source.g);
}

double isometry_residual(const ImmersionSetup& setup, std::size_t samples, std::uint64_t seed) {
  double worst = 0.0;
  for (const auto& x : sample_points(setup.map.source(), samples, seed)) {
    const SmoothMap::Local l = setup.map.local(x);
    const std::vector<double> y(l.y.data(), l.y.data() + l.y.size());
    const Matrix gN = metric_at(setup.gN, x);
    const Matrix gM = metric_at(setup.gM, y);
    worst = std::max(worst, max_abs(l.J.transpose() * gM * l.J - gN));
  }
  return worst;
}

void require_isometric(const ImmersionSetup& setup, std::size_t samples, std::uint64_t seed) {
  const double r = isometry_residual(setup, samples, seed);
  if (!(r <= kIsometryTolerance)) {
    std::ostringstream os;
    os << "immersion '" << setup.name << "' is not isometric: pullback defect " << r
       << " exceeds " << kIsometryTolerance;
    throw Error(ErrorCode::kNotIsometric, os.str());
  }
}

std::pair<Matrix, Matrix> tangent_normal_projectors(const ImmersionSetup& setup,
                                                    std::span<const double> x) {
  ImmersionPoint p = evaluate_immersion(setup, x);
  return {std::move(p.P_T), std::move(p.P_N)};
}

NormalVector second_fundamental_form(const ImmersionSetup& setup, const VectorField& X,
                                     const VectorField& Y, std::span<const double> x) {
  const ImmersionPoint p = evaluate_immersion(setup, x);
  return {p.local.y, p.h_of(X.at(x), Y.at(x))};
}

double gauss_formula_residual(const ImmersionPoint& p) {
  const std::size_t n = p.n();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Vector nabla(static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) nabla[k] = p.source.gamma(k, i, j);
      const Vector tangential = p.P_T * p.ambient[i * n + j];
      worst = std::max(worst, (tangential - p.local.J * nabla).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

TangentVector shape_operator(const ImmersionSetup& setup, const NormalVector& eta,
                             const TangentVector& X) {
  const std::vector<double> x(X.base.data(), X.base.data() + X.base.size());
  const ImmersionPoint p = evaluate_immersion(setup, x);
  const std::size_t n = p.n();
  Vector b(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const Vector ej = Vector::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
    b[j] = p.inner(p.h_of(X.components, ej), eta.components);
  }
  return {X.base, p.source.g_inv * b};
}

MeanCurvature mean_curvature(const ImmersionPoint& p) {
  const std::size_t n = p.n();
  MeanCurvature out;
  out.H = Vector::Zero(static_cast<Eigen::Index>(p.m()));
  for (std::size_t a = 0; a < n; ++a) out.H += p.h_of(p.frame.col(a), p.frame.col(a));
  out.H /= static_cast<double>(n);
  out.norm2 = p.norm2(out.H);
  return out;
}

MeanCurvature mean_curvature(const ImmersionSetup& setup, std::span<const double> x) {
  return mean_curvature(evaluate_immersion(setup, x));
}

PartialTraces partial_traces(const ImmersionPoint& p, const BlockSplit& split) {
  if (split.n1 == 0 || split.n2 == 0) {
    throw Error(ErrorCode::kDegenerateSplit, "partial traces need both blocks non-empty (split " +
                                                 std::to_string(split.n1) + " + " +
                                                 std::to_string(split.n2) + ")");
  }
  PartialTraces out;
  const auto m = static_cast<Eigen::Index>(p.m());
  out.trace1 = Vector::Zero(m);
  out.trace2 = Vector::Zero(m);
  for (std::size_t a = 0; a < split.total(); ++a) {
    const Vector haa = p.h_of(p.frame.col(a), p.frame.col(a));
    (a < split.n1 ? out.trace1 : out.trace2) += haa;
  }
  out.H1 = out.trace1 / static_cast<double>(split.n1);
  out.H2 = out.trace2 / static_cast<double>(split.n2);
  return out;
}

PartialTraces partial_traces(const ImmersionSetup& setup, std::span<const double> x) {
  return partial_traces(evaluate_immersion(setup, x), setup.split);
}

NormalGradient normal_gradient_split(const ImmersionPoint& p, const BlockSplit& target_split,
                                     const Jet2& f) {
  const auto m = static_cast<Eigen::Index>(p.m());
  const auto m1 = static_cast<Eigen::Index>(target_split.n1);
  const Vector df = f.gradient();
  Vector df1 = Vector::Zero(m), df2 = Vector::Zero(m);
  df1.head(m1) = df.head(m1);
  df2.tail(m - m1) = df.tail(m - m1);
  NormalGradient out;
  out.Df = p.P_N * (p.target.g_inv * df);
  out.D1f = p.P_N * (p.target.g_inv * df1);
  out.D2f = p.P_N * (p.target.g_inv * df2);
  out.residual = std::sqrt(std::max(0.0, p.norm2(out.Df - out.D1f - out.D2f)));
  return out;
}

NormalGradient normal_gradient_split(const ImmersionSetup& setup, const ScalarField& f,
                                     std::span<const double> x) {
  if (!setup.target_split) {
    throw Error(ErrorCode::kMissingTargetSplit,
                "immersion '" + setup.name + "' has no target split; the normal gradient "
                "split needs a product target");
  }
  if (f.chart().coordinates() != setup.map.target().coordinates()) {
    throw Error(ErrorCode::kDimension, "scalar field is not over the target coordinates of "
                                       "immersion '" + setup.name + "'");
  }
  const ImmersionPoint p = evaluate_immersion(setup, x);
  const std::vector<double> y(p.local.y.data(), p.local.y.data() + p.local.y.size());
  return normal_gradient_split(p, *setup.target_split, f.jet(y));
}

double mixed_totally_geodesic_residual_at(const ImmersionPoint& p, const BlockSplit& split) {
  double worst = 0.0;
  for (std::size_t i = 0; i < split.n1; ++i)
    for (std::size_t a = split.n1; a < split.total(); ++a)
      worst = std::max(worst, std::sqrt(std::max(0.0, p.norm2(p.h_coord(i, a)))));
  return worst;
}

double mixed_totally_geodesic_residual(const ImmersionSetup& setup, std::size_t samples,
                                       std::uint64_t seed) {
  double worst = 0.0;
  for (const auto& x : sample_points(setup.map.source(), samples, seed))
    worst = std::max(worst, mixed_totally_geodesic_residual_at(evaluate_immersion(setup, x),
                                                               setup.split));
  return worst;
}

Umbilicity umbilicity_residual(const ImmersionSetup& setup, std::span<const double> x) {
  const ImmersionPoint p = evaluate_immersion(setup, x);
  const std::size_t n = p.n();
  const MeanCurvature mc = mean_curvature(p);
  Umbilicity out;

  std::vector<Vector> diag;
  for (std::size_t a = 0; a < n; ++a) diag.push_back(p.h_of(p.frame.col(a), p.frame.col(a)));
  if (mc.norm2 > kNegligibleNorm2) {
    double num = 0.0;
    for (const auto& d : diag) num += p.inner(d, mc.H);
    out.lambda = num / (static_cast<double>(n) * mc.norm2);
  } else {
    out.lambda = 0.0;
  }

  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      Vector r = a == b ? Vector(diag[a] - out.lambda * mc.H)
                        : p.h_of(p.frame.col(a), p.frame.col(b));
      worst = std::max(worst, std::sqrt(std::max(0.0, p.norm2(r))));
    }
  }
  out.residual = worst;
  if (mc.norm2 <= kNegligibleNorm2 && worst > 0.0) out.lambda_defined = false;
  return out;
}

}  // namespace twistprod
