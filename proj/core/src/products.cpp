#include "twistprod/products.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "twistprod/error.hpp"
#include "twistprod/sampling.hpp"

namespace twistprod {

namespace {

enum class Block { kZero, kFirst, kSecond, kMixed };

Block block_of(const Vector& v, std::size_t n1) {
  bool first = false;
  bool second = false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    (static_cast<std::size_t>(i) < n1 ? first : second) = true;
  }
  if (first && second) return Block::kMixed;
  if (first) return Block::kFirst;
  if (second) return Block::kSecond;
  return Block::kZero;
}

// Everything the correction terms need at one product point.
struct ProductPoint {
  MetricSample gN;
  MetricSample g0;
  Vector du;  // d ln sigma2
  Vector dw;  // d ln sigma1
  Vector grad_u_N, grad_w_N;
  Vector grad_u_0, grad_w_0;
  std::size_t n1 = 0;
};

ProductPoint evaluate_point(const DoublyTwistedProduct& p, std::span<const double> x) {
  ProductPoint pp;
  pp.n1 = p.n1();
  pp.gN = sample_metric(p.assembled(), x);
  pp.g0 = sample_metric(p.direct(), x);
  const Jet2 s1 = p.sigma1().jet(x);
  const Jet2 s2 = p.sigma2().jet(x);
  if (!(s1.value() > 0.0) || !(s2.value() > 0.0)) {
    throw Error(ErrorCode::kNonPositiveTwist,
                "twisting function is not positive at a sample of product '" + p.name() + "'");
  }
  pp.du = s2.gradient() / s2.value();
  pp.dw = s1.gradient() / s1.value();
  pp.grad_u_N = pp.gN.g_inv * pp.du;
  pp.grad_w_N = pp.gN.g_inv * pp.dw;
  pp.grad_u_0 = pp.g0.g_inv * pp.du;
  pp.grad_w_0 = pp.g0.g_inv * pp.dw;
  return pp;
}

Vector correction(const ProductPoint& pp, const Vector& a, const Vector& b,
                  ConnectionForm form) {
  const Block ba = block_of(a, pp.n1);
  const Block bb = block_of(b, pp.n1);
  if (ba == Block::kMixed || bb == Block::kMixed) {
    throw Error(ErrorCode::kMixedBlockField,
                "connection relation needs fields tangent to a single factor");
  }
  Vector out = Vector::Zero(a.size());
  if (ba == Block::kZero || bb == Block::kZero) return out;

  const double a_u = a.dot(pp.du), b_u = b.dot(pp.du);
  const double a_w = a.dot(pp.dw), b_w = b.dot(pp.dw);

  if (ba == bb) {
    const bool first = ba == Block::kFirst;
    const double a_f = first ? a_u : a_w;
    const double b_f = first ? b_u : b_w;
    out = a_f * b + b_f * a;
    if (form == ConnectionForm::kExact) {
      out -= a.dot(pp.gN.g * b) * (first ? pp.grad_u_N : pp.grad_w_N);
    } else {
      out -= a.dot(pp.g0.g * b) * (first ? pp.grad_u_0 : pp.grad_w_0);
    }
    return out;
  }

  const Vector& x1 = ba == Block::kFirst ? a : b;  // D1 argument
  const Vector& v2 = ba == Block::kFirst ? b : a;  // D2 argument
  const double x_u = x1.dot(pp.du), x_w = x1.dot(pp.dw);
  const double v_u = v2.dot(pp.du), v_w = v2.dot(pp.dw);
  if (form == ConnectionForm::kExact) {
    out = v_u * x1 + x_w * v2;
  } else {
    out = x_w * v2 - v_w * x1 + v_u * x1 - x_u * v2;
  }
  return out;
}

std::size_t default_probe(std::size_t n) {
  if (n <= 2) return 9;
  if (n <= 4) return 5;
  if (n <= 6) return 3;
  return 2;
}

std::optional<std::string> first_used(const ScalarField& f, std::size_t begin, std::size_t end) {
  const auto used = f.expression().occurring_variables();
  for (std::size_t i = begin; i < end && i < used.size(); ++i)
    if (used[i]) return f.expression().variables()[i];
  return std::nullopt;
}

double center_value(const ScalarField& f) {
  std::vector<double> c;
  for (const auto& iv : f.chart().box()) c.push_back(0.5 * (iv.lo + iv.hi));
  return f.value(c);
}

}  // namespace

const char* to_string(ProductKind k) {
  switch (k) {
    case ProductKind::kDirect: return "direct";
    case ProductKind::kWarped: return "warped";
    case ProductKind::kTwisted: return "twisted";
    case ProductKind::kDoublyWarped: return "doubly_warped";
    case ProductKind::kDoublyTwisted: return "doubly_twisted";
  }
  return "?";
}

std::optional<ProductKind> parse_product_kind(std::string_view name) {
  for (ProductKind k : {ProductKind::kDirect, ProductKind::kWarped, ProductKind::kTwisted,
                        ProductKind::kDoublyWarped, ProductKind::kDoublyTwisted}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::optional<std::string> DoublyTwistedProduct::violation(ProductKind k) const {
  const std::size_t n = n1() + n2();
  auto depends = [&](const ScalarField& f, const char* label, std::size_t begin,
                     std::size_t end, const char* which) -> std::optional<std::string> {
    if (auto v = first_used(f, begin, end)) {
      return std::string(label) + " depends on " + which + " coordinate '" + *v + "'";
    }
    return std::nullopt;
  };
  auto sigma2_is_one = [&]() -> std::optional<std::string> {
    if (auto r = depends(sigma2_, "sigma2", 0, n, "product")) return r;
    if (center_value(sigma2_) != 1.0) return std::string("sigma2 is not identically 1");
    return std::nullopt;
  };

  switch (k) {
    case ProductKind::kDoublyTwisted:
      return std::nullopt;
    case ProductKind::kDirect:
      if (auto r = depends(sigma1_, "sigma1", 0, n, "product")) return r;
      return depends(sigma2_, "sigma2", 0, n, "product");
    case ProductKind::kTwisted:
      return sigma2_is_one();
    case ProductKind::kWarped:
      if (auto r = sigma2_is_one()) return r;
      return depends(sigma1_, "sigma1", n1(), n, "factor-2");
    case ProductKind::kDoublyWarped:
      if (auto r = depends(sigma1_, "sigma1", n1(), n, "factor-2")) return r;
      return depends(sigma2_, "sigma2", 0, n1(), "factor-1");
  }
  return std::nullopt;
}

ProductKind DoublyTwistedProduct::kind() const {
  if (is(ProductKind::kDirect)) return ProductKind::kDirect;
  if (is(ProductKind::kWarped)) return ProductKind::kWarped;
  if (is(ProductKind::kTwisted)) return ProductKind::kTwisted;
  if (is(ProductKind::kDoublyWarped)) return ProductKind::kDoublyWarped;
  return ProductKind::kDoublyTwisted;
}

void DoublyTwistedProduct::set_pivot_tolerance(double tol) {
  g1_.set_pivot_tolerance(tol);
  g2_.set_pivot_tolerance(tol);
  assembled_.set_pivot_tolerance(tol);
  direct_.set_pivot_tolerance(tol);
}

DoublyTwistedProduct build_doubly_twisted(std::string name, MetricField g1, MetricField g2,
                                          Expression sigma1, Expression sigma2,
                                          std::size_t probe_per_axis) {
  for (const auto& a : g1.chart().coordinates()) {
    for (const auto& b : g2.chart().coordinates()) {
      if (a == b) {
        throw Error(ErrorCode::kDimension,
                    "product '" + name + "': both factors use coordinate '" + a + "'");
      }
    }
  }
  ChartDomain chart = ChartDomain::product(name, g1.chart(), g2.chart());
  const std::size_t n1 = g1.dimension();
  const std::size_t n2 = g2.dimension();
  const std::size_t n = n1 + n2;

  DoublyTwistedProduct p;
  p.name_ = std::move(name);
  p.sigma1_ = ScalarField(chart, std::move(sigma1));
  p.sigma2_ = ScalarField(chart, std::move(sigma2));

  std::vector<std::size_t> map1(n1), map2(n2);
  std::iota(map1.begin(), map1.end(), 0);
  std::iota(map2.begin(), map2.end(), n1);

  const Expression zero = Expression::literal(0.0, chart.coordinates());
  const Expression s2sq = power(p.sigma2_.expression(), 2.0);
  const Expression s1sq = power(p.sigma1_.expression(), 2.0);
  std::vector<std::vector<Expression>> twisted(n, std::vector<Expression>(n, zero));
  std::vector<std::vector<Expression>> direct(n, std::vector<Expression>(n, zero));
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      const Expression e = g1.component(i, j).rebind(chart.coordinates(), map1);
      direct[i][j] = e;
      twisted[i][j] = s2sq * e;
    }
  }
  for (std::size_t i = 0; i < n2; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const Expression e = g2.component(i, j).rebind(chart.coordinates(), map2);
      direct[n1 + i][n1 + j] = e;
      twisted[n1 + i][n1 + j] = s1sq * e;
    }
  }
  p.assembled_ = MetricField(chart, twisted);
  p.direct_ = MetricField(chart, direct);
  p.g1_ = std::move(g1);
  p.g2_ = std::move(g2);

  const std::size_t per_axis = probe_per_axis ? probe_per_axis : default_probe(n);
  for (const auto& x : probe_grid(chart, per_axis)) {
    for (const ScalarField* f : {&p.sigma1_, &p.sigma2_}) {
      const double v = f->value(x);
      if (!(v > 0.0)) {
        std::ostringstream os;
        os.precision(6);
        os << "product '" << p.name_ << "': twisting function '" << f->expression().to_string()
           << "' is " << v << " at probe point (";
        for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
        os << ")";
        throw Error(ErrorCode::kNonPositiveTwist, os.str());
      }
    }
  }
  return p;
}

TangentVector lift(const TangentVector& v, Factor which, const DoublyTwistedProduct& product,
                   std::span<const double> base) {
  const std::size_t n1 = product.n1();
  const std::size_t n2 = product.n2();
  const std::size_t own = which == Factor::kFirst ? n1 : n2;
  if (static_cast<std::size_t>(v.components.size()) != own || base.size() != n1 + n2) {
    throw Error(ErrorCode::kDimension, "lift: dimensions do not match product '" +
                                           product.name() + "'");
  }
  TangentVector out;
  out.base = Eigen::Map<const Vector>(base.data(), static_cast<Eigen::Index>(base.size()));
  out.components = Vector::Zero(static_cast<Eigen::Index>(n1 + n2));
  out.components.segment(which == Factor::kFirst ? 0 : static_cast<Eigen::Index>(n1),
                         static_cast<Eigen::Index>(own)) = v.components;
  return out;
}

TangentVector predicted_connection(const DoublyTwistedProduct& product, const VectorField& A,
                                   const VectorField& B, std::span<const double> x,
                                   ConnectionForm form) {
  const ProductPoint pp = evaluate_point(product, x);
  TangentVector out = covariant_derivative(product.direct(), A, B, x);
  out.components += correction(pp, A.at(x), B.at(x), form);
  return out;
}

VerificationReport verify_proposition1(const DoublyTwistedProduct& product,
                                       std::size_t samples, std::uint64_t seed,
                                       double tolerance) {
  VerificationReport report("prop1", tolerance, seed);
  static const char* kFamilies[] = {"d1_d1", "d2_d2", "mixed"};
  for (const char* f : kFamilies) {
    report.declare(std::string("connection.") + f, CheckKind::kEquality, tolerance,
                   "max |Christoffel nabla - predicted nabla| over coordinate lifts");
  }
  report.declare("mixed_symmetry", CheckKind::kEquality, 0.0,
                 "predicted nabla_X V equals predicted nabla_V X exactly");
  report.declare("block_orthogonality", CheckKind::kEquality, 0.0,
                 "assembled metric vanishes exactly on D1 x D2");
  for (const char* f : kFamilies) {
    report.declare(std::string("printed_form.") + f, CheckKind::kDiagnostic, tolerance,
                   "residual of the g_N1 / grad_0 / four-term mixed reading");
  }

  const std::size_t n1 = product.n1();
  const std::size_t n = n1 + product.n2();
  double printed_worst = 0.0;
  for (const auto& x : sample_points(product.chart(), samples, seed)) {
    const std::size_t s = report.add_sample(x);
    const ProductPoint pp = evaluate_point(product, x);

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i < n1 && j >= n1) {
          report.record("block_orthogonality", s, pp.gN.g(i, j), 0.0, std::abs(pp.gN.g(i, j)),
                        std::to_string(i) + "," + std::to_string(j));
        }
        const Vector ei = Vector::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i));
        const Vector ej = Vector::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
        Vector actual(n), base(n);
        for (std::size_t k = 0; k < n; ++k) {
          actual[k] = pp.gN.gamma(k, i, j);
          base[k] = pp.g0.gamma(k, i, j);
        }
        const Vector exact = base + correction(pp, ei, ej, ConnectionForm::kExact);
        const Vector printed = base + correction(pp, ei, ej, ConnectionForm::kPrinted);
        const bool first_i = i < n1, first_j = j < n1;
        const char* family = first_i && first_j     ? "d1_d1"
                             : !first_i && !first_j ? "d2_d2"
                                                    : "mixed";
        const std::string label = std::to_string(i) + "," + std::to_string(j);
        const double r = (actual - exact).cwiseAbs().maxCoeff();
        const double rp = (actual - printed).cwiseAbs().maxCoeff();
        printed_worst = std::max(printed_worst, rp);
        report.record(std::string("connection.") + family, s, actual.norm(), exact.norm(), r,
                      label);
        report.record(std::string("printed_form.") + family, s, actual.norm(), printed.norm(),
                      rp, label);
        if (first_i && !first_j) {
          const Vector swapped = base + correction(pp, ej, ei, ConnectionForm::kExact);
          Vector sym(n);
          for (std::size_t k = 0; k < n; ++k) sym[k] = pp.g0.gamma(k, j, i);
          const Vector other = sym + correction(pp, ej, ei, ConnectionForm::kExact);
          (void)swapped;
          report.record("mixed_symmetry", s, exact.norm(), other.norm(),
                        (exact - other).cwiseAbs().maxCoeff(), label);
        }
      }
    }
  }
  report.set_diagnostic("printed_form_max_residual", printed_worst);
  report.set_diagnostic("n1", static_cast<double>(n1));
  report.set_diagnostic("n2", static_cast<double>(product.n2()));
  if (printed_worst > tolerance) {
    report.add_note(
        "the g_N1 / grad_0 / four-term mixed reading of the connection relation deviates "
        "from the Levi-Civita connection on this product (see printed_form.* checks)");
  }
  return report;
}

}  // namespace twistprod
