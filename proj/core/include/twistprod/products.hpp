#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "twistprod/geometry.hpp"
#include "twistprod/report.hpp"

namespace twistprod {

/// Specialization chain of a doubly twisted product
/// N1 x_(sigma1, sigma2) N2 with metric sigma2^2 g1 (+) sigma1^2 g2:
///
///   direct         both twists free of variables
///   warped         sigma2 == 1, sigma1 depends on factor-1 coordinates only
///   twisted        sigma2 == 1
///   doubly_warped  sigma1 on factor 1 only, sigma2 on factor 2 only
///   doubly_twisted no restriction
enum class ProductKind { kDirect, kWarped, kTwisted, kDoublyWarped, kDoublyTwisted };

const char* to_string(ProductKind k);
std::optional<ProductKind> parse_product_kind(std::string_view name);

enum class Factor { kFirst, kSecond };

class DoublyTwistedProduct {
 public:
  const std::string& name() const { return name_; }
  const MetricField& g1() const { return g1_; }
  const MetricField& g2() const { return g2_; }
  /// Twisting functions on the product chart.
  const ScalarField& sigma1() const { return sigma1_; }
  const ScalarField& sigma2() const { return sigma2_; }
  /// sigma2^2 g1 (+) sigma1^2 g2.
  const MetricField& assembled() const { return assembled_; }
  /// g1 (+) g2.
  const MetricField& direct() const { return direct_; }
  const ChartDomain& chart() const { return assembled_.chart(); }
  std::size_t n1() const { return g1_.dimension(); }
  std::size_t n2() const { return g2_.dimension(); }

  /// Most specific kind the twisting functions satisfy.
  ProductKind kind() const;
  /// Why the product is not of kind k (names the offending variable), or
  /// nullopt if it is.
  std::optional<std::string> violation(ProductKind k) const;
  bool is(ProductKind k) const { return !violation(k).has_value(); }

  void set_pivot_tolerance(double tol);

 private:
  friend DoublyTwistedProduct build_doubly_twisted(std::string, MetricField, MetricField,
                                                   Expression, Expression, std::size_t);
  std::string name_;
  MetricField g1_, g2_;
  ScalarField sigma1_, sigma2_;
  MetricField assembled_, direct_;
};

/// Assembles the doubly twisted metric. sigma1 and sigma2 must be over the
/// product coordinates (factor-1 coordinates then factor-2 coordinates).
/// Throws Error(kNonPositiveTwist) if a twist is <= 0 at a probe grid point
/// (probe_per_axis points per coordinate; 0 picks a size from the dimension).
DoublyTwistedProduct build_doubly_twisted(std::string name, MetricField g1, MetricField g2,
                                          Expression sigma1, Expression sigma2,
                                          std::size_t probe_per_axis = 0);

/// Places a factor tangent vector into its block of the product tangent
/// space at base.
TangentVector lift(const TangentVector& v, Factor which, const DoublyTwistedProduct& product,
                   std::span<const double> base);

/// Which expression of the connection relation is used for the correction
/// terms.
///
/// kExact: the Levi-Civita relation that holds for every doubly twisted
///   product,
///     D1 x D1: X(ln s2) Y + Y(ln s2) X - g_N(X, Y) grad_N ln s2
///     D2 x D2: V(ln s1) W + W(ln s1) V - g_N(V, W) grad_N ln s1
///     mixed:   V(ln s2) X + X(ln s1) V
///   with grad_N the gradient of the assembled metric.
///
/// kPrinted: the form with g_{N1}(X, Y) grad_0 (gradient of the direct
///   product metric) and the four-term mixed expression
///     X(ln s1) V - V(ln s1) X + V(ln s2) X - X(ln s2) V.
///   It differs from kExact once a twist is nonconstant and is kept as a
///   diagnostic reading.
enum class ConnectionForm { kExact, kPrinted };

/// nabla^0_A B plus the correction terms, for A and B each tangent to one
/// factor. Throws Error(kMixedBlockField) if a field has components in both
/// blocks at x.
TangentVector predicted_connection(const DoublyTwistedProduct& product, const VectorField& A,
                                   const VectorField& B, std::span<const double> x,
                                   ConnectionForm form = ConnectionForm::kExact);

/// Compares Christoffel-based nabla_{d_i} d_j on the assembled metric with
/// predicted_connection for every pair of coordinate lifts, per case family
/// (D1 x D1, D2 x D2, mixed), at seeded sample points.
VerificationReport verify_proposition1(const DoublyTwistedProduct& product,
                                       std::size_t samples, std::uint64_t seed,
                                       double tolerance);

}  // namespace twistprod
