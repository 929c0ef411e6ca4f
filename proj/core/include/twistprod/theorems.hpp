#pragma once

#include <cstdint>
#include <string>

#include "twistprod/immersion.hpp"
#include "twistprod/products.hpp"
#include "twistprod/report.hpp"

namespace twistprod {

/// Tolerance for identities that hold up to rounding only (mixed vanishing,
/// normal gradient split, declared twists against rho o phi).
inline constexpr double kStrictTolerance = 1e-10;

/// phi = phi1 x phi2 from a doubly twisted product (N, g_N) into a doubly
/// twisted product (M, g_M) with sigma_i = rho_i o phi.
class DoublyTwistedImmersionScenario {
 public:
  const std::string& name() const { return name_; }
  const DoublyTwistedProduct& source() const { return source_; }
  const DoublyTwistedProduct& target() const { return target_; }
  const SmoothMap& phi1() const { return phi1_; }
  const SmoothMap& phi2() const { return phi2_; }
  /// phi1 x phi2 on the product charts.
  const SmoothMap& map() const { return twisted_.map; }
  /// (N, sigma2^2 g1 + sigma1^2 g2) -> (M, rho2^2 g_M1 + rho1^2 g_M2).
  const ImmersionSetup& twisted() const { return twisted_; }
  /// (N, g1 + g2) -> (M, g_M1 + g_M2): the direct product immersion.
  const ImmersionSetup& direct() const { return direct_; }
  /// ln rho1 and ln rho2 on the target product chart.
  const ScalarField& log_rho1() const { return log_rho1_; }
  const ScalarField& log_rho2() const { return log_rho2_; }
  /// True when sigma was obtained by composing rho with phi.
  bool sigma_derived() const { return sigma_derived_; }

  std::size_t n1() const { return source_.n1(); }
  std::size_t n2() const { return source_.n2(); }
  BlockSplit split() const { return twisted_.split; }
  BlockSplit target_split() const { return *twisted_.target_split; }

  struct Validation {
    double sigma_residual = 0.0;
    double isometry_residual = 0.0;
  };
  /// Throws Error(kScenario) if a declared sigma_i differs from rho_i o phi
  /// by more than kStrictTolerance, and Error(kNotIsometric) if phi is not
  /// isometric for the twisted metrics, at seeded samples.
  Validation validate(std::size_t samples, std::uint64_t seed) const;

 private:
  friend DoublyTwistedImmersionScenario build_scenario(std::string, DoublyTwistedProduct,
                                                       DoublyTwistedProduct, SmoothMap,
                                                       SmoothMap);
  friend DoublyTwistedImmersionScenario build_scenario_derived(std::string, MetricField,
                                                               MetricField,
                                                               DoublyTwistedProduct, SmoothMap,
                                                               SmoothMap);
  std::string name_;
  DoublyTwistedProduct source_, target_;
  SmoothMap phi1_, phi2_;
  ImmersionSetup twisted_, direct_;
  ScalarField log_rho1_, log_rho2_;
  ScalarField composed_rho1_, composed_rho2_;
  bool sigma_derived_ = false;
};

/// Scenario with declared source twists (checked against rho o phi by
/// validate()).
DoublyTwistedImmersionScenario build_scenario(std::string name, DoublyTwistedProduct source,
                                              DoublyTwistedProduct target, SmoothMap phi1,
                                              SmoothMap phi2);

/// Scenario whose source twists are sigma_i = rho_i o (phi1 x phi2).
DoublyTwistedImmersionScenario build_scenario_derived(std::string name, MetricField g1,
                                                      MetricField g2,
                                                      DoublyTwistedProduct target,
                                                      SmoothMap phi1, SmoothMap phi2);

/// h^phi against h^0 plus the correction terms, per family:
///   hphi1: X, Y in D1, rho2 terms;  hphi2: V, W in D2, rho1 terms;
///   hphi3: h^phi(X, V) = 0.
/// The tangential correction terms drop out under the normal projection;
/// the unprojected comparison is kept as a diagnostic.
VerificationReport verify_hphi_decomposition(const DoublyTwistedImmersionScenario& s,
                                             std::size_t samples, std::uint64_t seed,
                                             double tolerance);

struct PsiValues {
  double h_phi_norm2 = 0.0;  // sum over all frame pairs
  double h0_norm2_1 = 0.0;   // sum over D1 frame pairs
  double h0_norm2_2 = 0.0;   // sum over D2 frame pairs
  double d_log_rho2 = 0.0;   // |D ln rho2|^2
  double d_log_rho1 = 0.0;   // |D ln rho1|^2
  /// -2 sum_i <h0(e_i, e_i), D ln rho2> - 2 sum_a <h0(e_a, e_a), D ln rho1>.
  double cross = 0.0;
  /// Remainder |h^phi|^2 - |h0_1|^2 - |h0_2|^2 - n1 |D ln rho2|^2 - n2 |D ln rho1|^2.
  double psi_star = 0.0;
  /// The six-sum display evaluated term by term.
  double psi_verbatim = 0.0;
};

/// Psi quantities at x on the adapted g_N-orthonormal frame.
PsiValues psi(const DoublyTwistedImmersionScenario& s, std::span<const double> x);

/// Expansion identity, inequality slack (with Psi = cross) and its
/// decomposition into |h0_1|^2 + |h0_2|^2, equality case.
VerificationReport verify_thm31_inequality(const DoublyTwistedImmersionScenario& s,
                                           std::size_t samples, std::uint64_t seed,
                                           double tolerance);

/// N_i-totally geodesic iff phi_i totally geodesic and the correction
/// identity holds, for i = 1, 2, and the totally geodesic conjunction.
VerificationReport check_totally_geodesic_characterization(
    const DoublyTwistedImmersionScenario& s, std::size_t samples, std::uint64_t seed,
    double tolerance);

/// Partial mean curvatures against the minimality conditions.
VerificationReport verify_minimality(const DoublyTwistedImmersionScenario& s,
                                     std::size_t samples, std::uint64_t seed, double tolerance);

/// Df = D1 f + D2 f for f = ln rho1, ln rho2.
VerificationReport verify_normal_gradient_lemma(const DoublyTwistedImmersionScenario& s,
                                                std::size_t samples, std::uint64_t seed,
                                                double tolerance);

/// Doubly warped specialization. Throws Error(kScenario) unless both
/// products are doubly warped.
VerificationReport verify_corollary_doubly_warped(const DoublyTwistedImmersionScenario& s,
                                                  std::size_t samples, std::uint64_t seed,
                                                  double tolerance);

/// Warped specialization. Throws Error(kScenario) unless both products are
/// warped.
VerificationReport verify_corollary_chen(const DoublyTwistedImmersionScenario& s,
                                         std::size_t samples, std::uint64_t seed,
                                         double tolerance);

/// Product immersion into a flat target is mixed totally geodesic. Throws
/// Error(kFlatnessRequired) if some target Christoffel symbol exceeds
/// kStrictTolerance at a sample image.
VerificationReport moore_forward_check(const ImmersionSetup& setup, std::size_t samples,
                                       std::uint64_t seed, double tolerance);

/// Pointwise immersion invariants: isometry, Gauss formula, normality and
/// symmetry of h, n H = n1 H1 + n2 H2, shape operator duality.
VerificationReport verify_immersion_invariants(const ImmersionSetup& setup,
                                               std::size_t samples, std::uint64_t seed,
                                               double tolerance);

/// Torsion (exact) and metric compatibility on seeded analytic fields.
VerificationReport verify_connection_axioms(const MetricField& g, std::size_t samples,
                                            std::uint64_t seed, double tolerance);

}  // namespace twistprod
