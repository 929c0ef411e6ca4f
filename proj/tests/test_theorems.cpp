#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "twistprod/error.hpp"
#include "twistprod/sampling.hpp"
#include "twistprod/scene.hpp"
#include "twistprod/theorems.hpp"

namespace tp = twistprod;

namespace {

constexpr std::size_t kN = 50;
constexpr std::uint64_t kSeed = 42;
constexpr double kTol = 1e-8;

const tp::Scene& scene(const std::string& name) {
  static std::map<std::string, tp::Scene> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, tp::load_scene(tp::testing::scene_path(name))).first;
  return it->second;
}

const tp::DoublyTwistedImmersionScenario& scenario(const std::string& name) {
  return scene(name).scenarios.at(0);
}

const std::vector<std::string> kScenarioScenes = {
    "direct_product", "sphere_warped",    "hyperbolic_twisted", "identity_twisted",
    "twisted_circles", "doubly_warped_circles", "chen_circle", "chen_line_tangent",
    "chen_line_normal", "minimal_lines",  "nonminimal_lines"};

// Every lhs of an iff check (1 where the left side held).
std::vector<double> lhs_values(const tp::VerificationReport& r, const std::string& check) {
  std::vector<double> out;
  for (const auto& [k, rec] : r.find(check)->records) out.push_back(rec.lhs);
  return out;
}

bool all_equal(const std::vector<double>& v, double value) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == value; });
}

// Brute-force |h^phi|^2 and |h0_i|^2 from finite differences, framed by a
// g_N-orthonormal basis and measured in the twisted target metric.
struct BruteForce {
  double h_phi = 0.0, h0_1 = 0.0, h0_2 = 0.0;
};

BruteForce brute_force(const tp::DoublyTwistedImmersionScenario& s, const std::vector<double>& x) {
  const auto tw = tp::testing::fd_second_fundamental_form(s.twisted(), x);
  const auto dir = tp::testing::fd_second_fundamental_form(s.direct(), x);
  tp::testing::FdSecondFundamentalForm mixed = dir;
  mixed.gM = tw.gM;
  mixed.gN = tw.gN;
  BruteForce b;
  const std::size_t n = s.n1() + s.n2();
  b.h_phi = tp::testing::fd_norm2(tw, 0, n);
  b.h0_1 = tp::testing::fd_norm2(mixed, 0, s.n1());
  b.h0_2 = tp::testing::fd_norm2(mixed, s.n1(), n);
  return b;
}

}  // namespace

TEST(Scenario, ValidationAcceptsFixtures) {
  for (const auto& name : kScenarioScenes) {
    const auto v = scenario(name).validate(kN, kSeed);
    EXPECT_LE(v.sigma_residual, 1e-10) << name;
    EXPECT_LE(v.isometry_residual, 1e-8) << name;
  }
}

TEST(Scenario, DeclaredTwistMustMatchComposition) {
  const tp::Scene& s = scene("twisted_circles");
  const auto& sc = scenario("twisted_circles");
  // Reuse the derived source with its twists swapped.
  const auto& src = sc.source();
  const auto wrong = tp::build_doubly_twisted("wrong", src.g1(), src.g2(),
                                              src.sigma2().expression(), src.sigma1().expression());
  const auto bad = tp::build_scenario("bad", wrong, s.products.at(0).product, sc.phi1(), sc.phi2());
  try {
    bad.validate(10, 1);
    FAIL();
  } catch (const tp::Error& e) {
    EXPECT_EQ(e.code(), tp::ErrorCode::kScenario);
  }
}

TEST(Hphi, DecompositionHoldsOnAllFixtures) {
  for (const auto& name : kScenarioScenes) {
    const auto r = tp::verify_hphi_decomposition(scenario(name), kN, kSeed, kTol);
    EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
    EXPECT_LE(r.max_residual(), kTol) << name;
  }
}

TEST(Hphi, MixedVanishingOnWarpedFixtures) {
  for (const auto& name : {"sphere_warped", "doubly_warped_circles", "chen_circle",
                           "chen_line_tangent", "chen_line_normal", "minimal_lines",
                           "nonminimal_lines"}) {
    const auto r = tp::verify_hphi_decomposition(scenario(name), kN, kSeed, kTol);
    EXPECT_LE(r.find("hphi3")->worst(), 1e-10) << name;
  }
}

TEST(Hphi, NontrivialCorrectionsOnTwistedCircles) {
  const auto r = tp::verify_hphi_decomposition(scenario("twisted_circles"), kN, kSeed, kTol);
  EXPECT_EQ(r.verdict(), tp::Verdict::kPass);
  EXPECT_GT(r.diagnostics().at("unprojected_max_residual"), 1e-3);
}

TEST(Psi, ConstantTwistsGiveZero) {
  const auto& s = scenario("direct_product");
  for (const auto& x : tp::sample_points(s.source().chart(), 10, 1)) {
    const auto v = tp::psi(s, x);
    EXPECT_EQ(v.psi_star, 0.0);
    EXPECT_EQ(v.psi_verbatim, 0.0);
    EXPECT_EQ(v.cross, 0.0);
  }
}

TEST(Psi, MatchesBruteForceExpansion) {
  for (const auto& name : {"twisted_circles", "doubly_warped_circles", "chen_circle",
                           "chen_line_normal", "identity_twisted"}) {
    const auto& s = scenario(name);
    for (const auto& x : tp::sample_points(s.source().chart(), 8, 3)) {
      const auto v = tp::psi(s, x);
      const auto b = brute_force(s, x);
      EXPECT_NEAR(v.h_phi_norm2, b.h_phi, 1e-6) << name;
      EXPECT_NEAR(v.h0_norm2_1, b.h0_1, 1e-6) << name;
      EXPECT_NEAR(v.h0_norm2_2, b.h0_2, 1e-6) << name;
      const double star = b.h_phi - b.h0_1 - b.h0_2 - s.n1() * v.d_log_rho2 - s.n2() * v.d_log_rho1;
      EXPECT_NEAR(v.psi_star, star, 1e-6) << name;
      EXPECT_NEAR(v.psi_star, v.cross, 1e-10) << name;
    }
  }
}

TEST(Thm31, SuitePassesEverywhere) {
  for (const auto& name : kScenarioScenes) {
    const auto r = tp::verify_thm31_inequality(scenario(name), kN, kSeed, kTol);
    EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
    EXPECT_LE(r.find("expansion")->worst(), kTol) << name;
    EXPECT_GE(r.find("inequality")->worst(), -kTol) << name;
  }
}

TEST(Thm31, EqualityOnTotallyGeodesicFixtures) {
  for (const auto& name : {"sphere_warped", "identity_twisted", "hyperbolic_twisted",
                           "chen_line_tangent", "chen_line_normal", "minimal_lines"}) {
    const auto r = tp::verify_thm31_inequality(scenario(name), kN, kSeed, kTol);
    EXPECT_LE(r.diagnostics().at("slack_max"), kTol) << name;
  }
}

TEST(Thm31, TwoUnitCirclesGiveSlackTwo) {
  const auto r = tp::verify_thm31_inequality(scenario("doubly_warped_circles"), kN, kSeed, kTol);
  EXPECT_NEAR(r.diagnostics().at("slack_min"), 2.0, 1e-6);
  EXPECT_NEAR(r.diagnostics().at("slack_max"), 2.0, 1e-6);
  EXPECT_TRUE(all_equal(lhs_values(r, "equality_case"), 0.0));
}

TEST(Geodesic, IffConsistencyOnControls) {
  for (const auto& name : kScenarioScenes) {
    const auto r = tp::check_totally_geodesic_characterization(scenario(name), kN, kSeed, kTol);
    EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
  }
  // D ln rho normal to the image: N2 geodesy fails through the correction clause.
  const auto normal =
      tp::check_totally_geodesic_characterization(scenario("chen_line_normal"), kN, kSeed, kTol);
  EXPECT_TRUE(all_equal(lhs_values(normal, "n1_totally_geodesic"), 1.0));
  EXPECT_TRUE(all_equal(lhs_values(normal, "n2_totally_geodesic"), 0.0));
  EXPECT_LE(normal.find("n2.h0")->worst(), kTol);
  const auto tangent =
      tp::check_totally_geodesic_characterization(scenario("chen_line_tangent"), kN, kSeed, kTol);
  EXPECT_TRUE(all_equal(lhs_values(tangent, "n2_totally_geodesic"), 1.0));
  // Circle factor: h_1 and h0_1 fail together.
  const auto circles = tp::check_totally_geodesic_characterization(
      scenario("doubly_warped_circles"), kN, kSeed, kTol);
  EXPECT_TRUE(all_equal(lhs_values(circles, "n1_totally_geodesic"), 0.0));
  EXPECT_GT(circles.find("n1.h0")->worst(), 0.5);
}

TEST(Minimality, PositiveAndNegativeControls) {
  const auto pos = tp::verify_minimality(scenario("minimal_lines"), kN, kSeed, kTol);
  EXPECT_EQ(pos.verdict(), tp::Verdict::kPass);
  EXPECT_TRUE(all_equal(lhs_values(pos, "n1_minimal"), 1.0));
  EXPECT_TRUE(all_equal(lhs_values(pos, "n2_minimal"), 1.0));
  const auto neg = tp::verify_minimality(scenario("nonminimal_lines"), kN, kSeed, kTol);
  EXPECT_EQ(neg.verdict(), tp::Verdict::kPass);
  EXPECT_TRUE(all_equal(lhs_values(neg, "n1_minimal"), 0.0));
  EXPECT_TRUE(all_equal(lhs_values(neg, "n2_minimal"), 1.0));
  for (const auto& name : kScenarioScenes) {
    const auto r = tp::verify_minimality(scenario(name), kN, kSeed, kTol);
    EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
    EXPECT_NE(r.find("printed_n1.A"), nullptr);
    EXPECT_NE(r.find("printed_n1.B"), nullptr);
  }
}

TEST(Lemma, SplitHoldsOnAllFixtures) {
  for (const auto& name : kScenarioScenes) {
    const auto r = tp::verify_normal_gradient_lemma(scenario(name), kN, kSeed, kTol);
    EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
    EXPECT_LE(r.max_residual(), 1e-10) << name;
  }
}

TEST(Corollaries, PreconditionsAreEnforced) {
  try {
    tp::verify_corollary_chen(scenario("identity_twisted"), kN, kSeed, kTol);
    FAIL();
  } catch (const tp::Error& e) {
    EXPECT_EQ(e.code(), tp::ErrorCode::kScenario);
  }
  EXPECT_THROW(tp::verify_corollary_doubly_warped(scenario("twisted_circles"), kN, kSeed, kTol),
               tp::Error);
}

TEST(Corollaries, ChenEqualityAndCircleControl) {
  const auto eq = tp::verify_corollary_chen(scenario("sphere_warped"), kN, kSeed, kTol);
  EXPECT_EQ(eq.verdict(), tp::Verdict::kPass);
  EXPECT_LE(std::abs(eq.diagnostics().at("gap_max")), kTol);
  const auto circle = tp::verify_corollary_chen(scenario("chen_circle"), kN, kSeed, kTol);
  EXPECT_EQ(circle.verdict(), tp::Verdict::kPass);
  EXPECT_GE(circle.diagnostics().at("gap_min"), 0.5);
  // Gap equals 1 / rho^2 with rho = 1 + 0.1 r (curve oracle in the twisted metric).
  for (const auto& [k, rec] : circle.find("gap")->records) {
    const double r = circle.samples()[k][0];
    EXPECT_NEAR(rec.residual, 1.0 / ((1 + 0.1 * r) * (1 + 0.1 * r)), 1e-10);
  }
  EXPECT_TRUE(all_equal(lhs_values(circle, "n1_totally_geodesic"), 1.0));
  EXPECT_TRUE(all_equal(lhs_values(circle, "n2_totally_geodesic"), 0.0));
}

TEST(Corollaries, DoublyWarpedCircles) {
  const auto r =
      tp::verify_corollary_doubly_warped(scenario("doubly_warped_circles"), kN, kSeed, kTol);
  EXPECT_EQ(r.verdict(), tp::Verdict::kPass);
  EXPECT_NEAR(r.diagnostics().at("gap_min"), 2.0, 1e-6);
  EXPECT_LE(r.find("mixed_totally_geodesic")->worst(), 1e-10);
}

TEST(Corollaries, SpecializationChain) {
  // Wherever the Chen suite applies, the doubly warped and general suites pass too.
  for (const auto& name : {"sphere_warped", "chen_circle", "chen_line_tangent", "chen_line_normal"}) {
    const auto& s = scenario(name);
    EXPECT_EQ(tp::verify_corollary_chen(s, kN, kSeed, kTol).verdict(), tp::Verdict::kPass);
    EXPECT_EQ(tp::verify_corollary_doubly_warped(s, kN, kSeed, kTol).verdict(), tp::Verdict::kPass);
    EXPECT_EQ(tp::verify_thm31_inequality(s, kN, kSeed, kTol).verdict(), tp::Verdict::kPass);
  }
}

TEST(Moore, ForwardDirectionAndControl) {
  for (const auto& name : {"clifford_torus", "cylinder"}) {
    const auto r = tp::moore_forward_check(scene(name).immersions.at(0), kN, kSeed, kTol);
    EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
    EXPECT_LE(r.max_residual(), 1e-10) << name;
  }
  const auto r = tp::moore_forward_check(scene("nonproduct_control").immersions.at(0), kN, kSeed, kTol);
  EXPECT_EQ(r.verdict(), tp::Verdict::kFail);
  EXPECT_GT(r.max_residual(), 0.1);
}

TEST(Moore, CurvedTargetIsRejected) {
  try {
    tp::moore_forward_check(scenario("chen_circle").twisted(), kN, kSeed, kTol);
    FAIL();
  } catch (const tp::Error& e) {
    EXPECT_EQ(e.code(), tp::ErrorCode::kFlatnessRequired);
  }
}

TEST(Invariants, ImmersionSuitePasses) {
  for (const auto& name : kScenarioScenes) {
    const auto r = tp::verify_immersion_invariants(scenario(name).twisted(), kN, kSeed, kTol);
    EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
  }
  for (const auto& name : {"clifford_torus", "cylinder", "nonproduct_control"}) {
    const auto r = tp::verify_immersion_invariants(scene(name).immersions.at(0), kN, kSeed, kTol);
    EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
  }
}

TEST(Axioms, TorsionExactAndCompatibility) {
  for (const auto& name : kScenarioScenes) {
    for (const auto& p : scene(name).products) {
      const auto r = tp::verify_connection_axioms(p.product.assembled(), kN, kSeed, kTol);
      EXPECT_EQ(r.verdict(), tp::Verdict::kPass) << name;
      EXPECT_EQ(r.find("torsion")->worst(), 0.0) << name;
      EXPECT_LE(r.find("metric_compatibility")->worst(), kTol) << name;
    }
  }
}

TEST(Determinism, IdenticalInputsGiveIdenticalDocuments) {
  const auto& s = scenario("identity_twisted");
  EXPECT_EQ(tp::to_json(tp::verify_thm31_inequality(s, 20, 7, kTol)),
            tp::to_json(tp::verify_thm31_inequality(s, 20, 7, kTol)));
  EXPECT_NE(tp::to_json(tp::verify_thm31_inequality(s, 20, 7, kTol)),
            tp::to_json(tp::verify_thm31_inequality(s, 20, 8, kTol)));
}
