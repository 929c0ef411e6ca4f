// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances are fixed here and never
// loosened to make a criterion pass.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "support.hpp"
#include "twistprod/runner.hpp"
#include "twistprod/sampling.hpp"
#include "twistprod/scene.hpp"
#include "twistprod/theorems.hpp"

namespace tp = twistprod;

namespace {

constexpr std::size_t kSamples = 50;
constexpr std::uint64_t kSeed = 42;
constexpr double kTol = 1e-8;

const std::vector<std::string> kAllScenes = {
    "direct_product",   "sphere_warped",   "hyperbolic_twisted", "identity_twisted",
    "twisted_circles",  "doubly_warped_circles", "clifford_torus", "cylinder",
    "nonproduct_control", "chen_circle",   "chen_line_tangent",  "chen_line_normal",
    "minimal_lines",    "nonminimal_lines"};

const tp::Scene& scene(const std::string& name) {
  static std::map<std::string, tp::Scene> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, tp::load_scene(tp::testing::scene_path(name))).first;
  return it->second;
}

std::vector<const tp::DoublyTwistedImmersionScenario*> all_scenarios() {
  std::vector<const tp::DoublyTwistedImmersionScenario*> out;
  for (const auto& n : kAllScenes)
    for (const auto& s : scene(n).scenarios) out.push_back(&s);
  return out;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Outcome ac1() {
  Outcome o;
  tp::testing::RandomExpression gen(1);
  double worst_g = 0.0, worst_h = 0.0;
  int count = 0;
  for (int i = 0; i < 150; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 4);
    const auto vars = gen.variables(n);
    const tp::Expression e = tp::Expression::parse(gen(n), vars);
    const std::vector<double> x = gen.point(n);
    const tp::Jet2 j = e.eval_jet2(x);
    auto f = [&](const std::vector<double>& p) { return e.evaluate(p); };
    const Eigen::VectorXd g = tp::testing::fd_gradient(f, x, 1e-5);
    const Eigen::MatrixXd H = tp::testing::fd_hessian(f, x, 1e-4);
    for (std::size_t a = 0; a < n; ++a) {
      worst_g = std::max(worst_g, tp::testing::relative_error(j.grad(a), g[static_cast<Eigen::Index>(a)]));
      for (std::size_t b = 0; b < n; ++b)
        worst_h = std::max(worst_h, tp::testing::relative_error(
                                        j.hess(a, b), H(static_cast<Eigen::Index>(a),
                                                        static_cast<Eigen::Index>(b))));
    }
    ++count;
  }
  o.require(count >= 100, ">= 100 expressions");
  o.require(worst_g <= 1e-6, "gradient relative error <= 1e-6");
  o.require(worst_h <= 1e-4, "Hessian relative error <= 1e-4");
  o.detail << count << " expressions, gradient rel err " << sci(worst_g) << ", Hessian rel err "
           << sci(worst_h);
  return o;
}

Outcome ac2() {
  Outcome o;
  for (const char* name : {"sphere_warped", "hyperbolic_twisted", "identity_twisted"}) {
    const auto& p = scene(name).products.at(0).product;
    const auto r = tp::verify_proposition1(p, kSamples, kSeed, 1e-8);
    for (const char* family : {"connection.d1_d1", "connection.d2_d2", "connection.mixed"})
      o.require(r.find(family) && r.find(family)->records.size() == kSamples,
                std::string(name) + " " + family + " over 50 samples");
    o.require(r.max_residual() <= 1e-8 && r.verdict() == tp::Verdict::kPass,
              std::string(name) + " residual <= 1e-8");
    o.detail << name << " " << sci(r.max_residual()) << "; ";
  }
  o.require(scene("identity_twisted").products.at(0).product.kind() ==
                tp::ProductKind::kDoublyTwisted,
            "identity_twisted is fully doubly twisted");
  const auto d = tp::verify_proposition1(scene("direct_product").products.at(0).product, kSamples,
                                         kSeed, 1e-12);
  o.require(d.max_residual() <= 1e-12, "direct_product residual <= 1e-12");
  o.detail << "direct_product " << sci(d.max_residual());
  return o;
}

Outcome ac3() {
  Outcome o;
  double torsion = 0.0, compat = 0.0;
  std::size_t metrics = 0;
  auto check = [&](const tp::MetricField& g) {
    const auto r = tp::verify_connection_axioms(g, kSamples, kSeed, 1e-8);
    torsion = std::max(torsion, r.find("torsion")->worst());
    compat = std::max(compat, r.find("metric_compatibility")->worst());
    ++metrics;
  };
  for (const auto& n : kAllScenes) {
    for (const auto& m : scene(n).metrics) check(m.metric);
    for (const auto& p : scene(n).products) check(p.product.assembled());
  }
  o.require(torsion == 0.0, "torsion exactly 0");
  o.require(compat <= 1e-8, "metric compatibility <= 1e-8");
  o.detail << metrics << " metrics, torsion " << sci(torsion) << ", compatibility " << sci(compat);
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto r = tp::verify_hphi_decomposition(scene("identity_twisted").scenarios.at(0), kSamples,
                                               kSeed, 1e-8);
  o.require(r.verdict() == tp::Verdict::kPass && r.max_residual() <= 1e-8,
            "identity_twisted decomposition <= 1e-8");
  o.detail << "identity_twisted " << sci(r.max_residual());
  double worst3 = 0.0;
  std::size_t warped = 0;
  for (const auto* s : all_scenarios()) {
    if (!(s->source().is(tp::ProductKind::kDoublyWarped) &&
          s->target().is(tp::ProductKind::kDoublyWarped)))
      continue;
    const auto h = tp::verify_hphi_decomposition(*s, kSamples, kSeed, 1e-8);
    worst3 = std::max(worst3, h.find("hphi3")->worst());
    ++warped;
  }
  o.require(warped > 0, "warped fixtures present");
  o.require(worst3 <= 1e-10, "mixed vanishing <= 1e-10");
  o.detail << "; mixed vanishing on " << warped << " warped fixtures " << sci(worst3);
  return o;
}

Outcome ac5() {
  Outcome o;
  double expansion = 0.0, min_slack = INFINITY;
  for (const auto* s : all_scenarios()) {
    const auto r = tp::verify_thm31_inequality(*s, kSamples, kSeed, 1e-8);
    expansion = std::max(expansion, r.find("expansion")->worst());
    min_slack = std::min(min_slack, r.find("inequality")->worst());
  }
  o.require(expansion <= 1e-8, "expansion identity <= 1e-8");
  o.require(min_slack >= -1e-8, "slack >= -1e-8");
  double geodesic_slack = 0.0;
  for (const char* name : {"direct_product", "sphere_warped", "hyperbolic_twisted",
                           "identity_twisted", "chen_line_tangent", "chen_line_normal",
                           "minimal_lines", "nonminimal_lines"}) {
    const auto r = tp::verify_thm31_inequality(scene(name).scenarios.at(0), kSamples, kSeed, 1e-8);
    geodesic_slack = std::max(geodesic_slack, r.diagnostics().at("slack_max"));
  }
  o.require(geodesic_slack <= 1e-8, "slack <= 1e-8 on totally geodesic fixtures");
  const auto c = tp::verify_thm31_inequality(scene("doubly_warped_circles").scenarios.at(0),
                                             kSamples, kSeed, 1e-8);
  const double lo = c.diagnostics().at("slack_min"), hi = c.diagnostics().at("slack_max");
  o.require(std::abs(lo - 2.0) <= 1e-6 && std::abs(hi - 2.0) <= 1e-6, "circles slack = 2 +- 1e-6");
  o.detail << "expansion " << sci(expansion) << ", min slack " << sci(min_slack)
           << ", geodesic slack " << sci(geodesic_slack) << ", circles slack [" << lo << ", " << hi
           << "]";
  return o;
}

Outcome ac6() {
  Outcome o;
  const auto& s = scene("sphere_warped").scenarios.at(0);
  const auto r = tp::verify_corollary_chen(s, kSamples, kSeed, 1e-8);
  const auto g = tp::check_totally_geodesic_characterization(s, kSamples, kSeed, 1e-8);
  const double gap = r.diagnostics().at("gap_max");
  const double h0 = std::max(g.find("n1.h0")->worst(), g.find("n2.h0")->worst());
  o.require(r.verdict() == tp::Verdict::kPass, "Chen suite passes on sphere_warped");
  o.require(gap <= 1e-8, "equality case gap <= 1e-8");
  o.require(h0 <= 1e-8, "both factor maps have h0 = 0");
  const auto c = tp::verify_corollary_chen(scene("chen_circle").scenarios.at(0), kSamples, kSeed, 1e-8);
  const double broken = c.diagnostics().at("gap_min");
  o.require(broken >= 0.5, "circle control breaks equality by >= 0.5");
  o.detail << "sphere_warped gap " << sci(gap) << ", h0 " << sci(h0) << "; chen_circle gap >= "
           << broken;
  return o;
}

Outcome ac7() {
  Outcome o;
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto* s : all_scenarios()) {
    const auto r = tp::verify_normal_gradient_lemma(*s, kSamples, kSeed, 1e-8);
    worst = std::max(worst, r.max_residual());
    ++n;
  }
  o.require(worst <= 1e-10, "split residual <= 1e-10");
  o.detail << n << " product-target fixtures, worst " << sci(worst);
  return o;
}

Outcome ac8() {
  Outcome o;
  auto lhs_all = [](const tp::VerificationReport& r, const char* check, double v) {
    for (const auto& [k, rec] : r.find(check)->records)
      if (rec.lhs != v) return false;
    return true;
  };
  const auto pos = tp::verify_minimality(scene("minimal_lines").scenarios.at(0), kSamples, kSeed, 1e-8);
  const auto neg = tp::verify_minimality(scene("nonminimal_lines").scenarios.at(0), kSamples, kSeed, 1e-8);
  o.require(pos.verdict() == tp::Verdict::kPass, "iff consistency on positive control");
  o.require(neg.verdict() == tp::Verdict::kPass, "iff consistency on negative control");
  o.require(lhs_all(pos, "n1_minimal", 1.0) && lhs_all(pos, "n2_minimal", 1.0),
            "H1 = H2 = 0 on positive control");
  o.require(lhs_all(neg, "n1_minimal", 0.0), "H1 != 0 on negative control");
  for (const char* conv : {"printed_n1.A", "printed_n1.B", "printed_n2.A", "printed_n2.B"})
    o.require(pos.find(conv) && neg.find(conv), std::string("frame convention ") + conv + " reported");
  std::size_t consistent = 0;
  for (const auto* s : all_scenarios())
    if (tp::verify_minimality(*s, kSamples, kSeed, 1e-8).verdict() == tp::Verdict::kPass) ++consistent;
  o.require(consistent == all_scenarios().size(), "iff consistency on every scenario fixture");
  o.require(pos.find("H1") && neg.find("H1"), "mean curvature blocks reported");
  o.detail << "positive |H1| " << sci(pos.find("H1") ? pos.find("H1")->worst() : NAN)
           << ", negative |H1| " << sci(neg.find("H1") ? neg.find("H1")->worst() : NAN)
           << ", consistent on " << consistent << "/" << all_scenarios().size() << " fixtures";
  return o;
}

Outcome ac9() {
  Outcome o;
  for (const char* name : {"clifford_torus", "cylinder"}) {
    const auto r = tp::moore_forward_check(scene(name).immersions.at(0), kSamples, kSeed, 1e-8);
    o.require(r.max_residual() <= 1e-10, std::string(name) + " mixed residual <= 1e-10");
    o.detail << name << " " << sci(r.max_residual()) << "; ";
  }
  const auto n = tp::moore_forward_check(scene("nonproduct_control").immersions.at(0), kSamples,
                                         kSeed, 1e-8);
  o.require(n.max_residual() > 0.1, "nonproduct_control residual > 0.1");
  o.require(n.verdict() == tp::Verdict::kFail, "nonproduct_control FAILED");
  o.detail << "nonproduct_control " << sci(n.max_residual());
  return o;
}

Outcome ac10() {
  Outcome o;
  std::size_t docs = 0;
  for (const auto& name : kAllScenes) {
    tp::RunOptions opt;
    opt.seed = 7;
    const auto a = tp::run_scene(scene(name), opt);
    const auto b = tp::run_scene(scene(name), opt);
    o.require(tp::summary_json(a) == tp::summary_json(b), name + " summary identical");
    for (std::size_t i = 0; i < a.suites.size(); ++i) {
      o.require(tp::suite_json(a.suites[i], a) == tp::suite_json(b.suites[i], b),
                name + " " + a.suites[i].suite + " identical");
      ++docs;
    }
  }
  o.detail << docs << " suite documents byte-identical across two runs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 autodiff vs finite differences", ac1},
      {"AC2 connection of doubly twisted products", ac2},
      {"AC3 connection axioms", ac3},
      {"AC4 second fundamental form decomposition", ac4},
      {"AC5 norm inequality and expansion", ac5},
      {"AC6 warped bound equality case", ac6},
      {"AC7 normal gradient split", ac7},
      {"AC8 minimality characterization", ac8},
      {"AC9 product immersions into flat space", ac9},
      {"AC10 deterministic reports", ac10},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "error: " << e.what();
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << std::endl;
    if (!o.pass) ++failures;
  }
  std::cout << (10 - failures) << "/10 acceptance criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
